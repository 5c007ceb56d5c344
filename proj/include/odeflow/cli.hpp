#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "odeflow/trainer.hpp"

namespace odeflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDivergence = 4;

/// Bad flag values; maps to kExitUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output path problems; maps to kExitIo.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ values

/// Shortest-safe decimal: 17 significant digits, '.' separator, no locale.
[[nodiscard]] std::string format_double(double value);
[[nodiscard]] double parse_double(const std::string& text);
/// "1,2,4" -> {1, 2, 4}
[[nodiscard]] std::vector<double> parse_double_list(const std::string& text);
/// "-3:1" -> {-3, 1}
[[nodiscard]] std::pair<double, double> parse_range(const std::string& text);

// ---------------------------------------------------------------- manifest

struct Manifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = kDefaultSeed;
  std::string tool_version;
  std::string started_at;

  /// One "key=value" line per field, each prefixed with `prefix`.
  [[nodiscard]] std::string render(const std::string& prefix = "") const;
};

[[nodiscard]] std::string utc_timestamp();

// --------------------------------------------------------------------- csv

struct LandscapeRow {
  double a_star = 0.0;
  double t = 0.0;
  double sigma2 = 0.0;
  double a = 0.0;
  std::optional<double> loss;
};

struct TrainRow {
  int epoch = 0;
  std::string method;
  double a0 = 0.0;
  double loss = 0.0;
  double param = 0.0;
  double terminal_variance = 0.0;
  double grad_norm = 0.0;
};

// Files start with the manifest as "# key=value" lines, then the header row.
void write_landscape_csv(std::ostream& os, const Manifest& manifest,
                         const std::vector<LandscapeRow>& rows);
void write_train_csv(std::ostream& os, const Manifest& manifest,
                     const std::vector<TrainRow>& rows);
[[nodiscard]] std::vector<LandscapeRow> read_landscape_csv(std::istream& is);
[[nodiscard]] std::vector<TrainRow> read_train_csv(std::istream& is);

/// Drops leading '#' manifest lines; what remains is reproducible byte for byte.
[[nodiscard]] std::string csv_body(const std::string& text);

[[nodiscard]] std::vector<TrainRow> to_rows(const std::vector<TrainRecord>& history,
                                            const std::string& method, double a0);

// ---------------------------------------------------------------- commands

struct LandscapeOptions {
  std::vector<double> a_stars{-1.0};
  std::vector<double> ts{1.0};
  double sigma2 = 1.0;
  double a_min = -3.0;
  double a_max = 1.0;
  int points = 201;
  std::uint64_t seed = kDefaultSeed;
  std::filesystem::path out = "out";
};

struct TrainOptions {
  std::string method = "natgrad";
  double a0 = 0.0;
  double eta = 0.05;
  int epochs = 200;
  double a_star = -1.0;
  double t = 1.0;
  double sigma2 = 1.0;
  int samples = 10000;
  std::uint64_t seed = kDefaultSeed;
  double h = 0.01;
  std::string integrator = "rk4";
  double convergence_loss = 1e-12;
  double damping = 1e-8;
  int threads = 1;
  std::filesystem::path out = "out";
};

struct CompareOptions {
  TrainOptions base;
  std::vector<std::string> methods{"sgd", "adam", "natgrad"};
  std::vector<double> inits{-3.0, -2.0, 0.0, 1.0, 2.0};
  double target_loss = 1e-6;
  int slope_first_epoch = 1;
  int slope_last_epoch = 50;
};

/// One (method, a0) cell of a comparison.
struct RunSummary {
  std::string method;
  double a0 = 0.0;
  RunStatus status = RunStatus::kCompleted;
  int epochs_run = 0;
  double final_loss = 0.0;
  std::optional<int> epochs_to_target;
  std::optional<double> slope;
};

[[nodiscard]] std::string render_summary(const std::vector<RunSummary>& rows, double target_loss,
                                         int slope_first, int slope_last);

// Each command validates its options (UsageError), writes its files under
// options.out (IoError) and returns the process exit code. Progress and
// diagnostics go to `log`.
int cmd_landscape(const LandscapeOptions& options, std::ostream& log);
int cmd_train(const TrainOptions& options, std::ostream& log);
int cmd_compare(const CompareOptions& options, std::ostream& log,
                std::vector<RunSummary>* summaries = nullptr);

/// Full command line entry point: `odeflow landscape|train|compare [flags]`.
int run(int argc, const char* const* argv);

}  // namespace odeflow::cli
