#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "odeflow/cli.hpp"
#include "odeflow/linear1d_oracle.hpp"
#include "odeflow/models.hpp"

#ifndef ODEFLOW_VERSION
#define ODEFLOW_VERSION "unknown"
#endif

namespace odeflow::cli {

namespace {

std::string short_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 6);
  return ec == std::errc() ? std::string(buf.data(), ptr) : "?";
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::string join(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += values[i];
  }
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << content;
  os.flush();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

Manifest base_manifest(const std::string& command, std::uint64_t seed) {
  Manifest m;
  m.command = command;
  m.seed = seed;
  m.tool_version = ODEFLOW_VERSION;
  m.started_at = utc_timestamp();
  return m;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void validate(const TrainOptions& o) {
  try {
    (void)parse_optimizer(o.method);
    (void)parse_method(o.integrator);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  require(std::isfinite(o.a0), "--a0 must be finite");
  require(o.eta > 0.0 && std::isfinite(o.eta), "--eta must be > 0");
  require(o.epochs >= 1, "--epochs must be >= 1");
  require(std::isfinite(o.a_star), "--a-star must be finite");
  require(o.t > 0.0 && std::isfinite(o.t), "--t must be > 0");
  require(o.sigma2 > 0.0 && std::isfinite(o.sigma2), "--sigma2 must be > 0");
  require(o.samples >= 1, "--samples must be >= 1");
  require(o.h > 0.0 && std::isfinite(o.h), "--step-size must be > 0");
  require(o.convergence_loss >= 0.0, "--convergence-loss must be >= 0");
  require(o.damping >= 0.0, "--damping must be >= 0");
  require(o.threads >= 1, "--threads must be >= 1");
}

TrainConfig to_config(const TrainOptions& o, const std::string& method) {
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.eta = o.eta;
  cfg.method = parse_optimizer(method);
  cfg.convergence_loss = o.convergence_loss;
  cfg.integrator.step_size = o.h;
  cfg.integrator.method = parse_method(o.integrator);
  cfg.n_samples = o.samples;
  cfg.sigma2 = o.sigma2;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.fisher_damping = o.damping;
  return cfg;
}

void add_problem_config(Manifest& m, const TrainOptions& o) {
  m.config.emplace_back("eta", format_double(o.eta));
  m.config.emplace_back("epochs", std::to_string(o.epochs));
  m.config.emplace_back("a_star", format_double(o.a_star));
  m.config.emplace_back("t", format_double(o.t));
  m.config.emplace_back("sigma2", format_double(o.sigma2));
  m.config.emplace_back("samples", std::to_string(o.samples));
  m.config.emplace_back("integrator", o.integrator);
  m.config.emplace_back("step_size", format_double(o.h));
  m.config.emplace_back("convergence_loss", format_double(o.convergence_loss));
  m.config.emplace_back("damping", format_double(o.damping));
  m.config.emplace_back("threads", std::to_string(o.threads));
}

template <class Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitDivergence;
  }
}

}  // namespace

std::string render_summary(const std::vector<RunSummary>& rows, double target_loss,
                           int slope_first, int slope_last) {
  std::ostringstream os;
  const std::string reach = "epochs_to_" + short_double(target_loss);
  const std::string slope =
      "slope_" + std::to_string(slope_first) + "_" + std::to_string(slope_last);
  os << std::left << std::setw(16) << "method" << std::setw(8) << "a0" << std::setw(11)
     << "status" << std::setw(8) << "epochs" << std::setw(14) << "final_loss" << std::setw(18)
     << reach << slope << '\n';
  for (const RunSummary& r : rows) {
    os << std::left << std::setw(16) << r.method << std::setw(8) << short_double(r.a0)
       << std::setw(11) << to_string(r.status) << std::setw(8) << r.epochs_run << std::setw(14)
       << short_double(r.final_loss) << std::setw(18)
       << (r.epochs_to_target ? std::to_string(*r.epochs_to_target) : std::string("-"))
       << (r.slope ? short_double(*r.slope) : std::string("-")) << '\n';
  }
  return os.str();
}

int cmd_landscape(const LandscapeOptions& o, std::ostream& log) {
  return guarded(log, [&] {
    require(o.points >= 2, "--points must be >= 2");
    require(std::isfinite(o.a_min) && std::isfinite(o.a_max) && o.a_min < o.a_max,
            "--range needs MIN < MAX");
    require(o.sigma2 > 0.0, "--sigma2 must be > 0");
    require(!o.a_stars.empty() && !o.ts.empty(), "--a-star and --t need at least one value");
    for (double t : o.ts) require(t > 0.0 && std::isfinite(t), "--t values must be > 0");
    for (double a : o.a_stars) require(std::isfinite(a), "--a-star values must be finite");

    std::vector<LandscapeRow> rows;
    for (double a_star : o.a_stars) {
      for (double t : o.ts) {
        const linear1d::Problem problem{a_star, o.sigma2, t};
        for (const auto& point : linear1d::landscape_sweep(problem, o.a_min, o.a_max, o.points)) {
          rows.push_back({a_star, t, o.sigma2, point.a, point.loss});
        }
      }
    }

    Manifest m = base_manifest("landscape", o.seed);
    m.config.emplace_back("a_star", join(o.a_stars));
    m.config.emplace_back("t", join(o.ts));
    m.config.emplace_back("sigma2", format_double(o.sigma2));
    m.config.emplace_back("range", format_double(o.a_min) + ":" + format_double(o.a_max));
    m.config.emplace_back("points", std::to_string(o.points));

    ensure_dir(o.out);
    std::ostringstream csv;
    write_landscape_csv(csv, m, rows);
    write_file(o.out / "landscape.csv", csv.str());
    write_file(o.out / "manifest.txt", m.render());
    log << "wrote " << rows.size() << " rows to " << (o.out / "landscape.csv").string() << '\n';
    return kExitOk;
  });
}

int cmd_train(const TrainOptions& o, std::ostream& log) {
  return guarded(log, [&] {
    validate(o);
    const TrainConfig cfg = to_config(o, o.method);
    const Linear1D model;
    const Dataset data =
        generate_dataset(model, Vector::Constant(1, o.a_star), o.samples, o.sigma2, o.t, o.seed);
    const TrainResult result = train(model, Vector::Constant(1, o.a0), data, cfg);

    Manifest m = base_manifest("train", o.seed);
    m.config.emplace_back("method", o.method);
    m.config.emplace_back("a0", format_double(o.a0));
    add_problem_config(m, o);
    m.config.emplace_back("status", to_string(result.status));

    ensure_dir(o.out);
    std::ostringstream csv;
    write_train_csv(csv, m, to_rows(result.history, o.method, o.a0));
    write_file(o.out / "train.csv", csv.str());
    write_file(o.out / "manifest.txt", m.render());

    const double final_loss = result.history.empty() ? NAN : result.history.back().loss;
    log << o.method << " a0=" << short_double(o.a0) << ": " << to_string(result.status)
        << " after " << result.history.size() << " epochs, final loss "
        << short_double(final_loss) << '\n';
    if (result.aborted()) {
      log << "error: " << result.message << '\n';
      return kExitDivergence;
    }
    return kExitOk;
  });
}

int cmd_compare(const CompareOptions& o, std::ostream& log, std::vector<RunSummary>* summaries) {
  return guarded(log, [&] {
    validate(o.base);
    require(!o.methods.empty(), "--methods needs at least one method");
    require(!o.inits.empty(), "--inits needs at least one value");
    for (const std::string& method : o.methods) {
      try {
        (void)parse_optimizer(method);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
    for (double a0 : o.inits) require(std::isfinite(a0), "--inits values must be finite");

    const Linear1D model;
    const Dataset data = generate_dataset(model, Vector::Constant(1, o.base.a_star),
                                          o.base.samples, o.base.sigma2, o.base.t, o.base.seed);

    std::vector<TrainRow> rows;
    std::vector<RunSummary> table;
    for (const std::string& method : o.methods) {
      const TrainConfig cfg = to_config(o.base, method);
      for (double a0 : o.inits) {
        const TrainResult result = train(model, Vector::Constant(1, a0), data, cfg);
        const auto cell = to_rows(result.history, method, a0);
        rows.insert(rows.end(), cell.begin(), cell.end());

        RunSummary s;
        s.method = method;
        s.a0 = a0;
        s.status = result.status;
        s.epochs_run = static_cast<int>(result.history.size());
        s.final_loss = result.history.empty() ? NAN : result.history.back().loss;
        s.epochs_to_target = epochs_to_loss(result.history, o.target_loss);
        s.slope = log_loss_slope(result.history, o.slope_first_epoch, o.slope_last_epoch);
        table.push_back(s);
        log << method << " a0=" << short_double(a0) << ": " << to_string(result.status);
        if (result.aborted()) log << " (" << result.message << ")";
        log << '\n';
      }
    }

    Manifest m = base_manifest("compare", o.base.seed);
    m.config.emplace_back("methods", join(o.methods));
    m.config.emplace_back("inits", join(o.inits));
    add_problem_config(m, o.base);

    ensure_dir(o.base.out);
    std::ostringstream csv;
    write_train_csv(csv, m, rows);
    write_file(o.base.out / "compare.csv", csv.str());
    write_file(o.base.out / "summary.txt",
               m.render("# ") + render_summary(table, o.target_loss, o.slope_first_epoch,
                                               o.slope_last_epoch));
    write_file(o.base.out / "manifest.txt", m.render());
    if (summaries) *summaries = std::move(table);
    return kExitOk;
  });
}

}  // namespace odeflow::cli
