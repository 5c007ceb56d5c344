#include <fstream>
#include <iostream>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "odeflow/cli.hpp"

namespace odeflow::cli {

namespace {

// Reads a flat key=value file into "--key=value" tokens. Underscores in keys
// are accepted in place of dashes.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = line.substr(first, eq - first);
    key.erase(key.find_last_not_of(" \t") + 1);
    std::string value = line.substr(eq + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t") + 1);
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

// Splices config-file tokens directly after the subcommand so that explicit
// flags, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty() || args.size() < 2) return args;
  std::vector<std::string> out{args[0], args[1]};
  const auto tokens = config_tokens(path);
  out.insert(out.end(), tokens.begin(), tokens.end());
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

template <class T>
CLI::Option* last_wins(CLI::App* app, const std::string& name, T& target,
                       const std::string& help) {
  return app->add_option(name, target, help)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)
      ->capture_default_str();
}

void add_common(CLI::App* sub, std::string& out, std::uint64_t& seed, std::string& config) {
  last_wins(sub, "--out", out, "Output directory");
  last_wins(sub, "--seed", seed, "Random seed");
  sub->add_option("--config", config, "Flat key=value file; flags override it")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_train_flags(CLI::App* sub, TrainOptions& o) {
  last_wins(sub, "--eta", o.eta, "Learning rate");
  last_wins(sub, "--epochs", o.epochs, "Maximum number of epochs");
  last_wins(sub, "--a-star", o.a_star, "True growth rate a*");
  last_wins(sub, "--t", o.t, "Terminal time");
  last_wins(sub, "--sigma2", o.sigma2, "Variance of the initial-state distribution");
  last_wins(sub, "--samples", o.samples, "Dataset size N");
  last_wins(sub, "--step-size", o.h, "Integrator step size");
  last_wins(sub, "--integrator", o.integrator, "rk4 or euler");
  last_wins(sub, "--convergence-loss", o.convergence_loss, "Stop once the loss drops below this");
  last_wins(sub, "--damping", o.damping, "Fisher damping for fisher-natgrad");
  last_wins(sub, "--threads", o.threads, "Worker threads per epoch");
}

}  // namespace

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"Neural-ODE training experiments on the 1D linear system"};
  app.name("odeflow");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ODEFLOW_VERSION));

  std::string config;

  LandscapeOptions land;
  std::string land_a_star = "-1";
  std::string land_t = "1";
  std::string land_range = "-3:1";
  std::string land_out = land.out.string();
  auto* landscape = app.add_subcommand("landscape", "Write Loss(a) curves to landscape.csv");
  last_wins(landscape, "--a-star", land_a_star, "Comma-separated a* values");
  last_wins(landscape, "--t", land_t, "Comma-separated terminal times");
  last_wins(landscape, "--sigma2", land.sigma2, "Variance of the initial-state distribution");
  last_wins(landscape, "--range", land_range, "Parameter range MIN:MAX");
  last_wins(landscape, "--points", land.points, "Grid points per curve");
  add_common(landscape, land_out, land.seed, config);

  TrainOptions tr;
  std::string tr_out = tr.out.string();
  auto* train_cmd = app.add_subcommand("train", "Single training run to train.csv");
  last_wins(train_cmd, "--method", tr.method, "sgd, adam, natgrad or fisher-natgrad");
  last_wins(train_cmd, "--a0", tr.a0, "Initial growth rate");
  add_train_flags(train_cmd, tr);
  add_common(train_cmd, tr_out, tr.seed, config);

  CompareOptions cmp;
  std::string cmp_out = cmp.base.out.string();
  std::string cmp_methods = "sgd,adam,natgrad";
  std::string cmp_inits = "-3,-2,0,1,2";
  auto* compare = app.add_subcommand("compare", "Methods x initializations to compare.csv");
  last_wins(compare, "--methods", cmp_methods, "Comma-separated optimizers");
  last_wins(compare, "--inits", cmp_inits, "Comma-separated initial growth rates");
  add_train_flags(compare, cmp.base);
  add_common(compare, cmp_out, cmp.base.seed, config);

  std::vector<const char*> cargs;
  cargs.reserve(args.size());
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*landscape) {
      land.a_stars = parse_double_list(land_a_star);
      land.ts = parse_double_list(land_t);
      std::tie(land.a_min, land.a_max) = parse_range(land_range);
      land.out = land_out;
      return cmd_landscape(land, std::cerr);
    }
    if (*train_cmd) {
      tr.out = tr_out;
      return cmd_train(tr, std::cerr);
    }
    if (*compare) {
      cmp.methods.clear();
      std::string item;
      std::istringstream in(cmp_methods);
      while (std::getline(in, item, ',')) cmp.methods.push_back(item);
      cmp.inits = parse_double_list(cmp_inits);
      cmp.base.out = cmp_out;
      return cmd_compare(cmp, std::cerr);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace odeflow::cli
