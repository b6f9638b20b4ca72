// Command-line front end: one subcommand per experiment plus the self-test.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rap/acceptance.hpp"
#include "rap/errors.hpp"
#include "rap/harness.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
  std::vector<std::string> sets;
  std::map<std::string, std::string> shorthand;
  bool quiet = false;
};

// Shorthand flag -> config key.
const std::vector<std::pair<std::string, std::string>> kShorthands = {
    {"law", "law.variant"},       {"n", "grid.n"},
    {"t", "grid.t"},              {"r", "grid.r"},
    {"replicates", "experiment.replicates"},
    {"mode", "rwre.mode"},        {"quantity", "rwre.quantity"},
    {"profile", "profile.name"},
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI config or JSON manifest of a previous run")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "base seed");
  cmd->add_option("--threads", c.threads, "worker threads (0: all cores)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--set", c.sets, "override a config key, section.key=value")->take_all();
  cmd->add_flag("--quiet", c.quiet, "do not print the summary");
  for (const auto& [flag, key] : kShorthands) {
    cmd->add_option_function<std::string>(
        "--" + flag, [&c, key](const std::string& v) { c.shorthand[key] = v; }, "sets " + key);
  }
}

rap::ExperimentConfig build_config(const std::string& kind, const Common& c) {
  rap::ExperimentConfig cfg = c.config.empty() ? rap::default_config(kind) : rap::load_config(c.config, kind);
  for (const auto& [key, value] : c.shorthand) rap::set_value(cfg, key, value);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw rap::ConfigError(s, "expected section.key=value");
    rap::set_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed) rap::set_value(cfg, "experiment.seed", std::to_string(*c.seed));
  if (c.threads) rap::set_value(cfg, "experiment.threads", std::to_string(*c.threads));
  if (!c.out.empty()) rap::set_value(cfg, "experiment.out", c.out);
  return cfg;
}

int run_experiment(const std::string& kind, const Common& c) {
  const auto cfg = build_config(kind, c);
  const auto result = rap::run(cfg);
  const auto files = rap::write_outputs(result, cfg.out_dir());
  if (!c.quiet) std::cout << result.summary.dump(2) << "\n";
  for (const auto& f : files) std::cerr << "wrote " << f << "\n";
  return 0;
}

struct SelftestArgs {
  std::vector<int> criteria;
  std::uint64_t seed = 20061011;
  int threads = 0;
  std::string out;
};

int run_selftest(const SelftestArgs& a) {
  rap::AcceptanceOptions opt;
  opt.only.insert(a.criteria.begin(), a.criteria.end());
  opt.seed = a.seed;
  opt.threads = a.threads;
  opt.log = &std::cerr;
  const auto results = rap::run_acceptance(opt);
  bool all = true;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& r : results) {
    std::cout << rap::format_result(r) << std::endl;
    all = all && r.passed;
    report.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail},
                      {"seconds", r.seconds}});
  }
  if (!a.out.empty()) {
    std::filesystem::create_directories(a.out);
    const auto path = std::filesystem::path(a.out) / "selftest.json";
    std::ofstream f(path);
    if (!(f << nlohmann::json{{"version", rap::kVersion}, {"seed", a.seed}, {"criteria", report}}.dump(2) << "\n")) {
      throw rap::IoError("cannot write " + path.string());
    }
  }
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random average process and space-time random walk experiments"};
  app.set_version_flag("--version", rap::kVersion);
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"constants", "constants"}, {"green", "green"},           {"rwre", "rwre-cov"},
      {"rap", "rap-cov"},         {"invariance", "invariance"}, {"scaling", "scaling"},
  };
  const std::map<std::string, std::string> blurbs = {
      {"constants", "drift moments, beta, kappa and c_a of a weight law"},
      {"green", "Green function asymptotics of the difference walk"},
      {"rwre", "quenched-mean covariances, variances or difference identities"},
      {"rap", "height fluctuation covariances of the process"},
      {"invariance", "product gamma invariance of two-point beta weights on a ring"},
      {"scaling", "log-log scaling of the quenched-mean variance"},
  };
  std::map<std::string, Common> common;
  for (const auto& [name, kind] : commands) {
    auto* cmd = app.add_subcommand(name, blurbs.at(name));
    add_common(cmd, common[name]);
  }
  SelftestArgs st;
  auto* self = app.add_subcommand("selftest", "run the acceptance criteria");
  self->add_option("--criterion", st.criteria, "restrict to these criteria (1-10)")
      ->check(CLI::Range(1, rap::kCriterionCount));
  self->add_option("--seed", st.seed, "base seed");
  self->add_option("--threads", st.threads, "worker threads (0: all cores)");
  self->add_option("--out", st.out, "write selftest.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (self->parsed()) return run_selftest(st);
    for (const auto& [name, kind] : commands) {
      if (app.got_subcommand(name)) return run_experiment(kind, common[name]);
    }
  } catch (const rap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
