#include "rap/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rap/analytics.hpp"
#include "rap/errors.hpp"
#include "rap/green.hpp"
#include "rap/kernels.hpp"
#include "rap/parallel.hpp"
#include "rap/rwre.hpp"
#include "rap/stats.hpp"

namespace rap {

namespace {

using json = nlohmann::json;

enum class Kind { Text, Real, Integer, Reals, Integers };

struct KeySpec {
  const char* key;
  Kind kind;
  const char* fallback;
};

// The full schema. Kind-specific defaults are applied on top in default_config.
const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = {
      {"experiment.kind", Kind::Text, ""},
      {"experiment.seed", Kind::Integer, "20061011"},
      {"experiment.replicates", Kind::Integer, "1000"},
      {"experiment.threads", Kind::Integer, "1"},
      {"experiment.out", Kind::Text, "results"},
      {"law.variant", Kind::Text, "two_point_beta"},
      {"law.m", Kind::Integer, "2"},
      {"law.j", Kind::Integer, "1"},
      {"law.p", Kind::Reals, "0.5 0.5 0"},
      {"law.alpha", Kind::Reals, "1 1 1"},
      {"law.components", Kind::Text, "0.5: 1 0 0; 0.5: 0 1 0"},
      {"grid.n", Kind::Integers, "2500"},
      {"grid.t", Kind::Reals, "0.5 1"},
      {"grid.r", Kind::Reals, "0 1"},
      {"grid.ybar", Kind::Real, "0"},
      {"profile.name", Kind::Text, "constant"},
      {"profile.a", Kind::Real, "1"},
      {"profile.c", Kind::Real, "1"},
      {"profile.var", Kind::Real, "1"},
      {"rwre.quantity", Kind::Text, "cov"},
      {"rwre.mode", Kind::Text, "monte_carlo"},
      {"rwre.x", Kind::Integer, "5"},
      {"rwre.y", Kind::Integer, "0"},
      {"green.x", Kind::Reals, "0 0.5 1"},
      {"invariance.m", Kind::Integer, "2"},
      {"invariance.j", Kind::Integer, "1"},
      {"invariance.lambda", Kind::Real, "1"},
      {"invariance.sites", Kind::Integer, "16"},
      {"invariance.steps", Kind::Integer, "1000"},
      {"invariance.samples", Kind::Integer, "10000"},
  };
  return s;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : schema()) {
    if (key == k.key) return &k;
  }
  return nullptr;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_real(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "'" + s + "' is not a finite number");
  }
}

long parse_integer(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "'" + s + "' is not an integer");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

json matrix_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

std::vector<GridPoint> product_grid(const ExperimentConfig& cfg) {
  std::vector<GridPoint> g;
  for (double t : cfg.reals("grid.t"))
    for (double r : cfg.reals("grid.r")) g.push_back({t, r});
  return g;
}

json cells_json(const std::vector<GridPoint>& g) {
  json a = json::array();
  for (const auto& p : g) a.push_back({{"t", p.t}, {"r", p.r}});
  return a;
}

// Covariance block of the summary: estimate, SE, theory and z-scores.
json covariance_block(const CovarianceEstimate& e, const Eigen::MatrixXd& theory) {
  const Eigen::Index C = theory.rows();
  Eigen::MatrixXd z(C, C);
  double max_z = 0.0;
  for (Eigen::Index i = 0; i < C; ++i)
    for (Eigen::Index j = 0; j < C; ++j) {
      z(i, j) = (e.cov(i, j) - theory(i, j)) / e.se(i, j);
      if (std::isfinite(z(i, j))) max_z = std::max(max_z, std::abs(z(i, j)));
    }
  return {{"estimate", matrix_json(e.cov)},
          {"std_err", matrix_json(e.se)},
          {"theory", matrix_json(theory)},
          {"z", matrix_json(z)},
          {"max_abs_z", max_z}};
}

json constants_json(const Constants& c) {
  return {{"V", c.V},         {"b", c.b},         {"sigma_D2", c.sigma_D2}, {"sigma_a2", c.sigma_a2},
          {"beta", c.beta},   {"kappa", c.kappa}, {"c_a", c_a(c)}};
}

void check_replicates(const ExperimentConfig& cfg) {
  if (cfg.replicates() < 2) throw ConfigError("experiment.replicates", "at least 2 replicates are needed for standard errors");
}

// ---- experiments -----------------------------------------------------------

ExperimentResult run_constants(const ExperimentConfig& cfg) {
  const WeightLaw law = law_from_config(cfg);
  const Constants c = compute_constants(law);
  ExperimentResult r;
  r.summary = constants_json(c);
  r.summary["law"] = law.describe();
  r.tables.push_back({"constants", {"V", "b", "sigma_D2", "sigma_a2", "beta", "kappa", "c_a"},
                      {{c.V, c.b, c.sigma_D2, c.sigma_a2, c.beta, c.kappa, c_a(c)}}});
  return r;
}

ExperimentResult run_green(const ExperimentConfig& cfg) {
  const WeightLaw law = law_from_config(cfg);
  const Constants c = compute_constants(law);
  const long n = cfg.integers("grid.n").front();
  const auto rep = green_asymptotics_report(q_kernels(law), c, n, cfg.reals("green.x"));
  ExperimentResult r;
  Table t{"green", {"x", "x_n", "green", "scaled", "limit", "rel_err"}, {}};
  json diag = nullptr;
  for (const auto& row : rep.rows) {
    t.rows.push_back({row.x, static_cast<double>(row.x_n), row.green, row.scaled, row.limit, row.rel_err});
    if (row.x_n == 0) diag = row.scaled;
  }
  r.tables.push_back(std::move(t));
  r.summary = {{"n", n},
               {"diag_scaled", diag},
               {"diag_limit", rep.diag_limit},
               {"ratio_homogeneous", rep.ratio_homogeneous},
               {"beta", c.beta},
               {"max_increment", rep.max_increment}};
  return r;
}

ExperimentResult run_rwre_cov(const ExperimentConfig& cfg) {
  check_replicates(cfg);
  const WeightLaw law = law_from_config(cfg);
  const Constants c = compute_constants(law);
  const long n = cfg.integers("grid.n").front();
  const double ybar = cfg.real("grid.ybar");
  const auto grid = product_grid(cfg);
  const auto R = static_cast<std::size_t>(cfg.replicates());
  const std::size_t C = grid.size();
  Eigen::MatrixXd Y(R, C), A(R, C);
  parallel_for(R, cfg.threads(), [&](std::size_t rep) {
    const Environment env(law, replicate_seed(cfg.seed(), rep));
    const auto ys = y_n_grid(env, n, grid, ybar);
    const auto as = a_n_grid(env, n, grid);
    for (std::size_t k = 0; k < C; ++k) {
      Y(static_cast<Eigen::Index>(rep), static_cast<Eigen::Index>(k)) = ys[k].value;
      A(static_cast<Eigen::Index>(rep), static_cast<Eigen::Index>(k)) = as[k].value;
    }
  });
  const auto ey = covariance_estimate(Y);
  const auto ea = covariance_estimate(A);
  Eigen::MatrixXd th(C, C);
  for (std::size_t i = 0; i < C; ++i)
    for (std::size_t j = 0; j < C; ++j)
      th(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gamma_q(grid[i].t, grid[i].r, grid[j].t, grid[j].r, c);
  json avar = json::array();
  double max_za = 0.0;
  for (std::size_t k = 0; k < C; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double theory = c_a(c) * std::sqrt(grid[k].t);
    const double z = (ea.cov(kk, kk) - theory) / ea.se(kk, kk);
    if (std::isfinite(z)) max_za = std::max(max_za, std::abs(z));
    avar.push_back({{"t", grid[k].t}, {"r", grid[k].r}, {"estimate", ea.cov(kk, kk)}, {"std_err", ea.se(kk, kk)},
                    {"theory", theory}, {"z", z}});
  }
  ExperimentResult r;
  r.summary = {{"n", n},
               {"replicates", R},
               {"ybar", ybar},
               {"constants", constants_json(c)},
               {"cells", cells_json(grid)},
               {"y_cov", covariance_block(ey, th)},
               {"a_var", avar},
               {"a_max_abs_z", max_za}};
  Table ty{"y", {"replicate", "t", "r", "value"}, {}}, ta{"a", {"replicate", "t", "r", "value"}, {}};
  for (std::size_t rep = 0; rep < R; ++rep)
    for (std::size_t k = 0; k < C; ++k) {
      const auto i = static_cast<Eigen::Index>(rep), j = static_cast<Eigen::Index>(k);
      ty.rows.push_back({static_cast<double>(rep), grid[k].t, grid[k].r, Y(i, j)});
      ta.rows.push_back({static_cast<double>(rep), grid[k].t, grid[k].r, A(i, j)});
    }
  r.tables.push_back(std::move(ty));
  r.tables.push_back(std::move(ta));
  return r;
}

VarianceMode mode_of(const ExperimentConfig& cfg) {
  const auto& m = cfg.text("rwre.mode");
  if (m == "monte_carlo") return VarianceMode::MonteCarlo;
  if (m == "exhaustive") return VarianceMode::Exhaustive;
  throw ConfigError("rwre.mode", "expected monte_carlo or exhaustive, got '" + m + "'");
}

ExperimentResult run_rwre_variance(const ExperimentConfig& cfg) {
  const WeightLaw law = law_from_config(cfg);
  const VarianceMode mode = mode_of(cfg);
  if (mode == VarianceMode::MonteCarlo) check_replicates(cfg);
  const auto ns = cfg.integers("grid.n");
  const long top = *std::max_element(ns.begin(), ns.end());
  const auto table = green_table(q_kernels(law), std::max(top - 1, 0L));
  ExperimentResult r;
  Table t{"variance", {"n", "estimate", "std_err", "theory"}, {}};
  json rows = json::array();
  for (long n : ns) {
    const auto e = quenched_mean_variance(law, n, cfg.replicates(), mode, cfg.seed(), cfg.threads());
    const double theory = n >= 1 ? law.drift().sigma_D2 * table.diagonal(n - 1) : 0.0;
    t.rows.push_back({static_cast<double>(n), e.estimate, e.std_err, theory});
    rows.push_back({{"n", n}, {"estimate", e.estimate}, {"std_err", e.std_err}, {"theory", theory},
                    {"abs_err", std::abs(e.estimate - theory)}});
  }
  r.summary = {{"mode", cfg.text("rwre.mode")}, {"rows", rows}};
  r.tables.push_back(std::move(t));
  return r;
}

ExperimentResult run_rwre_difference(const ExperimentConfig& cfg) {
  const WeightLaw law = law_from_config(cfg);
  const VarianceMode mode = mode_of(cfg);
  if (mode == VarianceMode::MonteCarlo) check_replicates(cfg);
  const long x = cfg.integer("rwre.x"), y = cfg.integer("rwre.y");
  ExperimentResult r;
  Table t{"difference", {"n", "x", "y", "estimate", "std_err", "theory"}, {}};
  json rows = json::array();
  for (long n : cfg.integers("grid.n")) {
    const auto d = difference_variance_check(law, n, x, y, cfg.replicates(), mode, cfg.seed(), cfg.threads());
    t.rows.push_back({static_cast<double>(n), static_cast<double>(x), static_cast<double>(y), d.estimate, d.std_err,
                      d.theory});
    rows.push_back({{"n", n}, {"estimate", d.estimate}, {"std_err", d.std_err}, {"theory", d.theory},
                    {"abs_err", std::abs(d.estimate - d.theory)}});
  }
  r.summary = {{"mode", cfg.text("rwre.mode")}, {"x", x}, {"y", y}, {"rows", rows}};
  r.tables.push_back(std::move(t));
  return r;
}

ExperimentResult run_rwre(const ExperimentConfig& cfg) {
  const auto& q = cfg.text("rwre.quantity");
  if (q == "cov") return run_rwre_cov(cfg);
  if (q == "variance") return run_rwre_variance(cfg);
  if (q == "difference") return run_rwre_difference(cfg);
  throw ConfigError("rwre.quantity", "expected cov, variance or difference, got '" + q + "'");
}

ExperimentResult run_rap_cov(const ExperimentConfig& cfg) {
  check_replicates(cfg);
  const WeightLaw law = law_from_config(cfg);
  const Constants c = compute_constants(law);
  const InitProfile profile = profile_from_config(cfg);
  ObservationGrid obs{cfg.real("grid.ybar"), cfg.integers("grid.n").front(), product_grid(cfg)};
  const auto R = static_cast<std::size_t>(cfg.replicates());
  const std::size_t C = obs.points.size();
  // Duality is checked at the latest observation time.
  std::size_t probe = 0;
  for (std::size_t k = 0; k < C; ++k)
    if (obs.points[k].t > obs.points[probe].t) probe = k;
  Eigen::MatrixXd Z(R, C);
  std::vector<double> dual_err(R, 0.0);
  const double b = c.b;
  parallel_for(R, cfg.threads(), [&](std::size_t rep) {
    const std::uint64_t seed = replicate_seed(cfg.seed(), rep);
    const Environment env(law, seed);
    const auto f = z_n(obs, profile, env, seed);
    for (std::size_t k = 0; k < C; ++k) Z(static_cast<Eigen::Index>(rep), static_cast<Eigen::Index>(k)) = f.points[k].z.value;
    const auto& g = obs.points[probe];
    const std::int64_t x = lattice_floor(static_cast<double>(obs.n) * obs.ybar) +
                           lattice_floor(g.r * std::sqrt(static_cast<double>(obs.n))) +
                           lattice_floor(static_cast<double>(obs.n) * g.t * b);
    const std::int64_t tau = lattice_floor(static_cast<double>(obs.n) * g.t);
    const auto d = propagate(env, x, tau, static_cast<long>(tau), Direction::Backward);
    double dual = 0.0, scale = 0.0;
    for (std::int64_t y = d.x_lo; y <= d.x_hi(); ++y) {
      const double s0 = f.initial[static_cast<std::size_t>(y - f.lo0)];
      dual += d.at(y) * s0;
      scale += d.at(y) * std::abs(s0);
    }
    const double diff = std::abs(f.points[probe].sigma_end - dual);
    dual_err[rep] = scale > 0.0 ? diff / scale : diff;
  });
  const auto e = covariance_estimate(Z);
  const double x0 = obs.ybar;
  const CovParams p{profile.rho(x0), profile.v(x0)};
  Eigen::MatrixXd th(C, C);
  for (std::size_t i = 0; i < C; ++i)
    for (std::size_t j = 0; j < C; ++j)
      th(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rap_covariance(obs.points[i].t, obs.points[i].r, obs.points[j].t, obs.points[j].r, p, c);
  ExperimentResult r;
  r.summary = {{"n", obs.n},
               {"replicates", R},
               {"ybar", obs.ybar},
               {"profile", profile.name},
               {"rho_bar", p.rho_bar},
               {"v_bar", p.v_bar},
               {"constants", constants_json(c)},
               {"cells", cells_json(obs.points)},
               {"z_cov", covariance_block(e, th)},
               {"duality_max_rel_err", *std::max_element(dual_err.begin(), dual_err.end())}};
  Table tz{"z", {"replicate", "t", "r", "value"}, {}};
  Table td{"duality", {"replicate", "t", "r", "rel_err"}, {}};
  for (std::size_t rep = 0; rep < R; ++rep) {
    for (std::size_t k = 0; k < C; ++k)
      tz.rows.push_back({static_cast<double>(rep), obs.points[k].t, obs.points[k].r,
                         Z(static_cast<Eigen::Index>(rep), static_cast<Eigen::Index>(k))});
    td.rows.push_back({static_cast<double>(rep), obs.points[probe].t, obs.points[probe].r, dual_err[rep]});
  }
  r.tables.push_back(std::move(tz));
  r.tables.push_back(std::move(td));
  return r;
}

ExperimentResult run_invariance(const ExperimentConfig& cfg) {
  const long m = cfg.integer("invariance.m"), j = cfg.integer("invariance.j");
  const double lambda = cfg.real("invariance.lambda");
  const auto rep = invariance_test(static_cast<int>(m), static_cast<int>(j), lambda,
                                   static_cast<int>(cfg.integer("invariance.sites")), cfg.integer("invariance.steps"),
                                   cfg.integer("invariance.samples"), cfg.seed(), cfg.threads());
  ExperimentResult r;
  r.summary = {{"m", m},
               {"j", j},
               {"lambda", lambda},
               {"samples", rep.samples},
               {"steps", rep.steps},
               {"ks", rep.ks},
               {"ks_critical_1pct", rep.ks_critical_1pct},
               {"mean", rep.mean},
               {"mean_std_err", rep.mean_se},
               {"mean_expected", rep.mean_expected},
               {"variance", rep.variance},
               {"variance_std_err", rep.variance_se},
               {"variance_expected", rep.variance_expected}};
  Table t{"samples", {"sample", "value"}, {}};
  for (std::size_t s = 0; s < rep.values.size(); ++s) t.rows.push_back({static_cast<double>(s), rep.values[s]});
  r.tables.push_back(std::move(t));
  return r;
}

ExperimentResult run_scaling(const ExperimentConfig& cfg) {
  check_replicates(cfg);
  const WeightLaw law = law_from_config(cfg);
  const auto ns = cfg.integers("grid.n");
  const auto scan = quenched_mean_variance_scan(law, ns, cfg.replicates(), cfg.seed(), cfg.threads());
  const long top = *std::max_element(ns.begin(), ns.end());
  const auto table = green_table(q_kernels(law), std::max(top - 1, 0L));
  std::vector<std::pair<double, double>> pts;
  Table t{"scaling", {"n", "estimate", "std_err", "theory"}, {}};
  for (const auto& e : scan) {
    const double theory = e.n >= 1 ? law.drift().sigma_D2 * table.diagonal(e.n - 1) : 0.0;
    t.rows.push_back({static_cast<double>(e.n), e.estimate, e.std_err, theory});
    pts.emplace_back(static_cast<double>(e.n), e.estimate);
  }
  const auto fit = scaling_fit(pts);
  ExperimentResult r;
  r.summary = {{"replicates", cfg.replicates()},
               {"slope", fit.slope},
               {"slope_std_err", fit.slope_se},
               {"intercept", fit.intercept},
               {"intercept_std_err", fit.intercept_se}};
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace

// ---- config ---------------------------------------------------------------

const std::string& ExperimentConfig::text(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw ConfigError(key, "missing");
  return it->second;
}

double ExperimentConfig::real(const std::string& key) const { return parse_real(key, trim(text(key))); }

long ExperimentConfig::integer(const std::string& key) const { return parse_integer(key, trim(text(key))); }

std::vector<double> ExperimentConfig::reals(const std::string& key) const {
  std::vector<double> v;
  for (const auto& s : split_list(text(key))) v.push_back(parse_real(key, s));
  if (v.empty()) throw ConfigError(key, "empty list");
  return v;
}

std::vector<long> ExperimentConfig::integers(const std::string& key) const {
  std::vector<long> v;
  for (const auto& s : split_list(text(key))) v.push_back(parse_integer(key, s));
  if (v.empty()) throw ConfigError(key, "empty list");
  return v;
}

std::uint64_t ExperimentConfig::seed() const {
  const long s = integer("experiment.seed");
  if (s < 0) throw ConfigError("experiment.seed", "must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

long ExperimentConfig::replicates() const { return integer("experiment.replicates"); }

int ExperimentConfig::threads() const {
  const long t = integer("experiment.threads");
  if (t < 0 || t > 1024) throw ConfigError("experiment.threads", "must lie in [0, 1024]");
  return static_cast<int>(t);
}

std::string ExperimentConfig::out_dir() const { return text("experiment.out"); }

std::vector<std::string> experiment_kinds() {
  return {"constants", "green", "rwre-cov", "rap-cov", "invariance", "scaling"};
}

ExperimentConfig default_config(const std::string& kind) {
  const auto kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    throw ConfigError("experiment.kind", "unknown experiment '" + kind + "'");
  }
  ExperimentConfig cfg;
  cfg.kind = kind;
  for (const auto& k : schema()) cfg.values[k.key] = k.fallback;
  cfg.values["experiment.kind"] = kind;
  if (kind == "green") cfg.values["grid.n"] = "10000";
  if (kind == "rap-cov") cfg.values["experiment.replicates"] = "2000";
  if (kind == "scaling") {
    cfg.values["grid.n"] = "100 316 1000 3162 10000";
    cfg.values["experiment.replicates"] = "10000";
  }
  return cfg;
}

void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (find_key(key) == nullptr) throw ConfigError(key, "unknown key");
  if (key == "experiment.kind" && trim(value) != cfg.kind) {
    throw ConfigError(key, "config is for '" + trim(value) + "', expected '" + cfg.kind + "'");
  }
  cfg.values[key] = trim(value);
}

ExperimentConfig load_config(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> raw;
  if (std::filesystem::path(path).extension() == ".json") {
    json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw ConfigError("", "manifest '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("config", "manifest has no config object");
    for (const auto& [k, v] : j["config"].items()) {
      if (!v.is_string()) throw ConfigError(k, "manifest values must be strings");
      raw[k] = v.get<std::string>();
    }
  } else {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError("", "cannot parse '" + path + "': " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw ConfigError(section, "keys must live in a [section]");
      for (const auto& [key, value] : body) raw[section + "." + key] = value.get_value<std::string>();
    }
  }
  std::string file_kind = raw.count("experiment.kind") ? trim(raw["experiment.kind"]) : "";
  if (!kind.empty() && !file_kind.empty() && file_kind != kind) {
    throw ConfigError("experiment.kind", "config is for '" + file_kind + "', command expects '" + kind + "'");
  }
  const std::string k = kind.empty() ? file_kind : kind;
  if (k.empty()) throw ConfigError("experiment.kind", "missing");
  ExperimentConfig cfg = default_config(k);
  for (const auto& [key, value] : raw) {
    if (key == "experiment.kind") continue;
    set_value(cfg, key, value);
  }
  return cfg;
}

WeightLaw law_from_config(const ExperimentConfig& cfg) {
  const auto& v = cfg.text("law.variant");
  std::string field = "law.variant";
  try {
    if (v == "two_point_beta") {
      field = "law.m";
      return WeightLaw::two_point_beta(static_cast<int>(cfg.integer("law.m")), static_cast<int>(cfg.integer("law.j")));
    }
    if (v == "deterministic") {
      field = "law.p";
      return WeightLaw::deterministic(cfg.reals("law.p"));
    }
    if (v == "dirichlet") {
      field = "law.alpha";
      return WeightLaw::dirichlet(cfg.reals("law.alpha"));
    }
    if (v == "mixture") {
      field = "law.components";
      std::vector<MixtureComponent> comps;
      std::stringstream ss(cfg.text("law.components"));
      std::string part;
      while (std::getline(ss, part, ';')) {
        if (trim(part).empty()) continue;
        const auto colon = part.find(':');
        if (colon == std::string::npos) throw ConfigError(field, "component '" + trim(part) + "' lacks 'weight:'");
        MixtureComponent c;
        c.weight = parse_real(field, trim(part.substr(0, colon)));
        for (const auto& s : split_list(part.substr(colon + 1))) c.p.push_back(parse_real(field, s));
        comps.push_back(std::move(c));
      }
      return WeightLaw::mixture(std::move(comps));
    }
  } catch (const InvalidLaw& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError("law.variant", "expected two_point_beta, deterministic, dirichlet or mixture, got '" + v + "'");
}

InitProfile profile_from_config(const ExperimentConfig& cfg) {
  try {
    return InitProfile::preset(cfg.text("profile.name"), cfg.real("profile.a"), cfg.real("profile.c"),
                               cfg.real("profile.var"));
  } catch (const ProfileError& e) {
    throw ConfigError("profile.name", e.what());
  }
}

void validate(const ExperimentConfig& cfg) {
  for (const auto& k : schema()) {
    switch (k.kind) {
      case Kind::Real: cfg.real(k.key); break;
      case Kind::Integer: cfg.integer(k.key); break;
      case Kind::Reals: cfg.reals(k.key); break;
      case Kind::Integers: cfg.integers(k.key); break;
      case Kind::Text: cfg.text(k.key); break;
    }
  }
  cfg.seed();
  cfg.threads();
  law_from_config(cfg);
  for (long n : cfg.integers("grid.n"))
    if (n < 1) throw ConfigError("grid.n", "scales must be positive");
  for (double t : cfg.reals("grid.t"))
    if (t < 0.0) throw ConfigError("grid.t", "times must be nonnegative");
  const auto& kind = cfg.kind;
  if (kind == "rwre-cov" || kind == "rap-cov" || kind == "scaling") {
    if (!(kind == "rwre-cov" && cfg.text("rwre.quantity") != "cov" && cfg.text("rwre.mode") == "exhaustive")) {
      check_replicates(cfg);
    }
  }
  if (kind == "rwre-cov") mode_of(cfg);
  if (kind == "rap-cov") profile_from_config(cfg);
  if (kind == "scaling" && cfg.integers("grid.n").size() < 3) throw ConfigError("grid.n", "scaling needs at least 3 scales");
  if (kind == "invariance" && cfg.integer("invariance.samples") < 100) {
    throw ConfigError("invariance.samples", "at least 100 samples are needed for the KS statistic");
  }
}

ExperimentResult run(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentResult r;
  if (cfg.kind == "constants") r = run_constants(cfg);
  else if (cfg.kind == "green") r = run_green(cfg);
  else if (cfg.kind == "rwre-cov") r = run_rwre(cfg);
  else if (cfg.kind == "rap-cov") r = run_rap_cov(cfg);
  else if (cfg.kind == "invariance") r = run_invariance(cfg);
  else r = run_scaling(cfg);
  r.config = cfg;
  return r;
}

// ---- output ----------------------------------------------------------------

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Table& t, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# rap " << kVersion << " " << cfg.kind << "/" << t.name << "\n";
  for (const auto& [k, v] : cfg.values) os << "# " << k << " = " << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << "\n";
  }
  return os.str();
}

nlohmann::json manifest(const ExperimentResult& r, bool with_timestamp) {
  json cfg = json::object();
  for (const auto& [k, v] : r.config.values) cfg[k] = v;
  json tables = json::array();
  for (const auto& t : r.tables) tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows.size()}});
  json m = {{"version", kVersion}, {"kind", r.config.kind}, {"config", cfg}, {"tables", tables}, {"summary", r.summary}};
  if (with_timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["timestamp"] = buf;
  }
  return m;
}

std::vector<std::string> write_outputs(const ExperimentResult& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("experiment.out: cannot create '" + out_dir + "': " + ec.message());
  std::vector<std::string> written;
  auto put = [&](const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f || !(f << text)) throw IoError("experiment.out: cannot write '" + p.string() + "'");
    written.push_back(p.string());
  };
  for (const auto& t : r.tables) put(fs::path(out_dir) / (r.config.kind + "_" + t.name + ".csv"), to_csv(t, r.config));
  put(fs::path(out_dir) / (r.config.kind + ".json"), manifest(r).dump(2) + "\n");
  return written;
}

}  // namespace rap
