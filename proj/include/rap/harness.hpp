#pragma once

// Experiment configuration, orchestration and output.
//
// A config is a flat set of "section.key" settings read from an INI file (or
// from the "config" object of a JSON manifest written by a previous run).
// Unknown keys are rejected. Every experiment is a pure function of its config.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rap/rap_sim.hpp"
#include "rap/weight_law.hpp"

namespace rap {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  std::string kind;  // constants | green | rwre-cov | rap-cov | invariance | scaling
  std::map<std::string, std::string> values;

  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<long> integers(const std::string& key) const;

  std::uint64_t seed() const;
  long replicates() const;
  int threads() const;
  std::string out_dir() const;
};

std::vector<std::string> experiment_kinds();

// All keys with their defaults for `kind`. ConfigError on an unknown kind.
ExperimentConfig default_config(const std::string& kind);

// Sets one key after checking it exists in the schema.
void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Reads an INI file or JSON manifest over the defaults of its kind. When
// `kind` is non-empty the file must agree with it (or omit experiment.kind).
ExperimentConfig load_config(const std::string& path, const std::string& kind = "");

// Parses every setting the experiment will use; ConfigError names the field.
void validate(const ExperimentConfig& cfg);

WeightLaw law_from_config(const ExperimentConfig& cfg);
InitProfile profile_from_config(const ExperimentConfig& cfg);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
  ExperimentConfig config;
  nlohmann::json summary;
  std::vector<Table> tables;
};

ExperimentResult run(const ExperimentConfig& cfg);

// Decimal with 17 significant digits.
std::string format_number(double v);

// CSV text of a table, preceded by "# section.key = value" lines for the config.
std::string to_csv(const Table& t, const ExperimentConfig& cfg);

nlohmann::json manifest(const ExperimentResult& r, bool with_timestamp = true);

// Writes <out>/<kind>.json and <out>/<kind>_<table>.csv. IoError on failure.
std::vector<std::string> write_outputs(const ExperimentResult& r, const std::string& out_dir);

}  // namespace rap
