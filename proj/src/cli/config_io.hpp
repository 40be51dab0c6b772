#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaplab/experiments.hpp"

namespace gaplab::cli {

/// Raised for any malformed configuration; the message names the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RhoTask {
  std::vector<double> x{1.0, 1.0};
  std::vector<double> radii{0.5};
  std::string method = "exact";  // exact | monte_carlo
  std::size_t mc_trials = 100000;
  friend bool operator==(const RhoTask&, const RhoTask&) = default;
};

struct LatticeTask {
  std::vector<double> y{0.5, 0.5};
  double gamma_min = 1.0;
  double gamma_max = 3.0;
  double step = 0.01;
  friend bool operator==(const LatticeTask&, const LatticeTask&) = default;
};

struct CountingTask {
  std::size_t n = 2;
  std::uint64_t p = 3;
  std::vector<double> thresholds{0.25, 0.5, 0.75, 0.9, 1.0};
  std::size_t m = 4;
  std::size_t l = 2;
  double rho = 0.5;
  friend bool operator==(const CountingTask&, const CountingTask&) = default;
};

struct RunConfig {
  ExperimentConfig experiment;
  RhoTask rho;
  LatticeTask lattice;
  CountingTask counting;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
/// Strict parse: unknown keys and type mismatches raise ConfigError.
RunConfig from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical config dump and subcommand, excluding the
/// worker count so that results hash identically under any schedule.
std::string manifest_hash(const RunConfig& cfg, const std::string& subcommand);

}  // namespace gaplab::cli
