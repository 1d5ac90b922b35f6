#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "locstat/harness.hpp"

namespace locstat {

/// Non-verifying runs: a single path, a dependence table, or one estimate.
enum class JobKind { simulate, depmeasure, estimate };

[[nodiscard]] std::string to_string(JobKind k);

/// Top-level keys name, seed, model, kernel, bandwidth, plus a section named after the kind:
///   simulate:   {n, burn_in, stationary_at}
///   depmeasure: {n, k_max, nu, replications, indices}
///   estimate:   {estimator, n, grid, x_grid, v, trend, noise_scale, h2, lower, upper}
struct JobConfig {
  JobKind kind = JobKind::simulate;
  std::string name;
  std::uint64_t seed = 1;
  ProcessModel model;
  Kernel kernel = Kernel::epanechnikov();
  BandwidthRule bandwidth;
  nlohmann::json section;
  nlohmann::json raw;
};

JobConfig job_from_json(const nlohmann::json& j, JobKind kind);

/// Named output files (CSV text) plus a JSON summary; the caller decides where they go.
struct JobOutput {
  std::vector<std::pair<std::string, std::string>> files;
  nlohmann::json summary;
};

/// simulate → path.csv; depmeasure → delta.csv and calculus.csv; estimate → estimate.csv.
JobOutput run_job(const JobConfig& cfg, unsigned threads = 1);

}  // namespace locstat
