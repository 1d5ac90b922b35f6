#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "locstat/jobs.hpp"

using namespace locstat;
using nlohmann::json;

namespace {

const std::string& file(const JobOutput& out, const std::string& name) {
  for (const auto& [n, text] : out.files)
    if (n == name) return text;
  throw std::runtime_error("missing " + name);
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST(SimulateJob, WritesPathAndSummary) {
  const auto cfg = job_from_json(json::parse(R"({"seed": 4, "model": {"type": "recursive", "a": 0.5},
                                                 "simulate": {"n": 300}})"),
                                 JobKind::simulate);
  const auto out = run_job(cfg);
  EXPECT_EQ(lines(file(out, "path.csv")), 301u);
  EXPECT_EQ(out.summary["n"], 300);
  EXPECT_EQ(out.summary["history"], default_burn_in(std::get<RecursiveModel>(cfg.model)));
  EXPECT_EQ(run_job(cfg).files, out.files);
}

TEST(SimulateJob, StationaryOutsideUnitIntervalIsConfigError) {
  const json j = json::parse(R"({"simulate": {"n": 10, "stationary_at": 2.0}})");
  try {
    (void)run_job(job_from_json(j, JobKind::simulate));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/simulate/stationary_at");
  }
}

TEST(DepmeasureJob, Ar1TableIsDominated) {
  const auto cfg = job_from_json(json::parse(R"({"seed": 2, "model": {"type": "recursive", "a": 0.5},
                                                 "depmeasure": {"n": 64, "k_max": 5, "replications": 4000}})"),
                                 JobKind::depmeasure);
  const auto out = run_job(cfg, 2);
  EXPECT_TRUE(out.summary["dominated_within_4se"].get<bool>());
  const std::string& delta = file(out, "delta.csv");
  EXPECT_EQ(delta.substr(0, delta.find('\n')), "k,delta_hat,se,argmax,Delta,beta");
  EXPECT_EQ(lines(delta), 6u);
  EXPECT_EQ(lines(file(out, "calculus.csv")), 7u);
  EXPECT_EQ(run_job(cfg, 1).files, out.files);
}

TEST(EstimateJob, AllEstimatorsRun) {
  for (const char* est : {"kernel_regression", "kernel_density", "local_edf", "local_mad", "ar_m_estimate"}) {
    json j = json::parse(R"({"seed": 9, "model": {"type": "recursive", "a": [0.2, 0.5]},
                             "bandwidth": {"rule": "fixed", "h": 0.2}, "estimate": {"n": 1000, "grid": 5}})");
    j["estimate"]["estimator"] = est;
    const auto out = run_job(job_from_json(j, JobKind::estimate));
    EXPECT_GT(lines(file(out, "estimate.csv")), 1u) << est;
    EXPECT_EQ(out.summary["n"], 1000) << est;
  }
}

TEST(EstimateJob, UnknownKeysAreRejected) {
  const json j = json::parse(R"({"estimate": {"estimator": "local_mad", "bandwith": 0.1}})");
  try {
    (void)run_job(job_from_json(j, JobKind::estimate));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/estimate/bandwith");
  }
  EXPECT_THROW(job_from_json(json::parse(R"({"simulate": {}, "kind": "rate"})"), JobKind::simulate), ConfigError);
}
