#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "locstat/harness.hpp"

using namespace locstat;
using nlohmann::json;

namespace {

json small_rate() {
  return json::parse(R"({
    "name": "small_rate", "kind": "rate", "seed": 3, "replications": 10, "n_list": [200, 800],
    "model": {"type": "recursive", "a": 0.5},
    "bandwidth": {"rule": "power", "c": 1.0, "exponent": 0.2},
    "rate": {"estimator": "kernel_regression", "trend": [0.0, 1.0], "grid": 11, "noise_scale": 0.0}
  })");
}

std::string pointer_of(const json& j) {
  try {
    (void)run_experiment(config_from_json(j));
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<none>";
}

std::string report_text(const ExperimentReport& r) {
  std::ostringstream s;
  s << to_json(r).dump(2);
  write_csv(s, r);
  write_plot_csv(s, r);
  return s.str();
}

}  // namespace

TEST(Config, ErrorsCarryJsonPointers) {
  json j = small_rate();
  j["replicatons"] = 5;
  EXPECT_EQ(pointer_of(j), "/replicatons");

  j = small_rate();
  j["model"]["innovation"] = {{"family", "cauchy"}};
  EXPECT_EQ(pointer_of(j), "/model/innovation/family");

  j = small_rate();
  j["n_list"] = {800, 200};
  EXPECT_EQ(pointer_of(j), "/n_list/1");

  j = small_rate();
  j["bandwidth"]["exponent"] = 1.5;
  EXPECT_EQ(pointer_of(j), "/bandwidth/exponent");

  j = small_rate();
  j["rate"]["estimatr"] = "kernel_density";
  EXPECT_EQ(pointer_of(j), "/rate/estimatr");

  j = small_rate();
  j["clt"] = json::object();
  EXPECT_EQ(pointer_of(j), "/clt");

  j = small_rate();
  j["kind"] = "ratio";
  EXPECT_EQ(pointer_of(j), "/kind");
}

TEST(Config, ModelRoundTripsThroughJson) {
  const json m = json::parse(R"({"type": "recursive", "a": [0.2, 0.2], "b": 0.1,
      "scale": {"kind": "arch", "c0": 0.5, "c1": 0.1}, "innovation": {"family": "student_t", "df": 6}})");
  const ProcessModel pm = model_from_json(m);
  EXPECT_EQ(to_json(model_from_json(to_json(pm))).dump(), to_json(pm).dump());
}

TEST(Config, HashIsFnv1aOfCanonicalDump) {
  const json j = small_rate();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  EXPECT_EQ(config_hash(j), buf);
  // Key order in the source text does not matter: nlohmann sorts object keys.
  EXPECT_EQ(config_hash(json::parse(R"({"b": 1, "a": 2})")), config_hash(json::parse(R"({"a": 2, "b": 1})")));
}

TEST(Bandwidth, PowerAndFixed) {
  const auto p = bandwidth_from_json(json::parse(R"({"rule": "power", "c": 2.0, "exponent": 0.5})"), "/b");
  EXPECT_DOUBLE_EQ(p.at(400), 0.1);
  const auto f = bandwidth_from_json(json::parse(R"({"rule": "fixed", "h": 0.3})"), "/b");
  EXPECT_DOUBLE_EQ(f.at(10), 0.3);
  EXPECT_DOUBLE_EQ(f.at(100000), 0.3);
}

TEST(RateExperiment, NoiseFreeSignalPassesTrivially) {
  const auto r = run_experiment(config_from_json(small_rate()));
  EXPECT_TRUE(r.passed());
  for (const auto& row : r.rows) {
    if (row.metric == "median_sup_error") EXPECT_EQ(row.value, 0.0);
  }
}

TEST(Replay, ReportsAreByteIdenticalAcrossThreadCounts) {
  json j = small_rate();
  j["rate"]["noise_scale"] = 1.0;
  const auto cfg = config_from_json(j);
  EXPECT_EQ(report_text(run_experiment(cfg, 1)), report_text(run_experiment(cfg, 3)));
}

TEST(NegativeControl, BuiltinFails) {
  const auto r = run_experiment(config_from_json(builtin_negative_control()));
  EXPECT_FALSE(r.passed());
  EXPECT_TRUE(r.negative_control);
}

TEST(Report, CsvHeadersAndProvenance) {
  const auto r = run_experiment(config_from_json(small_rate()));
  std::ostringstream csv, plot;
  write_csv(csv, r);
  write_plot_csv(plot, r);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "section,n,metric,value");
  EXPECT_EQ(plot.str(), "n,x,empirical,envelope,gaussian\n");
  const json j = to_json(r);
  EXPECT_EQ(j["provenance"]["config_hash"], config_hash(small_rate()));
  EXPECT_EQ(j["provenance"]["seed"], 3);
  EXPECT_EQ(j["provenance"]["version"], LOCSTAT_VERSION);
  EXPECT_EQ(j["config"], small_rate());
  for (const auto& v : r.verdicts) EXPECT_FALSE(v.criterion.empty()) << v.check;
}

TEST(BuiltinSuite, CoversRequiredModelsAndClasses) {
  std::vector<std::string> models;
  for (const auto& m : builtin_models()) models.push_back(m.name);
  for (const char* required : {"iid", "ar1", "tvar1"}) {
    EXPECT_NE(std::find(models.begin(), models.end(), required), models.end()) << required;
  }
  const auto classes = builtin_classes();
  EXPECT_EQ(classes.size(), 8u);
  std::size_t local = 0;
  for (const auto& c : classes) local += c.f.factor.kind() == FactorKind::local;
  EXPECT_EQ(local, 4u);
}
