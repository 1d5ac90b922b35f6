#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locstat/empirical_process.hpp"
#include "locstat/function_class.hpp"
#include "locstat/process_models.hpp"

namespace locstat {

/// Invalid experiment configuration. `pointer` is the JSON pointer of the offending node.
class ConfigError : public ModelError {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : ModelError(pointer + ": " + message), pointer_(std::move(pointer)) {}
  [[nodiscard]] const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

/// {"type": "recursive", "a", "b", "scale": {"kind", "c0", "c1"}, "innovation"} or
/// {"type": "linear", "a0", "modulation", "decay", "scale", "rate", "truncation_tol", "innovation"}.
/// Polynomials are a number or a coefficient array.
ProcessModel model_from_json(const nlohmann::json& j, const std::string& pointer = "/model");
nlohmann::json to_json(const ProcessModel& model);
Innovation innovation_from_json(const nlohmann::json& j, const std::string& pointer);
Kernel kernel_from_name(const std::string& name, const std::string& pointer);

/// {"base": "identity" | "abs_deviation" | "indicator" | "kernel_density" | "constant",
///  "x", "theta", "c", "h2", "factor": {"kind": "global" | "local", "v", "h"}}.
FunctionClass class_from_json(const nlohmann::json& j, const std::string& pointer, const Kernel& kernel);

enum class ExperimentKind { rate, clt, variance, tail, bracket, bahadur };

[[nodiscard]] std::string to_string(ExperimentKind k);

/// h = c n^{-exponent}, or a fixed h.
struct BandwidthRule {
  bool fixed = false;
  double c = 1.0;
  double exponent = 0.2;
  double h = 0.2;
  [[nodiscard]] double at(std::size_t n) const;
};

/// {"rule": "power", "c", "exponent"} or {"rule": "fixed", "h"}.
BandwidthRule bandwidth_from_json(const nlohmann::json& j, const std::string& pointer);

struct Tolerances {
  double rate_factor = 2.0;
  double variance_rel = 0.15;
  double ks_safety = 1.0;
  double crossover_factor = 3.0;
  double mc_sigmas = 4.0;
};

/// Parsed experiment. The original JSON is kept so reports can embed it for replay.
struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::rate;
  std::uint64_t seed = 1;
  std::size_t replications = 200;
  std::vector<std::size_t> n_list;
  ProcessModel model;
  BandwidthRule bandwidth;
  Kernel kernel = Kernel::epanechnikov();
  bool negative_control = false;
  Tolerances tol;
  nlohmann::json section;  ///< kind-specific block, validated by the experiment
  nlohmann::json raw;
};

/// Validates top-level keys and types; throws ConfigError naming the JSON pointer.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
[[nodiscard]] std::string config_hash(const nlohmann::json& j);

struct Verdict {
  std::string criterion;
  std::string check;
  bool pass;
  std::string detail;
};

/// Long-format table row for CSV export.
struct SummaryRow {
  std::string section;
  std::size_t n;
  std::string metric;
  double value;
};

struct ExperimentReport {
  std::string name;
  ExperimentKind kind;
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t seed;
  std::string version;
  bool negative_control;
  std::vector<SummaryRow> rows;
  std::vector<Verdict> verdicts;
  /// Built-in negative controls; `pass` means the control failed as it must.
  std::vector<Verdict> controls;
  std::vector<std::string> warnings;
  nlohmann::json details;  ///< kind-specific extras (fitted constants, grids)
  nlohmann::json plot;     ///< optional {"x", "empirical", "envelope"} arrays per n

  [[nodiscard]] bool passed() const;
};

nlohmann::json to_json(const ExperimentReport& r);
/// Columns section,n,metric,value.
void write_csv(std::ostream& out, const ExperimentReport& r);
/// Columns n,x,empirical,envelope,gaussian; only the header when there is no plot data.
void write_plot_csv(std::ostream& out, const ExperimentReport& r);

/// Results do not depend on `threads`.
ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

ExperimentReport run_rate_experiment(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_clt_experiment(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_variance_experiment(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_tail_experiment(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_bracket_experiment(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_bahadur_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

struct NamedModel {
  std::string name;
  ProcessModel model;
};
struct NamedClass {
  std::string name;
  FunctionClass f;
};

/// Models of the built-in variance suite: iid, AR(1) with a = 0.5, tvAR(1) with
/// a(u) = 0.3 + 0.3u, an ARCH-type model, and linear processes with geometric and
/// polynomial weights.
std::vector<NamedModel> builtin_models();
/// Classes of the built-in variance suite: identity, absolute deviation, indicator and
/// kernel-density bases, each with a global and a local factor.
std::vector<NamedClass> builtin_classes();

/// A small config exercising the built-in negative control: a variance experiment on
/// AR(1) with `negative_control` set, which must fail.
nlohmann::json builtin_negative_control();

}  // namespace locstat
