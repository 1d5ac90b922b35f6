#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include "locstat/csv.hpp"
#include "locstat/harness.hpp"
#include "config_node.hpp"

namespace locstat {

namespace {

using nlohmann::json;
using detail::Node;

template <class F>
auto guarded(const std::string& pointer, F&& build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(pointer, e.what());
  }
}

json poly_json(const Polynomial& p) {
  if (p.coefficients().size() == 1) return p.coefficients()[0];
  return p.coefficients();
}

json innovation_json(const Innovation& e) {
  switch (e.kind()) {
    case InnovationKind::normal: return {{"family", "normal"}, {"sd", e.parameter()}};
    case InnovationKind::student_t: return {{"family", "student_t"}, {"df", e.parameter()}};
    case InnovationKind::uniform: return {{"family", "uniform"}, {"half_width", e.parameter()}};
  }
  return {};
}

}  // namespace

Innovation innovation_from_json(const json& j, const std::string& pointer) {
  if (j.is_null()) return Innovation::normal();
  Node n(j, pointer, {"family", "sd", "df", "half_width"});
  const std::string fam = n.text("family", "normal");
  return guarded(pointer, [&] {
    if (fam == "normal") return Innovation::normal(n.number("sd", 1.0));
    if (fam == "student_t") return Innovation::student_t(n.number("df"));
    if (fam == "uniform") return Innovation::uniform(n.number("half_width", std::sqrt(3.0)));
    throw ConfigError(n.at("family"), "unknown innovation family '" + fam + "'");
  });
}

Kernel kernel_from_name(const std::string& name, const std::string& pointer) {
  if (name == "epanechnikov") return Kernel::epanechnikov();
  if (name == "triangular") return Kernel::triangular();
  throw ConfigError(pointer, "unknown kernel '" + name + "' (epanechnikov, triangular)");
}

ProcessModel model_from_json(const json& j, const std::string& pointer) {
  if (!j.is_object()) throw ConfigError(pointer, "expected a mapping");
  const std::string type = j.value("type", std::string("recursive"));
  if (type == "recursive") {
    Node n(j, pointer, {"type", "a", "b", "scale", "innovation", "tag"});
    RecursiveModel m;
    m.a = n.poly("a", 0.0);
    m.b = n.poly("b", 0.0);
    if (n.has("scale")) {
      const json& sj = n.raw("scale");
      if (sj.is_number()) {
        m.scale = ScaleFamily::constant(sj.get<double>());
      } else {
        Node s(sj, n.at("scale"), {"kind", "c0", "c1"});
        const std::string kind = s.text("kind", "affine_abs");
        m.scale = guarded(n.at("scale"), [&] {
          if (kind == "affine_abs") return ScaleFamily::affine_abs(s.poly("c0", 1.0), s.poly("c1", 0.0));
          if (kind == "arch") return ScaleFamily::arch(s.poly("c0", 1.0), s.poly("c1", 0.0));
          throw ConfigError(s.at("kind"), "unknown scale kind '" + kind + "' (affine_abs, arch)");
        });
      }
    }
    m.innovation = innovation_from_json(j.value("innovation", json()), pointer + "/innovation");
    m.tag = n.text("tag", "recursive");
    guarded(pointer, [&] {
      m.validate();
      return 0;
    });
    return m;
  }
  if (type == "linear") {
    Node n(j, pointer, {"type", "a0", "modulation", "decay", "scale", "rate", "truncation_tol", "innovation", "tag"});
    LinearModel m;
    m.a0 = n.poly("a0", 1.0);
    m.modulation = n.poly("modulation", 1.0);
    const std::string decay = n.text("decay", "geometric");
    if (decay == "geometric") m.decay = DecayTemplate::geometric;
    else if (decay == "polynomial") m.decay = DecayTemplate::polynomial;
    else throw ConfigError(n.at("decay"), "unknown decay template '" + decay + "' (geometric, polynomial)");
    m.scale = n.number("scale", 1.0);
    m.rate = n.number("rate", 0.5);
    m.truncation_tol = n.number("truncation_tol", 1e-10);
    m.innovation = innovation_from_json(j.value("innovation", json()), pointer + "/innovation");
    m.tag = n.text("tag", "linear");
    guarded(pointer, [&] {
      m.validate();
      return 0;
    });
    return m;
  }
  throw ConfigError(pointer + "/type", "unknown model type '" + type + "' (recursive, linear)");
}

json to_json(const ProcessModel& model) {
  if (const auto* r = std::get_if<RecursiveModel>(&model)) {
    return {{"type", "recursive"},
            {"a", poly_json(r->a)},
            {"b", poly_json(r->b)},
            {"scale",
             {{"kind", r->scale.kind() == ScaleKind::arch ? "arch" : "affine_abs"},
              {"c0", poly_json(r->scale.c0())},
              {"c1", poly_json(r->scale.c1())}}},
            {"innovation", innovation_json(r->innovation)},
            {"tag", r->tag}};
  }
  const auto& l = std::get<LinearModel>(model);
  return {{"type", "linear"},
          {"a0", poly_json(l.a0)},
          {"modulation", poly_json(l.modulation)},
          {"decay", l.decay == DecayTemplate::geometric ? "geometric" : "polynomial"},
          {"scale", l.scale},
          {"rate", l.rate},
          {"truncation_tol", l.truncation_tol},
          {"innovation", innovation_json(l.innovation)},
          {"tag", l.tag}};
}

FunctionClass class_from_json(const json& j, const std::string& pointer, const Kernel& kernel) {
  Node n(j, pointer, {"base", "x", "theta", "c", "h2", "factor"});
  const std::string base = n.text("base");
  const Base b = guarded(pointer, [&] {
    if (base == "identity") return Base::identity();
    if (base == "abs_deviation") return Base::abs_deviation(n.number("theta", 0.0));
    if (base == "indicator") return Base::indicator(n.number("x", 0.0));
    if (base == "kernel_density") return Base::kernel_density(n.number("x", 0.0), n.number("h2", 0.5), kernel);
    if (base == "constant") return Base::constant(n.number("c", 1.0));
    throw ConfigError(n.at("base"), "unknown base '" + base + "'");
  });
  Factor factor = Factor::global();
  if (n.has("factor")) {
    Node fj(n.raw("factor"), n.at("factor"), {"kind", "v", "h"});
    const std::string kind = fj.text("kind", "global");
    factor = guarded(n.at("factor"), [&] {
      if (kind == "global") return Factor::global();
      if (kind == "local") return Factor::local(kernel, fj.number("h", 0.2), fj.number("v", 0.5));
      throw ConfigError(fj.at("kind"), "unknown factor kind '" + kind + "' (global, local)");
    });
  }
  return FunctionClass{b, factor, HolderData{}};
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::rate: return "rate";
    case ExperimentKind::clt: return "clt";
    case ExperimentKind::variance: return "variance";
    case ExperimentKind::tail: return "tail";
    case ExperimentKind::bracket: return "bracket";
    case ExperimentKind::bahadur: return "bahadur";
  }
  return "unknown";
}

double BandwidthRule::at(std::size_t n) const {
  return fixed ? h : c * std::pow(static_cast<double>(n), -exponent);
}

BandwidthRule bandwidth_from_json(const json& j, const std::string& pointer) {
  Node b(j, pointer, {"rule", "c", "exponent", "h"});
  BandwidthRule r;
  const std::string rule = b.text("rule", "power");
  if (rule == "fixed") {
    r.fixed = true;
    r.h = b.number("h");
    if (!(r.h > 0.0 && r.h < 1.0)) throw ConfigError(pointer + "/h", "h must lie in (0, 1)");
  } else if (rule == "power") {
    r.c = b.number("c", 1.0);
    r.exponent = b.number("exponent", 0.2);
    if (!(r.exponent > 0.0 && r.exponent < 1.0)) {
      throw ConfigError(pointer + "/exponent", "exponent must lie in (0, 1) so that nh grows");
    }
    if (!(r.c > 0.0)) throw ConfigError(pointer + "/c", "c must be positive");
  } else {
    throw ConfigError(pointer + "/rule", "unknown bandwidth rule '" + rule + "' (power, fixed)");
  }
  return r;
}

ExperimentConfig config_from_json(const json& j) {
  Node n(j, "", {"name", "kind", "seed", "replications", "n_list", "model", "bandwidth", "kernel",
                 "negative_control", "tolerances", "rate", "clt", "variance", "tail", "bracket", "bahadur"});
  ExperimentConfig c;
  c.raw = j;
  c.name = n.text("name", "experiment");
  const std::string kind = n.text("kind");
  const ExperimentKind kinds[] = {ExperimentKind::rate,   ExperimentKind::clt,     ExperimentKind::variance,
                                  ExperimentKind::tail,   ExperimentKind::bracket, ExperimentKind::bahadur};
  bool found = false;
  for (auto k : kinds) {
    if (to_string(k) == kind) {
      c.kind = k;
      found = true;
    }
  }
  if (!found) throw ConfigError("/kind", "unknown experiment kind '" + kind + "'");
  c.seed = n.count("seed", 1);
  c.replications = n.count("replications", 200);
  if (n.has("n_list")) {
    const json& nl = n.raw("n_list");
    if (!nl.is_array() || nl.empty()) throw ConfigError("/n_list", "expected a non-empty list of sample sizes");
    for (std::size_t i = 0; i < nl.size(); ++i) {
      if (!nl[i].is_number_integer() || nl[i].get<long long>() < 2) {
        throw ConfigError("/n_list/" + std::to_string(i), "expected an integer >= 2");
      }
      c.n_list.push_back(nl[i].get<std::size_t>());
      if (i > 0 && c.n_list[i] <= c.n_list[i - 1]) {
        throw ConfigError("/n_list/" + std::to_string(i), "n_list must be strictly increasing");
      }
    }
  }
  c.model = n.has("model") ? model_from_json(n.raw("model"), "/model") : ProcessModel(RecursiveModel{});
  if (n.has("bandwidth")) c.bandwidth = bandwidth_from_json(n.raw("bandwidth"), "/bandwidth");
  c.kernel = kernel_from_name(n.text("kernel", "epanechnikov"), "/kernel");
  c.negative_control = n.flag("negative_control", false);
  if (n.has("tolerances")) {
    Node t(n.raw("tolerances"), "/tolerances",
           {"rate_factor", "variance_rel", "ks_safety", "crossover_factor", "mc_sigmas"});
    c.tol.rate_factor = t.number("rate_factor", c.tol.rate_factor);
    c.tol.variance_rel = t.number("variance_rel", c.tol.variance_rel);
    c.tol.ks_safety = t.number("ks_safety", c.tol.ks_safety);
    c.tol.crossover_factor = t.number("crossover_factor", c.tol.crossover_factor);
    c.tol.mc_sigmas = t.number("mc_sigmas", c.tol.mc_sigmas);
  }
  const std::string key = to_string(c.kind);
  c.section = j.contains(key) ? j.at(key) : json::object();
  if (!c.section.is_object()) throw ConfigError("/" + key, "expected a mapping");
  for (const char* other : {"rate", "clt", "variance", "tail", "bracket", "bahadur"}) {
    if (key != other && j.contains(other)) {
      throw ConfigError(std::string("/") + other, "section does not match kind '" + key + "'");
    }
  }
  return c;
}

std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool ExperimentReport::passed() const {
  const auto ok = [](const Verdict& v) { return v.pass; };
  return std::all_of(verdicts.begin(), verdicts.end(), ok) && std::all_of(controls.begin(), controls.end(), ok);
}

json to_json(const ExperimentReport& r) {
  const auto verdicts = [](const std::vector<Verdict>& vs) {
    json a = json::array();
    for (const auto& v : vs) {
      a.push_back({{"criterion", v.criterion}, {"check", v.check}, {"pass", v.pass}, {"detail", v.detail}});
    }
    return a;
  };
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"section", row.section}, {"n", row.n}, {"metric", row.metric}, {"value", row.value}});
  }
  return {{"name", r.name},
          {"kind", to_string(r.kind)},
          {"passed", r.passed()},
          {"negative_control", r.negative_control},
          {"verdicts", verdicts(r.verdicts)},
          {"controls", verdicts(r.controls)},
          {"warnings", r.warnings},
          {"summary", rows},
          {"details", r.details},
          {"plot", r.plot},
          {"provenance", {{"config_hash", r.config_hash}, {"seed", r.seed}, {"version", r.version}}},
          {"config", r.config}};
}

void write_csv(std::ostream& out, const ExperimentReport& r) {
  CsvWriter w(out);
  w.header({"section", "n", "metric", "value"});
  for (const auto& row : r.rows) {
    w.cell(std::string_view(row.section)).cell(row.n).cell(std::string_view(row.metric)).cell(row.value);
    w.end_row();
  }
}

void write_plot_csv(std::ostream& out, const ExperimentReport& r) {
  CsvWriter w(out);
  w.header({"n", "x", "empirical", "envelope", "gaussian"});
  if (!r.plot.is_array()) return;
  for (const auto& block : r.plot) {
    const auto n = block.at("n").get<std::size_t>();
    const auto& x = block.at("x");
    for (std::size_t k = 0; k < x.size(); ++k) {
      w.cell(n).cell(x[k].get<double>()).cell(block.at("empirical")[k].get<double>());
      w.cell(block.at("envelope")[k].get<double>());
      if (block.contains("gaussian")) {
        w.cell(block.at("gaussian")[k].get<double>());
      } else {
        w.cell(std::string_view{});
      }
      w.end_row();
    }
  }
}

std::vector<NamedModel> builtin_models() {
  std::vector<NamedModel> out;
  out.push_back({"iid", RecursiveModel{}});
  RecursiveModel ar;
  ar.a = Polynomial::constant(0.5);
  ar.tag = "ar1";
  out.push_back({"ar1", ar});
  RecursiveModel tv;
  tv.a = Polynomial({0.3, 0.3});
  tv.tag = "tvar1";
  out.push_back({"tvar1", tv});
  RecursiveModel arch;
  arch.a = Polynomial::constant(0.3);
  arch.scale = ScaleFamily::arch(Polynomial({1.0, -0.5}), Polynomial::constant(0.2));
  arch.tag = "tvarch";
  out.push_back({"tvarch", arch});
  LinearModel lg;
  lg.modulation = Polynomial({1.0, -0.5});
  lg.rate = 0.6;
  lg.tag = "linear_geometric";
  out.push_back({"linear_geometric", lg});
  LinearModel lp;
  lp.decay = DecayTemplate::polynomial;
  lp.rate = 3.0;
  lp.scale = 0.8;
  lp.truncation_tol = 1e-5;
  lp.tag = "linear_polynomial";
  out.push_back({"linear_polynomial", lp});
  return out;
}

std::vector<NamedClass> builtin_classes() {
  const Kernel k = Kernel::epanechnikov();
  const Factor local = Factor::local(k, 0.2, 0.5);
  return {
      {"identity_global", {Base::identity(), Factor::global(), {}}},
      {"absdev_global", {Base::abs_deviation(0.0), Factor::global(Polynomial({1.0, 1.0})), {}}},
      {"indicator_global", {Base::indicator(0.0), Factor::global(), {}}},
      {"density_global", {Base::kernel_density(0.0, 0.5, k), Factor::global(), {}}},
      {"identity_local", {Base::identity(), local, {}}},
      {"absdev_local", {Base::abs_deviation(0.5), local, {}}},
      {"indicator_local", {Base::indicator(0.0), local, {}}},
      {"density_local", {Base::kernel_density(0.0, 0.5, k), local, {}}},
  };
}

json builtin_negative_control() {
  return {{"name", "negative-control-variance"},
          {"kind", "variance"},
          {"seed", 7},
          {"replications", 200},
          {"n_list", {500}},
          {"model", {{"type", "recursive"}, {"a", 0.5}}},
          {"negative_control", true},
          {"variance", {{"class", {{"base", "identity"}}}}}};
}

}  // namespace locstat
