// locstat: simulate paths, tabulate dependence measures, compute estimates and run
// verification experiments from declarative YAML configs.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "locstat/harness.hpp"
#include "locstat/jobs.hpp"
#include "locstat/numerics.hpp"
#include "yaml_json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kNumerical = 3 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool builtin_negative = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const json& config, std::uint64_t seed,
                    unsigned threads, const std::vector<std::string>& files) {
  json m{{"subcommand", subcommand},
         {"config_hash", locstat::config_hash(config)},
         {"version", LOCSTAT_VERSION},
         {"seed", seed},
         {"threads", threads},
         {"timestamp", utc_now()},
         {"files", files}};
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

int run(const std::string& subcommand, const Options& opt) {
  locstat::cli::LoadedConfig loaded;
  std::string source = opt.config;
  if (opt.builtin_negative) {
    loaded.json = locstat::builtin_negative_control();
    source = "<builtin negative control>";
  } else {
    try {
      loaded = locstat::cli::load_yaml(read_file(opt.config));
    } catch (const std::runtime_error& e) {
      std::cerr << "error: " << opt.config << ": " << e.what() << "\n";
      return kUsage;
    }
  }
  if (opt.seed) loaded.json["seed"] = *opt.seed;

  try {
    const fs::path dir = opt.out;
    std::vector<std::string> files;
    int status = kPass;
    std::uint64_t seed = 0;
    if (subcommand == "verify") {
      const locstat::ExperimentConfig cfg = locstat::config_from_json(loaded.json);
      seed = cfg.seed;
      const locstat::ExperimentReport report = locstat::run_experiment(cfg, opt.jobs);
      fs::create_directories(dir);
      write_file(dir / "report.json", locstat::to_json(report).dump(2) + "\n");
      std::ostringstream csv;
      locstat::write_csv(csv, report);
      write_file(dir / "report.csv", csv.str());
      files = {"report.json", "report.csv"};
      if (!report.plot.empty()) {
        std::ostringstream plot;
        locstat::write_plot_csv(plot, report);
        write_file(dir / "plot.csv", plot.str());
        files.push_back("plot.csv");
      }
      for (const auto& v : report.verdicts) std::cout << (v.pass ? "PASS " : "FAIL ") << v.check << ": " << v.detail << "\n";
      for (const auto& v : report.controls) {
        std::cout << (v.pass ? "CONTROL FAILED AS REQUIRED " : "CONTROL PASSED (BAD) ") << v.check << ": " << v.detail << "\n";
      }
      for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
      std::cout << report.name << ": " << (report.passed() ? "PASS" : "FAIL") << "\n";
      status = report.passed() ? kPass : kFail;
    } else {
      const auto kind = subcommand == "simulate"     ? locstat::JobKind::simulate
                        : subcommand == "depmeasure" ? locstat::JobKind::depmeasure
                                                     : locstat::JobKind::estimate;
      const locstat::JobConfig cfg = locstat::job_from_json(loaded.json, kind);
      seed = cfg.seed;
      const locstat::JobOutput out = locstat::run_job(cfg, opt.jobs);
      fs::create_directories(dir);
      for (const auto& [name, text] : out.files) {
        write_file(dir / name, text);
        files.push_back(name);
      }
      write_file(dir / "summary.json", out.summary.dump(2) + "\n");
      files.push_back("summary.json");
      std::cout << out.summary.dump() << "\n";
    }
    write_manifest(dir, subcommand, loaded.json, seed, opt.jobs, files);
    std::cout << "wrote " << dir.string() << "\n";
    return status;
  } catch (const locstat::ConfigError& e) {
    const int line = locstat::cli::line_for(loaded, e.pointer());
    std::cerr << "error: " << source;
    if (line > 0) std::cerr << ":" << line;
    std::cerr << ": " << e.what() << "\n";
    return kUsage;
  } catch (const locstat::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << source << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and verification toolkit for locally stationary processes", "locstat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LOCSTAT_VERSION);

  Options opt;
  const char* env_out = std::getenv("LOCSTAT_OUT");
  opt.out = env_out && *env_out ? env_out : "locstat-out";

  const auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("-c,--config", opt.config, "YAML experiment config")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("-o,--out", opt.out, "Output directory (default $LOCSTAT_OUT or ./locstat-out)");
    sub->add_option("-s,--seed", opt.seed, "Override the config seed");
    sub->add_option("-j,--jobs", opt.jobs, "Worker threads, 0 = all cores; never changes results")
        ->check(CLI::Range(0u, 1024u));
  };
  common(app.add_subcommand("simulate", "Simulate one path and write path.csv"), true);
  common(app.add_subcommand("depmeasure", "Tabulate Monte Carlo and analytic dependence measures"), true);
  common(app.add_subcommand("estimate", "Run one estimator and write estimate.csv"), true);
  auto* verify = app.add_subcommand("verify", "Run a verification experiment and write the report");
  common(verify, false);
  verify->add_flag("--builtin-negative-control", opt.builtin_negative,
                   "Run the built-in negative control instead of a config (must FAIL)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  if (sub->get_name() == "verify" && opt.config.empty() == !opt.builtin_negative) {
    std::cerr << "error: verify needs exactly one of --config or --builtin-negative-control\n";
    return kUsage;
  }
  if (opt.jobs == 0) opt.jobs = std::max(1u, std::thread::hardware_concurrency());
  return run(sub->get_name(), opt);
}
