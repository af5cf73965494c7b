#include "lidx/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

struct Args {
  std::string config;
  std::string out;
  long long seed = -1;
  int jobs = 1;
  bool no_timestamp = false;
};

int run(const std::string& kind, const Args& a) {
  lidx::ExperimentConfig cfg;
  try {
    cfg = lidx::load_config(a.config);
    if (kind != "run") {
      if (cfg.kind != kind && cfg.kind != "index-check")
        throw lidx::ConfigError("config kind '" + cfg.kind + "' does not match subcommand '" + kind + "'");
      cfg.kind = kind;
    }
    if (a.seed >= 0) cfg.seed = static_cast<unsigned long long>(a.seed);
    if (a.jobs < 1) throw lidx::ConfigError("--jobs must be >= 1");
    cfg.validate();
  } catch (const std::exception& e) {
    const auto err = lidx::error_report(e);
    std::cerr << lidx::dump_report(err);
    if (!a.out.empty()) {
      std::filesystem::create_directories(a.out);
      std::ofstream(std::filesystem::path(a.out) / "report.json") << lidx::dump_report(err);
    }
    return 2;
  }
  const std::string out = a.out.empty() ? cfg.out_dir : a.out;
  const int code = lidx::run_and_write(cfg, out, a.jobs, !a.no_timestamp);
  const char* status = code == 0 ? "PASS" : (code == 1 ? "FAIL" : "ERROR");
  std::cout << cfg.kind << ": " << status << " (" << out << "/report.json)\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lorentzian index experiments on the circle"};
  app.require_subcommand(1);
  Args args;
  std::vector<std::string> kinds = lidx::experiment_kinds();
  kinds.insert(kinds.begin(), "run");
  for (const auto& k : kinds) {
    auto* sub = app.add_subcommand(k, k == "run" ? "run the kind named in the config" : "run a " + k + " experiment");
    sub->add_option("--config", args.config, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory (default: [output] dir)");
    sub->add_option("--seed", args.seed, "override the config seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--jobs", args.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--no-timestamp", args.no_timestamp, "omit generated_at from the report");
  }
  CLI11_PARSE(app, argc, argv);
  for (auto* sub : app.get_subcommands()) return run(sub->get_name(), args);
  return 2;
}
