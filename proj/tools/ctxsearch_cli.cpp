// Command-line front end for the experiment harness.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ctxsearch/ctxsearch.hpp"

namespace {

using namespace ctxsearch;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitIo = 4;

struct Flags {
  std::string config_file;
  std::map<std::string, std::string> values;  // key -> raw flag value
  bool record_timing = false;
};

void add_study_flags(CLI::App* sub, Flags& f) {
  auto str = [&](const char* flag, const char* key, const char* help) {
    sub->add_option_function<std::string>(
        flag, [&f, key](const std::string& v) { f.values[key] = v; }, help);
  };
  str("--d", "d", "dimensions, comma separated");
  str("--budgets", "budgets", "learning-phase label budgets, comma separated");
  str("--trials", "trials", "trials per cell");
  str("--seed", "seed", "master seed");
  str("--preset", "preset", "paper-sec5 | theorem1");
  str("--rho", "rho", "unlabeled-to-label ratios, comma separated (ratio study)");
  str("--out", "out", "output CSV path; <out>.summary and <out>.meta go alongside");
  str("--workers", "workers", "worker threads");
  sub->add_option("--config", f.config_file, "key=value file mirroring the flags");
  sub->add_flag("--record-timing", f.record_timing,
                "fill wall_ms (makes the CSV depend on the machine)");
}

ExperimentConfig resolve(Study study, const Flags& f) {
  ExperimentConfig cfg = default_experiment(study);
  if (!f.config_file.empty())
    for (const auto& [k, v] : read_config_file(f.config_file)) apply_setting(cfg, k, v);
  for (const auto& [k, v] : f.values) apply_setting(cfg, k, v);
  if (f.record_timing) cfg.record_timing = true;
  cfg.validate();
  return cfg;
}

void print_summary(const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
  const StudySummary s = summarize(records);
  std::printf("%s: %zu records\n", to_string(cfg.study), records.size());
  std::printf("%-8s %4s %10s %6s %6s %12s\n", "algo", "d", "labels", "rho", "trials", "median_err");
  for (const auto& c : s.cells)
    std::printf("%-8s %4zu %10zu %6s %6zu %12.6g\n", to_string(c.algo), c.d, c.learning_labels,
                c.rho ? format_real(*c.rho).c_str() : "-", c.trials, c.median_err);
  for (const auto& sl : s.slopes)
    std::printf("slope %-8s d=%zu: %.4f\n", to_string(sl.algo), sl.d, sl.fit.slope);
  if (cfg.study == Study::Single)
    for (const auto& r : records)
      std::printf("%s: err=%.6g bracket=[%.4f, %.4f] labels=%zu (trisection %zu) contexts=%zu\n",
                  to_string(r.algo), r.err, r.b1, r.b2, r.n_labeled, r.labels_trisection,
                  r.m_total);
  if (!cfg.out_path.empty())
    std::printf("wrote %s, %s.summary, %s.meta\n", cfg.out_path.c_str(), cfg.out_path.c_str(),
                cfg.out_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning for contextual search with binary feedback"};
  app.set_version_flag("--version", std::string(CTXSEARCH_VERSION));
  app.require_subcommand(1);

  std::map<std::string, Flags> flags;
  std::map<CLI::App*, Study> studies;
  for (Study st : {Study::Convergence, Study::Dims, Study::Ratio, Study::Single}) {
    const char* help = st == Study::Convergence ? "error vs label budget, active and passive"
                       : st == Study::Dims      ? "error vs dimension at fixed budgets"
                       : st == Study::Ratio     ? "error vs unlabeled-to-label ratio"
                                                : "one paired active/passive run";
    CLI::App* sub = app.add_subcommand(to_string(st), help);
    add_study_flags(sub, flags[to_string(st)]);
    studies[sub] = st;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Study study = studies.at(chosen);
  try {
    const ExperimentConfig cfg = resolve(study, flags[to_string(study)]);
    const auto records = execute_study(cfg);
    print_summary(cfg, records);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
