#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ctxsearch/environment.hpp"
#include "ctxsearch/mathstats.hpp"
#include "ctxsearch/meta.hpp"
#include "ctxsearch/run_record.hpp"

#ifndef CTXSEARCH_VERSION
#define CTXSEARCH_VERSION "0.0.0"
#endif

namespace ctxsearch {

enum class Study { Convergence, Dims, Ratio, Single };
enum class PresetKind { Experimental, Asymptotic };

inline const char* to_string(Study s) {
  switch (s) {
    case Study::Convergence: return "convergence";
    case Study::Dims: return "dims";
    case Study::Ratio: return "ratio";
    case Study::Single: return "single";
  }
  return "?";
}

inline const char* to_string(PresetKind p) {
  return p == PresetKind::Experimental ? "paper-sec5" : "theorem1";
}

inline Study parse_study(const std::string& s) {
  if (s == "convergence") return Study::Convergence;
  if (s == "dims") return Study::Dims;
  if (s == "ratio") return Study::Ratio;
  if (s == "single") return Study::Single;
  throw ConfigError("unknown study '" + s + "'");
}

inline PresetKind parse_preset(const std::string& s) {
  if (s == "paper-sec5") return PresetKind::Experimental;
  if (s == "theorem1") return PresetKind::Asymptotic;
  throw ConfigError("unknown preset '" + s + "'");
}

/// Label budgets count learning-phase labels: the two runs at b1 and b2
/// together. Trisection labels are reported separately.
struct ExperimentConfig {
  Study study = Study::Convergence;
  std::vector<std::size_t> d_list{2, 5, 10};
  std::vector<std::size_t> label_budgets{1000, 3162, 10000, 31623, 100000};
  std::size_t trials = 50;
  std::uint64_t seed = 20240601;
  PresetKind preset = PresetKind::Experimental;
  std::vector<double> rho_list{0.0, 0.5, 1.0, 2.0, 4.0};
  std::string out_path;
  std::size_t workers = 1;
  bool record_timing = false;

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (d_list.empty()) throw ConfigError("d list is empty");
    if (label_budgets.empty()) throw ConfigError("budget list is empty");
    for (auto d : d_list)
      if (d < 1) throw ConfigError("dimensions must be >= 1");
    for (auto n : label_budgets)
      if (n < 10) throw ConfigError("label budgets must be >= 10");
    if (study == Study::Ratio) {
      if (rho_list.empty()) throw ConfigError("rho list is empty");
      for (double r : rho_list)
        if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("rho values must be non-negative");
    }
    if (workers < 1) throw ConfigError("workers must be >= 1");
  }
};

/// Per-study defaults at desk scale.
inline ExperimentConfig default_experiment(Study study) {
  ExperimentConfig c;
  c.study = study;
  switch (study) {
    case Study::Convergence:
      break;
    case Study::Dims:
      c.d_list = {3, 6, 9, 12, 15};
      c.label_budgets = {30000};
      break;
    case Study::Ratio:
      c.d_list = {2};
      c.label_budgets = {10000};
      break;
    case Study::Single:
      c.d_list = {2};
      c.label_budgets = {10000};
      c.trials = 1;
      break;
  }
  return c;
}

inline MetaConfig make_meta_config(PresetKind preset, std::size_t d, std::size_t budget) {
  if (preset == PresetKind::Experimental) return preset_experimental(d, budget);
  MetaConfig c = preset_asymptotic(d, 0.1, 0.1);
  c.label_budget = budget;
  return c;
}

// ---------------------------------------------------------------------------
// Trials

struct TrialTask {
  Algo algo = Algo::Active;
  std::size_t d = 0;
  std::size_t budget = 0;
  std::size_t trial = 0;
  std::optional<double> rho;
};

/// Per-run seed from (seed, study, d, budget, trial, algo). Cells of the
/// ratio study that differ only in rho share a stream.
inline std::uint64_t trial_seed(std::uint64_t seed, Study study, const TrialTask& t) {
  std::uint64_t h = combine_seed(seed, static_cast<std::uint64_t>(study) + 1);
  h = combine_seed(h, t.d);
  h = combine_seed(h, t.budget);
  h = combine_seed(h, t.trial);
  return combine_seed(h, t.algo == Algo::Active ? 0xac71e : 0x9a551e);
}

inline RunRecord run_trial(const ExperimentConfig& cfg, const TrialTask& task) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = trial_seed(cfg.seed, cfg.study, task);
  Environment env = make_default_environment(task.d, RngStream(seed, 0));
  MetaConfig meta = make_meta_config(cfg.preset, task.d, task.budget);

  RunOutcome out;
  if (task.algo == Algo::Passive) {
    out = run_passive(env, meta, task.budget);
  } else {
    if (task.rho) meta.unlabeled_budget = ceil_count(*task.rho * static_cast<double>(task.budget));
    out = run_active(env, meta);
  }
  RunRecord r = out.record;
  r.study = to_string(cfg.study);
  r.trial = task.trial;
  r.seed = seed;
  r.rho_configured = task.rho;
  if (cfg.record_timing)
    r.wall_ms = static_cast<std::size_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                             std::chrono::steady_clock::now() - start)
                                             .count());
  return r;
}

inline std::vector<TrialTask> plan_tasks(const ExperimentConfig& cfg) {
  std::vector<TrialTask> tasks;
  switch (cfg.study) {
    case Study::Convergence:
    case Study::Dims:
    case Study::Single: {
      std::vector<std::size_t> ds = cfg.d_list;
      std::vector<std::size_t> budgets = cfg.label_budgets;
      if (cfg.study == Study::Single) {
        ds.resize(1);
        budgets.resize(1);
      }
      for (auto d : ds)
        for (auto n : budgets)
          for (std::size_t t = 0; t < cfg.trials; ++t)
            for (Algo a : {Algo::Active, Algo::Passive}) tasks.push_back({a, d, n, t, std::nullopt});
      break;
    }
    case Study::Ratio:
      for (auto d : cfg.d_list)
        for (auto n : cfg.label_budgets)
          for (double rho : cfg.rho_list)
            for (std::size_t t = 0; t < cfg.trials; ++t)
              tasks.push_back({rho == 0.0 ? Algo::Passive : Algo::Active, d, n, t, rho});
      break;
  }
  return tasks;
}

/// Runs every trial on a pool of `cfg.workers` threads. Each trial owns its
/// environment and stream, so the result does not depend on the schedule.
/// Records come back sorted by (study, algo, d, trial), ties in plan order.
inline std::vector<RunRecord> run_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<TrialTask> tasks = plan_tasks(cfg);
  std::vector<RunRecord> records(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        records[i] = run_trial(cfg, tasks[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(cfg.workers, std::max<std::size_t>(1, tasks.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tuple(a.study, static_cast<int>(a.algo), a.d, a.trial) <
           std::tuple(b.study, static_cast<int>(b.algo), b.d, b.trial);
  });
  return records;
}

inline std::vector<RunRecord> run_convergence_study(ExperimentConfig cfg) {
  if (cfg.study != Study::Convergence) throw ConfigError("run_convergence_study: wrong study");
  return run_study(cfg);
}

inline std::vector<RunRecord> run_dims_study(ExperimentConfig cfg) {
  if (cfg.study != Study::Dims) throw ConfigError("run_dims_study: wrong study");
  return run_study(cfg);
}

inline std::vector<RunRecord> run_ratio_study(ExperimentConfig cfg) {
  if (cfg.study != Study::Ratio) throw ConfigError("run_ratio_study: wrong study");
  return run_study(cfg);
}

// ---------------------------------------------------------------------------
// Summaries

struct CellSummary {
  Algo algo = Algo::Active;
  std::size_t d = 0;
  std::size_t learning_labels = 0;
  std::optional<double> rho;
  std::size_t trials = 0;
  double median_err = 0.0;
};

struct SlopeSummary {
  Algo algo = Algo::Active;
  std::size_t d = 0;
  LogLogFit fit;
};

struct StudySummary {
  std::vector<CellSummary> cells;
  std::vector<SlopeSummary> slopes;

  const CellSummary* find(Algo algo, std::size_t d, std::size_t labels,
                          std::optional<double> rho = std::nullopt) const {
    for (const auto& c : cells)
      if (c.algo == algo && c.d == d && c.learning_labels == labels && c.rho == rho) return &c;
    return nullptr;
  }
  const SlopeSummary* find_slope(Algo algo, std::size_t d) const {
    for (const auto& s : slopes)
      if (s.algo == algo && s.d == d) return &s;
    return nullptr;
  }
};

/// Median error per (algo, d, learning labels, rho) cell, and for every
/// (algo, d) spanning two or more budgets without rho, the OLS slope of
/// ln(median err) on ln(learning labels).
inline StudySummary summarize(const std::vector<RunRecord>& records) {
  using Key = std::tuple<int, std::size_t, std::size_t, int, double>;
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : records) {
    const Key k{static_cast<int>(r.algo), r.d, r.learning_labels(), r.rho_configured ? 1 : 0,
                r.rho_configured.value_or(0.0)};
    groups[k].push_back(r.err);
  }
  StudySummary s;
  std::map<std::pair<int, std::size_t>, std::vector<std::pair<double, double>>> curves;
  for (auto& [k, errs] : groups) {
    CellSummary c;
    c.algo = static_cast<Algo>(std::get<0>(k));
    c.d = std::get<1>(k);
    c.learning_labels = std::get<2>(k);
    if (std::get<3>(k)) c.rho = std::get<4>(k);
    c.trials = errs.size();
    c.median_err = median(errs);
    s.cells.push_back(c);
    if (!c.rho && c.median_err > 0.0)
      curves[{std::get<0>(k), c.d}].emplace_back(static_cast<double>(c.learning_labels),
                                                 c.median_err);
  }
  for (auto& [k, pts] : curves) {
    if (pts.size() < 2) continue;
    s.slopes.push_back({static_cast<Algo>(k.first), k.second, fit_loglog_slope(pts)});
  }
  return s;
}

// ---------------------------------------------------------------------------
// Persistence

inline constexpr const char* kCsvHeader =
    "study,algo,d,trial,seed,n_labeled,m_total,rho_configured,err,b1,b2,labels_trisection,"
    "labels_al1,labels_al2,wall_ms";

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.study << ',' << to_string(r.algo) << ',' << r.d << ',' << r.trial << ',' << r.seed
     << ',' << r.n_labeled << ',' << r.m_total << ','
     << (r.rho_configured ? format_real(*r.rho_configured) : std::string()) << ','
     << format_real(r.err) << ',' << format_real(r.b1) << ',' << format_real(r.b2) << ','
     << r.labels_trisection << ',' << r.labels_al1 << ',' << r.labels_al2 << ',' << r.wall_ms;
  return os.str();
}

namespace detail {

/// Writes through a sibling temp file so a failed write leaves nothing behind.
template <typename Body>
void write_atomically(const std::string& path, Body&& body) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + tmp + "' for writing");
    body(os);
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write to '" + tmp + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into '" + path + "'");
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void write_csv(const std::vector<RunRecord>& records, const std::string& path) {
  detail::write_atomically(path, [&](std::ostream& os) {
    os << kCsvHeader << '\n';
    for (const auto& r : records) os << csv_row(r) << '\n';
  });
}

inline std::vector<RunRecord> read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw IoError("'" + path + "' does not carry the run-record header");
  std::vector<RunRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 15) throw IoError(path + ":" + std::to_string(lineno) + ": expected 15 fields");
    try {
      RunRecord r;
      r.study = f[0];
      if (f[1] == "active") r.algo = Algo::Active;
      else if (f[1] == "passive") r.algo = Algo::Passive;
      else throw IoError("bad algo '" + f[1] + "'");
      r.d = std::stoull(f[2]);
      r.trial = std::stoull(f[3]);
      r.seed = std::stoull(f[4]);
      r.n_labeled = std::stoull(f[5]);
      r.m_total = std::stoull(f[6]);
      if (!f[7].empty()) r.rho_configured = std::stod(f[7]);
      r.err = std::stod(f[8]);
      r.b1 = std::stod(f[9]);
      r.b2 = std::stod(f[10]);
      r.labels_trisection = std::stoull(f[11]);
      r.labels_al1 = std::stoull(f[12]);
      r.labels_al2 = std::stoull(f[13]);
      r.wall_ms = std::stoull(f[14]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed field");
    }
  }
  return out;
}

inline void write_summary(const StudySummary& s, const std::string& path) {
  detail::write_atomically(path, [&](std::ostream& os) {
    os << "# median estimation error per cell\n";
    os << "algo,d,learning_labels,rho,trials,median_err\n";
    for (const auto& c : s.cells)
      os << to_string(c.algo) << ',' << c.d << ',' << c.learning_labels << ','
         << (c.rho ? format_real(*c.rho) : std::string()) << ',' << c.trials << ','
         << format_real(c.median_err) << '\n';
    os << "# log-log fit of median error against learning labels\n";
    os << "algo,d,slope,intercept\n";
    for (const auto& sl : s.slopes)
      os << to_string(sl.algo) << ',' << sl.d << ',' << format_real(sl.fit.slope) << ','
         << format_real(sl.fit.intercept) << '\n';
  });
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_floating_point_v<T>) os << format_real(v[i]);
    else os << v[i];
  }
  return os.str();
}

/// Resolved parameters, one key=value per line.
inline void write_meta(const ExperimentConfig& cfg, const std::string& path) {
  detail::write_atomically(path, [&](std::ostream& os) {
    os << "library_version=" << CTXSEARCH_VERSION << '\n';
    os << "study=" << to_string(cfg.study) << '\n';
    os << "preset=" << to_string(cfg.preset) << '\n';
    os << "d=" << join(cfg.d_list) << '\n';
    os << "budgets=" << join(cfg.label_budgets) << '\n';
    if (cfg.study == Study::Ratio) os << "rho=" << join(cfg.rho_list) << '\n';
    os << "trials=" << cfg.trials << '\n';
    os << "seed=" << cfg.seed << '\n';
    os << "record_timing=" << (cfg.record_timing ? "true" : "false") << '\n';
    os << "budget_scope=learning-phase labels (runs at b1 and b2); trisection labels are extra\n";
    os << "budget_split=floor(n/2) at b1, n-floor(n/2) at b2\n";
    if (cfg.preset == PresetKind::Experimental)
      os << "kappa_n_rule=kappa_n = d + ln(n), n = learning-phase label budget of the run\n";
    os << "schedule_rule=largest whole dyadic epoch count fitting n/2 labels per run; "
          "last epoch takes the remainder\n";
    if (cfg.study == Study::Ratio)
      os << "unlabeled_budget_rule=ceil(rho*n) skippable contexts, half offered to the b1 run, "
            "the rest to the b2 run; rho=0 runs the passive baseline\n";
    for (auto d : cfg.d_list) {
      for (auto n : cfg.label_budgets) {
        const MetaConfig m = make_meta_config(cfg.preset, d, n);
        const ResolvedParameters r = m.resolve(d);
        const std::string key = "d" + std::to_string(d) + ".n" + std::to_string(n) + ".";
        os << key << "eps_s=" << format_real(r.eps_s) << '\n';
        os << key << "delta_s=" << format_real(r.delta_s) << '\n';
        os << key << "eps_0=" << format_real(r.eps_0) << '\n';
        os << key << "kappa_m=" << format_real(m.kappa_m) << '\n';
        os << key << "kappa_n=" << format_real(m.kappa_n) << '\n';
        try {
          MarginALConfig al = m.margin_config(d);
          const EpochSchedule s = budget_schedule(al, d, n / 2);
          os << key << "n_0=" << s.n_0 << '\n';
          os << key << "k_0=" << s.k_0 << '\n';
          os << key << "eps_a_backsolved=" << format_real(s.epochs.back().eps_k) << '\n';
        } catch (const BudgetExhausted&) {
          os << key << "k_0=infeasible\n";
        }
      }
    }
  });
}

/// Runs the configured study and, when out_path is set, writes
/// <out>, <out>.summary and <out>.meta.
inline std::vector<RunRecord> execute_study(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.out_path.empty()) {
    // fail before spending the compute, not after
    detail::write_atomically(cfg.out_path + ".probe", [](std::ostream&) {});
    std::error_code ec;
    std::filesystem::remove(cfg.out_path + ".probe", ec);
  }
  std::vector<RunRecord> records = run_study(cfg);
  if (!cfg.out_path.empty()) {
    write_csv(records, cfg.out_path);
    try {
      write_summary(summarize(records), cfg.out_path + ".summary");
      write_meta(cfg, cfg.out_path + ".meta");
    } catch (...) {
      std::error_code ec;
      std::filesystem::remove(cfg.out_path, ec);
      std::filesystem::remove(cfg.out_path + ".summary", ec);
      throw;
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// Configuration files: plain key=value lines mirroring the CLI flags.

inline std::vector<std::size_t> parse_count_list(const std::string& s, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& item : detail::split(s, ',')) {
    const std::string t = detail::trim(item);
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      if (t.empty() || t.front() == '-') throw std::invalid_argument(t);
      v = std::stoull(t, &pos);
    } catch (const std::logic_error&) {
      throw ConfigError("bad value '" + t + "' for " + key);
    }
    if (pos != t.size()) throw ConfigError("bad value '" + t + "' for " + key);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline std::vector<double> parse_real_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : detail::split(s, ',')) {
    const std::string t = detail::trim(item);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::logic_error&) {
      throw ConfigError("bad value '" + t + "' for " + key);
    }
    if (pos != t.size()) throw ConfigError("bad value '" + t + "' for " + key);
    out.push_back(v);
  }
  return out;
}

inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = detail::trim(raw);
  auto single_count = [&]() {
    const auto v = parse_count_list(value, key);
    if (v.size() != 1) throw ConfigError(key + " takes a single value");
    return v.front();
  };
  if (key == "d") cfg.d_list = parse_count_list(value, key);
  else if (key == "budgets") cfg.label_budgets = parse_count_list(value, key);
  else if (key == "trials") cfg.trials = single_count();
  else if (key == "seed") cfg.seed = single_count();
  else if (key == "preset") cfg.preset = parse_preset(value);
  else if (key == "rho") cfg.rho_list = parse_real_list(value, key);
  else if (key == "out") cfg.out_path = value;
  else if (key == "workers") cfg.workers = single_count();
  else if (key == "record_timing" || key == "record-timing") {
    if (value == "true" || value == "1") cfg.record_timing = true;
    else if (value == "false" || value == "0") cfg.record_timing = false;
    else throw ConfigError("record_timing must be true or false");
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    out.emplace_back(detail::trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return out;
}

}  // namespace ctxsearch
