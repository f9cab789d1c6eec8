#include "arrayloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>

#include "arrayloc/error.hpp"
#include "arrayloc/eval.hpp"
#include "arrayloc/io.hpp"
#include "arrayloc/mds.hpp"
#include "arrayloc/ranging.hpp"
#include "arrayloc/units.hpp"

namespace arrayloc {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (n_list.empty() || c_list.empty() || b_list.empty()) throw ConfigError("sweep axes must be non-empty");
  for (int n : n_list) {
    if (n < 4) throw ConfigError("every N must be at least 4");
    for (double c : c_list) {
      if (!(c > 0.0 && c <= 1.0)) throw ConfigError("connectivity must lie in (0, 1]");
      if (c < min_connectivity(n) - 1e-12) {
        throw ConfigError("connectivity " + format_double(c) + " is below the minimum " +
                          format_double(min_connectivity(n)) + " for N=" + std::to_string(n));
      }
    }
  }
  for (double b : b_list) {
    if (!(b > 0.0) || b >= fs) throw ConfigError("bandwidth must lie in (0, fs)");
  }
  if (!(tau_p > 0.0) || !(fs > 0.0) || rise_fall < 0.0 || tau_p < 10.0 * rise_fall) {
    throw ConfigError("waveform timing is inconsistent");
  }
  if (!std::isfinite(snr_h_db)) throw ConfigError("snr_h_db must be finite");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(clock_offset_max_s >= 0.0)) throw ConfigError("clock_offset_max_s must be non-negative");
  switch (layout.kind) {
    case LayoutSpec::Kind::RandomBox:
      if (!(layout.extent > 0.0)) throw ConfigError("layout extent must be positive");
      break;
    case LayoutSpec::Kind::Circle:
      if (!(layout.radius > 0.0) || layout.jitter < 0.0 || layout.jitter >= 1.0 || layout.min_separation < 0.0) {
        throw ConfigError("circle layout parameters out of range");
      }
      break;
    case LayoutSpec::Kind::File:
      if (layout.path.empty()) throw ConfigError("file layout needs a path");
      if (n_list.size() != 1) throw ConfigError("a file layout fixes N; N_list must hold one value");
      break;
  }
  if (ranging_mode == RangingMode::SignalLevel && !noiseless && !allow_large_signal_level) {
    const int n_max = *std::max_element(n_list.begin(), n_list.end());
    if (n_max > 8 || trials > 50) {
      throw ConfigError("signal-level ranging is limited to N <= 8 and trials <= 50; "
                        "set allow_large_signal_level to override");
    }
  }
  solver.validate();
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SolverConfig solver_from_json(const json& j) {
  check_keys(j,
             {"population_size", "max_generations", "convergence_delta", "convergence_window", "parent_fraction",
              "mutation_factor", "crossover_rate", "strategy", "pbest_fraction", "encoding", "exact_fit_tolerance", "workers"},
             "solver");
  SolverConfig s;
  take(j, "population_size", s.population_size);
  take(j, "max_generations", s.max_generations);
  take(j, "convergence_delta", s.convergence_delta);
  take(j, "convergence_window", s.convergence_window);
  take(j, "parent_fraction", s.parent_fraction);
  take(j, "mutation_factor", s.mutation_factor);
  take(j, "crossover_rate", s.crossover_rate);
  take(j, "pbest_fraction", s.pbest_fraction);
  take(j, "exact_fit_tolerance", s.exact_fit_tolerance);
  take(j, "workers", s.workers);
  if (j.contains("strategy")) {
    const auto name = j.at("strategy").get<std::string>();
    if (name == "best1bin") {
      s.strategy = DeStrategy::Best1Bin;
    } else if (name == "rand1bin") {
      s.strategy = DeStrategy::Rand1Bin;
    } else if (name == "current_to_pbest1bin") {
      s.strategy = DeStrategy::CurrentToPBest1Bin;
    } else {
      throw ConfigError("unknown DE strategy '" + name + "'");
    }
  }
  if (j.contains("encoding")) {
    const auto name = j.at("encoding").get<std::string>();
    if (name == "distance") {
      s.encoding = GenomeEncoding::Distance;
    } else if (name == "squared_distance") {
      s.encoding = GenomeEncoding::SquaredDistance;
    } else {
      throw ConfigError("unknown genome encoding '" + name + "'");
    }
  }
  return s;
}

LayoutSpec layout_from_json(const json& j) {
  check_keys(j, {"type", "extent", "radius", "jitter", "min_separation", "path"}, "layout");
  LayoutSpec l;
  const auto type = j.value("type", std::string("random-box"));
  if (type == "random-box") {
    l.kind = LayoutSpec::Kind::RandomBox;
  } else if (type == "circle") {
    l.kind = LayoutSpec::Kind::Circle;
  } else if (type == "file") {
    l.kind = LayoutSpec::Kind::File;
  } else {
    throw ConfigError("unknown layout type '" + type + "'");
  }
  take(j, "extent", l.extent);
  take(j, "radius", l.radius);
  take(j, "jitter", l.jitter);
  take(j, "min_separation", l.min_separation);
  if (j.contains("path")) l.path = j.at("path").get<std::string>();
  return l;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  try {
    check_keys(j,
               {"trials", "N_list", "c_list", "B_list", "snr_h_db", "tau_p", "fs", "rise_fall", "layout",
                "ranging_mode", "noiseless", "allow_large_signal_level", "clock_offset_max_s", "solver", "seed",
                "output_dir", "workers"},
               "config");
    ExperimentConfig cfg;
    take(j, "trials", cfg.trials);
    take(j, "N_list", cfg.n_list);
    take(j, "c_list", cfg.c_list);
    take(j, "B_list", cfg.b_list);
    take(j, "snr_h_db", cfg.snr_h_db);
    take(j, "tau_p", cfg.tau_p);
    take(j, "fs", cfg.fs);
    take(j, "rise_fall", cfg.rise_fall);
    take(j, "noiseless", cfg.noiseless);
    take(j, "allow_large_signal_level", cfg.allow_large_signal_level);
    take(j, "clock_offset_max_s", cfg.clock_offset_max_s);
    take(j, "seed", cfg.seed);
    take(j, "workers", cfg.workers);
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("layout")) cfg.layout = layout_from_json(j.at("layout"));
    if (j.contains("solver")) cfg.solver = solver_from_json(j.at("solver"));
    if (j.contains("ranging_mode")) {
      const auto mode = j.at("ranging_mode").get<std::string>();
      if (mode == "statistical") {
        cfg.ranging_mode = RangingMode::Statistical;
      } else if (mode == "signal_level") {
        cfg.ranging_mode = RangingMode::SignalLevel;
      } else {
        throw ConfigError("unknown ranging_mode '" + mode + "'");
      }
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  // Relative paths inside the config are taken relative to the config file.
  if (j.is_object() && j.contains("layout") && j["layout"].is_object() && j["layout"].contains("path") &&
      j["layout"]["path"].is_string()) {
    std::filesystem::path p = j["layout"]["path"].get<std::string>();
    if (p.is_relative()) j["layout"]["path"] = (path.parent_path() / p).string();
  }
  return config_from_json(j);
}

namespace {

enum Stream : std::uint64_t { kLayoutStream = 1, kMaskStream = 2, kNoiseStream = 3, kSolverStream = 4 };

std::shared_ptr<const RangingFrontEnd> front_end_for(const WaveformParams& p) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double, double>, std::shared_ptr<const RangingFrontEnd>> cache;
  const auto key = std::make_tuple(p.bandwidth_hz, p.pulse_s, p.sample_rate, p.rise_fall_s);
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, RangingFrontEnd::make(p)).first;
  return it->second;
}

NodeLayout draw_layout(const ExperimentConfig& cfg, int n, Rng& rng) {
  switch (cfg.layout.kind) {
    case LayoutSpec::Kind::RandomBox:
      return random_box_layout(n, cfg.layout.extent, rng);
    case LayoutSpec::Kind::Circle:
      return circle_layout(n, cfg.layout.radius, cfg.layout.jitter, cfg.layout.min_separation, rng);
    case LayoutSpec::Kind::File: {
      NodeLayout l = read_layout_csv(cfg.layout.path);
      if (l.count() != n) throw ConfigError("layout file holds a different number of nodes than N");
      return l;
    }
  }
  throw ConfigError("unknown layout kind");
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, int n, double c, double bandwidth_hz, int trial_index) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.n = n;
  rec.c = c;
  rec.bandwidth_hz = bandwidth_hz;
  rec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial_index));

  try {
    Rng layout_rng = make_rng(rec.seed, kLayoutStream);
    Rng mask_rng = make_rng(rec.seed, kMaskStream);
    Rng noise_rng = make_rng(rec.seed, kNoiseStream);
    Rng solver_rng = make_rng(rec.seed, kSolverStream);

    const NodeLayout truth = draw_layout(cfg, n, layout_rng);
    const AdjacencyMask mask = random_completable_mask(n, c, mask_rng);
    const WaveformParams wfm{bandwidth_hz, cfg.tau_p, cfg.fs, cfg.rise_fall};

    Edm observed;
    if (cfg.noiseless) {
      observed = mask_edm(edm_from_points(truth), mask);
    } else if (cfg.ranging_mode == RangingMode::Statistical) {
      observed = sample_edm_statistical(truth, mask, db_to_linear(cfg.snr_h_db), wfm, noise_rng);
    } else {
      RangingScenario scn = make_scenario(truth, mask, db_to_linear(cfg.snr_h_db), front_end_for(wfm));
      std::uniform_real_distribution<double> offset(-cfg.clock_offset_max_s, cfg.clock_offset_max_s);
      for (auto& e : scn.clocks.offsets) e = offset(noise_rng);
      observed = sample_edm_signal_level(scn, noise_rng);
    }

    SolverConfig scfg = cfg.solver;
    scfg.workers = 1;
    const int m = truth.dim();
    const SolverRun run = complete_and_localize(observed, mask, m, scfg, solver_rng);

    const CompletionProblem prob(observed, mask, m);
    rec.cost_history = run.best_cost_history;
    for (const auto& v : run.best_vector_history) {
      const NodeLayout est(classical_mds_kernel(prob.complete(v), m));
      rec.evm_history.push_back(align_and_evm(est, truth).evm_mean);
    }
    const AlignmentResult fin = align_and_evm(run.recovered_layout, truth);
    rec.final_evm = fin.evm_mean;
    rec.final_evm_rms = fin.evm_rms;
    rec.final_cost = run.final_cost();
    rec.generations_used = run.generations_used;
    rec.converged = run.converged;
  } catch (const Error& e) {
    rec.error = e.what();
    rec.final_evm = rec.final_evm_rms = rec.final_cost = std::numeric_limits<double>::quiet_NaN();
    rec.cost_history.clear();
    rec.evm_history.clear();
    rec.generations_used = 0;
    rec.converged = false;
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Job {
    int n;
    double c;
    double b;
    int trial_index;
  };
  std::vector<Job> jobs;
  for (int n : cfg.n_list)
    for (double c : cfg.c_list)
      for (double b : cfg.b_list)
        for (int t = 0; t < cfg.trials; ++t) jobs.push_back({n, c, b, t});

  std::vector<TrialRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const auto& job = jobs[k];
      records[k] = run_trial(cfg, job.n, job.c, job.b, job.trial_index);
      records[k].trial_id = static_cast<int>(k);
    }
  };
  const int threads = std::min<int>(cfg.workers, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  return records;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw InvalidInput("cannot summarize an empty record set");
  std::vector<SummaryRow> rows;
  std::vector<std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& s) {
      return s.n == r.n && s.c == r.c && s.bandwidth_hz == r.bandwidth_hz;
    });
    if (it == rows.end()) {
      rows.push_back({});
      rows.back().n = r.n;
      rows.back().c = r.c;
      rows.back().bandwidth_hz = r.bandwidth_hz;
      groups.emplace_back();
      it = rows.end() - 1;
    }
    groups[static_cast<std::size_t>(it - rows.begin())].push_back(&r);
  }

  for (std::size_t g = 0; g < rows.size(); ++g) {
    auto& row = rows[g];
    std::vector<double> evm, rms, gens, evm_conv;
    int converged = 0;
    std::size_t curve_len = 0;
    for (const auto* r : groups[g]) {
      ++row.trials;
      if (!r->error.empty()) {
        ++row.failures;
        continue;
      }
      evm.push_back(r->final_evm);
      rms.push_back(r->final_evm_rms);
      gens.push_back(r->generations_used);
      if (r->converged) {
        ++converged;
        evm_conv.push_back(r->final_evm);
      }
      curve_len = std::max(curve_len, r->evm_history.size());
    }
    row.mean_evm = mean_of(evm);
    row.median_evm = median_of(evm);
    if (evm.size() > 1) {
      double ss = 0.0;
      for (double e : evm) ss += (e - row.mean_evm) * (e - row.mean_evm);
      row.std_evm = std::sqrt(ss / static_cast<double>(evm.size() - 1));
    }
    row.mean_evm_rms = mean_of(rms);
    row.mean_evm_converged = mean_of(evm_conv);
    row.mean_generations = mean_of(gens);
    row.median_generations = median_of(gens);
    row.convergence_rate = static_cast<double>(converged) / row.trials;
    row.beamform_freq_hz = row.mean_evm > 0.0 ? max_beamform_freq(row.mean_evm)
                                              : std::numeric_limits<double>::infinity();

    row.mean_evm_curve.assign(curve_len, 0.0);
    for (std::size_t k = 0; k < curve_len && !evm.empty(); ++k) {
      double sum = 0.0;
      for (const auto* r : groups[g]) {
        if (!r->error.empty()) continue;
        sum += k < r->evm_history.size() ? r->evm_history[k] : r->evm_history.back();
      }
      row.mean_evm_curve[k] = sum / static_cast<double>(evm.size());
    }
  }
  return rows;
}

namespace {

std::string csv_text(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

json number(double v) {
  // JSON has no NaN or infinity; those become null.
  return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

void write_outputs(const std::filesystem::path& dir, const std::vector<TrialRecord>& records,
                   const std::vector<SummaryRow>& summary) {
  std::filesystem::create_directories(dir);
  std::vector<const TrialRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TrialRecord* a, const TrialRecord* b) { return a->trial_id < b->trial_id; });

  std::ofstream rec(dir / "records.csv");
  rec << "trial_id,trial_index,N,c,B,seed,final_evm,final_evm_rms,final_cost,generations_used,converged,error\n";
  for (const auto* r : sorted) {
    rec << r->trial_id << ',' << r->trial_index << ',' << r->n << ',' << format_double(r->c) << ','
        << format_double(r->bandwidth_hz) << ',' << r->seed << ',' << format_double(r->final_evm) << ','
        << format_double(r->final_evm_rms) << ',' << format_double(r->final_cost) << ',' << r->generations_used
        << ',' << (r->converged ? 1 : 0) << ',' << csv_text(r->error) << '\n';
  }

  std::ofstream conv(dir / "convergence.csv");
  conv << "trial_id,generation,cost,evm\n";
  for (const auto* r : sorted) {
    for (std::size_t g = 0; g < r->cost_history.size(); ++g) {
      conv << r->trial_id << ',' << g << ',' << format_double(r->cost_history[g]) << ','
           << format_double(r->evm_history[g]) << '\n';
    }
  }

  std::ofstream sum(dir / "summary.csv");
  sum << "N,c,B,trials,failures,mean_evm,median_evm,std_evm,mean_evm_rms,mean_evm_converged,mean_generations,"
         "median_generations,convergence_rate,beamform_freq_hz\n";
  for (const auto& s : summary) {
    sum << s.n << ',' << format_double(s.c) << ',' << format_double(s.bandwidth_hz) << ',' << s.trials << ','
        << s.failures << ',' << format_double(s.mean_evm) << ',' << format_double(s.median_evm) << ','
        << format_double(s.std_evm) << ',' << format_double(s.mean_evm_rms) << ','
        << format_double(s.mean_evm_converged) << ',' << format_double(s.mean_generations) << ','
        << format_double(s.median_generations) << ',' << format_double(s.convergence_rate) << ','
        << format_double(s.beamform_freq_hz) << '\n';
  }

  json j;
  j["points"] = json::array();
  for (const auto& s : summary) {
    json p;
    p["N"] = s.n;
    p["c"] = s.c;
    p["B"] = s.bandwidth_hz;
    p["trials"] = s.trials;
    p["failures"] = s.failures;
    p["mean_evm"] = number(s.mean_evm);
    p["median_evm"] = number(s.median_evm);
    p["std_evm"] = number(s.std_evm);
    p["mean_evm_rms"] = number(s.mean_evm_rms);
    p["mean_evm_converged"] = number(s.mean_evm_converged);
    p["mean_generations"] = number(s.mean_generations);
    p["median_generations"] = number(s.median_generations);
    p["convergence_rate"] = s.convergence_rate;
    p["beamform_freq_hz"] = number(s.beamform_freq_hz);
    json curve = json::array();
    for (double v : s.mean_evm_curve) curve.push_back(number(v));
    p["mean_evm_curve"] = curve;
    j["points"].push_back(p);
  }
  double total = 0.0;
  json walls = json::array();
  for (const auto* r : sorted) {
    total += r->wall_time;
    walls.push_back(r->wall_time);
  }
  j["trial_wall_time_s"] = walls;
  j["total_wall_time_s"] = total;
  std::ofstream js(dir / "summary.json");
  js << j.dump(2) << '\n';
  if (!rec || !conv || !sum || !js) throw InvalidInput("failed writing results to " + dir.string());
}

}  // namespace arrayloc
