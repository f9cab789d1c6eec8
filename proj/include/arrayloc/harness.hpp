#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "arrayloc/solver.hpp"

namespace arrayloc {

struct LayoutSpec {
  enum class Kind { RandomBox, Circle, File };
  Kind kind = Kind::RandomBox;
  double extent = 5.0;          // random box side, m
  double radius = 1.0;          // circle, m
  double jitter = 0.1;          // circle radial jitter, fraction of radius
  double min_separation = 0.45;  // circle, m
  std::filesystem::path path;   // file
};

enum class RangingMode { Statistical, SignalLevel };

struct ExperimentConfig {
  int trials = 250;
  std::vector<int> n_list{6};
  std::vector<double> c_list{0.8};
  std::vector<double> b_list{40e6};
  double snr_h_db = 34.0;
  double tau_p = 10e-6;
  double fs = 200e6;
  double rise_fall = 50e-9;
  LayoutSpec layout;
  RangingMode ranging_mode = RangingMode::Statistical;
  bool noiseless = false;
  bool allow_large_signal_level = false;
  double clock_offset_max_s = 1e-6;  // signal level: uniform +/- bound on node clock offsets
  SolverConfig solver;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "results";
  int workers = 1;

  /// Throws ConfigError; checks every (N, c) against the minimum connectivity.
  void validate() const;
};

/// Strict parse: unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct TrialRecord {
  int trial_id = 0;     // global, sweep-point major
  int trial_index = 0;  // within the sweep point; drives the seed
  int n = 0;
  double c = 0.0;
  double bandwidth_hz = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> cost_history;
  std::vector<double> evm_history;
  double final_evm = 0.0;
  double final_evm_rms = 0.0;
  double final_cost = 0.0;
  int generations_used = 0;
  bool converged = false;
  double wall_time = 0.0;
  std::string error;  // non-empty when the trial failed
};

/// One trial at one sweep point, fully determined by (cfg.seed, trial_index).
TrialRecord run_trial(const ExperimentConfig& cfg, int n, double c, double bandwidth_hz, int trial_index);

/// Every sweep point x trial, ordered by trial_id.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
  int n = 0;
  double c = 0.0;
  double bandwidth_hz = 0.0;
  int trials = 0;
  int failures = 0;
  double mean_evm = 0.0;
  double median_evm = 0.0;
  double std_evm = 0.0;
  double mean_evm_rms = 0.0;
  double mean_evm_converged = 0.0;
  double mean_generations = 0.0;
  double median_generations = 0.0;
  double convergence_rate = 0.0;
  double beamform_freq_hz = 0.0;  // implied by mean_evm
  std::vector<double> mean_evm_curve;  // by generation, runs carry their last value forward
};

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

void write_outputs(const std::filesystem::path& dir, const std::vector<TrialRecord>& records,
                   const std::vector<SummaryRow>& summary);

}  // namespace arrayloc
