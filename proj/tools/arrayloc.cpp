#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "arrayloc/error.hpp"
#include "arrayloc/eval.hpp"
#include "arrayloc/geometry.hpp"
#include "arrayloc/harness.hpp"
#include "arrayloc/io.hpp"
#include "arrayloc/mds.hpp"
#include "arrayloc/ranging.hpp"
#include "arrayloc/snr.hpp"
#include "arrayloc/solver.hpp"
#include "arrayloc/units.hpp"

using namespace arrayloc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStructural = 3;

void print_layout(const NodeLayout& l) {
  for (int i = 0; i < l.count(); ++i) {
    std::cout << "node " << i;
    for (int k = 0; k < l.dim(); ++k) std::cout << ' ' << format_double(l.coords()(k, i));
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed array ranging simulation and EDM-completion localization"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one trial and print its EVM");
  int sim_n = 6;
  double sim_c = 0.8, sim_b = 40e6, sim_snr = 34.0, sim_pulse = 10e-6, sim_fs = 200e6;
  std::string sim_layout = "random-box", sim_mode = "statistical";
  std::uint64_t sim_seed = 1;
  int sim_trial = 0;
  bool sim_noiseless = false;
  sim->add_option("--nodes,-n", sim_n, "Array size")->capture_default_str();
  sim->add_option("--connectivity,-c", sim_c, "Fraction of measured links")->capture_default_str();
  sim->add_option("--bandwidth", sim_b, "Tone separation, Hz")->capture_default_str();
  sim->add_option("--snr-db", sim_snr, "Array SNR (harmonic mean), dB")->capture_default_str();
  sim->add_option("--pulse", sim_pulse, "Pulse duration, s")->capture_default_str();
  sim->add_option("--fs", sim_fs, "Sample rate, Sa/s")->capture_default_str();
  sim->add_option("--layout", sim_layout, "random-box or circle")
      ->check(CLI::IsMember({"random-box", "circle"}))
      ->capture_default_str();
  sim->add_option("--mode", sim_mode, "statistical or signal_level")
      ->check(CLI::IsMember({"statistical", "signal_level"}))
      ->capture_default_str();
  sim->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
  sim->add_option("--trial", sim_trial, "Trial index under the master seed")->capture_default_str();
  sim->add_flag("--noiseless", sim_noiseless, "Use exact distances");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a Monte Carlo sweep from a JSON config");
  std::string sweep_config, sweep_out;
  int sweep_workers = 0;
  sweep->add_option("--config", sweep_config, "Experiment config (JSON)")->required();
  sweep->add_option("--output-dir", sweep_out, "Override the config's output_dir");
  sweep->add_option("--workers", sweep_workers, "Override the config's worker count");

  // crlb
  auto* crlb = app.add_subcommand("crlb", "Ranging precision bound of the two-tone waveform");
  double crlb_b = 40e6, crlb_snr = 34.0, crlb_pulse = 10e-6, crlb_fs = 200e6;
  crlb->add_option("--bandwidth", crlb_b, "Tone separation, Hz")->capture_default_str();
  crlb->add_option("--snr-db", crlb_snr, "Link SNR, dB")->capture_default_str();
  crlb->add_option("--pulse", crlb_pulse, "Pulse duration, s")->capture_default_str();
  crlb->add_option("--fs", crlb_fs, "Sample rate, Sa/s")->capture_default_str();

  // mds
  auto* mds = app.add_subcommand("mds", "Classical MDS of a complete EDM");
  std::string mds_edm, mds_out;
  int mds_dim = 2;
  mds->add_option("--edm", mds_edm, "Squared-distance CSV")->required();
  mds->add_option("--dim", mds_dim, "Embedding dimension")->capture_default_str();
  mds->add_option("--out", mds_out, "Write the layout CSV here");

  // localize
  auto* loc = app.add_subcommand("localize", "Complete a partial EDM and localize");
  std::string loc_edm, loc_mask, loc_out;
  int loc_dim = 2;
  std::uint64_t loc_seed = 1;
  loc->add_option("--edm", loc_edm, "Squared-distance CSV")->required();
  loc->add_option("--mask", loc_mask, "Adjacency CSV; defaults to the EDM's observed pattern");
  loc->add_option("--dim", loc_dim, "Embedding dimension")->capture_default_str();
  loc->add_option("--seed", loc_seed, "Solver seed")->capture_default_str();
  loc->add_option("--out", loc_out, "Write the layout CSV here");

  // snr-estimate
  auto* snr = app.add_subcommand("snr-estimate", "Blind SNR estimate from aligned capture windows");
  std::string snr_samples;
  snr->add_option("--samples", snr_samples, "I/Q CSV (i0,q0,i1,q1,...)")->required();

  // completable
  auto* comp = app.add_subcommand("completable", "Check whether an adjacency mask can be completed in 2-D");
  std::string comp_mask;
  comp->add_option("--mask", comp_mask, "Adjacency CSV")->required();

  // waveform
  auto* wav = app.add_subcommand("waveform", "Dump the two-tone pulse as I/Q CSV");
  double wav_b = 40e6, wav_pulse = 10e-6, wav_fs = 200e6, wav_rf = 50e-9;
  std::string wav_out;
  wav->add_option("--bandwidth", wav_b, "Tone separation, Hz")->capture_default_str();
  wav->add_option("--pulse", wav_pulse, "Pulse duration, s")->capture_default_str();
  wav->add_option("--fs", wav_fs, "Sample rate, Sa/s")->capture_default_str();
  wav->add_option("--rise-fall", wav_rf, "Ramp duration, s")->capture_default_str();
  wav->add_option("--out", wav_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) {
      ExperimentConfig cfg;
      cfg.seed = sim_seed;
      cfg.n_list = {sim_n};
      cfg.c_list = {sim_c};
      cfg.b_list = {sim_b};
      cfg.snr_h_db = sim_snr;
      cfg.tau_p = sim_pulse;
      cfg.fs = sim_fs;
      cfg.noiseless = sim_noiseless;
      cfg.trials = 1;
      cfg.layout.kind = sim_layout == "circle" ? LayoutSpec::Kind::Circle : LayoutSpec::Kind::RandomBox;
      cfg.ranging_mode = sim_mode == "signal_level" ? RangingMode::SignalLevel : RangingMode::Statistical;
      cfg.validate();
      const TrialRecord r = run_trial(cfg, sim_n, sim_c, sim_b, sim_trial);
      if (!r.error.empty()) throw StructuralError(r.error);
      std::cout << "evm_mean_m " << format_double(r.final_evm) << '\n'
                << "evm_rms_m " << format_double(r.final_evm_rms) << '\n'
                << "final_cost " << format_double(r.final_cost) << '\n'
                << "generations " << r.generations_used << '\n'
                << "converged " << (r.converged ? "true" : "false") << '\n';
    } else if (*sweep) {
      ExperimentConfig cfg = load_config(sweep_config);
      if (!sweep_out.empty()) cfg.output_dir = sweep_out;
      if (sweep_workers > 0) cfg.workers = sweep_workers;
      const auto records = run_experiment(cfg);
      const auto summary = summarize(records);
      write_outputs(cfg.output_dir, records, summary);
      for (const auto& s : summary) {
        std::printf("N=%d c=%.3f B=%.4g Hz: mean EVM %.4g m, median gens %.1f, converged %.0f%%, failures %d\n", s.n,
                    s.c, s.bandwidth_hz, s.mean_evm, s.median_generations, 100.0 * s.convergence_rate, s.failures);
      }
      std::cout << "wrote " << cfg.output_dir.string() << '\n';
    } else if (*crlb) {
      const double sigma = crlb_sigma_d(crlb_b, crlb_pulse, db_to_linear(crlb_snr), crlb_fs);
      std::cout << "sigma_d_m " << format_double(sigma) << '\n'
                << "max_beamform_freq_hz " << format_double(max_beamform_freq(sigma)) << '\n';
    } else if (*mds) {
      const MdsResult r = classical_mds(read_edm_csv(mds_edm), mds_dim);
      if (r.clipped) std::cerr << "warning: negative eigenvalues clipped; input is not Euclidean\n";
      if (!mds_out.empty()) write_layout_csv(mds_out, r.layout);
      print_layout(r.layout);
    } else if (*loc) {
      const Edm d = read_edm_csv(loc_edm);
      const AdjacencyMask mask = loc_mask.empty() ? d.observed() : read_mask_csv(loc_mask);
      Rng rng = make_rng(loc_seed, 0);
      const SolverRun run = complete_and_localize(d, mask, loc_dim, SolverConfig{}, rng);
      std::cout << "final_cost " << format_double(run.final_cost()) << '\n'
                << "generations " << run.generations_used << '\n'
                << "converged " << (run.converged ? "true" : "false") << '\n';
      if (!loc_out.empty()) write_layout_csv(loc_out, run.recovered_layout);
      print_layout(run.recovered_layout);
    } else if (*snr) {
      const BlindSnrEstimate e = blind_snr_estimate(read_iq_csv(snr_samples));
      std::cout << "signal_power " << format_double(e.signal_power) << '\n'
                << "noise_power " << format_double(e.noise_power) << '\n'
                << "snr_db " << format_double(linear_to_db(e.snr)) << '\n';
    } else if (*comp) {
      const bool ok = is_completable(read_mask_csv(comp_mask));
      std::cout << (ok ? "completable" : "not completable") << '\n';
      return ok ? 0 : kExitStructural;
    } else if (*wav) {
      write_waveform_csv(wav_out, synth_two_tone(wav_b, wav_pulse, wav_fs, wav_rf).samples);
    }
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStructural;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
