// cfolab: command-line front end for the CFO estimation experiments.

#include "cfolab/cfolab.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace cfolab;

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::optional<int> trials;
  std::vector<double> snr;
  std::optional<double> epsilon;
  bool noiseless = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON experiment file");
  cmd->add_option("--preset", opt.preset, "paper-fig1 | paper-fig2 | paper-fig3");
  cmd->add_option("--seed", opt.seed, "master seed (u64)");
  cmd->add_option("--out", opt.out_path, "output CSV (default: stdout)");
  cmd->add_option("--trials", opt.trials, "Monte Carlo trials per point");
  cmd->add_option("--snr", opt.snr, "SNR points in dB")->delimiter(',');
  cmd->add_option("--epsilon", opt.epsilon, "fixed normalized CFO instead of uniform draws");
  cmd->add_flag("--noiseless", opt.noiseless, "disable receiver noise");
}

// Preset first, then the config file, then command-line overrides.
ExperimentSpec resolve(const CommonOptions& opt) {
  ExperimentSpec spec = preset_spec(Preset::paper_fig2);
  if (!opt.preset.empty()) spec = preset_spec(parse_preset(opt.preset));
  if (!opt.config_path.empty()) spec = load_spec(opt.config_path, spec);
  if (opt.seed) spec.seed = *opt.seed;
  if (opt.trials) spec.trials = *opt.trials;
  if (!opt.snr.empty()) spec.snr_points_db = opt.snr;
  if (opt.epsilon) spec.epsilon = {false, *opt.epsilon};
  if (opt.noiseless) spec.noiseless = true;
  spec.validate();
  for (const std::string& w : spec.config.warnings()) std::cerr << "warning: " << w << '\n';
  return spec;
}

template <typename Writer>
void emit(const std::string& path, Writer&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO-OFDM carrier frequency offset estimation experiments"};
  app.require_subcommand(1);

  CommonOptions opt;
  int iota = 7;
  bool with_ml = false;
  std::string frame_out;
  std::string analysis_out;
  bool with_emcb = false;
  std::string kind_name = "cbts";

  auto* estimate = app.add_subcommand("estimate", "estimate the CFO of one simulated frame");
  add_common(estimate, opt);
  estimate->add_option("--iota", iota, "correlation diagonal index");
  estimate->add_flag("--ml", with_ml, "also run the grid-search ML estimator");
  estimate->add_option("--frame-out", frame_out, "dump the received frame as CSV");

  auto* mse_snr = app.add_subcommand("mse-vs-snr", "empirical MSE per estimator and SNR");
  add_common(mse_snr, opt);
  mse_snr->add_flag("--with-emcb", with_emcb, "append EMCB rows (default for paper-fig3)");

  auto* mse_iota = app.add_subcommand("mse-vs-iota", "simplified estimator MSE over the diagonal index");
  add_common(mse_iota, opt);
  mse_iota->add_option("--analysis-out", analysis_out, "also write snr_db,iota,mse_analytic,mse_empirical,emcb");

  auto* emcb_cmd = app.add_subcommand("emcb", "extended Miller-Chang bound over SNR");
  add_common(emcb_cmd, opt);

  auto* bench = app.add_subcommand("bench", "median runtime of simplified vs grid-search ML");
  add_common(bench, opt);

  auto* gen = app.add_subcommand("gen-training", "write the training grid vectors as CSV");
  add_common(gen, opt);
  gen->add_option("--kind", kind_name, "cbts | rs")->check(CLI::IsMember({"cbts", "rs"}));

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentSpec spec = resolve(opt);

    if (estimate->parsed()) {
      check_iota(iota, spec.config.repetitions());
      const SingleShot shot = run_single(spec, iota, with_ml);
      std::printf("true_epsilon %.10f\n", shot.frame.true_epsilon);
      std::printf("epsilon_hat %.10f\n", shot.simplified.epsilon_hat);
      std::printf("kappa %.10e %+.10ej\n", shot.simplified.kappa.real(), shot.simplified.kappa.imag());
      std::printf("candidates");
      for (double c : shot.simplified.candidates) std::printf(" %.6f", c);
      std::printf("\n");
      if (shot.ml_grid) std::printf("epsilon_hat_ml_grid %.10f\n", shot.ml_grid->epsilon_hat);
      if (!frame_out.empty()) emit(frame_out, [&](std::ostream& os) { write_frame_csv(os, shot.frame); });
      if (!opt.out_path.empty()) {
        ResultRow row;
        row.estimator = "simplified";
        row.snr_db = shot.snr_db;
        row.iota = iota;
        row.trials = 1;
        const double err = shot.simplified.epsilon_hat - shot.frame.true_epsilon;
        row.empirical_mse = err * err;
        emit(opt.out_path, [&](std::ostream& os) { write_results_csv(os, {row}); });
      }
    } else if (mse_snr->parsed()) {
      std::vector<ResultRow> rows = run_mse_vs_snr(spec);
      if (with_emcb || opt.preset == "paper-fig3") {
        const std::vector<ResultRow> bound = run_emcb(spec);
        rows.insert(rows.end(), bound.begin(), bound.end());
      }
      emit(opt.out_path, [&](std::ostream& os) { write_results_csv(os, rows); });
    } else if (mse_iota->parsed()) {
      const std::vector<int> iotas = spec.iotas.empty() ? default_iotas(spec.config) : spec.iotas;
      const std::vector<ResultRow> rows = run_mse_vs_iota(spec, iotas);
      emit(opt.out_path, [&](std::ostream& os) { write_results_csv(os, rows); });
      if (!analysis_out.empty()) {
        std::vector<AnalysisRow> analysis;
        for (const ResultRow& r : rows) {
          AnalysisRow a;
          a.snr_db = r.snr_db;
          a.iota = r.iota.value_or(0);
          if (r.analytic_mse) a.mse_analytic = *r.analytic_mse;
          if (r.empirical_mse) a.mse_empirical = *r.empirical_mse;
          analysis.push_back(a);
        }
        emit(analysis_out, [&](std::ostream& os) { write_analysis_csv(os, analysis); });
      }
    } else if (emcb_cmd->parsed()) {
      const std::vector<ResultRow> rows = run_emcb(spec);
      emit(opt.out_path, [&](std::ostream& os) { write_results_csv(os, rows); });
    } else if (bench->parsed()) {
      const BenchResult res = run_bench(spec);
      std::fprintf(stderr, "repetitions %d  median simplified %.2f us  median ml_grid %.2f us  ratio %.1f\n",
                   res.repetitions, res.median_simplified_us, res.median_ml_grid_us, res.speedup());
      ResultRow simplified;
      simplified.estimator = "simplified";
      simplified.snr_db = res.snr_db;
      simplified.iota = spec.estimators.front().has_iota() ? spec.estimators.front().iota : 7;
      simplified.trials = res.repetitions;
      simplified.mean_runtime_us = res.mean_simplified_us;
      ResultRow ml = simplified;
      ml.estimator = "ml_grid";
      ml.iota.reset();
      ml.mean_runtime_us = res.mean_ml_grid_us;
      emit(opt.out_path, [&](std::ostream& os) { write_results_csv(os, {simplified, ml}); });
    } else if (gen->parsed()) {
      RandomSource rng(spec.seed, RandomSource::stream(0, 3));
      const TrainingSet ts = build_training(spec.config, kind_name == "rs" ? TrainingKind::rs : TrainingKind::cbts, rng);
      emit(opt.out_path, [&](std::ostream& os) { write_training_csv(os, ts); });
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
