#pragma once

// Seeded Monte Carlo campaigns: MSE versus SNR, MSE versus ι, EMCB rows and
// the wall-clock comparison of the simplified and grid-search estimators.
//
// Stream layout per trial t (all keyed by the campaign seed):
//   stream(t, 1)        CFO draw, then channel taps
//   stream(t, 2, s)     noise at SNR index s (shared by all estimators)
//   stream(t, 3)        RS training phases
// Results are stored per trial and reduced in trial order, so the output does
// not depend on the thread count.

#include "cfolab/analysis.hpp"
#include "cfolab/channel.hpp"
#include "cfolab/estimator.hpp"
#include "cfolab/numerics.hpp"
#include "cfolab/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cfolab {

struct EstimatorId {
  enum class Kind { simplified, ml_grid, simplified_rs };
  Kind kind = Kind::simplified;
  int iota = 7;  // unused for ml_grid

  std::string name() const {
    switch (kind) {
      case Kind::simplified: return "simplified";
      case Kind::ml_grid: return "ml_grid";
      case Kind::simplified_rs: return "simplified_rs";
    }
    return {};
  }
  bool has_iota() const { return kind != Kind::ml_grid; }
  TrainingKind training() const { return kind == Kind::simplified_rs ? TrainingKind::rs : TrainingKind::cbts; }

  /// "simplified:7", "simplified_rs:7" or "ml_grid"
  static EstimatorId parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    EstimatorId id;
    if (head == "simplified") {
      id.kind = Kind::simplified;
    } else if (head == "simplified_rs") {
      id.kind = Kind::simplified_rs;
    } else if (head == "ml_grid") {
      if (colon != std::string::npos) throw ConfigError("ml_grid takes no iota: '" + text + "'");
      id.kind = Kind::ml_grid;
      return id;
    } else {
      throw ConfigError("unknown estimator id '" + text + "'");
    }
    if (colon == std::string::npos) throw ConfigError("estimator '" + text + "' needs an iota, e.g. simplified:7");
    try {
      std::size_t used = 0;
      id.iota = std::stoi(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("bad iota in estimator id '" + text + "'");
    }
    return id;
  }
};

struct EpsilonMode {
  bool uniform_random = true;
  double fixed_value = 0.0;
};

struct ExperimentSpec {
  SystemConfig config;
  ChannelProfile profile = paper_profile();
  std::vector<EstimatorId> estimators{EstimatorId{}};
  std::vector<double> snr_points_db{0, 5, 10, 15, 20, 25};
  std::vector<int> iotas;  // mse-vs-iota sweep; empty means 1..Q-1
  int trials = 2000;
  std::uint64_t seed = 1;
  EpsilonMode epsilon{};
  bool noiseless = false;
  int emcb_draws = 500;
  int bench_repetitions = 100;
  GridSpec grid{};
  unsigned threads = 0;  // 0: CFOLAB_THREADS or hardware concurrency

  void validate() const {
    config.validate();
    profile.validate(config.cp_length);
    if (profile.length() > config.max_channel_length)
      throw ConfigError("channel profile is longer than L = " + std::to_string(config.max_channel_length));
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (estimators.empty()) throw ConfigError("no estimators selected");
    for (const EstimatorId& e : estimators)
      if (e.has_iota() && (e.iota < 1 || e.iota >= config.repetitions()))
        throw ConfigError("estimator " + e.name() + " iota out of [1, Q-1]");
    for (int iota : iotas)
      if (iota < 1 || iota >= config.repetitions()) throw ConfigError("iota list entry out of [1, Q-1]");
    if (!epsilon.uniform_random) check_epsilon(epsilon.fixed_value, config);
    if (grid.coarse_step <= 0.0 || grid.fine_step <= 0.0) throw ConfigError("grid steps must be positive");
  }
};

struct ResultRow {
  std::string estimator;
  double snr_db = 0.0;
  std::optional<int> iota;
  int trials = 0;
  std::optional<double> empirical_mse;
  std::optional<double> analytic_mse;
  std::optional<double> emcb;
  std::optional<double> mean_runtime_us;
  int degenerate_count = 0;
};

inline constexpr const char* kResultHeader =
    "estimator,snr_db,iota,trials,empirical_mse,analytic_mse,emcb,mean_runtime_us,degenerate_count";

inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  std::ostringstream buf;
  buf.precision(17);
  const auto opt = [&](const std::optional<double>& v) {
    if (v) buf << *v;
  };
  buf << kResultHeader << '\n';
  for (const ResultRow& r : rows) {
    buf << r.estimator << ',' << r.snr_db << ',';
    if (r.iota) buf << *r.iota;
    buf << ',' << r.trials << ',';
    opt(r.empirical_mse);
    buf << ',';
    opt(r.analytic_mse);
    buf << ',';
    opt(r.emcb);
    buf << ',';
    opt(r.mean_runtime_us);
    buf << ',' << r.degenerate_count << '\n';
  }
  os << buf.str();
}

/// CFOLAB_THREADS caps parallelism; defaults to the hardware concurrency.
inline unsigned thread_count(unsigned requested = 0) {
  unsigned n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CFOLAB_THREADS")) {
      const long cap = std::strtol(env, nullptr, 10);
      if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    }
  }
  return std::max(1u, n);
}

/// Runs fn(i) for i in [0, count) over contiguous blocks, one per thread.
template <typename Fn>
void parallel_for(int count, unsigned threads, Fn&& fn) {
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const int block = (count + static_cast<int>(threads) - 1) / static_cast<int>(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        const int begin = static_cast<int>(t) * block;
        const int end = std::min(count, begin + block);
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace detail {

struct TrialSetup {
  double epsilon = 0.0;
  ChannelRealization channel;
};

inline TrialSetup trial_setup(const ExperimentSpec& spec, int trial) {
  RandomSource rng(spec.seed, RandomSource::stream(static_cast<std::uint64_t>(trial), 1));
  TrialSetup setup;
  const double half = spec.config.repetitions() / 2.0;
  if (spec.epsilon.uniform_random) {
    do {
      setup.epsilon = rng.uniform(-half, half);
    } while (setup.epsilon == -half);  // open interval
  } else {
    setup.epsilon = spec.epsilon.fixed_value;
  }
  setup.channel = draw_channel(spec.profile, spec.config, rng);
  return setup;
}

inline TrainingSet trial_training(const ExperimentSpec& spec, TrainingKind kind, int trial, const TrainingSet& cbts) {
  if (kind == TrainingKind::cbts) return cbts;
  RandomSource rng(spec.seed, RandomSource::stream(static_cast<std::uint64_t>(trial), 3));
  return build_training(spec.config, TrainingKind::rs, rng);
}

inline TrainingSet fixed_cbts(const SystemConfig& cfg) {
  RandomSource unused(0, 0);
  return build_training(cfg, TrainingKind::cbts, unused);
}

inline ReceivedFrame trial_frame(const ExperimentSpec& spec, const TrainingSet& ts, const TrialSetup& setup,
                                 double sigma_w2, int trial, int snr_index) {
  RandomSource noise(spec.seed,
                     RandomSource::stream(static_cast<std::uint64_t>(trial), 2, static_cast<std::uint64_t>(snr_index)));
  return transmit_receive(ts, setup.channel, setup.epsilon, sigma_w2, spec.config, noise);
}

/// Mean noiseless received power per sample over the whole trial batch.
inline double calibrate_signal_power(const ExperimentSpec& spec, TrainingKind kind, const TrainingSet& cbts,
                                     unsigned threads) {
  std::vector<double> power(static_cast<std::size_t>(spec.trials));
  parallel_for(spec.trials, threads, [&](int t) {
    const TrialSetup setup = trial_setup(spec, t);
    const TrainingSet ts = trial_training(spec, kind, t, cbts);
    power[t] = mean_power(trial_frame(spec, ts, setup, 0.0, t, 0));
  });
  double acc = 0.0;
  for (double p : power) acc += p;
  return acc / spec.trials;
}

inline double estimate_one(const EstimatorId& id, const StackedFrame& sf, const ExperimentSpec& spec) {
  if (id.kind == EstimatorId::Kind::ml_grid) return estimate_ml_grid(sf, spec.config, spec.grid).epsilon_hat;
  return estimate_simplified(sf, EstimatorParams{id.iota, spec.grid}, spec.config).epsilon_hat;
}

struct TrialOutcome {
  double squared_error = 0.0;
  bool degenerate = false;
};

}  // namespace detail

/// Per (estimator, SNR): mean of (ε̂ - ε̃)² over non-degenerate trials.
inline std::vector<ResultRow> run_mse_vs_snr(const ExperimentSpec& spec) {
  spec.validate();
  const unsigned threads = thread_count(spec.threads);
  const TrainingSet cbts = detail::fixed_cbts(spec.config);

  bool need[2] = {false, false};
  for (const EstimatorId& e : spec.estimators) need[static_cast<int>(e.training())] = true;
  double signal_power[2] = {0.0, 0.0};
  if (!spec.noiseless)
    for (int k = 0; k < 2; ++k)
      if (need[k]) signal_power[k] = detail::calibrate_signal_power(spec, static_cast<TrainingKind>(k), cbts, threads);

  const std::vector<double> snrs =
      spec.noiseless ? std::vector<double>{std::numeric_limits<double>::infinity()} : spec.snr_points_db;
  const std::size_t n_est = spec.estimators.size();
  std::vector<ResultRow> rows;

  for (std::size_t s = 0; s < snrs.size(); ++s) {
    const double snr_linear = std::pow(10.0, snrs[s] / 10.0);
    std::vector<detail::TrialOutcome> outcomes(static_cast<std::size_t>(spec.trials) * n_est);
    parallel_for(spec.trials, threads, [&](int t) {
      const detail::TrialSetup setup = detail::trial_setup(spec, t);
      for (int k = 0; k < 2; ++k) {
        if (!need[k]) continue;
        const auto kind = static_cast<TrainingKind>(k);
        const TrainingSet ts = detail::trial_training(spec, kind, t, cbts);
        const double sigma_w2 = spec.noiseless ? 0.0 : signal_power[k] / snr_linear;
        const StackedFrame sf = stack(detail::trial_frame(spec, ts, setup, sigma_w2, t, static_cast<int>(s)), spec.config);
        for (std::size_t e = 0; e < n_est; ++e) {
          if (spec.estimators[e].training() != kind) continue;
          detail::TrialOutcome& out = outcomes[static_cast<std::size_t>(t) * n_est + e];
          try {
            const double err = detail::estimate_one(spec.estimators[e], sf, spec) - setup.epsilon;
            out.squared_error = err * err;
          } catch (const DegenerateCorrelation&) {
            out.degenerate = true;
          }
        }
      }
    });

    for (std::size_t e = 0; e < n_est; ++e) {
      const EstimatorId& id = spec.estimators[e];
      ResultRow row;
      row.estimator = id.name();
      row.snr_db = snrs[s];
      if (id.has_iota()) row.iota = id.iota;
      row.trials = spec.trials;
      double acc = 0.0;
      int used = 0;
      for (int t = 0; t < spec.trials; ++t) {
        const detail::TrialOutcome& out = outcomes[static_cast<std::size_t>(t) * n_est + e];
        if (out.degenerate) {
          ++row.degenerate_count;
        } else {
          acc += out.squared_error;
          ++used;
        }
      }
      if (used > 0) row.empirical_mse = acc / used;
      if (id.kind == EstimatorId::Kind::simplified && !spec.noiseless && !iota_is_degenerate(id.iota, spec.config))
        row.analytic_mse = mse_formula(gamma_from_snr_db(snrs[s], spec.config), id.iota, spec.config);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Simplified CBTS estimator swept over ι; rows carry the analytic MSE.
inline std::vector<ResultRow> run_mse_vs_iota(const ExperimentSpec& spec, const std::vector<int>& iotas) {
  ExperimentSpec sweep = spec;
  sweep.estimators.clear();
  for (int iota : iotas) sweep.estimators.push_back({EstimatorId::Kind::simplified, iota});
  return run_mse_vs_snr(sweep);
}

inline std::vector<int> default_iotas(const SystemConfig& cfg) {
  std::vector<int> out;
  for (int i = 1; i < cfg.repetitions(); ++i) out.push_back(i);
  return out;
}

/// EMCB rows (estimator "emcb") on the spec's SNR grid.
inline std::vector<ResultRow> run_emcb(const ExperimentSpec& spec) {
  spec.validate();
  RandomSource rng(spec.seed, RandomSource::stream(0, 4));
  const EmcbResult res =
      emcb(spec.config, spec.profile, spec.snr_points_db, spec.emcb_draws, rng, detail::fixed_cbts(spec.config));
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < res.snr_axis.size(); ++i) {
    ResultRow row;
    row.estimator = "emcb";
    row.snr_db = res.snr_axis[i];
    row.trials = res.n_channel_draws;
    row.emcb = res.bound_values[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

struct BenchResult {
  int repetitions = 0;
  double snr_db = 0.0;
  double median_simplified_us = 0.0;
  double median_ml_grid_us = 0.0;
  double mean_simplified_us = 0.0;
  double mean_ml_grid_us = 0.0;
  double speedup() const { return median_ml_grid_us / median_simplified_us; }
};

/// Times stack + estimate for both estimators on identical frames.
inline BenchResult run_bench(const ExperimentSpec& spec) {
  spec.validate();
  using clock = std::chrono::steady_clock;
  const int reps = std::max(spec.bench_repetitions, 1);
  const TrainingSet cbts = detail::fixed_cbts(spec.config);
  const double snr_db = spec.snr_points_db.empty() ? 20.0 : spec.snr_points_db.back();
  ExperimentSpec calib = spec;
  calib.trials = reps;
  const double power = detail::calibrate_signal_power(calib, TrainingKind::cbts, cbts, 1);
  const double sigma_w2 = spec.noiseless ? 0.0 : power / std::pow(10.0, snr_db / 10.0);
  const int iota = spec.estimators.front().has_iota() ? spec.estimators.front().iota : 7;

  std::vector<double> simplified_us;
  std::vector<double> ml_us;
  volatile double sink = 0.0;
  for (int r = 0; r < reps; ++r) {
    const detail::TrialSetup setup = detail::trial_setup(spec, r);
    const ReceivedFrame frame = detail::trial_frame(spec, cbts, setup, sigma_w2, r, 0);
    auto t0 = clock::now();
    sink = sink + estimate_simplified(stack(frame, spec.config), {iota, spec.grid}, spec.config).epsilon_hat;
    auto t1 = clock::now();
    sink = sink + estimate_ml_grid(stack(frame, spec.config), spec.config, spec.grid).epsilon_hat;
    auto t2 = clock::now();
    simplified_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    ml_us.push_back(std::chrono::duration<double, std::micro>(t2 - t1).count());
  }
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  const auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
  };
  BenchResult out;
  out.repetitions = reps;
  out.snr_db = snr_db;
  out.median_simplified_us = median(simplified_us);
  out.median_ml_grid_us = median(ml_us);
  out.mean_simplified_us = mean(simplified_us);
  out.mean_ml_grid_us = mean(ml_us);
  return out;
}

/// One frame, both estimators: the `estimate` subcommand.
struct SingleShot {
  ReceivedFrame frame;
  CfoEstimate simplified;
  std::optional<CfoEstimate> ml_grid;
  double snr_db = 0.0;
};

inline SingleShot run_single(const ExperimentSpec& spec, int iota, bool with_ml_grid) {
  spec.validate();
  const TrainingSet cbts = detail::fixed_cbts(spec.config);
  SingleShot out;
  out.snr_db = spec.noiseless || spec.snr_points_db.empty() ? std::numeric_limits<double>::infinity()
                                                            : spec.snr_points_db.front();
  double sigma_w2 = 0.0;
  if (std::isfinite(out.snr_db)) {
    ExperimentSpec calib = spec;
    calib.trials = 1;
    sigma_w2 = detail::calibrate_signal_power(calib, TrainingKind::cbts, cbts, 1) / std::pow(10.0, out.snr_db / 10.0);
  }
  const detail::TrialSetup setup = detail::trial_setup(spec, 0);
  out.frame = detail::trial_frame(spec, cbts, setup, sigma_w2, 0, 0);
  const StackedFrame sf = stack(out.frame, spec.config);
  out.simplified = estimate_simplified(sf, {iota, spec.grid}, spec.config);
  if (with_ml_grid) out.ml_grid = estimate_ml_grid(sf, spec.config, spec.grid);
  return out;
}

// ---------------------------------------------------------------------------
// Presets

enum class Preset { paper_fig1, paper_fig2, paper_fig3 };

inline Preset parse_preset(const std::string& name) {
  if (name == "paper-fig1") return Preset::paper_fig1;
  if (name == "paper-fig2") return Preset::paper_fig2;
  if (name == "paper-fig3") return Preset::paper_fig3;
  throw ConfigError("unknown preset '" + name + "' (expected paper-fig1, paper-fig2 or paper-fig3)");
}

/// Reference system (N=1024, P=64, N_t=3, N_r=2, N_g=80, six-tap profile).
inline ExperimentSpec preset_spec(Preset preset) {
  ExperimentSpec spec;
  switch (preset) {
    case Preset::paper_fig1:
      spec.config = paper_config(kOffsetsFig1);
      spec.estimators = {{EstimatorId::Kind::simplified, 8}};
      spec.snr_points_db = {10, 15, 20};
      break;
    case Preset::paper_fig2:
      spec.config = paper_config(kOffsetsFig2);
      spec.estimators = {{EstimatorId::Kind::simplified, 7}};
      spec.snr_points_db = {10, 15, 20};
      break;
    case Preset::paper_fig3:
      spec.config = paper_config(kOffsetsFig2);
      spec.estimators = {{EstimatorId::Kind::simplified, 7},
                         {EstimatorId::Kind::simplified_rs, 7},
                         {EstimatorId::Kind::ml_grid, 0}};
      break;
  }
  spec.iotas = default_iotas(spec.config);
  return spec;
}

}  // namespace cfolab
