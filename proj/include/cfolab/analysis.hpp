#pragma once

// Closed-form MSE of the simplified estimator, selection of the diagonal
// index ι, and the extended Miller-Chang bound (EMCB).

#include "cfolab/channel.hpp"
#include "cfolab/estimator.hpp"
#include "cfolab/numerics.hpp"
#include "cfolab/training.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfolab {

/// Σ_μ z_μ^ι vanishes, so the MSE expression is undefined at this ι.
class DegenerateIota : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimum |Σ_μ z_μ^ι| below which ι is treated as degenerate.
inline constexpr double kDegenerateIotaThreshold = 1e-9;

/// Σ_μ z_μ^k, z_μ = e^{j2πi_μ/Q}; k may be negative.
inline Complex offset_power_sum(const SystemConfig& cfg, long long k) {
  const long long q = cfg.repetitions();
  Complex acc = 0.0;
  for (int off : cfg.offsets) {
    const long long e = ((off * k) % q + q) % q;
    acc += cis(kTwoPi * static_cast<double>(e) / static_cast<double>(q));
  }
  return acc;
}

inline bool iota_is_degenerate(int iota, const SystemConfig& cfg) {
  return std::abs(offset_power_sum(cfg, iota)) < kDegenerateIotaThreshold;
}

/// ρ(ι) = 2·min(ι, Q-ι)·Re{(Σz_μ^{2ι})(Σz_μ^{-ι})²} / |Σz_μ^ι|².
///
/// For ι <= Q/2 this is the textbook expression term for term. For ι > Q/2 the
/// same cross-moment E[ζ_ι η_ι] is summed over Q-ι diagonal pairs, which keeps
/// ρ(ι) = ρ(Q-ι); the estimator itself is symmetric because κ(Q-ι) = 1/κ(ι)^*.
inline double rho(int iota, const SystemConfig& cfg) {
  const int q = cfg.repetitions();
  check_iota(iota, q);
  const Complex s1 = offset_power_sum(cfg, iota);
  if (std::abs(s1) < kDegenerateIotaThreshold)
    throw DegenerateIota("rho: sum of z_mu^iota vanishes for iota = " + std::to_string(iota));
  const Complex s2 = offset_power_sum(cfg, 2LL * iota);
  const Complex s_neg = offset_power_sum(cfg, -static_cast<long long>(iota));
  const int pairs = std::min(iota, q - iota);
  return 2.0 * pairs * (s2 * s_neg * s_neg).real() / std::norm(s1);
}

struct AnalysisPoint {
  double gamma = 0.0;
  int iota = 0;
  double rho = 0.0;
  double var_zeta = 0.0;
  double var_eta = 0.0;
  double var_xi = 0.0;
  double mse = 0.0;
};

/// Variance terms and predicted MSE at one (γ, ι). var_xi uses the high-SNR approximation.
inline AnalysisPoint analyze(double gamma, int iota, const SystemConfig& cfg) {
  if (!(gamma > 0.0)) throw std::invalid_argument("analyze: gamma must be positive");
  const int q = cfg.repetitions();
  AnalysisPoint pt;
  pt.gamma = gamma;
  pt.iota = iota;
  pt.rho = rho(iota, cfg);
  const double lattice = std::norm(offset_power_sum(cfg, iota));
  const double noise = 2.0 * cfg.n_tx / gamma + 1.0 / (gamma * gamma);
  const double base = static_cast<double>(cfg.n_rx) * cfg.pilot_length * lattice;
  pt.var_zeta = noise / (base * (q - iota));
  pt.var_eta = noise / (base * iota);
  pt.var_xi = (2.0 * (cfg.n_tx * q + pt.rho) / gamma + q / (gamma * gamma)) /
              (base * static_cast<double>(iota) * (q - iota));
  pt.mse = pt.var_xi / (8.0 * kPi * kPi);
  return pt;
}

/// MSE{ε̂} ≐ [2(N_tQ + ρ(ι))γ^{-1} + Qγ^{-2}] / [8π² N_r P ι(Q-ι) |Σ_μ z_μ^ι|²]
inline double mse_formula(double gamma, int iota, const SystemConfig& cfg) { return analyze(gamma, iota, cfg).mse; }

/// γ = σ_x²/σ_w² for a calibrated SNR: unit-power channels give σ_x² = 1/N_t.
inline double gamma_from_snr_db(double snr_db, const SystemConfig& cfg) {
  return std::pow(10.0, snr_db / 10.0) / cfg.n_tx;
}

struct IotaSearch {
  std::vector<int> optimal;     // minimizers, ties within the relative tolerance
  std::vector<int> degenerate;  // excluded ι
  std::vector<double> mse;      // index ι-1; +inf where degenerate
};

inline IotaSearch optimal_iota(double gamma, const SystemConfig& cfg, double rel_tol = 1e-9) {
  const int q = cfg.repetitions();
  IotaSearch out;
  double best = std::numeric_limits<double>::infinity();
  for (int iota = 1; iota < q; ++iota) {
    if (iota_is_degenerate(iota, cfg)) {
      out.degenerate.push_back(iota);
      out.mse.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    out.mse.push_back(mse_formula(gamma, iota, cfg));
    best = std::min(best, out.mse.back());
  }
  for (int iota = 1; iota < q; ++iota)
    if (std::isfinite(out.mse[iota - 1]) && out.mse[iota - 1] <= best * (1.0 + rel_tol)) out.optimal.push_back(iota);
  return out;
}

/// snr_db,iota,mse_analytic,mse_empirical,emcb; empty cells for missing values.
struct AnalysisRow {
  double snr_db = 0.0;
  int iota = 0;
  double mse_analytic = std::numeric_limits<double>::quiet_NaN();
  double mse_empirical = std::numeric_limits<double>::quiet_NaN();
  double emcb = std::numeric_limits<double>::quiet_NaN();
};

inline void write_analysis_csv(std::ostream& os, const std::vector<AnalysisRow>& rows) {
  const auto cell = [&](double v) {
    if (std::isfinite(v)) os << v;
  };
  os.precision(17);
  os << "snr_db,iota,mse_analytic,mse_empirical,emcb\n";
  for (const AnalysisRow& r : rows) {
    os << r.snr_db << ',' << r.iota << ',';
    cell(r.mse_analytic);
    os << ',';
    cell(r.mse_empirical);
    os << ',';
    cell(r.emcb);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// EMCB

/// The CFO is not identifiable from this training and channel.
class SingularTraining : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// S together with an orthonormal basis of its column space.
struct TrainingSubspace {
  ComplexMatrix s;
  ComplexMatrix basis;
};

inline TrainingSubspace training_subspace(const TrainingSet& ts, const SystemConfig& cfg) {
  TrainingSubspace sub;
  sub.s = training_matrix(ts, cfg);
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(sub.s);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  if (rank == 0) throw SingularTraining("training matrix is zero");
  sub.basis = ComplexMatrix(qr.householderQ()).leftCols(rank);
  return sub;
}

/// I - S S^+ (dense; for small configurations and tests).
inline ComplexMatrix orthogonal_projector(const TrainingSubspace& sub) {
  const Eigen::Index n = sub.s.rows();
  return ComplexMatrix::Identity(n, n) - sub.basis * sub.basis.adjoint();
}

/// h^H 𝒳^H ℬ [I - 𝒳(𝒳^H𝒳)^+𝒳^H] ℬ 𝒳 h with 𝒳 = I_{N_r} ⊗ S.
inline double fisher_term(const TrainingSubspace& sub, const ChannelRealization& ch, const SystemConfig& cfg) {
  const int n = cfg.n_subcarriers;
  Eigen::VectorXd ramp(n);
  for (int k = 0; k < n; ++k) ramp[k] = cfg.cp_length + k;
  double acc = 0.0;
  for (int nu = 0; nu < cfg.n_rx; ++nu) {
    const ComplexVector v = ramp.cast<Complex>().cwiseProduct(sub.s * stacked_taps(ch, nu));
    acc += (v - sub.basis * (sub.basis.adjoint() * v)).squaredNorm();
  }
  return acc;
}

/// N σ_w² / (8π² · fisher_term)
inline double snapshot_crb(double fisher, double sigma_w2, const SystemConfig& cfg) {
  if (!(fisher > 0.0)) throw SingularTraining("snapshot CRB: CFO direction lies in the training subspace");
  return cfg.n_subcarriers * sigma_w2 / (8.0 * kPi * kPi * fisher);
}

struct EmcbResult {
  std::vector<double> snr_axis;      // dB
  std::vector<double> bound_values;  // cycles²
  int n_channel_draws = 0;
  std::uint64_t seed = 0;
  double signal_power = 0.0;         // calibrated mean received power per sample
};

/// Mean snapshot CRB over `n_draws` channels. σ_w² per SNR point follows the
/// simulator's convention: measured mean noiseless received power / SNR.
inline EmcbResult emcb(const SystemConfig& cfg, const ChannelProfile& profile, const std::vector<double>& snr_db,
                       int n_draws, RandomSource& rng, const TrainingSet& ts) {
  if (n_draws < 1) throw std::invalid_argument("emcb: need at least one channel draw");
  cfg.validate();
  const TrainingSubspace sub = training_subspace(ts, cfg);
  double inv_fisher_sum = 0.0;
  double power_sum = 0.0;
  for (int d = 0; d < n_draws; ++d) {
    const ChannelRealization ch = draw_channel(profile, cfg, rng);
    for (int nu = 0; nu < cfg.n_rx; ++nu) power_sum += (sub.s * stacked_taps(ch, nu)).squaredNorm();
    const double fisher = fisher_term(sub, ch, cfg);
    if (!(fisher > 0.0)) throw SingularTraining("emcb: CFO direction lies in the training subspace");
    inv_fisher_sum += 1.0 / fisher;
  }
  EmcbResult out;
  out.n_channel_draws = n_draws;
  out.seed = rng.seed();
  // ‖y_ν‖²/N = ‖S h_ν‖² since y_ν = √N D S h_ν
  out.signal_power = power_sum / (static_cast<double>(n_draws) * cfg.n_rx);
  const double mean_inv_fisher = inv_fisher_sum / n_draws;
  for (double snr : snr_db) {
    const double sigma_w2 = out.signal_power / std::pow(10.0, snr / 10.0);
    out.snr_axis.push_back(snr);
    out.bound_values.push_back(cfg.n_subcarriers * sigma_w2 * mean_inv_fisher / (8.0 * kPi * kPi));
  }
  return out;
}

inline EmcbResult emcb(const SystemConfig& cfg, const ChannelProfile& profile, const std::vector<double>& snr_db,
                       int n_draws, RandomSource& rng) {
  RandomSource training_rng(rng.seed(), RandomSource::stream(0, 0xC0DE));
  return emcb(cfg, profile, snr_db, n_draws, rng, build_training(cfg, TrainingKind::cbts, training_rng));
}

}  // namespace cfolab
