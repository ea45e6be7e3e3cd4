#pragma once

// Correlation-based CFO estimation. The simplified estimator picks among Q
// closed-form candidates ε_q = arg κ(ι)/2π + q - Q/2; the grid-search ML
// baseline maximizes Tr[B^H(ε) R_YY B(ε)] directly.

#include "cfolab/channel.hpp"
#include "cfolab/numerics.hpp"
#include "cfolab/training.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfolab {

/// κ(ι) cannot be formed: the (Q-ι)-th diagonal sum vanishes.
class DegenerateCorrelation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StackedFrame {
  ComplexMatrix y;      // Q x N_r·P
  ComplexMatrix r_yy;   // Y Y^H
  ComplexVector c;      // c_q = Σ_{j-i=q} [R_YY]_{i,j}
};

/// Upper-diagonal sums of a square matrix. Only entries with j >= i are read.
inline ComplexVector diagonal_sums(const ComplexMatrix& r) {
  const Eigen::Index q_count = r.rows();
  ComplexVector c = ComplexVector::Zero(q_count);
  for (Eigen::Index q = 0; q < q_count; ++q)
    for (Eigen::Index i = 0; i + q < q_count; ++i) c[q] += r(i, i + q);
  return c;
}

inline StackedFrame stack(const ReceivedFrame& frame, const SystemConfig& cfg) {
  const int p = cfg.pilot_length;
  const int q_count = cfg.repetitions();
  if (static_cast<int>(frame.y.size()) != cfg.n_rx)
    throw std::invalid_argument("stack: frame has " + std::to_string(frame.y.size()) + " antennas, expected " +
                                std::to_string(cfg.n_rx));
  StackedFrame sf;
  sf.y.resize(q_count, static_cast<Eigen::Index>(cfg.n_rx) * p);
  for (int nu = 0; nu < cfg.n_rx; ++nu) {
    const ComplexVector& y = frame.y[nu];
    if (y.size() != cfg.n_subcarriers) throw std::invalid_argument("stack: antenna vector length differs from N");
    for (int q = 0; q < q_count; ++q)
      for (int k = 0; k < p; ++k) sf.y(q, static_cast<Eigen::Index>(nu) * p + k) = y[static_cast<Eigen::Index>(q) * p + k];
  }
  sf.r_yy = sf.y * sf.y.adjoint();
  sf.c = diagonal_sums(sf.r_yy);
  return sf;
}

inline void check_iota(int iota, int q_count) {
  if (iota < 1 || iota > q_count - 1)
    throw std::out_of_range("iota must lie in [1, Q-1], got " + std::to_string(iota));
}

/// κ(ι) = ι c_ι^* / ((Q-ι) c_{Q-ι})
inline Complex kappa(const StackedFrame& sf, int iota) {
  const auto q_count = static_cast<int>(sf.c.size());
  check_iota(iota, q_count);
  const Complex den = sf.c[q_count - iota];
  if (std::abs(den) <= 1e-12 * sf.c.norm())
    throw DegenerateCorrelation("kappa: diagonal sum c_{Q-iota} vanishes for iota = " + std::to_string(iota));
  return static_cast<double>(iota) * std::conj(sf.c[iota]) / (static_cast<double>(q_count - iota) * den);
}

/// ε_q = arg κ / 2π + q - Q/2 with arg in [0, 2π): Q values tiling [-Q/2, Q/2).
inline std::vector<double> candidates(Complex kappa_value, int q_count) {
  if (kappa_value == Complex{}) throw DegenerateCorrelation("candidates: kappa is zero");
  double phase = std::arg(kappa_value);
  if (phase < 0.0) phase += kTwoPi;
  if (phase >= kTwoPi) phase = 0.0;
  std::vector<double> out(static_cast<std::size_t>(q_count));
  for (int q = 0; q < q_count; ++q) out[q] = phase / kTwoPi + q - q_count / 2.0;
  return out;
}

/// a_q = Σ_μ z_μ^q with z_μ = e^{j2πi_μ/Q}; the [Σ_μ b(z_μ)] vector.
inline ComplexVector lattice_sums(const SystemConfig& cfg) {
  const int q_count = cfg.repetitions();
  ComplexVector a = ComplexVector::Zero(q_count);
  for (int q = 0; q < q_count; ++q)
    for (int off : cfg.offsets) a[q] += cis(kTwoPi * static_cast<double>((static_cast<long long>(off) * q) % q_count) / q_count);
  return a;
}

namespace detail {

// Both terms of f(z) before discarding the (ideally zero) imaginary part.
inline Complex likelihood_terms(const ComplexVector& c, const ComplexVector& a, double epsilon) {
  const auto q_count = c.size();
  Complex forward = 0.0;
  Complex backward = 0.0;
  for (Eigen::Index q = 0; q < q_count; ++q) {
    const Complex zq = cis(kTwoPi * epsilon * static_cast<double>(q) / static_cast<double>(q_count));
    forward += c[q] * a[q] * zq;
    backward += std::conj(c[q]) * std::conj(a[q]) * std::conj(zq);
  }
  return forward + backward;
}

}  // namespace detail

/// f(z) at z = e^{j2πε/Q}:
/// c^T{[Σ b(z_μ)] ⊙ b(z)} + c^H{[Σ b(z_μ^{-1})] ⊙ b(z^{-1})}.
inline double likelihood(const StackedFrame& sf, double epsilon, const SystemConfig& cfg) {
  return detail::likelihood_terms(sf.c, lattice_sums(cfg), epsilon).real();
}

/// Tr[B^H(ε) R_YY B(ε)]; equals f minus N_t·c_0.
inline double trace_likelihood(const StackedFrame& sf, double epsilon, const SystemConfig& cfg) {
  const ComplexMatrix b = steering_matrix(epsilon, cfg);
  return (b.adjoint() * sf.r_yy * b).trace().real();
}

enum class EstimatorMethod { simplified, ml_grid };

struct CfoEstimate {
  double epsilon_hat = 0.0;
  Complex kappa{};
  std::vector<double> candidates;
  std::vector<double> scores;
  EstimatorMethod method = EstimatorMethod::simplified;
};

struct GridSpec {
  double coarse_step = 0.05;
  double fine_step = 1e-4;
};

struct EstimatorParams {
  int iota = 7;
  GridSpec baseline_grid{};
};

inline CfoEstimate estimate_simplified(const StackedFrame& sf, const EstimatorParams& params, const SystemConfig& cfg) {
  CfoEstimate est;
  est.kappa = kappa(sf, params.iota);
  est.candidates = candidates(est.kappa, cfg.repetitions());
  const ComplexVector a = lattice_sums(cfg);
  std::size_t best = 0;
  for (std::size_t k = 0; k < est.candidates.size(); ++k) {
    est.scores.push_back(detail::likelihood_terms(sf.c, a, est.candidates[k]).real());
    // ties: smaller |ε| first, then the lower index (already held by `best`)
    if (est.scores[k] > est.scores[best] ||
        (est.scores[k] == est.scores[best] && std::abs(est.candidates[k]) < std::abs(est.candidates[best])))
      best = k;
  }
  est.epsilon_hat = est.candidates[best];
  return est;
}

/// Two-stage grid search of the trace likelihood over [-Q/2, Q/2).
inline CfoEstimate estimate_ml_grid(const StackedFrame& sf, const SystemConfig& cfg, const GridSpec& grid = {}) {
  if (!(grid.coarse_step > 0.0) || !(grid.fine_step > 0.0))
    throw std::invalid_argument("estimate_ml_grid: grid steps must be positive");
  const double half = cfg.repetitions() / 2.0;
  const auto wrap = [&](double e) {
    const double span = 2.0 * half;
    e = std::fmod(e + half, span);
    if (e < 0.0) e += span;
    return e - half;
  };

  double best_eps = -half;
  double best_val = -std::numeric_limits<double>::infinity();
  const auto coarse_count = static_cast<long>(std::ceil(2.0 * half / grid.coarse_step - 1e-9));
  for (long k = 0; k < coarse_count; ++k) {
    const double e = -half + static_cast<double>(k) * grid.coarse_step;
    const double v = trace_likelihood(sf, e, cfg);
    if (v > best_val) {
      best_val = v;
      best_eps = e;
    }
  }
  const double centre = best_eps;
  const auto fine_half = static_cast<long>(std::ceil(grid.coarse_step / grid.fine_step - 1e-9));
  for (long k = -fine_half; k <= fine_half; ++k) {
    const double e = wrap(centre + static_cast<double>(k) * grid.fine_step);
    const double v = trace_likelihood(sf, e, cfg);
    if (v > best_val) {
      best_val = v;
      best_eps = e;
    }
  }
  CfoEstimate est;
  est.method = EstimatorMethod::ml_grid;
  est.epsilon_hat = best_eps;
  est.scores.push_back(best_val);
  return est;
}

/// g(z) = c^T{[Σ b(z_μ)] ⊙ b(z) ⊙ q}
inline Complex factor_g(const StackedFrame& sf, Complex z, const SystemConfig& cfg) {
  const ComplexVector a = lattice_sums(cfg);
  Complex acc = 0.0;
  Complex zq = 1.0;
  for (Eigen::Index q = 0; q < sf.c.size(); ++q) {
    acc += static_cast<double>(q) * sf.c[q] * a[q] * zq;
    zq *= z;
  }
  return acc;
}

/// f'(z) = z^{-1}{c^T{[Σ b(z_μ)] ⊙ b(z) ⊙ q} - c^H{[Σ b(z_μ^{-1})] ⊙ b(z^{-1}) ⊙ q}}
inline Complex likelihood_derivative(const StackedFrame& sf, Complex z, const SystemConfig& cfg) {
  const ComplexVector a = lattice_sums(cfg);
  Complex forward = 0.0;
  Complex backward = 0.0;
  Complex zq = 1.0;
  const Complex z_inv = 1.0 / z;
  Complex zq_inv = 1.0;
  for (Eigen::Index q = 0; q < sf.c.size(); ++q) {
    forward += static_cast<double>(q) * sf.c[q] * a[q] * zq;
    backward += static_cast<double>(q) * std::conj(sf.c[q]) * std::conj(a[q]) * zq_inv;
    zq *= z;
    zq_inv *= z_inv;
  }
  return z_inv * (forward - backward);
}

/// max_z |f'(z) - z^{-(Q+1)}(z^Q - κ)g(z)| / max_z |f'(z)| over 64 points of the unit circle.
inline double derivative_factor_residual(const StackedFrame& sf, int iota, const SystemConfig& cfg) {
  const Complex k = kappa(sf, iota);
  const int q_count = cfg.repetitions();
  double worst = 0.0;
  double scale = 0.0;
  for (int m = 0; m < 64; ++m) {
    const Complex z = cis(kTwoPi * m / 64.0);
    const Complex direct = likelihood_derivative(sf, z, cfg);
    const Complex zq = std::pow(z, q_count);
    const Complex factored = (zq - k) * factor_g(sf, z, cfg) / (zq * z);
    worst = std::max(worst, std::abs(direct - factored));
    scale = std::max(scale, std::abs(direct));
  }
  return scale == 0.0 ? 0.0 : worst / scale;
}

}  // namespace cfolab
