#pragma once

#include "cfolab/cfolab.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cfolab::testing {

inline ComplexVector random_vector(Eigen::Index n, std::uint64_t seed) {
  RandomSource rng(seed, 99);
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.complex_gaussian(1.0);
  return v;
}

inline double max_abs_diff(const ComplexVector& a, const ComplexVector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const ReceivedFrame& a, const ReceivedFrame& b) {
  double worst = 0.0;
  for (std::size_t nu = 0; nu < a.y.size(); ++nu) worst = std::max(worst, max_abs_diff(a.y[nu], b.y[nu]));
  return worst;
}

/// Small valid system: N=32, P=4, Q=8, one transmit antenna at offset i0.
inline SystemConfig tiny_config(int n_tx = 1, std::vector<int> offsets = {0}, int n_rx = 1) {
  SystemConfig cfg;
  cfg.n_subcarriers = 32;
  cfg.pilot_length = 4;
  cfg.n_tx = n_tx;
  cfg.n_rx = n_rx;
  cfg.cp_length = 4;
  cfg.max_channel_length = 4;
  cfg.offsets = std::move(offsets);
  return cfg;
}

inline TrainingSet cbts(const SystemConfig& cfg) {
  RandomSource unused(0, 0);
  return build_training(cfg, TrainingKind::cbts, unused);
}

// Closed form of [A^{(μ,μ')}]_{l,l'} for p_{μ,l} ≠ p_{μ',l'} or ϖ ≠ 0.
inline Complex closed_form_a(const SystemConfig& cfg, int l, int lp, int mu, int mp) {
  const int p = cfg.pilot_length;
  const int u = cfg.chu_root;
  const double w = static_cast<double>(cfg.offsets[mu] - cfg.offsets[mp]) / cfg.repetitions();
  const long pa = static_cast<long>(mu) * cfg.shift_stride() + l;
  const long pb = static_cast<long>(mp) * cfg.shift_stride() + lp;
  const long d = pa - pb;
  const double sign = ((u * d + 1) % 2 == 0) ? 1.0 : -1.0;
  const double arg = kPi * (u * d - w) / p;
  return sign * cis(kPi * u * static_cast<double>(pa * pa - pb * pb) / p) * cis(-(p - 1) * arg) *
         std::sin(kPi * w) / std::sin(arg);
}

inline std::vector<SystemConfig> preset_configs() { return {paper_config(kOffsetsFig1), paper_config(kOffsetsFig2)}; }

}  // namespace cfolab::testing
