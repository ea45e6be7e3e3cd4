#pragma once

// Frequency-selective Rayleigh channel, time-domain transceiver with CP and
// CFO, and the explicit matrix model of the same received vector.

#include "cfolab/numerics.hpp"
#include "cfolab/training.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace cfolab {

struct ChannelProfile {
  std::vector<int> delays;         // samples, strictly increasing
  std::vector<double> powers_db;   // relative average powers

  int length() const { return delays.empty() ? 0 : delays.back() + 1; }

  void validate(int cp_length) const {
    if (delays.empty() || delays.size() != powers_db.size())
      throw ConfigError("ChannelProfile: delays and powers must be non-empty and the same length");
    for (std::size_t i = 0; i < delays.size(); ++i) {
      if (delays[i] < 0 || delays[i] >= cp_length) throw ConfigError("ChannelProfile: delays must lie in [0, N_g)");
      if (i > 0 && delays[i] <= delays[i - 1]) throw ConfigError("ChannelProfile: delays must be strictly increasing");
    }
  }

  /// Linear powers normalized to unit sum.
  std::vector<double> linear_powers() const {
    std::vector<double> p;
    p.reserve(powers_db.size());
    for (double db : powers_db) p.push_back(std::pow(10.0, db / 10.0));
    double total = 0.0;
    for (double v : p) total += v;
    for (double& v : p) v /= total;
    return p;
  }
};

/// Six-tap profile used by the reference presets.
inline ChannelProfile paper_profile() {
  return {{0, 4, 16, 24, 46, 74}, {0.0, -0.9, -4.9, -8.0, -7.8, -23.9}};
}

inline ChannelProfile single_tap_profile() { return {{0}, {0.0}}; }

struct ChannelRealization {
  int n_rx = 0;
  int n_tx = 0;
  int length = 0;                    // L
  std::vector<ComplexVector> taps;   // h^{(ν,μ)} at index ν·N_t + μ
  std::vector<int> support;          // active delays

  const ComplexVector& tap(int nu, int mu) const { return taps.at(static_cast<std::size_t>(nu * n_tx + mu)); }
  ComplexVector& tap(int nu, int mu) { return taps.at(static_cast<std::size_t>(nu * n_tx + mu)); }
};

/// Same taps on every link; used for deterministic noiseless checks.
inline ChannelRealization fixed_channel(const SystemConfig& cfg, const std::vector<int>& delays,
                                        const std::vector<Complex>& gains) {
  ChannelRealization ch{cfg.n_rx, cfg.n_tx, cfg.max_channel_length, {}, delays};
  for (int i = 0; i < cfg.n_rx * cfg.n_tx; ++i) {
    ComplexVector h = ComplexVector::Zero(cfg.max_channel_length);
    for (std::size_t k = 0; k < delays.size(); ++k) h[delays[k]] = gains[k];
    ch.taps.push_back(std::move(h));
  }
  return ch;
}

/// Every active tap ~ CN(0, p_l), independent across (ν, μ, l).
inline ChannelRealization draw_channel(const ChannelProfile& profile, const SystemConfig& cfg, RandomSource& rng) {
  profile.validate(cfg.cp_length);
  if (profile.length() > cfg.max_channel_length)
    throw ConfigError("draw_channel: profile is longer than the configured L");
  const std::vector<double> powers = profile.linear_powers();
  ChannelRealization ch{cfg.n_rx, cfg.n_tx, cfg.max_channel_length, {}, profile.delays};
  ch.taps.reserve(static_cast<std::size_t>(cfg.n_rx * cfg.n_tx));
  for (int nu = 0; nu < cfg.n_rx; ++nu) {
    for (int mu = 0; mu < cfg.n_tx; ++mu) {
      ComplexVector h = ComplexVector::Zero(cfg.max_channel_length);
      for (std::size_t k = 0; k < profile.delays.size(); ++k) h[profile.delays[k]] = rng.complex_gaussian(powers[k]);
      ch.taps.push_back(std::move(h));
    }
  }
  return ch;
}

struct ReceivedFrame {
  std::vector<ComplexVector> y;  // per receive antenna, length N, CP removed
  double true_epsilon = 0.0;
  double sigma_w2 = 0.0;
  double sigma_x2 = 0.0;  // mean |[X]|² of the noiseless stacked signal
};

/// Mean |y|² per sample over all receive antennas.
inline double mean_power(const ReceivedFrame& frame) {
  double acc = 0.0;
  Eigen::Index count = 0;
  for (const ComplexVector& y : frame.y) {
    acc += y.squaredNorm();
    count += y.size();
  }
  return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

inline void check_epsilon(double epsilon, const SystemConfig& cfg) {
  const double half = cfg.repetitions() / 2.0;
  if (!(epsilon > -half && epsilon < half))
    throw std::out_of_range("CFO outside the identifiable range (-Q/2, Q/2)");
}

/// B(ε): Q x N_t with [B]_{q,μ} = e^{j2π(ε+i_μ)q/Q}.
inline ComplexMatrix steering_matrix(double epsilon, const SystemConfig& cfg) {
  const int q_count = cfg.repetitions();
  ComplexMatrix b(q_count, cfg.n_tx);
  for (int mu = 0; mu < cfg.n_tx; ++mu)
    for (int q = 0; q < q_count; ++q) b(q, mu) = cis(kTwoPi * (epsilon + cfg.offsets[mu]) * q / q_count);
  return b;
}

struct SignalMatrix {
  ComplexMatrix x;        // N_t x N_r·P, X = [X_0, ..., X_{N_r-1}]
  double sigma_x2 = 0.0;  // empirical mean |X_{μ,k}|²
};

/// Noiseless X of Y = B(ε)X + W.
inline SignalMatrix stacked_signal_matrix(const TrainingSet& ts, const ChannelRealization& ch, double epsilon,
                                          const SystemConfig& cfg) {
  const int n = cfg.n_subcarriers;
  const int p = cfg.pilot_length;
  SignalMatrix out{ComplexMatrix::Zero(cfg.n_tx, static_cast<Eigen::Index>(cfg.n_rx) * p), 0.0};
  const Complex front = std::sqrt(static_cast<double>(p)) * cis(kTwoPi * epsilon * cfg.cp_length / n);
  for (int nu = 0; nu < cfg.n_rx; ++nu) {
    for (int mu = 0; mu < cfg.n_tx; ++mu) {
      ComplexVector padded = ComplexVector::Zero(n);
      padded.head(ch.length) = ch.tap(nu, mu);
      const ComplexVector freq = dft(padded);
      ComplexVector lattice(p);
      for (int k = 0; k < p; ++k) lattice[k] = ts.freq_pilots[mu][k] * freq[lattice_index(cfg, cfg.offsets[mu], k)];
      const ComplexVector periodic = dft(lattice, true);
      const ComplexVector ramp = phase_ramp(p, epsilon + cfg.offsets[mu], n);
      for (int k = 0; k < p; ++k) out.x(mu, static_cast<Eigen::Index>(nu) * p + k) = front * ramp[k] * periodic[k];
    }
  }
  out.sigma_x2 = out.x.squaredNorm() / static_cast<double>(out.x.size());
  return out;
}

/// Time-domain path: CP prepend, linear convolution, CFO rotation
/// e^{j2πε(n+N_g)/N} on post-CP sample n, CN(0, σ_w²) noise, CP removal.
inline ReceivedFrame transmit_receive(const TrainingSet& ts, const ChannelRealization& ch, double epsilon,
                                      double sigma_w2, const SystemConfig& cfg, RandomSource& rng) {
  check_epsilon(epsilon, cfg);
  if (ch.length > cfg.cp_length) throw ConfigError("transmit_receive: channel longer than cyclic prefix");
  const int n = cfg.n_subcarriers;
  const int ng = cfg.cp_length;
  const int total = n + ng;

  std::vector<ComplexVector> with_cp;
  for (const ComplexVector& x : ts.time_sequences) {
    ComplexVector v(total);
    v.head(ng) = x.tail(ng);
    v.tail(n) = x;
    with_cp.push_back(std::move(v));
  }
  const ComplexVector rotation = phase_ramp(total, epsilon, n);

  ReceivedFrame frame;
  frame.true_epsilon = epsilon;
  frame.sigma_w2 = sigma_w2;
  for (int nu = 0; nu < cfg.n_rx; ++nu) {
    ComplexVector r = ComplexVector::Zero(total);
    for (int mu = 0; mu < cfg.n_tx; ++mu) {
      const ComplexVector& h = ch.tap(nu, mu);
      for (int l : ch.support) {
        const Complex g = h[l];
        if (g == Complex{}) continue;
        r.segment(l, total - l) += g * with_cp[mu].head(total - l);
      }
    }
    r = r.cwiseProduct(rotation);
    if (sigma_w2 > 0.0)
      for (int m = 0; m < total; ++m) r[m] += rng.complex_gaussian(sigma_w2);
    frame.y.push_back(r.tail(n));
  }
  frame.sigma_x2 = stacked_signal_matrix(ts, ch, epsilon, cfg).sigma_x2;
  return frame;
}

/// S = F̄^H diag{[s̃_0^T, ..., s̃_{N_t-1}^T]^T} F̆, assembled from a dense F_N.
inline ComplexMatrix training_matrix(const TrainingSet& ts, const SystemConfig& cfg) {
  const int n = cfg.n_subcarriers;
  const int p = cfg.pilot_length;
  const int nt = cfg.n_tx;
  const int l = cfg.max_channel_length;
  const ComplexMatrix f_n = dft_matrix(n);

  // F̄ = [Θ_{i_0}, ..., Θ_{i_{N_t-1}}]^T F_N: the lattice rows of F_N.
  ComplexMatrix f_bar(static_cast<Eigen::Index>(nt) * p, n);
  // F̆ is block diagonal: block μ = Θ_{i_μ}^T F_N [I_L, 0]^T.
  ComplexMatrix f_breve = ComplexMatrix::Zero(static_cast<Eigen::Index>(nt) * p, static_cast<Eigen::Index>(nt) * l);
  ComplexVector pilots(static_cast<Eigen::Index>(nt) * p);
  for (int mu = 0; mu < nt; ++mu) {
    for (int k = 0; k < p; ++k) {
      const int row = mu * p + k;
      const int sc = lattice_index(cfg, cfg.offsets[mu], k);
      f_bar.row(row) = f_n.row(sc);
      f_breve.block(row, static_cast<Eigen::Index>(mu) * l, 1, l) = f_n.block(sc, 0, 1, l);
      pilots[row] = ts.freq_pilots[mu][k];
    }
  }
  return f_bar.adjoint() * pilots.asDiagonal() * f_breve;
}

/// h_ν = [h^{(ν,0)T}, ..., h^{(ν,N_t-1)T}]^T
inline ComplexVector stacked_taps(const ChannelRealization& ch, int nu) {
  ComplexVector h(static_cast<Eigen::Index>(ch.n_tx) * ch.length);
  for (int mu = 0; mu < ch.n_tx; ++mu) h.segment(static_cast<Eigen::Index>(mu) * ch.length, ch.length) = ch.tap(nu, mu);
  return h;
}

/// y = √N e^{j2πεN_g/N} {I_{N_r} ⊗ [D_N(ε) S]} h, noiseless, from a prebuilt S.
inline ReceivedFrame model_receive(const ComplexMatrix& s, const ChannelRealization& ch, double epsilon,
                                   const SystemConfig& cfg) {
  check_epsilon(epsilon, cfg);
  const int n = cfg.n_subcarriers;
  const Complex front = std::sqrt(static_cast<double>(n)) * cis(kTwoPi * epsilon * cfg.cp_length / n);
  const ComplexVector ramp = phase_ramp(n, epsilon, n);
  ReceivedFrame frame;
  frame.true_epsilon = epsilon;
  for (int nu = 0; nu < cfg.n_rx; ++nu) frame.y.push_back(front * ramp.cwiseProduct(s * stacked_taps(ch, nu)));
  return frame;
}

inline ReceivedFrame model_receive(const TrainingSet& ts, const ChannelRealization& ch, double epsilon,
                                   const SystemConfig& cfg) {
  ReceivedFrame frame = model_receive(training_matrix(ts, cfg), ch, epsilon, cfg);
  frame.sigma_x2 = stacked_signal_matrix(ts, ch, epsilon, cfg).sigma_x2;
  return frame;
}

/// antenna,sample,real,imag
inline void write_frame_csv(std::ostream& os, const ReceivedFrame& frame) {
  os << "antenna,sample,real,imag\n";
  os.precision(17);
  for (std::size_t nu = 0; nu < frame.y.size(); ++nu)
    for (Eigen::Index k = 0; k < frame.y[nu].size(); ++k)
      os << nu << ',' << k << ',' << frame.y[nu][k].real() << ',' << frame.y[nu][k].imag() << '\n';
}

}  // namespace cfolab
