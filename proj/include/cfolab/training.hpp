#pragma once

// System dimensioning and the Chu-sequence-based training sequences (CBTS),
// plus the random-phase (RS) baseline placed on the same subcarrier lattices.

#include "cfolab/numerics.hpp"

#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfolab {

/// Invalid dimensioning or parameter combination.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SystemConfig {
  int n_subcarriers = 1024;  // N
  int pilot_length = 64;     // P
  int n_tx = 3;              // N_t
  int n_rx = 2;              // N_r
  int cp_length = 80;        // N_g
  int max_channel_length = 75;  // L
  std::vector<int> offsets{3, 7, 14};  // i_μ
  int chu_root = 1;          // υ

  /// Q = N / P
  int repetitions() const { return n_subcarriers / pilot_length; }
  /// M = floor(P / N_t), the per-antenna cyclic shift stride.
  int shift_stride() const { return pilot_length / n_tx; }

  /// Throws ConfigError on any violated invariant except P >= L, which the
  /// reference presets themselves violate (see warnings()).
  void validate() const {
    const auto fail = [](const std::string& what) { throw ConfigError("SystemConfig: " + what); };
    if (n_subcarriers < 2 || pilot_length < 2) fail("N and P must be at least 2");
    if (n_subcarriers % (2 * pilot_length) != 0) fail("N must be a multiple of 2P");
    if (n_tx < 1 || n_rx < 1) fail("antenna counts must be positive");
    const int q = repetitions();
    if (n_tx >= q) fail("N_t must be smaller than Q");
    if (static_cast<int>(offsets.size()) != n_tx) fail("need exactly N_t lattice offsets");
    for (std::size_t a = 0; a < offsets.size(); ++a) {
      if (offsets[a] < 0 || offsets[a] >= q) fail("lattice offsets must lie in [0, Q-1]");
      for (std::size_t b = a + 1; b < offsets.size(); ++b)
        if (offsets[a] == offsets[b]) fail("lattice offsets must be distinct");
    }
    if (std::gcd(chu_root, pilot_length) != 1) fail("Chu root must be coprime with P");
    if (max_channel_length < 1) fail("L must be positive");
    if (cp_length < 0 || max_channel_length > cp_length) fail("L must not exceed the cyclic prefix length");
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    if (pilot_length < max_channel_length)
      out.push_back("P < L: channel taps beyond P break the R_XX diagonal approximation");
    return out;
  }
};

/// N=1024, P=64, N_t=3, N_r=2, N_g=80, L=75 with the given lattice offsets.
inline SystemConfig paper_config(std::vector<int> offsets = {3, 7, 14}) {
  SystemConfig cfg;
  cfg.offsets = std::move(offsets);
  return cfg;
}

inline const std::vector<int> kOffsetsFig1{3, 5, 11};
inline const std::vector<int> kOffsetsFig2{3, 7, 14};

enum class TrainingKind { cbts, rs };

inline const char* to_string(TrainingKind kind) { return kind == TrainingKind::cbts ? "cbts" : "rs"; }

struct TrainingSet {
  TrainingKind kind = TrainingKind::cbts;
  std::vector<ComplexVector> freq_pilots;     // s̃_μ, length P
  std::vector<ComplexVector> grid_vectors;    // t̃_μ, length N
  std::vector<ComplexVector> time_sequences;  // F_N^H t̃_μ, length N, before CP
};

/// [s]_p = e^{jπυp²/P}
inline ComplexVector chu_sequence(int length, int root) {
  if (length < 2) throw ConfigError("chu_sequence: length must be at least 2");
  if (std::gcd(root, length) != 1) throw ConfigError("chu_sequence: root must be coprime with length");
  ComplexVector s(length);
  for (int p = 0; p < length; ++p) {
    // p² mod 2P keeps the phase exact for large p; e^{jπυp²/P} has period 2P in p².
    const auto p2 = static_cast<long long>(p) * p % (2LL * length);
    s[p] = cis(kPi * root * static_cast<double>(p2) / length);
  }
  return s;
}

/// Subcarrier index of pilot k on lattice `offset`.
inline int lattice_index(const SystemConfig& cfg, int offset, int k) { return offset + k * cfg.repetitions(); }

inline TrainingSet build_training(const SystemConfig& cfg, TrainingKind kind, RandomSource& rng) {
  cfg.validate();
  const int n = cfg.n_subcarriers;
  const int p = cfg.pilot_length;
  const double pilot_gain = std::sqrt(static_cast<double>(cfg.repetitions()) / cfg.n_tx);

  TrainingSet ts;
  ts.kind = kind;
  const ComplexVector chu = chu_sequence(p, cfg.chu_root);
  for (int mu = 0; mu < cfg.n_tx; ++mu) {
    ComplexVector pilots(p);
    if (kind == TrainingKind::cbts) {
      pilots = pilot_gain * dft(cyclic_shift(chu, static_cast<std::int64_t>(mu) * cfg.shift_stride()));
    } else {
      for (int k = 0; k < p; ++k) pilots[k] = pilot_gain * cis(rng.uniform(0.0, kTwoPi));
    }
    ComplexVector grid = ComplexVector::Zero(n);
    for (int k = 0; k < p; ++k) grid[lattice_index(cfg, cfg.offsets[mu], k)] = pilots[k];
    ts.time_sequences.push_back(dft(grid, /*inverse=*/true));
    ts.freq_pilots.push_back(std::move(pilots));
    ts.grid_vectors.push_back(std::move(grid));
  }
  return ts;
}

/// [A^{(μ,μ')}]_{l,l'} = (s_μ^{(l)})^T D_P(ϖQ) (s_μ'^{(l')})^*, with
/// s_μ = sqrt(N_t/Q) F_P^H s̃_μ and ϖ = (i_μ - i_μ')/Q.
inline Complex cross_correlation_matrix(const TrainingSet& ts, const SystemConfig& cfg, int l, int l_prime,
                                        int mu, int mu_prime) {
  if (l < 0 || l_prime < 0 || l >= cfg.max_channel_length || l_prime >= cfg.max_channel_length)
    throw std::out_of_range("cross_correlation_matrix: tap index outside [0, L-1]");
  const int p = cfg.pilot_length;
  const int q = cfg.repetitions();
  const double back = std::sqrt(static_cast<double>(cfg.n_tx) / q);
  const ComplexVector a = cyclic_shift(back * dft(ts.freq_pilots.at(mu), true), l);
  const ComplexVector b = cyclic_shift(back * dft(ts.freq_pilots.at(mu_prime), true), l_prime);
  const double varpi = static_cast<double>(cfg.offsets[mu] - cfg.offsets[mu_prime]) / q;
  // D_P(ϖQ) has entries e^{j2π(ϖQ)p/N} = e^{j2πϖp/P}
  Complex acc = 0.0;
  for (int k = 0; k < p; ++k) acc += a[k] * cis(kTwoPi * varpi * k / p) * std::conj(b[k]);
  return acc;
}

/// One row per subcarrier and antenna: index,antenna,real,imag.
inline void write_training_csv(std::ostream& os, const TrainingSet& ts) {
  os << "index,antenna,real,imag\n";
  os.precision(17);
  for (std::size_t mu = 0; mu < ts.grid_vectors.size(); ++mu) {
    const ComplexVector& g = ts.grid_vectors[mu];
    for (Eigen::Index k = 0; k < g.size(); ++k) os << k << ',' << mu << ',' << g[k].real() << ',' << g[k].imag() << '\n';
  }
}

}  // namespace cfolab
