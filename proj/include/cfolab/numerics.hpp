#pragma once

// Complex vector arithmetic, the unitary DFT and the seeded random source
// shared by every other cfolab module.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace cfolab {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kJ{0.0, 1.0};

/// e^{j·phase}
inline Complex cis(double phase) { return {std::cos(phase), std::sin(phase)}; }

/// Max |A - A^H| relative to max |A|.
inline double hermitian_defect(const ComplexMatrix& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

namespace detail {

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 transform, unnormalized, sign = -1 forward / +1 inverse.
inline void radix2_inplace(ComplexVector& x, int sign) {
  const Eigen::Index n = x.size();
  for (Eigen::Index i = 1, j = 0; i < n; ++i) {
    Eigen::Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (Eigen::Index len = 2; len <= n; len <<= 1) {
    const Eigen::Index half = len / 2;
    for (Eigen::Index k = 0; k < half; ++k) {
      // twiddles evaluated directly, not by recurrence, to keep 1e-15 accuracy
      const Complex w = cis(sign * kTwoPi * static_cast<double>(k) / static_cast<double>(len));
      for (Eigen::Index start = 0; start < n; start += len) {
        const Complex u = x[start + k];
        const Complex v = x[start + k + half] * w;
        x[start + k] = u + v;
        x[start + k + half] = u - v;
      }
    }
  }
}

}  // namespace detail

/// Direct O(N^2) unitary DFT. Reference path for `dft`.
inline ComplexVector dft_direct(const ComplexVector& x, bool inverse = false) {
  const Eigen::Index n = x.size();
  if (n < 1) throw std::invalid_argument("dft: empty input");
  const double sign = inverse ? 1.0 : -1.0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexVector out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      // (k*m) mod n keeps the phase argument small for large n
      const auto km = static_cast<double>((k * m) % n);
      acc += x[m] * cis(sign * kTwoPi * km / static_cast<double>(n));
    }
    out[k] = acc * scale;
  }
  return out;
}

/// Unitary DFT: forward X[k] = N^{-1/2} Σ x[n] e^{-j2πkn/N}; inverse is the
/// conjugate transpose. Power-of-two lengths use radix-2, others the direct sum.
inline ComplexVector dft(const ComplexVector& x, bool inverse = false) {
  const Eigen::Index n = x.size();
  if (n < 1) throw std::invalid_argument("dft: empty input");
  if (!detail::is_power_of_two(n)) return dft_direct(x, inverse);
  ComplexVector out = x;
  detail::radix2_inplace(out, inverse ? 1 : -1);
  out /= std::sqrt(static_cast<double>(n));
  return out;
}

/// Dense N x N unitary DFT matrix F_N.
inline ComplexMatrix dft_matrix(Eigen::Index n) {
  ComplexMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index m = 0; m < n; ++m)
      f(k, m) = scale * cis(-kTwoPi * static_cast<double>((k * m) % n) / static_cast<double>(n));
  return f;
}

/// Diagonal of D(ε): element n is e^{j2πεn/N}.
inline ComplexVector phase_ramp(Eigen::Index length, double epsilon, Eigen::Index n_fft) {
  if (length < 1 || n_fft < 1) throw std::invalid_argument("phase_ramp: length and N must be positive");
  ComplexVector out(length);
  for (Eigen::Index n = 0; n < length; ++n)
    out[n] = cis(kTwoPi * epsilon * static_cast<double>(n) / static_cast<double>(n_fft));
  return out;
}

/// m-cyclic-down-shift: out[n] = x[(n - m) mod len].
inline ComplexVector cyclic_shift(const ComplexVector& x, std::int64_t m) {
  const auto len = static_cast<std::int64_t>(x.size());
  ComplexVector out(x.size());
  if (len == 0) return out;
  const std::int64_t shift = ((m % len) + len) % len;
  for (std::int64_t n = 0; n < len; ++n) out[n] = x[((n - shift) % len + len) % len];
  return out;
}

/// Deterministic random stream keyed by (seed, stream_id). Single owner;
/// parallel work takes one instance per stream id.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  /// CN(0, variance): real and imaginary parts i.i.d. N(0, variance / 2).
  Complex complex_gaussian(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Stream id built from up to three small keys (trial, purpose, ...).
  static std::uint64_t stream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return splitmix(splitmix(splitmix(a) ^ (b + 0x632be59bd9b4e019ULL)) ^ (c + 0x9e3779b97f4a7c15ULL));
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id) {
    return splitmix(splitmix(seed) ^ splitmix(stream_id ^ 0xd1b54a32d192ed03ULL));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace cfolab
