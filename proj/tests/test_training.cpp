#include "test_util.hpp"
#include <gtest/gtest.h>

#include <sstream>

using namespace cfolab;
using cfolab::testing::cbts;
using cfolab::testing::closed_form_a;
using cfolab::testing::max_abs_diff;

namespace {

Complex periodic_autocorrelation(const ComplexVector& s, int lag) {
  const auto p = s.size();
  Complex acc = 0.0;
  for (Eigen::Index k = 0; k < p; ++k) acc += s[k] * std::conj(s[(k + lag) % p]);
  return acc;
}

}  // namespace

TEST(Chu, SmallExamples) {
  const ComplexVector s4 = chu_sequence(4, 1);
  const Complex e = cis(kPi / 4);
  EXPECT_NEAR(std::abs(s4[0] - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s4[1] - e), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s4[2] + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s4[3] - e), 0.0, 1e-15);
  const ComplexVector s2 = chu_sequence(2, 1);
  EXPECT_NEAR(std::abs(s2[1] - Complex(0, 1)), 0.0, 1e-15);
}

TEST(Chu, PerfectPeriodicAutocorrelation) {
  for (int p : {16, 64})
    for (int root : {1, 3, 5}) {
      const ComplexVector s = chu_sequence(p, root);
      EXPECT_NEAR(std::abs(periodic_autocorrelation(s, 0)), p, 1e-9);
      for (int lag = 1; lag < p; ++lag)
        EXPECT_LE(std::abs(periodic_autocorrelation(s, lag)), 1e-9) << "P=" << p << " lag=" << lag;
    }
}

TEST(Chu, RejectsNonCoprimeRoot) {
  EXPECT_THROW(chu_sequence(16, 2), ConfigError);
  SystemConfig cfg = paper_config();
  cfg.chu_root = 4;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(SystemConfigTest, Validation) {
  EXPECT_NO_THROW(paper_config(kOffsetsFig1).validate());
  EXPECT_NO_THROW(paper_config(kOffsetsFig2).validate());
  auto bad = paper_config();
  bad.offsets = {3, 3, 14};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = paper_config();
  bad.offsets = {3, 7, 16};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = paper_config();
  bad.pilot_length = 48;  // 1024 is not a multiple of 96
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = paper_config();
  bad.max_channel_length = 81;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfolab::testing::tiny_config(8, {0, 1, 2, 3, 4, 5, 6, 7});
  EXPECT_THROW(bad.validate(), ConfigError);  // N_t must be below Q
  EXPECT_EQ(paper_config().warnings().size(), 1u);  // P = 64 < L = 75
}

TEST(BuildTraining, LatticeSupport) {
  SystemConfig cfg;
  cfg.n_subcarriers = 8;
  cfg.pilot_length = 2;
  cfg.n_tx = 1;
  cfg.n_rx = 1;
  cfg.cp_length = 2;
  cfg.max_channel_length = 2;
  cfg.offsets = {1};
  const TrainingSet ts = cbts(cfg);
  for (int k = 0; k < 8; ++k) EXPECT_EQ(ts.grid_vectors[0][k] != Complex{}, k == 1 || k == 5) << k;
}

TEST(BuildTraining, PresetNormsAndDisjointness) {
  for (const SystemConfig& cfg : cfolab::testing::preset_configs()) {
    const TrainingSet ts = cbts(cfg);
    ASSERT_EQ(ts.grid_vectors.size(), 3u);
    for (int mu = 0; mu < 3; ++mu) {
      EXPECT_NEAR(ts.grid_vectors[mu].squaredNorm() / (1024.0 / 3.0), 1.0, 1e-12);
      for (int k = 0; k < cfg.n_subcarriers; ++k) {
        const bool on_lattice = (k - cfg.offsets[mu]) % cfg.repetitions() == 0 && k >= cfg.offsets[mu];
        if (!on_lattice) EXPECT_EQ(ts.grid_vectors[mu][k], Complex{});
      }
      for (int other = 0; other < 3; ++other)
        if (other != mu)
          EXPECT_EQ(ts.grid_vectors[mu].cwiseProduct(ts.grid_vectors[other]).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(BuildTraining, SingleAntennaIsScaledChuSpectrum) {
  auto cfg = cfolab::testing::tiny_config();
  const TrainingSet ts = cbts(cfg);
  const ComplexVector expected = std::sqrt(static_cast<double>(cfg.repetitions())) * dft(chu_sequence(4, 1));
  EXPECT_LT(max_abs_diff(ts.freq_pilots[0], expected), 1e-14);
}

TEST(BuildTraining, TimeFrequencyConsistency) {
  const auto cfg = paper_config();
  const TrainingSet ts = cbts(cfg);
  for (int mu = 0; mu < 3; ++mu) EXPECT_LT(max_abs_diff(dft(ts.time_sequences[mu]), ts.grid_vectors[mu]), 1e-12);
}

TEST(BuildTraining, TimeSequencesArePeriodicInP) {
  const auto cfg = paper_config();
  const TrainingSet ts = cbts(cfg);
  for (int mu = 0; mu < 3; ++mu) {
    const ComplexVector& x = ts.time_sequences[mu];
    for (int q = 1; q < cfg.repetitions(); ++q) {
      // lattice offset i_μ turns block repetition into a phase step e^{j2πi_μ/Q}
      const Complex step = cis(kTwoPi * cfg.offsets[mu] * q / cfg.repetitions());
      EXPECT_LT(max_abs_diff(x.segment(q * 64, 64), step * x.head(64)), 1e-12);
    }
  }
}

TEST(BuildTraining, RandomSequenceMatchesEnergyAndLattice) {
  const auto cfg = paper_config();
  RandomSource rng(5, 3);
  const TrainingSet rs = build_training(cfg, TrainingKind::rs, rng);
  const TrainingSet cb = cbts(cfg);
  for (int mu = 0; mu < 3; ++mu) {
    EXPECT_NEAR(rs.grid_vectors[mu].squaredNorm(), cb.grid_vectors[mu].squaredNorm(), 1e-9);
    EXPECT_EQ((rs.grid_vectors[mu].array() != Complex{}).count(), 64);
    EXPECT_EQ(((rs.grid_vectors[mu].array() != Complex{}) != (cb.grid_vectors[mu].array() != Complex{})).count(), 0);
    for (int k = 0; k < 64; ++k) EXPECT_NEAR(std::abs(rs.freq_pilots[mu][k]), std::sqrt(16.0 / 3.0), 1e-12);
  }
}

TEST(CrossCorrelation, ZeroLagSelfIsP) {
  const auto cfg = paper_config();
  const TrainingSet ts = cbts(cfg);
  for (int mu = 0; mu < 3; ++mu)
    for (int l : {0, 5, 20}) EXPECT_NEAR(std::abs(cross_correlation_matrix(ts, cfg, l, l, mu, mu)), 64.0, 1e-9);
}

TEST(CrossCorrelation, SelfNonzeroLagVanishes) {
  const auto cfg = paper_config();
  const TrainingSet ts = cbts(cfg);
  for (int l = 0; l < 10; ++l)
    for (int lp = 0; lp < 10; ++lp)
      if (l != lp) EXPECT_LE(std::abs(cross_correlation_matrix(ts, cfg, l, lp, 0, 0)), 1e-9);
}

TEST(CrossCorrelation, MatchesClosedForm) {
  for (const SystemConfig& cfg : cfolab::testing::preset_configs()) {
    const TrainingSet ts = cbts(cfg);
    double worst = 0.0;
    for (int mu = 0; mu < 3; ++mu)
      for (int mp = 0; mp < 3; ++mp) {
        if (mu == mp) continue;
        for (int l = 0; l < cfg.shift_stride(); l += 3)
          for (int lp = 0; lp < cfg.shift_stride(); lp += 3)
            worst = std::max(worst, std::abs(cross_correlation_matrix(ts, cfg, l, lp, mu, mp) -
                                             closed_form_a(cfg, l, lp, mu, mp)));
      }
    EXPECT_LT(worst, 1e-9);
  }
}

// "|A| small for p_{μ,l} ≠ p_{μ',l'}": RMS over all cross-antenna entries stays
// under 0.15P, and every entry whose cyclic shift distance is at least 4 does too.
// Entries with |Δp| < 4 reach about 0.5P and are excluded by construction.
TEST(CrossCorrelation, CrossAntennaLeakageIsSmall) {
  for (const SystemConfig& cfg : cfolab::testing::preset_configs()) {
    const TrainingSet ts = cbts(cfg);
    const int p = cfg.pilot_length;
    const int m = cfg.shift_stride();
    double sum_sq = 0.0;
    int count = 0;
    double far_max = 0.0;
    for (int mu = 0; mu < 3; ++mu)
      for (int mp = 0; mp < 3; ++mp) {
        if (mu == mp) continue;
        for (int l = 0; l < m; ++l)
          for (int lp = 0; lp < m; ++lp) {
            const double a = std::abs(cross_correlation_matrix(ts, cfg, l, lp, mu, mp));
            sum_sq += a * a;
            ++count;
            const int d = ((mu * m + l - mp * m - lp) % p + p) % p;
            if (std::min(d, p - d) >= 4) far_max = std::max(far_max, a);
          }
      }
    EXPECT_LE(std::sqrt(sum_sq / count), 0.15 * p);
    EXPECT_LE(far_max, 0.15 * p);
  }
}

TEST(TrainingCsv, Format) {
  const auto cfg = cfolab::testing::tiny_config();
  std::ostringstream os;
  write_training_csv(os, cbts(cfg));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,antenna,real,imag");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 32);
}
