#include "oracles.hpp"
#include "phzne/optics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace phzne;

namespace {

CMatrix mat2(cplx a, cplx b, cplx c, cplx d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

double max_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(ModeUnitary, RejectsNonUnitaryAndTinyMatrices) {
  EXPECT_THROW(ModeUnitary(mat2(1, 1, 0, 1)), std::invalid_argument);
  EXPECT_THROW(ModeUnitary(CMatrix::Identity(1, 1)), std::invalid_argument);
  EXPECT_THROW(ModeUnitary(CMatrix::Zero(2, 3)), std::invalid_argument);
  EXPECT_NO_THROW(ModeUnitary::identity(4));
}

TEST(DirectionalCoupler, BalancedMatchesHadamardForm) {
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_LT(max_diff(directional_coupler(0.5, {0, 1}, 2).matrix(), mat2(r, r, r, -r)), 1e-15);
}

TEST(DirectionalCoupler, FullReflection) {
  EXPECT_LT(max_diff(directional_coupler(1.0, {0, 1}, 2).matrix(), mat2(1, 0, 0, -1)), 1e-15);
}

TEST(DirectionalCoupler, OneThirdBlockIsUnitary) {
  const auto u = directional_coupler(1.0 / 3.0, {2, 3}, 6);
  EXPECT_LT(unitarity_defect(u.matrix()), 1e-12);
  EXPECT_NEAR(u(2, 2).real(), std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_NEAR(u(2, 3).real(), std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(u(3, 3).real(), -std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_EQ(u(0, 0), cplx(1.0));
  EXPECT_EQ(u(0, 2), cplx(0.0));
}

TEST(DirectionalCoupler, Errors) {
  EXPECT_THROW(directional_coupler(0.5, {0, 0}, 2), std::invalid_argument);
  EXPECT_THROW(directional_coupler(0.5, {0, 2}, 2), std::invalid_argument);
  EXPECT_THROW(directional_coupler(1.5, {0, 1}, 2), std::invalid_argument);
  EXPECT_THROW(directional_coupler(-0.1, {0, 1}, 2), std::invalid_argument);
}

TEST(PhaseShifter, Examples) {
  EXPECT_LT(max_diff(phase_shifter(0.0, 0, 2).matrix(), CMatrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_diff(phase_shifter(kPi, 1, 2).matrix(), mat2(1, 0, 0, -1)), 1e-15);
  CMatrix d = CMatrix::Identity(3, 3);
  d(0, 0) = cplx(0, 1);
  EXPECT_LT(max_diff(phase_shifter(kPi / 2, 0, 3).matrix(), d), 1e-15);
  EXPECT_THROW(phase_shifter(0.0, 3, 3), std::invalid_argument);
}

TEST(Compose, IdentityAndInverse) {
  std::mt19937_64 g(7);
  const ModeUnitary u(oracle::haar_unitary(5, g), 1e-12);
  EXPECT_LT(max_diff(compose(ModeUnitary::identity(5), u).matrix(), u.matrix()), 1e-15);
  EXPECT_LT(max_diff(compose(u, u.adjoint()).matrix(), CMatrix::Identity(5, 5)), 1e-12);
  EXPECT_THROW(compose(ModeUnitary::identity(2), ModeUnitary::identity(3)), std::invalid_argument);
}

TEST(Compose, ShifterThenCouplerByHand) {
  // photon in mode 1 picks up -1, then the coupler: rows of the coupler's
  // second row flip sign.
  const double r = 1.0 / std::sqrt(2.0);
  const auto got = compose(phase_shifter(kPi, 1, 2), directional_coupler(0.5, {0, 1}, 2));
  EXPECT_LT(max_diff(got.matrix(), mat2(r, r, -r, r)), 1e-15);
}

TEST(Compose, PreservesUnitarityOverLongChains) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ModeUnitary u = ModeUnitary::identity(6);
  for (int i = 0; i < 40; ++i) {
    const std::size_t a = static_cast<std::size_t>(u01(g) * 6);
    const std::size_t b = (a + 1 + static_cast<std::size_t>(u01(g) * 5)) % 6;
    u = compose(u, directional_coupler(u01(g), {a, b}, 6));
    u = compose(u, phase_shifter(2 * kPi * u01(g), a, 6));
    EXPECT_LT(unitarity_defect(u.matrix()), 1e-12);
  }
}

TEST(IndistinguishabilityWeight, Examples) {
  EXPECT_DOUBLE_EQ(indistinguishability_weight(0.0), 1.0);
  EXPECT_DOUBLE_EQ(indistinguishability_weight(1.0), 0.0);
  EXPECT_NEAR(indistinguishability_weight(0.18), 0.9011, 1e-4);
  EXPECT_NEAR(indistinguishability_weight(0.18), 1.64 / 1.82, 1e-15);
  EXPECT_THROW(indistinguishability_weight(-0.01), std::invalid_argument);
  EXPECT_THROW(indistinguishability_weight(1.01), std::invalid_argument);
}

TEST(PhotonPairInput, Validation) {
  const auto u = ModeUnitary::identity(3);
  EXPECT_THROW(output_distribution(u, {1, 1, 0.0}), std::invalid_argument);
  EXPECT_THROW(output_distribution(u, {0, 3, 0.0}), std::invalid_argument);
  EXPECT_THROW(output_distribution(u, {0, 1, 1.2}), std::invalid_argument);
}

TEST(OutputPattern, CanonicalOrder) {
  const OutputPattern p(4, 2);
  EXPECT_EQ(p.j(), 2u);
  EXPECT_EQ(p.k(), 4u);
  EXPECT_FALSE(p.bunched());
  EXPECT_TRUE(OutputPattern(3, 3).bunched());
  EXPECT_EQ(OutputPattern(1, 0), OutputPattern(0, 1));
}

TEST(OutputDistribution, BalancedCouplerLimits) {
  const auto bs = directional_coupler(0.5, {0, 1}, 2);
  EXPECT_NEAR(coincidence_probability(bs, {0, 1, 0.0}, {0, 1}), 0.0, 1e-15);
  EXPECT_NEAR(coincidence_probability(bs, {0, 1, 1.0}, {0, 1}), 0.5, 1e-15);
  EXPECT_NEAR(coincidence_probability(bs, {0, 1, 0.0}, {0, 0}), 0.5, 1e-15);
}

TEST(OutputDistribution, IdentityPassesStraightThrough) {
  const auto id = ModeUnitary::identity(2);
  for (double eps : {0.0, 0.4, 1.0}) {
    EXPECT_DOUBLE_EQ(coincidence_probability(id, {0, 1, eps}, {0, 1}), 1.0);
    EXPECT_DOUBLE_EQ(coincidence_probability(id, {0, 1, eps}, {0, 0}), 0.0);
  }
}

TEST(OutputDistribution, MatchesPolarizationBruteForceOnHaar4) {
  std::mt19937_64 g(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::Mat um = oracle::haar_unitary(4, g);
    const ModeUnitary u(um, 1e-12);
    const double eps = 0.3;
    const double th = oracle::theta_for_epsilon(eps);
    const auto dist = output_distribution(u, {0, 2, eps});
    for (const auto& p : dist.patterns()) {
      const double want = oracle::polarization_pattern(um, 0, 2, th, static_cast<int>(p.j()),
                                                       static_cast<int>(p.k()));
      EXPECT_NEAR(dist.at(p), want, 1e-12) << "pattern " << p.j() << "," << p.k();
    }
  }
}

TEST(OutputDistribution, BruteForceAgreementAcrossNoiseLevels) {
  std::mt19937_64 g(99);
  const oracle::Mat um = oracle::haar_unitary(6, g);
  const ModeUnitary u(um, 1e-12);
  for (double eps : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    const double th = oracle::theta_for_epsilon(eps);
    for (int j = 0; j < 6; ++j)
      for (int k = j; k < 6; ++k) {
        const double got = coincidence_probability(u, {1, 4, eps}, OutputPattern(j, k));
        EXPECT_NEAR(got, oracle::polarization_pattern(um, 1, 4, th, j, k), 1e-12);
      }
  }
}

TEST(OutputDistribution, NormalizedAndInRange) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 5;
    const ModeUnitary u(oracle::haar_unitary(d, g), 1e-12);
    const std::size_t a = trial % d;
    const std::size_t b = (a + 1) % d;
    const double eps = u01(g);
    const auto dist = output_distribution(u, {a, b, eps});
    EXPECT_NEAR(dist.total(), 1.0, 1e-10);
    for (const auto& p : dist.patterns()) {
      EXPECT_GE(dist.at(p), -1e-15);
      EXPECT_LE(dist.at(p), 1.0 + 1e-15);
    }
    // each mixture component sums to one on its own
    double ind = 0.0, dis = 0.0;
    for (const auto& p : dist.patterns()) {
      const auto c = pattern_components(u.matrix(), a, b, p);
      ind += c.indistinguishable;
      dis += c.distinguishable;
    }
    EXPECT_NEAR(ind, 1.0, 1e-10);
    EXPECT_NEAR(dis, 1.0, 1e-10);
  }
}

TEST(OutputDistribution, UnbunchedClosedFormInEpsilon) {
  std::mt19937_64 g(31);
  const oracle::Mat um = oracle::haar_unitary(5, g);
  const ModeUnitary u(um, 1e-12);
  const int a = 0, b = 3;
  for (int j = 0; j < 5; ++j)
    for (int k = j + 1; k < 5; ++k) {
      const oracle::cplx d = um(a, j) * um(b, k);
      const oracle::cplx c = um(a, k) * um(b, j);
      const double p_ind = std::norm(d + c);
      const double cross = 2.0 * (d * std::conj(c)).real();
      for (int i = 0; i <= 10; ++i) {
        const double e = i / 10.0;
        // p_ind - (2e / (2 - e)) Re(d c*)
        const double want = p_ind - (2 * e / (2 - e)) * cross / 2.0;
        EXPECT_NEAR(coincidence_probability(u, {a, b, e}, OutputPattern(j, k)), want, 1e-12);
      }
    }
}

TEST(OutputDistribution, PermutationCovariance) {
  std::mt19937_64 g(17);
  const oracle::Mat um = oracle::haar_unitary(5, g);
  std::vector<int> perm(5);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), g);
  // relabel modes: new mode perm[i] is old mode i, for inputs and outputs
  oracle::Mat pm(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) pm(perm[i], perm[j]) = um(i, j);
  const ModeUnitary u(um, 1e-12), up(pm, 1e-12);
  const double eps = 0.37;
  const auto d0 = output_distribution(u, {1, 2, eps});
  const auto d1 = output_distribution(up, {static_cast<std::size_t>(perm[1]), static_cast<std::size_t>(perm[2]), eps});
  for (const auto& p : d0.patterns()) {
    const OutputPattern q(perm[p.j()], perm[p.k()]);
    EXPECT_NEAR(d0.at(p), d1.at(q), 1e-13);
  }
}

TEST(OutputDistribution, HomLawOnThetaGrid) {
  const auto bs = directional_coupler(0.5, {0, 1}, 2);
  for (int i = 0; i < 100; ++i) {
    const double theta = (kPi / 4) * i / 99.0;
    const double s = std::sin(2 * theta);
    const double eps = 2 * s * s / (1 + s * s);
    EXPECT_NEAR(coincidence_probability(bs, {0, 1, eps}, {0, 1}), s * s / 2, 1e-12);
  }
}
