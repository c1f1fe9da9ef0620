#include "linchoice/distortion.hpp"
#include "linchoice/rules.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace linchoice;
using testing_support::rows;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

struct SymmetricPair {
  CandidateSet candidates = CandidateSet::basis(2);
  Profile profile = Profile::from_rankings({{0, 1}, {1, 0}});
};

}  // namespace

TEST(FeasibleRegion, SingleVoterHalfSimplex) {
  auto c = CandidateSet::basis(2);
  FeasibleRegion f(Profile::from_rankings({{0, 1}}), c);
  EXPECT_NEAR(f.minimize(vec({1, 0})).value, 0.5, 1e-12);
  EXPECT_NEAR(-f.minimize(vec({-1, 0})).value, 1.0, 1e-12);
}

TEST(FeasibleRegion, OppositeVotersAverageInterval) {
  SymmetricPair s;
  FeasibleRegion f(s.profile, s.candidates);
  EXPECT_NEAR(f.minimize(vec({1, 0})).value, 0.25, 1e-12);
  EXPECT_NEAR(-f.minimize(vec({-1, 0})).value, 0.75, 1e-12);
  EXPECT_EQ(f.num_records(), 2u);
}

TEST(FeasibleRegion, SharedRankingsShareOneLp) {
  FeasibleRegion f(Profile::from_rankings({{0, 1, 2}, {0, 1, 2}, {2, 1, 0}}), CandidateSet::basis(3));
  EXPECT_EQ(f.num_records(), 2u);
  // Two thirds of the mass sits on voters with v1 >= v2 >= v3.
  EXPECT_NEAR(-f.minimize(vec({-1, 0, 0})).value, 2.0 / 3 + 1.0 / 3 * (1.0 / 3), 1e-12);
}

TEST(FeasibleRegion, HullRealizability) {
  CandidateSet c(rows({{1, 0}, {0.8, 0.2}}));
  auto p = Profile::from_rankings({{1, 0}});
  EXPECT_NO_THROW(FeasibleRegion(p, c));
  EXPECT_THROW(FeasibleRegion(p, c, RegionOptions{true}), RealizabilityError);
  EXPECT_NO_THROW(FeasibleRegion(Profile::from_rankings({{0, 1}}), c, RegionOptions{true}));
}

TEST(PairBeta, Examples) {
  auto c = CandidateSet::basis(2);
  FeasibleRegion f(Profile::from_rankings({{0, 1}}), c);
  EXPECT_EQ(pair_beta(c.vector(0), c.vector(0), f).beta, 1.0);
  EXPECT_NEAR(pair_beta(c.vector(0), c.vector(1), f).beta, 1.0, 1e-9);
  EXPECT_EQ(pair_beta(c.vector(1), c.vector(0), f).beta, 0.0);
}

TEST(PairBeta, MonotoneFeasibility) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix cand = testing_support::random_simplex_rows(rng, 4, 3);
    CandidateSet c(cand);
    auto p = utilities_to_profile(compute_utilities(VoterSet(testing_support::random_hull_voters(rng, cand, 3)), c));
    FeasibleRegion f(p, c);
    const auto pb = pair_beta(c.vector(0), c.vector(1), f);
    for (double b : {0.0, 0.25 * pb.beta, 0.5 * pb.beta, pb.beta}) {
      EXPECT_GE(f.minimize(c.vector(0) - b * c.vector(1)).value, -1e-9);
    }
    if (pb.beta < 1.0 - 1e-3) {
      EXPECT_LT(f.minimize(c.vector(0) - (pb.beta + 1e-3) * c.vector(1)).value, 0.0);
    }
  }
}

TEST(InstanceDistortion, SingleVoterBasis) {
  auto c = CandidateSet::basis(2);
  FeasibleRegion f(Profile::from_rankings({{0, 1}}), c);
  EXPECT_NEAR(instance_distortion_candidate(0, c, f).value, 1.0, 1e-6);
  EXPECT_EQ(instance_distortion_candidate(1, c, f).value, kInf);
  CandidateSet one(rows({{0.3, 0.7}}));
  FeasibleRegion g(Profile::from_rankings({{0}}), one);
  EXPECT_NEAR(instance_distortion_candidate(0, one, g).value, 1.0, 1e-12);
}

TEST(InstanceDistortion, SymmetricPair) {
  SymmetricPair s;
  FeasibleRegion f(s.profile, s.candidates);
  for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(instance_distortion_candidate(c, s.candidates, f).value, 3.0, 1e-5);
  const auto u = instance_distortion_lottery(Lottery::uniform(2), s.candidates, f);
  EXPECT_NEAR(u.value, 1.5, 1e-5);
  EXPECT_NEAR(u.witness.maxCoeff(), 0.75, 1e-6);
  EXPECT_NEAR(testing_support::grid_distortion(s.profile, s.candidates, s.candidates.vector(0)), 3.0, 1e-9);
}

TEST(InstanceDistortion, PointMassMatchesCandidate) {
  std::mt19937_64 rng(22);
  Matrix cand = testing_support::random_simplex_rows(rng, 5, 3);
  CandidateSet c(cand);
  auto p = utilities_to_profile(compute_utilities(VoterSet(testing_support::random_hull_voters(rng, cand, 6)), c));
  FeasibleRegion f(p, c);
  for (std::size_t k = 0; k < 5; ++k) {
    const double a = instance_distortion_candidate(k, c, f).value;
    const double b = instance_distortion_lottery(Lottery::point_mass(5, k), c, f).value;
    if (std::isinf(a)) EXPECT_TRUE(std::isinf(b));
    else EXPECT_NEAR(a, b, 1e-9 * a);
  }
}

TEST(InstanceDistortion, UniformLotteryUnderUnanimity) {
  for (int d : {2, 3, 5}) {
    std::vector<int> r(static_cast<std::size_t>(d));
    std::iota(r.begin(), r.end(), 0);
    auto c = CandidateSet::basis(static_cast<std::size_t>(d));
    FeasibleRegion f(Profile::from_rankings({r, r, r}), c);
    auto rep = instance_distortion_lottery(Lottery::uniform(static_cast<std::size_t>(d)), c, f);
    EXPECT_NEAR(rep.value, d, 1e-5);
    EXPECT_NEAR(rep.witness(0), 1.0, 1e-9);
  }
}

TEST(SeparationOracle, Examples) {
  SymmetricPair s;
  FeasibleRegion f(s.profile, s.candidates);
  const Vector mu = vec({0.5, 0.5});
  EXPECT_FALSE(separation_oracle(mu, 0.0, f, s.candidates).has_value());
  auto cut = separation_oracle(mu, 0.9, f, s.candidates);
  ASSERT_TRUE(cut.has_value());
  EXPECT_NEAR(cut->maxCoeff(), 0.75, 1e-9);
  CandidateSet one(rows({{0.2, 0.8}}));
  FeasibleRegion g(Profile::from_rankings({{0}}), one);
  EXPECT_FALSE(separation_oracle(one.vector(0), 1.0, g, one).has_value());
}

TEST(OptimalDeterministic, Fixtures) {
  auto c = CandidateSet::basis(2);
  FeasibleRegion f(Profile::from_rankings({{0, 1}}), c);
  auto r = optimal_deterministic(c, f);
  EXPECT_EQ(r.winner, 0u);
  EXPECT_NEAR(r.report.value, 1.0, 1e-6);

  SymmetricPair s;
  FeasibleRegion g(s.profile, s.candidates);
  auto sym = optimal_deterministic(s.candidates, g);
  EXPECT_EQ(sym.winner, 0u);
  EXPECT_NEAR(sym.report.value, 3.0, 1e-3);
}

TEST(OptimalDeterministic, UnanimousTopIsOptimal) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    CandidateSet c(testing_support::random_simplex_rows(rng, 4, 3));
    std::vector<std::vector<int>> r;
    for (int v = 0; v < 3; ++v) {
      std::vector<int> rest{0, 1, 3};
      std::shuffle(rest.begin(), rest.end(), rng);
      r.push_back({2, rest[0], rest[1], rest[2]});
    }
    FeasibleRegion f(Profile::from_rankings(r), c);
    auto best = optimal_deterministic(c, f);
    const double top = instance_distortion_candidate(2, c, f).value;
    for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(top, instance_distortion_candidate(k, c, f).value + 1e-6);
    EXPECT_NEAR(best.report.value, top, 1e-6 * top);
  }
}

TEST(OptimalRandomized, Fixtures) {
  CandidateSet one(rows({{0.5, 0.5}}));
  FeasibleRegion g(Profile::from_rankings({{0}}), one);
  auto single = optimal_randomized(one, g);
  EXPECT_EQ(single.lottery[0], 1.0);
  EXPECT_NEAR(single.report.value, 1.0, 1e-9);

  SymmetricPair s;
  FeasibleRegion f(s.profile, s.candidates);
  auto r = optimal_randomized(s.candidates, f);
  EXPECT_NEAR(r.report.value, 1.5, 1e-3);
  EXPECT_NEAR(r.lottery[0], 0.5, 1e-3);
}

TEST(DistortionProperty, OptimaDominateAndMatchGrid) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 1 + trial % 3, m = 2 + trial % 3, d = 2 + trial % 2;
    Matrix cand = testing_support::random_simplex_rows(rng, m, d);
    CandidateSet c(cand);
    auto p = utilities_to_profile(compute_utilities(VoterSet(testing_support::random_hull_voters(rng, cand, n)), c));
    FeasibleRegion f(p, c);
    auto det = optimal_deterministic(c, f);
    auto rnd = optimal_randomized(c, f);
    EXPECT_LE(rnd.report.value, det.report.value * (1 + 1e-6) + 1e-6);
    for (std::size_t k = 0; k < static_cast<std::size_t>(m); ++k) {
      const double v = instance_distortion_candidate(k, c, f).value;
      EXPECT_LE(det.report.value, v + 1e-6);
      const double g = testing_support::grid_distortion(p, c, c.vector(k));
      if (std::isfinite(v) && v < 20) {
        EXPECT_GE(v, g * (1 - 1e-9));  // the grid sits inside the region
        EXPECT_NEAR(g, v, 0.05 * v) << "trial " << trial << " candidate " << k;
      }
    }
    for (const Lottery& l : {Lottery::uniform(static_cast<std::size_t>(m)), random_dictatorship(p)}) {
      EXPECT_LE(rnd.report.value, instance_distortion_lottery(l, c, f).value + 1e-6);
    }
  }
}

TEST(DistortionProperty, EmpiricalBelowInstance) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix cand = testing_support::random_simplex_rows(rng, 6, 4);
    CandidateSet c(cand);
    VoterSet v(testing_support::random_hull_voters(rng, cand, 8));
    auto u = compute_utilities(v, c);
    auto p = utilities_to_profile(u);
    FeasibleRegion f(p, c);
    for (const Lottery& l : {Lottery::uniform(6), random_dictatorship(p), harmonic_lottery(p)}) {
      EXPECT_LE(empirical_distortion(l, u), instance_distortion_lottery(l, c, f).value * (1 + 1e-6));
    }
  }
}

TEST(EmpiricalDistortion, Examples) {
  UtilityProfile u(rows({{0.7, 0.2}, {0.6, 0.1}}));
  EXPECT_DOUBLE_EQ(empirical_distortion(Lottery::point_mass(2, 0), u), 1.0);
  UtilityProfile w(rows({{1.0, 0.0}}));
  EXPECT_DOUBLE_EQ(empirical_distortion(Lottery::uniform(2), w), 2.0);
  EXPECT_EQ(empirical_distortion(Lottery::point_mass(2, 1), w), kInf);
}
