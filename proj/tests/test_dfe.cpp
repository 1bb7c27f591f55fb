#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "wfgraph/dfe.hpp"
#include "wfgraph/random_models.hpp"

using namespace wfg;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Trapezoid on [-60, 60] over the unnormalized two-sided density
// g(|x|) for x < 0 and g(x) e^{-2x} for x > 0; returns the mean.
double trapezoid_mean(const std::function<double(double)>& g, int n = 1000000) {
  const double h = 120.0 / n;
  long double z = 0.0L, first = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const double x = -60.0 + h * i;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const double d = x < 0.0 ? g(-x) : g(x) * std::exp(-2.0 * x);
    z += w * d;
    first += w * d * x;
  }
  return static_cast<double>(first / z);
}

// Gamma(a < 1) has an integrable t^{a-1} singularity; trapezoid in u = t^a,
// where t^{a-1} dt = du / a.
double trapezoid_mean_gamma_small_shape(double a, int n = 1000000) {
  const double top = std::pow(60.0, a);
  const double h = top / n;
  long double neg = 0.0L, pos = 0.0L, neg1 = 0.0L, pos1 = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const double u = h * i;
    const double t = std::pow(u, 1.0 / a);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const double base = std::exp(-t);
    neg += w * base;
    pos += w * base * std::exp(-2.0 * t);
    neg1 += w * base * t;
    pos1 += w * base * std::exp(-2.0 * t) * t;
  }
  return static_cast<double>((pos1 - neg1) / (pos + neg));
}

void expect_valid_cdf(const DfeDistribution& d) {
  const auto& atoms = d.atoms();
  ASSERT_FALSE(atoms.empty());
  EXPECT_EQ(d.cdf(atoms.front().gamma - 1.0), 0.0);
  EXPECT_NEAR(d.cdf(atoms.back().gamma + 1.0), d.total_mass(), 1e-15);
  double prev = 0.0;
  for (const auto& a : atoms) {
    const double below = d.cdf(std::nextafter(a.gamma - 2e-12, -1e300));
    const double at = d.cdf(a.gamma);
    EXPECT_GE(below, prev - 1e-15);
    EXPECT_NEAR(at - below, a.weight, 1e-14);  // jump sits at the atom: right-continuous
    prev = at;
  }
}

}  // namespace

TEST(HDfe, NeutralSingleAtom) {
  const auto base = random_ensemble(3);
  LocusEnsemble n(base.theta_graph(), {{SelectionSpec::neutral(base.theta_graph()), 20}}, 20, 1e3);
  const auto d = h_dfe(n);
  ASSERT_EQ(d.atoms().size(), 1u);
  EXPECT_EQ(d.atoms()[0].gamma, 0.0);
  EXPECT_NEAR(d.atoms()[0].weight, 1.0, 1e-14);
  const auto p = h_pdfe(n);
  ASSERT_EQ(p.conditional.atoms().size(), 1u);
  EXPECT_NEAR(p.conditional.atoms()[0].weight, 1.0, 1e-14);
  EXPECT_EQ(mean_load(d), 0.0);
  EXPECT_EQ(mean_load(n), 0.0);
}

TEST(HDfe, ValidCdfs) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto e = random_ensemble(seed);
    const auto d = h_dfe(e);
    EXPECT_NEAR(d.total_mass(), 1.0, 1e-12);
    expect_valid_cdf(d);
    const auto p = h_pdfe(e);
    EXPECT_NEAR(p.conditional.total_mass(), 1.0, 1e-12);
    EXPECT_LT(p.raw.total_mass(), 1.0);
    expect_valid_cdf(p.conditional);
  }
}

TEST(HDfe, RawTotalIsPolymorphicFraction) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto e = random_ensemble(seed);
    double expect = 0.0;
    for (const auto& c : e.classes()) expect += static_cast<double>(c.multiplicity) * (c.omega_n - 1.0) / c.omega_n;
    expect /= e.length();
    // Omega - 1 is formed by cancellation in the oracle, so compare absolutely too.
    EXPECT_NEAR(h_pdfe(e).raw.total_mass(), expect, 1e-12 * expect + 1e-15) << seed;
  }
}

TEST(HDfe, RawWeightsAreEdgeMasses) {
  // Single class, all gamma distinct: each raw atom is one stationary edge mass.
  // lambda_uv = a_uv pi_v with symmetric a and pi = (1, 2, 3).
  AlleleGraph g({"a", "b", "c"}, {{0, 0.02, 0.06}, {0.01, 0, 0.045}, {0.02, 0.03, 0}});
  const auto s = gamma_from_fitness({0.0, 0.7, -1.9}, g);
  const std::uint64_t L = 40;
  LocusEnsemble e(g, {{s, L}}, L, 5e3);
  ASSERT_TRUE(e.all_reversible());
  const auto m = e.class_measure(0);
  const auto raw = h_pdfe(e).raw;
  for (const Edge& ed : g.edges()) {
    const double gamma = s.gamma(ed.from, ed.to);
    EXPECT_LT(rel(raw.jump(gamma), m.edge_mass(ed.from, ed.to)), 1e-12) << gamma;
  }
}

TEST(HDfe, MergesEqualGamma) {
  const DfeDistribution d({{-1.0, 0.2}, {-1.0 + 5e-13, 0.3}, {0.5, 0.5}}, DfeKind::custom);
  ASSERT_EQ(d.atoms().size(), 2u);
  EXPECT_NEAR(d.jump(-1.0), 0.5, 1e-15);
  EXPECT_THROW(DfeDistribution({{0.0, -1.0}}, DfeKind::custom), DomainError);
}

TEST(Prop3, DfeRandomEnsembles) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto e = random_ensemble(seed);
    const auto r = check_skewness_dfe(e);
    EXPECT_TRUE(r.jumps_ok) << seed << " deficit " << r.worst_jump_deficit;
    EXPECT_TRUE(r.mean_ok) << seed << " mean " << r.mean;
    EXPECT_TRUE(r.positive_mass_ok) << seed << " positive " << r.positive_mass;
    EXPECT_LT(r.positive_mass, 0.5);
  }
}

TEST(Prop3, PdfeUnderSufficientCondition) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto e = random_ensemble(seed);
    const auto r = check_skewness_pdfe(e);
    EXPECT_LE(mean_load(e), 1e-12);
    if (!r.sufficient_condition) continue;
    ++checked;
    EXPECT_TRUE(r.holds()) << seed;
  }
  EXPECT_GT(checked, 20);
}

TEST(Prop3, PdfeJumpInequalityOnAtoms) {
  // (1 + ln N + K) >= e^{2 gamma} (1 + ln N - K) for gamma < 0 once N >= 4 C^2.
  for (double C : {0.5, 1.0, 3.0, 10.0}) {
    const double N = std::max(2.0, 4.0 * C * C);
    for (double g = -C; g < 0.0; g += C / 50.0) {
      const double k = K(Gamma(g));
      const double c = 1.0 + std::log(N);
      EXPECT_GE(c + k, std::exp(2.0 * g) * (c - k)) << C << " " << g;
    }
  }
}

TEST(MeanLoad, PairSumMatchesAtoms) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto e = random_ensemble(seed);
    const double atoms = mean_load(h_dfe(e));
    const double pair = mean_load(e);
    EXPECT_LE(pair, 1e-12);
    EXPECT_NEAR(atoms, pair, 1e-10 * std::max(1.0, std::abs(pair))) << seed;
  }
}

TEST(MeanLoad, TwoTypeFormula) {
  for (double g : {-4.0, -0.5, 0.3, 2.0}) {
    const auto e = two_type_ensemble(2e-3, 5e-4, g, 30, 1e3);
    const auto& c = e.classes()[0];
    const double expect = c.eta[0] / c.omega_n * 2e-3 * g * (1.0 - std::exp(2.0 * g)) / (30.0 * theta_hat_eff(e)) * 30.0;
    EXPECT_LT(rel(mean_load(e), expect), 1e-12);
    EXPECT_LT(mean_load(e), 0.0);
    EXPECT_LT(rel(mean_load(h_dfe(e)), expect), 1e-12);
  }
}

TEST(Continuous, CaptionMeans) {
  EXPECT_NEAR(ContinuousDfe::exponential().mean(), -2.0 / 3.0, 1e-6);
  EXPECT_NEAR(ContinuousDfe::gamma(2.0).mean(), -26.0 / 15.0, 1e-6);
  EXPECT_NEAR(ContinuousDfe::gamma(0.15).mean(), -0.058, 1e-3);
}

TEST(Continuous, MeansMatchTrapezoidOracle) {
  EXPECT_NEAR(ContinuousDfe::exponential().mean(), trapezoid_mean([](double t) { return std::exp(-t); }), 1e-6);
  EXPECT_NEAR(ContinuousDfe::gamma(2.0).mean(), trapezoid_mean([](double t) { return t * std::exp(-t); }), 1e-6);
  EXPECT_NEAR(ContinuousDfe::gamma(0.15).mean(), trapezoid_mean_gamma_small_shape(0.15), 1e-6);
  EXPECT_NEAR(ContinuousDfe::gamma(0.6).mean(), trapezoid_mean_gamma_small_shape(0.6), 1e-6);
  auto g = [](double t) { return 1.0 / (1.0 + t * t); };
  EXPECT_NEAR(ContinuousDfe::custom(g).mean(), trapezoid_mean(g), 1e-6);
}

TEST(Continuous, NeutralAtomScalesMean) {
  const auto a = ContinuousDfe::exponential(1.0, 0.0);
  const auto b = ContinuousDfe::exponential(1.0, 0.25);
  EXPECT_NEAR(b.mean(), 0.75 * a.mean(), 1e-14);
  EXPECT_NEAR(b.negative_mass() + b.positive_mass() + b.neutral_weight(), 1.0, 1e-14);
  EXPECT_LT(b.positive_mass(), b.negative_mass());
  EXPECT_THROW(ContinuousDfe::exponential(1.0, 1.0), DomainError);
  EXPECT_THROW(ContinuousDfe::gamma(-1.0), DomainError);
}

TEST(Continuous, DensityIntegratesToOne) {
  const auto d = ContinuousDfe::gamma(2.0, 1.0, 0.1);
  const int n = 200000;
  const double h = 120.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -60.0 + h * i;
    if (x == 0.0) continue;  // g(0) = 0 for shape 2
    s += ((i == 0 || i == n) ? 0.5 : 1.0) * d.density(x);
  }
  EXPECT_NEAR(s * h + 0.1, 1.0, 1e-6);
  EXPECT_NEAR(d.density(-1.3) * std::exp(-2.0 * 1.3), d.density(1.3), 1e-15);
}

TEST(Continuous, TailBounds) {
  EXPECT_LT(ContinuousDfe::exponential().tail_error_bound(), 1e-24);
  EXPECT_LT(ContinuousDfe::gamma(0.15).tail_error_bound(), 1e-24);
  EXPECT_LT(ContinuousDfe::gamma(2.0).tail_error_bound(), 1e-22);
}

TEST(Prf, NeutralPoint) {
  const auto s = prf_afs(0.01, DfeDistribution::point(0.0), 50);
  ASSERT_EQ(s.size(), 49u);
  for (const auto& p : s) EXPECT_LT(rel(p.density, 0.02 / p.y), 1e-14);
}

TEST(Prf, DeleteriousPointIsSingleEdgeSpectrum) {
  const double g = -1.7;
  const auto s = prf_afs(0.01, DfeDistribution::point(g), 20);
  for (const auto& p : s) {
    const double direct = 0.02 * omega(Gamma(g)) * -std::expm1(-2.0 * g * (1.0 - p.y)) / (2.0 * g * p.y * (1.0 - p.y));
    EXPECT_LT(rel(p.density, direct), 1e-12);
  }
}

TEST(Prf, Linearity) {
  const DfeDistribution mix({{-2.0, 0.3}, {0.5, 0.7}}, DfeKind::custom);
  const auto a = prf_afs(0.02, DfeDistribution::point(-2.0), 64);
  const auto b = prf_afs(0.02, DfeDistribution::point(0.5), 64);
  const auto m = prf_afs(0.02, mix, 64);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_LT(rel(m[i].density, 0.3 * a[i].density + 0.7 * b[i].density), 1e-12);
}

TEST(Prf, TwoTypeMatchesGraphAfs) {
  for (double g : {-3.0, 0.0, 1.2}) {
    const std::uint64_t L = 100;
    const auto e = two_type_ensemble(2e-3, 6e-4, g, L, 2e3);
    const auto prf = prf_afs(theta_hat_eff(e), h_dfe(e), 100);
    const auto graph = afs(e.class_measure(0), AfsKind::unfolded, 100);
    double worst = 0.0;
    for (std::size_t i = 0; i < prf.size(); ++i) {
      if (prf[i].y < 0.05 || prf[i].y > 0.95) continue;
      worst = std::max(worst, rel(prf[i].density / static_cast<double>(L), graph[i].density));
    }
    EXPECT_LT(worst, 0.05);
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(Prf, ContinuousMatchesBruteForce) {
  const auto d = ContinuousDfe::gamma(2.0, 1.0, 0.2);
  const auto s = prf_afs(0.01, d, 10);
  const int n = 200000;
  const double h = 60.0 / n;
  for (const auto& p : s) {
    long double acc = 0.0L;
    for (int i = 1; i <= n; ++i) {
      const double t = h * i;
      const double w = i == n ? 0.5 : 1.0;
      acc += w * (d.density(-t) * edge_kernel(Gamma(-t), p.y) + d.density(t) * edge_kernel(Gamma(t), p.y));
    }
    const double expect = 0.02 * (0.2 / p.y + static_cast<double>(acc) * h);
    EXPECT_LT(rel(p.density, expect), 1e-6) << p.y;
  }
}

TEST(Prf, Errors) {
  EXPECT_THROW(prf_afs(0.0, DfeDistribution::point(0.0), 10), DomainError);
  EXPECT_THROW(prf_afs(0.1, DfeDistribution::point(0.0), 1), DomainError);
}
