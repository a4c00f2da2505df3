#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kvwave/error.hpp"
#include "kvwave/spectrum.hpp"
#include "random_state.hpp"

using namespace kvwave;

namespace {

constexpr double pi = std::numbers::pi;

double wnorm(const SemiDiscreteSystem& sys, const ComplexState& U) {
  return std::sqrt(energy_inner(sys, U, U).real());
}

// (iλ - A_h)U through the operator applied by the library.
ComplexState shifted(const SemiDiscreteSystem& sys, double lambda, const ComplexState& U) {
  return ComplexState(Eigen::VectorXcd(Complex(0.0, lambda) * U.data() - apply_operator(sys, U).data()));
}

// Smallest eigenvalue magnitude above zero of the conservative spectrum near
// iπ (y-mode k = 1).
double first_mode_error(int n_cells) {
  const SemiDiscreteSystem sys = assemble(make_conservative(), n_cells);
  const auto recs = compute_spectrum(sys, 2, {0.0, pi});
  return std::abs(recs.front().lambda - Complex(0.0, pi));
}

}  // namespace

TEST(Spectrum, ConservativeMatchesDirichletSpectra) {
  const SemiDiscreteSystem sys = assemble(make_conservative(1.0, 4.0), 200);
  const auto recs = compute_spectrum(sys, 16);
  ASSERT_EQ(recs.size(), 16u);
  // √a = 2: u-modes at ±2kπ i, y-modes at ±kπ i.
  std::vector<double> expected;
  for (int k = 1; k <= 8; ++k) {
    expected.push_back(k * pi);
    expected.push_back(k * pi);
    if (2 * k <= 8) {
      expected.push_back(2 * k * pi);
      expected.push_back(2 * k * pi);
    }
  }
  std::sort(expected.begin(), expected.end());
  expected.resize(16);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_NEAR(std::abs(recs[i].lambda.imag()), expected[i], 1e-3 * expected[i]) << i;
    EXPECT_NEAR(recs[i].lambda.real(), 0.0, 1e-8);
    EXPECT_LE(recs[i].residual, 1e-8);
  }
  EXPECT_EQ(recs.front().mode_index_hint, 1);
  EXPECT_LE(conjugate_pairing_error(recs), 1e-10);
}

TEST(Spectrum, ConservativeConvergesQuadratically) {
  const double ratio = first_mode_error(40) / first_mode_error(80);
  EXPECT_NEAR(ratio, 4.0, 0.3);
}

TEST(Spectrum, DampedPresetsStayInLeftHalfPlane) {
  for (const auto& cfg : {make_main_local(), make_global(), make_auxiliary(), make_transmission_local()}) {
    const SemiDiscreteSystem sys = assemble(cfg, 100);
    const auto recs = compute_spectrum(sys, 40);
    for (const auto& r : recs) {
      EXPECT_LT(r.lambda.real(), 0.0) << to_string(cfg.preset) << " " << r.lambda;
      EXPECT_LE(r.residual, 1e-8);
    }
    EXPECT_LE(conjugate_pairing_error(recs), 1e-10);
  }
}

TEST(Spectrum, ResidualsRecomputedIndependently) {
  const SemiDiscreteSystem sys = assemble(make_main_local(), 80);
  for (const auto& r : compute_spectrum(sys, 10, {0.0, 30.0})) {
    const ComplexState AU = apply_operator(sys, r.eigvec);
    const ComplexState diff(Eigen::VectorXcd(AU.data() - r.lambda * r.eigvec.data()));
    EXPECT_NEAR(wnorm(sys, r.eigvec), 1.0, 1e-12);
    EXPECT_LE(wnorm(sys, diff), 1e-8);
  }
}

TEST(Spectrum, NearTargetAndCountChecks) {
  const SemiDiscreteSystem sys = assemble(make_conservative(), 60);
  const auto recs = compute_spectrum(sys, 1, {0.0, 3 * pi});
  for (const auto& r : recs) EXPECT_NEAR(r.lambda.imag(), 3 * pi, 0.05);
  EXPECT_THROW(compute_spectrum(sys, 4 * 59 + 1), ConfigError);
}

TEST(Spectrum, Csv) {
  const SemiDiscreteSystem sys = assemble(make_conservative(), 20);
  const std::string csv = spectrum_csv(compute_spectrum(sys, 2));
  EXPECT_EQ(csv.rfind("re,im,residual\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Resolvent, FiniteAtZero) {
  const SemiDiscreteSystem sys = assemble(make_main_local(), 60);
  const double r = resolvent_norm(sys, 0.0).norm;
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_GT(r, 0.0);
}

TEST(Resolvent, DenseAndLanczosAgree) {
  const SemiDiscreteSystem sys = assemble(make_global(), 100);
  for (double lam : {0.5, 7.3, 31.0}) {
    const double d = resolvent_norm(sys, lam, ResolventMethod::dense).norm;
    const double l = resolvent_norm(sys, lam, ResolventMethod::lanczos).norm;
    EXPECT_NEAR(d, l, 1e-9 * d) << lam;
  }
}

TEST(Resolvent, BoundsEveryProbe) {
  std::mt19937_64 rng(21);
  for (const auto& cfg : {make_global(), make_main_local(), make_auxiliary()}) {
    const SemiDiscreteSystem sys = assemble(cfg, 80);
    for (double lam : {1.0, 12.5}) {
      const double r = resolvent_norm(sys, lam).norm;
      for (int k = 0; k < 20; ++k) {
        const ComplexState U = oracle::random_complex_state(sys.n(), rng);
        EXPECT_GE(r * (1 + 1e-10), wnorm(sys, U) / wnorm(sys, shifted(sys, lam, U)));
      }
    }
  }
}

TEST(Resolvent, HuangPrussWitnessIsLowerBound) {
  const ProblemConfig cfg = make_global();
  const SemiDiscreteSystem sys = assemble(cfg, 400);
  for (int n : {1, 3, 6}) {
    const HuangPrussTriple t = huang_pruss_sequence(cfg, n);
    const DiscreteWitness w = interpolate_witness(sys, t);
    const double r = resolvent_norm(sys, t.lambda).norm;
    EXPECT_GE(r * (1 + 1e-10), wnorm(sys, w.U) / wnorm(sys, shifted(sys, t.lambda, w.U)));
    EXPECT_GE(r, 0.95 * wnorm(sys, w.U) / wnorm(sys, w.F)) << n;
  }
}

TEST(Resolvent, SweepIndependentOfJobs) {
  const SemiDiscreteSystem sys = assemble(make_global(), 40);
  const std::vector<double> lams{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto a = resolvent_sweep(sys, lams, ResolventMethod::automatic, 1);
  const auto b = resolvent_sweep(sys, lams, ResolventMethod::automatic, 3);
  ASSERT_EQ(a.size(), lams.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].lambda_imag, lams[i]);
    EXPECT_EQ(a[i].norm, b[i].norm);
  }
  EXPECT_EQ(resolvent_csv(a).rfind("lambda,norm\n", 0), 0u);
}

TEST(HuangPruss, ValuesAtThree) {
  const HuangPrussTriple t = huang_pruss_sequence(make_global(pi, 2.0, 1.0, 1.0), 3);
  EXPECT_NEAR(t.lambda, 3.0, 1e-15);
  EXPECT_NEAR(std::abs(t.A - Complex(0.0, 1.0 / 3.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(t.B - Complex(-1.0, -3.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(t.D1), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(t.D2 - 1.0), 0.0, 1e-13);
}

TEST(HuangPruss, AmplitudesSolveContinuumSystem) {
  // Oracle: apply iλ - A to (A s, iλA s, B s, iλB s) with s'' = -k²s, k = nπ/L:
  //   block 2: -λ²A + a k²A + i b₀ λ k²A + i c₀ λ B
  //   block 4: -λ²B + k²B - i c₀ λ A
  const Complex I(0.0, 1.0);
  for (const auto& cfg : {make_global(), make_global(1.0, 4.0, 0.5, 2.0), make_global(2.5, 1.0, 3.0, 0.7)}) {
    for (int n : {1, 2, 7, 40}) {
      const HuangPrussTriple t = huang_pruss_sequence(cfg, n);
      const double k = n * pi / cfg.L, lam = t.lambda;
      const Complex second = -lam * lam * t.A + cfg.a * k * k * t.A + I * cfg.b0 * lam * k * k * t.A +
                             I * cfg.c0 * lam * t.B;
      const Complex fourth = -lam * lam * t.B + k * k * t.B - I * cfg.c0 * lam * t.A;
      const double scale = cfg.b0 * lam * k * k * std::abs(t.A) + 1.0;
      EXPECT_LT(std::abs(second), 1e-13 * scale);
      EXPECT_LT(std::abs(fourth - 1.0), 1e-13 * scale);
      EXPECT_LE(t.D1_rel, 1e-12);
      EXPECT_LE(t.D2_rel, 1e-12);
    }
  }
}

TEST(HuangPruss, EnergyNormByQuadrature) {
  const ProblemConfig cfg = make_global(2.0, 3.0, 1.5, 0.8);
  const HuangPrussTriple t = huang_pruss_sequence(cfg, 4);
  // Simpson on a|u'|² + |v|² + |y'|² + |z|².
  const int m = 2000;
  const double h = cfg.L / m, k = t.lambda;
  double sum = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double x = i * h, s = std::sin(k * x), c = std::cos(k * x);
    const double f = cfg.a * std::norm(t.A * k * c) + std::norm(t.lambda * t.A * s) +
                     std::norm(t.B * k * c) + std::norm(t.lambda * t.B * s);
    sum += f * (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  EXPECT_NEAR(t.norm_U_sq, sum * h / 3.0, 1e-10 * t.norm_U_sq);
  EXPECT_DOUBLE_EQ(t.norm_F_sq, cfg.L / 2);
  EXPECT_GE(t.norm_U_sq, cfg.L * t.lambda * t.lambda * std::norm(t.B) / 2);
}

TEST(HuangPruss, GrowthLikeLambdaSquared) {
  const ProblemConfig cfg = make_global();
  const auto scaled = [&](int n) {
    const HuangPrussTriple t = huang_pruss_sequence(cfg, n);
    return t.norm_U_sq / std::pow(t.lambda, 4);
  };
  EXPECT_GT(scaled(100), 0.0);
  EXPECT_NEAR(scaled(1000), scaled(2000), 1e-3 * scaled(2000));
  EXPECT_NEAR(huang_pruss_sequence(cfg, 5000).growth_ratio(), huang_pruss_ratio_limit(cfg), 1e-3);
  EXPECT_NEAR(huang_pruss_ratio_limit(cfg), std::sqrt(2.0), 1e-15);
}

TEST(HuangPruss, Errors) {
  EXPECT_THROW(huang_pruss_sequence(make_main_local(), 1), ConfigError);
  EXPECT_THROW(huang_pruss_sequence(make_global(), 0), DomainError);
  EXPECT_THROW(huang_pruss_sequence(make_conservative(), 1), ConfigError);
}

TEST(HuangPruss, DiscreteResidualIsSecondOrder) {
  const ProblemConfig cfg = make_global();
  const HuangPrussTriple t = huang_pruss_sequence(cfg, 1);
  const double coarse = discrete_huang_pruss_check(assemble(cfg, 64), t);
  const double fine = discrete_huang_pruss_check(assemble(cfg, 128), t);
  EXPECT_NEAR(coarse / fine, 4.0, 1.0);
  EXPECT_THROW(discrete_huang_pruss_check(assemble(make_global(pi, 3.0), 64), t), ConfigError);
}
