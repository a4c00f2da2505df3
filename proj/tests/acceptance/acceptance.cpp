// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on FAIL.
// Usage: kvwave_acceptance [--criterion N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fem_oracle.hpp"
#include "kernel_oracle.hpp"
#include "kvwave/charroots.hpp"
#include "kvwave/evolve.hpp"
#include "kvwave/experiment.hpp"
#include "kvwave/spectrum.hpp"
#include "random_state.hpp"

using namespace kvwave;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// Re<A_h U, U>_W = -(vᵀD_u v + zᵀD_y z), with D from the dense reference assembly.
Verdict dissipativity() {
  std::mt19937_64 rng(2024);
  double worst = 0.0, max_form = -INFINITY;
  for (const auto& cfg : {make_main_local(), make_global(), make_transmission_local(), make_auxiliary()}) {
    const SemiDiscreteSystem sys = assemble(cfg, 400);
    const oracle::DenseForms f = oracle::assemble_dense(cfg, sys.grid());
    for (int k = 0; k < 100; ++k) {
      const State U = oracle::random_state(sys.n(), rng);
      const Eigen::VectorXd v = U.v(), z = U.z();
      const double d = v.dot(f.Du * v) + z.dot(f.Dy * z);
      const double form = generator_form(sys, U);
      max_form = std::max(max_form, form);
      worst = std::max(worst, std::abs(form + d) / std::max(std::abs(d), 1e-300));
    }
  }
  return {max_form <= 0.0 && worst <= 1e-12,
          fmt("4 presets x 100 states, 400 cells: max Re<AU,U> = %.3e, max rel err vs -v'Dv = %.2e (tol 1e-12)",
              max_form, worst)};
}

// Printed closed forms against direct determinants of the boundary matrices.
Verdict kernel_equivalence() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(0.5, 4.0), uc(0.5, 3.0), ual(0.1, 1.0), ulo(0.1, 0.9), uhi(1.1, 3.0);
  std::map<KernelCase, double> printed, corrected;
  for (KernelCase kc : {KernelCase::lt, KernelCase::eq, KernelCase::gt}) {
    for (int i = 0; i < 1000; ++i) {
      const double a = ua(rng), c0 = uc(rng), al = ual(rng);
      const double l = kc == KernelCase::lt ? c0 * ulo(rng) : kc == KernelCase::eq ? c0 : c0 * uhi(rng);
      const KernelDet k = kernel_det(kc, l, a, c0, al);
      const Complex direct = oracle::kernel_det(kc, l, a, c0, al);
      printed[kc] = std::max(printed[kc], std::abs(k.closed_form_as_printed - direct) / std::abs(direct));
      corrected[kc] = std::max(corrected[kc], std::abs(k.closed_form - direct) / std::abs(direct));
    }
  }
  bool ok = true;
  for (const auto& [kc, e] : printed) ok = ok && e <= 1e-10;
  return {ok, fmt("3 x 1000 draws, printed closed forms: lt %.2e eq %.2e gt %.2e (tol 1e-10); "
                  "lambda^2 c0^2 denominator for gt: %.2e",
                  printed[KernelCase::lt], printed[KernelCase::eq], printed[KernelCase::gt],
                  corrected[KernelCase::gt])};
}

Verdict huang_pruss() {
  const ProblemConfig cfg = make_global(pi, 2.0, 1.0, 1.0);
  using R = long double;
  using C = std::complex<R>;
  double worst_lib = 0.0, worst_oracle = 0.0;
  std::vector<double> ratios;
  for (int n = 1; n <= 200; ++n) {
    const HuangPrussTriple t = huang_pruss_sequence(cfg, n);
    worst_lib = std::max({worst_lib, t.D1_rel, t.D2_rel});
    // (iλ - A) applied to the sine-mode amplitudes, s'' = -(nπ/L)² s.
    const R k = n * std::numbers::pi_v<R> / cfg.L, l = t.lambda;
    const C A(t.A.real(), t.A.imag()), B(t.B.real(), t.B.imag()), I(0, 1);
    const C terms1[] = {-l * l * A, R(cfg.a) * k * k * A, I * R(cfg.b0) * l * k * k * A, I * R(cfg.c0) * l * B};
    const C terms2[] = {-l * l * B, k * k * B, -I * R(cfg.c0) * l * A};
    C s1 = 0, s2 = 0;
    R m1 = 0, m2 = 0;
    for (const C& x : terms1) s1 += x, m1 += std::abs(x);
    for (const C& x : terms2) s2 += x, m2 += std::abs(x);
    worst_oracle = std::max({worst_oracle, double(std::abs(s1) / m1), double(std::abs(s2 - R(1)) / m2)});
    ratios.push_back(t.growth_ratio());
  }
  const double limit = huang_pruss_ratio_limit(cfg);
  const bool converging = std::abs(ratios[199] - limit) < std::abs(ratios[49] - limit) &&
                          std::abs(ratios[199] - limit) < 1e-3 * limit && limit > 0.0;

  const HuangPrussTriple w = huang_pruss_sequence(cfg, 3);
  std::vector<double> res;
  for (int cells : {100, 200, 400, 800}) res.push_back(discrete_huang_pruss_check(assemble(cfg, cells), w));
  bool fourfold = true;
  std::string orders;
  for (std::size_t i = 1; i < res.size(); ++i) {
    const double q = res[i - 1] / res[i];
    fourfold = fourfold && q > 3.0 && q < 5.0;
    orders += fmt(" %.3f", q);
  }
  return {worst_lib <= 1e-12 && worst_oracle <= 1e-12 && converging && fourfold,
          fmt("n=1..200: max D rel %.1e (independent %.1e, tol 1e-12); ratio(200) = %.6f -> %.6f; "
              "residual ratios per doubling (n=3, 100..800 cells):%s (want 4 +- 1)",
              worst_lib, worst_oracle, ratios[199], limit, orders.c_str())};
}

Verdict resolvent_growth() {
  const ProblemConfig cfg = make_global();
  std::vector<double> lams;
  for (int k = 5; k <= 60; ++k) lams.push_back(k * pi / cfg.L);
  const auto slope_at = [&](int cells) {
    const SemiDiscreteSystem sys = assemble(cfg, cells);
    std::vector<double> norms;
    for (const auto& s : resolvent_sweep(sys, lams, ResolventMethod::automatic, jobs())) norms.push_back(s.norm);
    return loglog_slope(lams, norms);
  };
  const double slope = slope_at(600);
  std::string detail = fmt("k=5..60, 600 cells: log-log slope %.3f (want 2.0 +- 0.3)", slope);
  if (!std::getenv("KVWAVE_SKIP_DIAGNOSTICS")) {
    detail += fmt("; diagnostic, not scored: 30000 cells slope %.3f", slope_at(30000));
  }
  return {std::abs(slope - 2.0) <= 0.3, detail};
}

Verdict char_roots() {
  const double c = 2.0;
  const auto roots = find_branch_roots(c, 10, 60, jobs());
  int bad_counts = 0, nonneg = 0, increases = 0, outside_band = 0;
  std::map<Branch, std::vector<double>> dist;
  double err3 = 0.0, err2 = 0.0;
  for (const auto& r : roots) {
    if (count_roots_in_ball(r.ball_center, r.ball_radius, c).count != 1) ++bad_counts;
    if (!(r.root.real() < 0.0)) ++nonneg;
    const F0Roots mu = f0_roots(r.n, c);
    dist[r.branch].push_back(std::abs(r.root - (r.branch == Branch::branch1 ? mu.mu1 : mu.mu2)));
    const double kappa = real_part_coefficient(r.branch, c);
    const double scaled = -r.root.real() * std::sqrt(r.n * pi);
    if (!(scaled >= 0.5 * kappa && scaled <= 2.0 * kappa)) ++outside_band;
    if (r.branch == Branch::branch1) {
      err3 += std::abs(std::log(scaled / kappa));
      err2 += std::abs(std::log(scaled / real_part_coefficient(r.branch, c, Case1Constant::two_plus_cos)));
    }
  }
  for (const auto& [b, d] : dist) {
    for (std::size_t i = 1; i < d.size(); ++i) increases += d[i] > d[i - 1];
  }
  return {bad_counts == 0 && nonneg == 0 && increases == 0 && outside_band == 0,
          fmt("%zu roots, n=10..60: balls without exactly one root %d, Re >= 0 %d, increases of |root-mu| %d, "
              "|Re|sqrt(n pi) outside [0.5,2]x coefficient %d; case-1 constant fits %s "
              "(mean |log ratio| 3+cos %.3f vs 2+cos %.3f)",
              roots.size(), bad_counts, nonneg, increases, outside_band, err3 <= err2 ? "3+cos(c/2)" : "2+cos(c/2)",
              err3 / 51, err2 / 51)};
}

Verdict asymptotic_consistency() {
  std::vector<double> ts, rs;
  for (double t = 50.0; t <= 500.0 + 1e-9; t += 10.0) {
    ts.push_back(t);
    rs.push_back(asymptotic_remainder({0.0, t}, 2.0));
  }
  const double slope = loglog_slope(ts, rs);
  return {slope <= -2.3, fmt("t in [50,500], 46 points: remainder slope %.3f (want <= -2.3)", slope)};
}

Verdict polynomial_decay() {
  const SemiDiscreteSystem sys = assemble(make_main_local(), 400);
  const Trajectory traj = simulate(sys, smooth_initial_state(sys), 200.0, 1e-3);
  const DecayFit p = fit_decay(traj, DecayModel::polynomial, {10.0, 200.0});
  const DecayFit e = fit_decay(traj, DecayModel::exponential, {10.0, 200.0});
  return {p.exponent_or_rate >= 0.8 && e.residual > p.residual,
          fmt("exponent %.3f (want >= 0.8); log-residual polynomial %.4f vs exponential %.4f (want exponential worse)",
              p.exponent_or_rate, p.residual, e.residual)};
}

Verdict auxiliary_stability() {
  const SemiDiscreteSystem sys = assemble(make_auxiliary(), 400);
  const Trajectory traj = simulate(sys, smooth_initial_state(sys), 50.0, 1e-3);
  const DecayFit e = fit_decay(traj, DecayModel::exponential, {5.0, 50.0});
  std::vector<double> norms;
  for (const auto& s : resolvent_sweep(sys, linspace(1.0, 200.0, 200), ResolventMethod::automatic, jobs())) {
    norms.push_back(s.norm);
  }
  const double ratio = upper_envelope_ratio(norms, 10);
  return {e.r_squared > 0.99 && ratio < 5.0,
          fmt("R^2 %.4f on [5,50] (want > 0.99), rate %.4f; envelope max/min %.3f over lambda in [1,200] (want < 5)",
              e.r_squared, e.exponent_or_rate, ratio)};
}

Verdict oracle_spectra() {
  // u-modes 2kπ/L (√a = 2) and y-modes kπ/L for k = 1..5, plus the y-modes
  // interleaved with them up to 10π so the sorted lists align.
  std::vector<double> expected;
  for (int k = 1; k <= 10; ++k) expected.push_back(k * pi);
  for (int k = 1; k <= 5; ++k) expected.push_back(2 * k * pi);
  std::sort(expected.begin(), expected.end());
  const int positive = static_cast<int>(expected.size());
  std::vector<std::vector<double>> errors;
  for (int cells : {100, 200, 400}) {
    const SemiDiscreteSystem sys = assemble(make_conservative(1.0, 4.0), cells);
    std::vector<double> im;
    for (const auto& r : compute_spectrum(sys, 2 * positive + 2)) {
      if (r.lambda.imag() > 0.0) im.push_back(r.lambda.imag());
    }
    std::sort(im.begin(), im.end());
    std::vector<double> err;
    for (int i = 0; i < positive; ++i) err.push_back(std::abs(im.at(i) - expected[i]) / expected[i]);
    errors.push_back(err);
  }
  bool ok = true;
  double worst_fine = 0.0, qmin = INFINITY, qmax = 0.0;
  for (int i = 0; i < positive; ++i) {
    worst_fine = std::max(worst_fine, errors[2][i]);
    for (int m = 1; m < 3; ++m) {
      const double q = errors[m - 1][i] / errors[m][i];
      qmin = std::min(qmin, q);
      qmax = std::max(qmax, q);
      ok = ok && q > 3.5 && q < 4.5;
    }
  }
  ok = ok && worst_fine < 1e-3;
  return {ok, fmt("15 modes up to 10 pi (u: 2k pi, k=1..5; y: k pi, k=1..10): max rel err at 400 cells %.2e; "
                  "error ratios per doubling in [%.3f, %.3f] (want 4 +- 0.5)",
                  worst_fine, qmin, qmax)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"dissipativity and dissipation identity", dissipativity},
      {"kernel determinant closed forms", kernel_equivalence},
      {"Huang-Pruss witness", huang_pruss},
      {"resolvent growth, global preset", resolvent_growth},
      {"characteristic roots vs asymptotics", char_roots},
      {"asymptotic determinant consistency", asymptotic_consistency},
      {"polynomial decay, main_local preset", polynomial_decay},
      {"auxiliary exponential stability", auxiliary_stability},
      {"oracle spectra, conservative preset", oracle_spectra},
  };

  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "criterion must be in 1..%zu\n", criteria.size());
    return 2;
  }

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && only != static_cast<int>(i + 1)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu %s: %s [%.1f s] %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, secs,
                v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
