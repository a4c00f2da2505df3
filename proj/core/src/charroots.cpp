#include "kvwave/charroots.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "kvwave/csv.hpp"
#include "kvwave/error.hpp"

namespace kvwave {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

// Exponents together with the differences of their squares, each computed
// without subtracting two O(λ²) quantities.
struct ExponentData {
  Complex lambda;
  double c = 0.0;
  Complex r1, r2, s1, s2;
  Complex d1;  // λ² - s₁²
  Complex d2;  // λ² - s₂²
  Complex ic_lambda;  // icλ = r₁² - λ² = λ² - r₂²
};

ExponentData exponent_data(Complex lambda, double c) {
  if (lambda == Complex(0.0)) throw DomainError("branch exponents undefined at lambda = 0");
  if (lambda == Complex(-1.0)) throw DomainError("branch exponents undefined at lambda = -1");
  ExponentData e;
  e.lambda = lambda;
  e.c = c;
  const Complex l = lambda;
  const Complex l2 = l * l;
  e.r1 = l * paper_sqrt(1.0 + kI * c / l);
  e.r2 = l * paper_sqrt(1.0 - kI * c / l);
  const Complex w = 4.0 * c * c / (l2 * l) + 4.0 * c * c / (l2 * l2);
  const Complex q = paper_sqrt(1.0 - w);
  const Complex one_minus_q = w / (1.0 + q);
  const Complex denom = 2.0 * (1.0 + 1.0 / l);
  e.s1 = l * paper_sqrt((1.0 + 2.0 / l + q) / denom);
  e.s2 = paper_sqrt(l) * paper_sqrt((2.0 + l * one_minus_q) / denom);
  e.d1 = l2 * one_minus_q / denom;
  e.d2 = l2 * (1.0 + q) / denom;
  e.ic_lambda = kI * c * l;
  return e;
}

// sinh(w/2) and cosh(w/2) divided by e^{|Re w|/2}.
struct ScaledHyp {
  Complex sinh, cosh;
  double shift = 0.0;
};

ScaledHyp scaled_hyp(Complex w) {
  const Complex h = 0.5 * w;
  const double shift = std::abs(h.real());
  const Complex ep = std::exp(h - shift);
  const Complex em = std::exp(-h - shift);
  return {0.5 * (ep - em), 0.5 * (ep + em), shift};
}

void check_finite(Complex v, Complex lambda) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    std::ostringstream msg;
    msg << "characteristic determinant overflow at lambda = " << lambda
        << " (|lambda| = " << std::abs(lambda) << ")";
    throw NumericalError(msg.str());
  }
}

Complex pow_11_2(Complex lambda) {
  const Complex l2 = lambda * lambda;
  return l2 * l2 * lambda * paper_sqrt(lambda);
}

}  // namespace

Complex paper_sqrt(Complex z) {
  // Only the larger component comes from the half-angle formula; the other
  // follows from 2·re·im = Im z, avoiding |z| - |Re z| cancellation.
  const double m = std::abs(z);
  if (z.imag() == 0.0) {
    return z.real() >= 0.0 ? Complex(std::sqrt(z.real()), 0.0) : Complex(0.0, std::sqrt(-z.real()));
  }
  if (z.real() >= 0.0) {
    const double re = std::sqrt(0.5 * (m + z.real()));
    return {re, z.imag() / (2.0 * re)};
  }
  const double im = std::copysign(std::sqrt(0.5 * (m - z.real())), z.imag());
  return {z.imag() / (2.0 * im), im};
}

BranchExponents branch_exponents(Complex lambda, double c) {
  const ExponentData e = exponent_data(lambda, c);
  return {e.r1, e.r2, e.s1, e.s2};
}

Complex ScaledDet::at_reference(double reference) const {
  return value * std::exp(log_scale - reference);
}

DetCoefficients char_det_coefficients(Complex lambda, double c) {
  const ExponentData e = exponent_data(lambda, c);
  const Complex l = lambda;
  const ScaledHyp h1 = scaled_hyp(e.r1), h2 = scaled_hyp(e.r2), hs = scaled_hyp(e.s1);
  const Complex S1 = h1.sinh, C1 = h1.cosh, S2 = h2.sinh, C2 = h2.cosh;
  const Complex SS = hs.sinh, CS = hs.cosh;
  const Complex icl = e.ic_lambda;

  const Complex r1r2 = 2.0 * icl;          // r₁² - r₂²
  const Complex s1s2 = e.d2 - e.d1;        // s₁² - s₂²
  const Complex r2_s1 = -icl + e.d1;       // r₂² - s₁²
  const Complex r1_s1 = icl + e.d1;        // r₁² - s₁²
  const Complex r1_s2 = icl + e.d2;        // r₁² - s₂²
  const Complex r2_s2 = -icl + e.d2;       // r₂² - s₂²
  const Complex g1 = e.d2 * (l + 1.0) + icl;  // (λ² - s₂²)λ + r₁² - s₂²
  const Complex g2 = e.d2 * (l + 1.0) - icl;  // (λ² - s₂²)λ + r₂² - s₂²
  const Complex g3 = e.d1 * (l + 1.0) - icl;  // (λ² - s₁²)λ + r₂² - s₁²
  const Complex g4 = e.d1 * (l + 1.0) + icl;  // (λ² - s₁²)λ + r₁² - s₁²

  const Complex t1 = -e.s1 * e.s2 * r1r2 * s1s2 * (l + 1.0) * S1 * S2 * CS;
  const Complex t2 = e.r1 * e.s2 * r2_s1 * g1 * C1 * S2 * SS;
  const Complex t3 = -e.r2 * e.s2 * r1_s1 * g2 * S1 * C2 * SS;
  const Complex t4 = -e.r1 * e.r2 * r1r2 * s1s2 * C1 * C2 * SS;
  const Complex t5 = e.r2 * e.s1 * r1_s2 * g3 * S1 * C2 * CS;
  const Complex t6 = -e.r1 * e.s1 * r2_s2 * g4 * C1 * S2 * CS;

  DetCoefficients out;
  out.F1 = t1 + t2 + t3 + t4 + t5 + t6;
  out.F2 = t1 + t2 + t3 - t4 - t5 - t6;
  out.exp_minus_s2 = std::exp(-e.s2);
  out.log_scale = h1.shift + h2.shift + hs.shift;
  return out;
}

ScaledDet char_det(Complex lambda, double c) {
  const DetCoefficients k = char_det_coefficients(lambda, c);
  const Complex v = k.F1 + k.F2 * k.exp_minus_s2;
  check_finite(v, lambda);
  return {v, k.log_scale};
}

ScaledDet char_det_direct(Complex lambda, double c) {
  const ExponentData e = exponent_data(lambda, c);
  const Complex l = lambda;
  const ScaledHyp h1 = scaled_hyp(e.r1), h2 = scaled_hyp(e.r2), hs = scaled_hyp(e.s1);
  const Complex em = std::exp(-e.s2);
  const Complex s1sq = e.s1 * e.s1, s2sq = e.s2 * e.s2;

  using C = std::complex<long double>;
  auto ld = [](Complex z) { return C(z.real(), z.imag()); };
  std::array<std::array<C, 4>, 4> m{};
  auto set_col = [&](int j, Complex r, Complex sh, Complex ch) {
    m[0][j] = ld(sh);
    m[1][j] = ld(r * ch);
    m[2][j] = ld(r * r * sh);
    m[3][j] = ld(r * r * r * ch);
  };
  set_col(0, e.r1, h1.sinh, h1.cosh);
  set_col(1, e.r2, h2.sinh, h2.cosh);
  m[0][2] = ld(hs.sinh);
  m[1][2] = ld(-e.s1 * hs.cosh);
  m[2][2] = ld(s1sq * hs.sinh);
  m[3][2] = ld(-e.s1 * (s1sq - l * e.d1) * hs.cosh);
  m[0][3] = ld(1.0 - em);
  m[1][3] = ld(-e.s2 * (1.0 + em));
  m[2][3] = ld(s2sq * (1.0 - em));
  m[3][3] = ld(-e.s2 * (s2sq - l * e.d2) * (1.0 + em));

  C det(1);
  for (int k = 0; k < 4; ++k) {
    int p = k;
    for (int i = k + 1; i < 4; ++i) {
      if (std::abs(m[i][k]) > std::abs(m[p][k])) p = i;
    }
    if (m[p][k] == C(0)) return {Complex(0.0), h1.shift + h2.shift + hs.shift};
    if (p != k) {
      std::swap(m[p], m[k]);
      det = -det;
    }
    det *= m[k][k];
    for (int i = k + 1; i < 4; ++i) {
      const C f = m[i][k] / m[k][k];
      for (int j = k; j < 4; ++j) m[i][j] -= f * m[k][j];
    }
  }
  const Complex v(static_cast<double>(det.real()), static_cast<double>(det.imag()));
  check_finite(v, lambda);
  return {v, h1.shift + h2.shift + hs.shift};
}

double local_det_scale(Complex lambda, double c) {
  return std::abs(c) * std::pow(std::max(1.0, std::abs(lambda)), 5.5);
}

// ---------------------------------------------------------------------------

AsymptoticCoefficients asymptotic_coefficients(Complex l, double c, F4Form form) {
  const Complex ch3 = std::cosh(1.5 * l), sh3 = std::sinh(1.5 * l);
  const Complex ch1 = std::cosh(0.5 * l), sh1 = std::sinh(0.5 * l);
  const double cc = std::cos(c / 2), sc = std::sin(c / 2);
  const double last = form == F4Form::as_printed ? std::cosh(c / 2) : std::cos(c / 2);
  AsymptoticCoefficients f;
  f.f0 = ch3 - ch1 * cc;
  f.f1 = sh3 + sh1 * cc;
  f.f2 = c * c * sh3 - 4.0 * ch3 + 4.0 * (ch1 * cc + c * sh1 * sc);
  f.f3 = -8.0 * sh3 + c * c * ch3 - 12.0 * c * ch1 * sc - 8.0 * sh1 * cc;
  f.f4 = -40.0 * c * c * sh3 + (std::pow(c, 4) + 72.0 * c * c + 48.0) * ch3 +
         32.0 * c * (c * cc + 7.0 * sc) * sh1 -
         (8.0 * c * c + 8.0 * std::pow(c, 3) * sc + 16.0 * (4.0 * c * c + 3.0) * last) * ch1;
  return f;
}

Complex asymptotic_F(Complex lambda, double c, F4Form form) {
  const AsymptoticCoefficients f = asymptotic_coefficients(lambda, c, form);
  const Complex sl = paper_sqrt(lambda);
  return f.f0 + f.f1 / sl + f.f2 / (8.0 * lambda) + f.f3 / (8.0 * lambda * sl) +
         f.f4 / (128.0 * lambda * lambda);
}

Complex f0_expanded(Complex lambda, double c) {
  return std::cosh(1.5 * lambda) - std::cosh(0.5 * lambda) * std::cos(c / 2);
}

Complex f0_factored(Complex lambda, double c) {
  const double k = std::cos(c / 4);
  return 2.0 * std::cosh(0.5 * lambda) * (std::cosh(lambda) - k * k);
}

double asymptotic_remainder(Complex lambda, double c, F4Form form) {
  const ScaledDet d = char_det(lambda, c);
  const Complex normalized = d.value / (-kI * c * pow_11_2(lambda));
  const Complex F = asymptotic_F(lambda, c, form) * std::exp(-d.log_scale);
  return std::abs(normalized - F);
}

F0Roots f0_roots(int n, double c) {
  const double k = std::cos(c / 4);
  return {Complex(0.0, (2.0 * n + 1.0) * kPi), Complex(0.0, 2.0 * n * kPi + std::acos(k * k))};
}

// ---------------------------------------------------------------------------

std::string_view to_string(Branch branch) {
  return branch == Branch::branch1 ? "branch1" : "branch2";
}

std::string_view to_string(AsymptoticCase c) {
  return c == AsymptoticCase::sin_nonzero ? "sin_nonzero" : "sin_zero";
}

std::string_view to_string(Case1Constant k) {
  return k == Case1Constant::three_plus_cos ? "3+cos(c/2)" : "2+cos(c/2)";
}

AsymptoticCase asymptotic_case(double c) {
  return std::abs(std::sin(c / 4)) <= 1e-12 ? AsymptoticCase::sin_zero
                                             : AsymptoticCase::sin_nonzero;
}

double asymptotic_gamma(double c) {
  if (asymptotic_case(c) == AsymptoticCase::sin_zero) {
    throw DomainError("gamma is undefined when sin(c/4) = 0");
  }
  const double k = std::cos(c / 4);
  const double theta = std::acos(k * k);
  return (std::cos(c / 2) * std::sin(theta / 2) + std::sin(1.5 * theta)) /
         (4.0 * std::sqrt(1.0 - std::pow(k, 4)) * std::cos(theta / 2));
}

double real_part_coefficient(Branch branch, double c, Case1Constant k) {
  if (branch == Branch::branch2) return asymptotic_gamma(c);
  const double s = std::sin(c / 4);
  const double base = k == Case1Constant::three_plus_cos ? 3.0 : 2.0;
  return 2.0 * s * s / (base + std::cos(c / 2));
}

AsymptoticBranch describe_branch(Branch branch, double c) {
  AsymptoticBranch b;
  b.branch = branch;
  b.asym_case = asymptotic_case(c);
  b.gamma = b.asym_case == AsymptoticCase::sin_nonzero ? asymptotic_gamma(c)
                                                       : std::numeric_limits<double>::quiet_NaN();
  return b;
}

Complex asymptotic_eigenvalue(Branch branch, int n, double c, Case1Constant k) {
  if (n == 0) throw DomainError("asymptotic eigenvalues need |n| >= 1");
  const double nn = n;
  const double sgn = n > 0 ? 1.0 : -1.0;
  const F0Roots mu = f0_roots(n, c);
  if (asymptotic_case(c) == AsymptoticCase::sin_nonzero) {
    const double root = std::sqrt(std::abs(nn) * kPi);
    if (branch == Branch::branch1) {
      return mu.mu1 - real_part_coefficient(Branch::branch1, c, k) * Complex(1.0, -sgn) / root;
    }
    const double g = asymptotic_gamma(c);
    return mu.mu2 - g / root + kI * sgn * g / root;
  }
  if (branch == Branch::branch1) {
    return Complex(0.0, 2.0 * nn * kPi + kPi) + kI * c * c / (32.0 * kPi * nn) -
           Complex(4.0, kPi) * c * c / (64.0 * kPi * kPi * nn * nn);
  }
  return Complex(0.0, 2.0 * nn * kPi);
}

double ball_radius(Branch branch, int n, double c) {
  if (n == 0) throw DomainError("ball radius needs |n| >= 1");
  const double an = std::abs(static_cast<double>(n));
  if (branch == Branch::branch2 && asymptotic_case(c) == AsymptoticCase::sin_zero) {
    return std::pow(an, -0.125);
  }
  return std::pow(an, -0.25);
}

// ---------------------------------------------------------------------------

namespace {

// char_det at a fixed reference scale, normalized to O(1) near the strip.
struct AnalyticDet {
  double c;
  double reference;
  double scale;

  Complex operator()(Complex z) const { return char_det(z, c).at_reference(reference) / scale; }

  Complex derivative(Complex z) const {
    const double h = 1e-6 * std::max(1.0, std::abs(z));
    return ((*this)(z + h) - (*this)(z - h)) / (2.0 * h);
  }
};

AnalyticDet make_analytic(Complex around, double c) {
  if (!(c > 0.0)) throw ConfigError("root finding needs c > 0");
  return {c, char_det(around, c).log_scale, local_det_scale(around, c)};
}

bool accepted(Complex z, double c) {
  const ScaledDet d = char_det(z, c);
  return std::abs(d.value) <= 1e-9 * local_det_scale(z, c) * std::exp(-d.log_scale);
}

[[noreturn]] void no_convergence(Complex best, double residual) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "root refinement did not converge in 100 iterations; best iterate " << best
      << " with |det|/scale = " << residual;
  throw NumericalError(msg.str());
}

[[noreturn]] void localization_violated(Complex z, Complex center, double radius) {
  std::ostringstream msg;
  msg.precision(12);
  msg << "localization violated: iterate " << z << " left the ball |lambda - " << center
      << "| <= " << radius;
  throw NumericalError(msg.str());
}

}  // namespace

RootRecord refine_root(Complex lambda0, double c, double radius, Complex center) {
  if (!(radius > 0.0)) throw ConfigError("ball radius must be > 0");
  const AnalyticDet f = make_analytic(center, c);
  constexpr int kMaxIter = 100;

  RootRecord rec;
  rec.ball_center = center;
  rec.ball_radius = radius;

  Complex z = lambda0;
  Complex fz = f(z);
  Complex best = z;
  double best_abs = std::abs(fz);
  bool converged = false;
  int stalls = 0;
  int iters = 0;

  while (iters < kMaxIter) {
    const Complex fp = f.derivative(z);
    if (fp == Complex(0.0)) break;
    const Complex step = fz / fp;
    const Complex next = z - step;
    ++iters;
    if (std::abs(next - center) > radius) break;
    const Complex fnext = f(next);
    stalls = std::abs(fnext) > 0.9 * std::abs(fz) ? stalls + 1 : 0;
    z = next;
    fz = fnext;
    if (std::abs(fz) < best_abs) {
      best = z;
      best_abs = std::abs(fz);
    }
    if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(z)) || fz == Complex(0.0)) {
      converged = true;
      break;
    }
    if (stalls >= 3) break;
  }

  if (!converged || !accepted(z, c)) {
    // Muller from the best iterate.
    rec.used_muller = true;
    const double delta = 1e-3 * radius;
    Complex x0 = best - delta, x1 = best + delta, x2 = best;
    Complex f0 = f(x0), f1 = f(x1), f2 = f(x2);
    converged = false;
    while (iters < kMaxIter) {
      ++iters;
      const Complex h1 = x1 - x0, h2 = x2 - x1;
      const Complex d1 = (f1 - f0) / h1, d2 = (f2 - f1) / h2;
      const Complex a = (d2 - d1) / (h2 + h1);
      const Complex b = a * h2 + d2;
      const Complex disc = std::sqrt(b * b - 4.0 * f2 * a);
      const Complex den = std::abs(b + disc) > std::abs(b - disc) ? b + disc : b - disc;
      const Complex step = den == Complex(0.0) ? Complex(delta) : -2.0 * f2 / den;
      const Complex x3 = x2 + step;
      if (std::abs(x3 - center) > radius) localization_violated(x3, center, radius);
      x0 = x1;
      f0 = f1;
      x1 = x2;
      f1 = f2;
      x2 = x3;
      f2 = f(x3);
      if (std::abs(f2) < best_abs) {
        best = x2;
        best_abs = std::abs(f2);
      }
      if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(x2)) || f2 == Complex(0.0)) {
        converged = true;
        break;
      }
    }
    z = x2;
    if (!converged) no_convergence(best, best_abs);
  }

  if (std::abs(z - center) > radius) localization_violated(z, center, radius);
  const ScaledDet d = char_det(z, c);
  rec.root = z;
  rec.det_value_at_root = d.value;
  rec.det_scale = local_det_scale(z, c) * std::exp(-d.log_scale);
  rec.newton_iters = iters;
  if (!(std::abs(d.value) <= 1e-9 * rec.det_scale)) no_convergence(z, std::abs(d.value) / rec.det_scale);
  return rec;
}

RootRecord refine_root(Complex lambda0, double c, double radius) {
  return refine_root(lambda0, c, radius, lambda0);
}

RootCount count_roots_in_ball(Complex center, double radius, double c, int points) {
  if (!(radius > 0.0) || points < 8) throw ConfigError("invalid contour parameters");
  const AnalyticDet f = make_analytic(center, c);
  Complex sum(0.0);
  for (int k = 0; k < points; ++k) {
    const double theta = 2.0 * kPi * k / points;
    const Complex e = std::polar(1.0, theta);
    const Complex z = center + radius * e;
    sum += f.derivative(z) / f(z) * kI * radius * e;
  }
  const Complex integral = sum * (2.0 * kPi / points) / (2.0 * kPi * kI);
  RootCount out;
  out.raw = integral.real();
  out.count = static_cast<int>(std::lround(out.raw));
  if (std::abs(out.raw - out.count) > 0.2 || std::abs(integral.imag()) > 0.2) {
    std::ostringstream msg;
    msg << "argument principle integral " << integral << " is not close to an integer (center "
        << center << ", radius " << radius << ")";
    throw NumericalError(msg.str());
  }
  return out;
}

RootRecord find_branch_root(Branch branch, int n, double c) {
  const F0Roots mu = f0_roots(n, c);
  const Complex center = branch == Branch::branch1 ? mu.mu1 : mu.mu2;
  RootRecord rec = refine_root(center, c, ball_radius(branch, n, c), center);
  rec.branch = branch;
  rec.n = n;
  return rec;
}

std::vector<RootRecord> find_branch_roots(double c, int n_min, int n_max, int jobs) {
  if (n_min > n_max) throw ConfigError("empty n range");
  if (n_min < 1) throw ConfigError("branch roots need n >= 1");
  struct Task {
    Branch branch;
    int n;
  };
  std::vector<Task> tasks;
  for (Branch b : {Branch::branch1, Branch::branch2}) {
    for (int n = n_min; n <= n_max; ++n) tasks.push_back({b, n});
  }
  std::vector<RootRecord> out(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = find_branch_root(tasks[i].branch, tasks[i].n, c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::string root_table_csv(const std::vector<RootRecord>& roots, double c, Case1Constant k) {
  CsvTable table{"branch", "n", "re", "im", "asym_re", "asym_im", "abs_err"};
  for (const auto& r : roots) {
    const Complex asym = asymptotic_eigenvalue(r.branch, r.n, c, k);
    table.row() << (r.branch == Branch::branch1 ? 1 : 2) << r.n << r.root.real() << r.root.imag()
                << asym.real() << asym.imag() << std::abs(r.root - asym);
  }
  return table.str();
}

// ---------------------------------------------------------------------------

std::string_view to_string(KernelCase kc) {
  switch (kc) {
    case KernelCase::lt: return "lt";
    case KernelCase::eq: return "eq";
    case KernelCase::gt: return "gt";
  }
  return "unknown";
}

std::pair<double, double> kernel_roots(double lambda, double a, double c0) {
  const double l2 = lambda * lambda;
  const double disc = std::sqrt(l2 * l2 * (a - 1) * (a - 1) + 4.0 * a * c0 * c0 * l2);
  return {(-l2 * (a + 1) - disc) / (2.0 * a), (-l2 * (a + 1) + disc) / (2.0 * a)};
}

namespace {

using LD = long double;
using CLD = std::complex<long double>;
using Mat4 = std::array<std::array<CLD, 4>, 4>;

CLD det4(Mat4 m) {
  CLD det(1);
  for (int k = 0; k < 4; ++k) {
    int p = k;
    for (int i = k + 1; i < 4; ++i) {
      if (std::abs(m[i][k]) > std::abs(m[p][k])) p = i;
    }
    if (m[p][k] == CLD(0)) return CLD(0);
    if (p != k) {
      std::swap(m[p], m[k]);
      det = -det;
    }
    det *= m[k][k];
    for (int i = k + 1; i < 4; ++i) {
      const CLD f = m[i][k] / m[k][k];
      for (int j = k; j < 4; ++j) m[i][j] -= f * m[k][j];
    }
  }
  return det;
}

Complex to_double(CLD z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

}  // namespace

KernelDet kernel_det(KernelCase kc, double lambda, double a, double c0, double alpha3) {
  if (lambda == 0.0) throw ConfigError("kernel determinant needs lambda != 0");
  if (!(a > 0.0) || !(c0 > 0.0)) throw ConfigError("kernel determinant needs a > 0 and c0 > 0");
  const double gap = lambda * lambda - c0 * c0;
  const double tol = 1e-12 * c0 * c0;
  const KernelCase actual = std::abs(gap) <= tol ? KernelCase::eq
                            : gap < 0.0          ? KernelCase::lt
                                                 : KernelCase::gt;
  if (actual != kc) {
    std::ostringstream msg;
    msg << "kernel case " << to_string(kc) << " does not match lambda^2 - c0^2 = " << gap
        << " (case " << to_string(actual) << ")";
    throw ConfigError(msg.str());
  }

  const LD l = lambda, A_ = a, c = c0, al = alpha3;
  const CLD I(0, 1);
  const LD l2 = l * l;
  const LD disc = std::sqrt(l2 * l2 * (A_ - 1) * (A_ - 1) + 4 * A_ * c * c * l2);
  const LD m1 = (-l2 * (A_ + 1) - disc) / (2 * A_);
  const LD m2 = (-l2 * (A_ + 1) + disc) / (2 * A_);
  auto ycoef = [&](LD num) { return CLD(num) / (I * l * c); };

  KernelDet out;
  if (kc == KernelCase::lt) {
    const LD r1 = std::sqrt(-m1), r2 = std::sqrt(m2);
    const CLD p = ycoef(l2 - A_ * r1 * r1), q = ycoef(l2 + A_ * r2 * r2);
    const LD s = std::sin(r1 * al), co = std::cos(r1 * al);
    const LD ch = std::cosh(r2 * al), sh = std::sinh(r2 * al);
    const Mat4 m{{{s, co, ch, sh},
                  {r1 * co, -r1 * s, r2 * sh, r2 * ch},
                  {p * s, p * co, q * ch, q * sh},
                  {p * r1 * co, -p * r1 * s, q * r2 * sh, q * r2 * ch}}};
    out.direct = out.direct_as_printed = to_double(det4(m));
    const LD sum = r1 * r1 + r2 * r2;
    out.closed_form = out.closed_form_as_printed =
        to_double(CLD(r1 * r2 * A_ * A_ * sum * sum / (l2 * c * c)));
  } else if (kc == KernelCase::eq) {
    const LD r1 = std::sqrt((A_ + 1) * c * c / A_);
    const CLD p = ycoef(l2 - A_ * r1 * r1), q = CLD(l) / (I * c);
    const LD s = std::sin(r1 * al), co = std::cos(r1 * al);
    const Mat4 m{{{s, co, al, 1},
                  {r1 * co, -r1 * s, 1, 0},
                  {p * s, p * co, q * al, q},
                  {p * r1 * co, -p * r1 * s, q, 0}}};
    out.direct = out.direct_as_printed = to_double(det4(m));
    out.closed_form = out.closed_form_as_printed =
        to_double(CLD(-A_ * A_ * std::pow(r1, 5) / (l2 * c * c)));
  } else {
    const LD r1 = std::sqrt(-m1), r2 = std::sqrt(-m2);
    const CLD p = ycoef(l2 - A_ * r1 * r1), q = ycoef(l2 - A_ * r2 * r2);
    const CLD q_printed = ycoef(l2 + A_ * r2 * r2);
    const LD s = std::sin(r1 * al), co = std::cos(r1 * al);
    const LD s2 = std::sin(r2 * al), c2 = std::cos(r2 * al);
    Mat4 m{{{s, co, s2, c2},
            {r1 * co, -r1 * s, r2 * c2, -r2 * s2},
            {p * s, p * co, q * s2, q * c2},
            {p * r1 * co, -p * r1 * s, q * r2 * c2, -q * r2 * s2}}};
    out.direct = to_double(det4(m));
    m[2][3] = q_printed * c2;
    out.direct_as_printed = to_double(det4(m));
    const LD diff = r1 * r1 - r2 * r2;
    const LD num = -r1 * r2 * A_ * A_ * diff * diff;
    out.closed_form = to_double(CLD(num / (l2 * c * c)));
    out.closed_form_as_printed = to_double(CLD(num / (l * c * c)));
  }
  return out;
}

}  // namespace kvwave
