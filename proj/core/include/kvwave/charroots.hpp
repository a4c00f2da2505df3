#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kvwave {

using Complex = std::complex<double>;

/// Square root with real part √((|z|+Re z)/2) and imaginary part
/// sign(Im z)·√((|z|-Re z)/2), where sign(0) = +1. Agrees with the principal
/// root off the negative real axis and returns +i√|z| on it.
Complex paper_sqrt(Complex z);

/// Exponents of the transmission problem (L = 1, a = 1, damping on (1/2, 1),
/// coupling c on (0, 1)):
///   r₁ = λ√(1 + ic/λ), r₂ = λ√(1 - ic/λ),
///   s₁ = λ√((1 + 2/λ + q) / (2(1 + 1/λ))), s₂ = √λ √((λ + 2 - λq) / (2(1 + 1/λ))),
///   q = √(1 - 4c²/λ³ - 4c²/λ⁴).
struct BranchExponents {
  Complex r1, r2, s1, s2;
};

/// Throws DomainError for λ = 0 or λ = -1.
BranchExponents branch_exponents(Complex lambda, double c);

/// Determinant divided by e^{log_scale}, where log_scale = (|Re r₁| + |Re r₂| +
/// |Re s₁|)/2 absorbs the growth of the hyperbolic entries.
struct ScaledDet {
  Complex value;
  double log_scale = 0.0;

  /// value · e^{log_scale - reference}; analytic in λ for fixed reference.
  Complex at_reference(double reference) const;
};

/// Characteristic determinant det(M) = F₁ + F₂e^{-s₂}, evaluated from the
/// six-term expansion with the exponent differences (r₁² - s₁², ...) in
/// cancellation-free closed form. Throws NumericalError on overflow.
ScaledDet char_det(Complex lambda, double c);

/// Same determinant from Gaussian elimination of the scaled 4×4 matrix. Only
/// accurate while |λ| stays moderate (its cancellation grows like |λ|⁷); used
/// as an independent cross-check of char_det.
ScaledDet char_det_direct(Complex lambda, double c);

/// The two six-term coefficients (scaled by the same log_scale).
struct DetCoefficients {
  Complex F1, F2, exp_minus_s2;
  double log_scale = 0.0;
};
DetCoefficients char_det_coefficients(Complex lambda, double c);

/// Natural size of det(M) near the strip: c·max(1, |λ|)^{11/2}, matching the
/// leading behaviour det ≈ -icλ^{11/2}F(λ) with F = O(1).
double local_det_scale(Complex lambda, double c);

/// f₄ as displayed carries cosh(c/2) in its last term; with cos(c/2) the
/// remainder of the expansion improves from O(λ⁻²) to O(λ⁻⁴).
enum class F4Form { as_printed, cos_corrected };

struct AsymptoticCoefficients {
  Complex f0, f1, f2, f3, f4;
};
AsymptoticCoefficients asymptotic_coefficients(Complex lambda, double c,
                                               F4Form form = F4Form::as_printed);

/// F(λ) = f₀ + f₁λ^{-1/2} + f₂/(8λ) + f₃/(8λ^{3/2}) + f₄/(128λ²).
Complex asymptotic_F(Complex lambda, double c, F4Form form = F4Form::as_printed);

/// cosh(3λ/2) - cosh(λ/2)cos(c/2) and its factorization 2cosh(λ/2)(cosh λ - cos²(c/4)).
Complex f0_expanded(Complex lambda, double c);
Complex f0_factored(Complex lambda, double c);

/// |det(λ)/(-icλ^{11/2}) - F(λ)|, both sides in the scaled frame of char_det.
double asymptotic_remainder(Complex lambda, double c, F4Form form = F4Form::as_printed);

/// Roots of f₀: μ₁ = (2n+1)πi and μ₂ = 2nπi + i·arccos(cos²(c/4)).
struct F0Roots {
  Complex mu1, mu2;
};
F0Roots f0_roots(int n, double c);

enum class Branch { branch1, branch2 };
enum class AsymptoticCase { sin_nonzero, sin_zero };
enum class Case1Constant { three_plus_cos, two_plus_cos };

std::string_view to_string(Branch branch);
std::string_view to_string(AsymptoticCase c);
std::string_view to_string(Case1Constant k);

/// sin_zero when |sin(c/4)| ≤ 1e-12.
AsymptoticCase asymptotic_case(double c);

/// γ = (cos(c/2)sin(θ/2) + sin(3θ/2)) / (4√(1 - cos⁴(c/4)) cos(θ/2)), θ = arccos(cos²(c/4)).
/// Throws DomainError when sin(c/4) = 0.
double asymptotic_gamma(double c);

/// Coefficient κ of the leading real-part correction, Re λ ≈ -κ/√(nπ):
/// 2sin²(c/4)/(3 + cos(c/2)) (or 2 + cos) for branch 1 and γ for branch 2.
double real_part_coefficient(Branch branch, double c,
                             Case1Constant k = Case1Constant::three_plus_cos);

struct AsymptoticBranch {
  Branch branch = Branch::branch1;
  AsymptoticCase asym_case = AsymptoticCase::sin_nonzero;
  double gamma = 0.0;  // NaN in the sin_zero case
};
AsymptoticBranch describe_branch(Branch branch, double c);

/// Truncated asymptotic eigenvalue λ_{k,n}. Requires |n| ≥ 1.
Complex asymptotic_eigenvalue(Branch branch, int n, double c,
                              Case1Constant k = Case1Constant::three_plus_cos);

/// Localization radius |n|^{-1/4}, or |n|^{-1/8} for branch 2 when sin(c/4) = 0.
double ball_radius(Branch branch, int n, double c);

struct RootRecord {
  Branch branch = Branch::branch1;
  int n = 0;
  Complex root;
  /// char_det at the root, and the local scale it is judged against.
  Complex det_value_at_root;
  double det_scale = 0.0;
  int newton_iters = 0;
  bool used_muller = false;
  Complex ball_center;
  double ball_radius = 0.0;
};

/// Newton iteration (central differences) on char_det from lambda0, falling
/// back to Muller's method on stagnation. The root must satisfy
/// |det| ≤ 1e-9·local_det_scale and stay within `radius` of `center`.
/// Throws NumericalError("localization violated") or a no-convergence error
/// carrying the best iterate.
RootRecord refine_root(Complex lambda0, double c, double radius, Complex center);
RootRecord refine_root(Complex lambda0, double c, double radius);

struct RootCount {
  double raw = 0.0;  // real part of the contour integral
  int count = 0;
};

/// (1/2πi)∮ det'/det on the circle, trapezoidal rule with `points` nodes,
/// snapped to the nearest integer; NumericalError if off by more than 0.2.
RootCount count_roots_in_ball(Complex center, double radius, double c, int points = 256);

/// Refines the root of one branch starting from its f₀ root.
RootRecord find_branch_root(Branch branch, int n, double c);

/// All roots of both branches for n in [n_min, n_max] (ordered branch-major),
/// spread over `jobs` threads.
std::vector<RootRecord> find_branch_roots(double c, int n_min, int n_max, int jobs = 1);

/// CSV `branch,n,re,im,asym_re,asym_im,abs_err`.
std::string root_table_csv(const std::vector<RootRecord>& roots, double c,
                           Case1Constant k = Case1Constant::three_plus_cos);

enum class KernelCase { lt, eq, gt };
std::string_view to_string(KernelCase kc);

/// Kernel determinants of the coupled stationary problem on the damped
/// interval, for λ² < c₀² (lt), λ² = c₀² (eq), λ² > c₀² (gt).
struct KernelDet {
  /// Closed form consistent with the matrix (λ²c₀² denominators throughout).
  Complex closed_form;
  /// Literal printed closed form (differs from closed_form for gt only,
  /// where the printed denominator is λc₀²).
  Complex closed_form_as_printed;
  /// 4×4 determinant by Gaussian elimination in extended precision.
  Complex direct;
  /// Same, for the matrix exactly as printed (entry (3,4) of the gt matrix
  /// reads λ² + a r₂² there instead of λ² - a r₂²).
  Complex direct_as_printed;
};

/// Throws ConfigError when the case does not match sign(λ² - c₀²) or λ = 0.
KernelDet kernel_det(KernelCase kc, double lambda, double a, double c0, double alpha3);

/// Roots m₁ < m₂ of a m² + (a+1)λ² m + λ²(λ² - c₀²).
std::pair<double, double> kernel_roots(double lambda, double a, double c0);

}  // namespace kvwave
