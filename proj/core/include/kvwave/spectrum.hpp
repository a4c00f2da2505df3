#pragma once

#include <string>
#include <vector>

#include "kvwave/discretize.hpp"

namespace kvwave {

struct EigenRecord {
  Complex lambda;
  /// Normalized to unit energy norm.
  ComplexState eigvec;
  /// ‖A_h U - λU‖_W / ‖U‖_W, recomputed through apply_operator.
  double residual = 0.0;
  /// Index k of the Dirichlet mode kπ/L nearest to |Im λ|.
  int mode_index_hint = 0;
};

/// Dense A_h = B⁻¹Ã.
Eigen::MatrixXd dense_operator(const SemiDiscreteSystem& sys);

/// The `count` eigenvalues of A_h closest to `near`, sorted by |Im λ| (ties
/// by Im λ). Throws ConfigError if count > 4n and NumericalError when the
/// eigensolver fails or a residual exceeds 1e-8.
std::vector<EigenRecord> compute_spectrum(const SemiDiscreteSystem& sys, int count,
                                          Complex near = {0.0, 0.0});

/// Largest |λ - conj(partner)| over non-real eigenvalues, where partner is
/// the closest eigenvalue to conj(λ) in the list.
double conjugate_pairing_error(const std::vector<EigenRecord>& records);

std::string spectrum_csv(const std::vector<EigenRecord>& records);

enum class ResolventMethod { automatic, dense, lanczos };

std::string_view to_string(ResolventMethod method);

struct ResolventSample {
  double lambda_imag = 0.0;
  /// ‖(iλ - A_h)⁻¹‖ in the energy norm.
  double norm = 0.0;
};

/// Size up to which `automatic` uses the dense singular value route (4n).
inline constexpr Eigen::Index kDenseResolventLimit = 1000;

/// Energy-norm resolvent ‖(iλ - A_h)⁻¹‖_W = 1 / σ_min(G(iλ - A_h)G⁻¹), GᵀG = W.
///
/// The dense route forms G(iλ - A_h)G⁻¹ and takes its singular values. The
/// Lanczos route runs Golub-Kahan bidiagonalization with full
/// reorthogonalization on G(iλB - Ã)⁻¹BG⁻¹ using sparse LU solves, and
/// returns its largest singular value.
class ResolventEvaluator {
 public:
  explicit ResolventEvaluator(const SemiDiscreteSystem& sys,
                              ResolventMethod method = ResolventMethod::automatic);

  ResolventSample operator()(double lambda_imag) const;
  ResolventMethod method() const { return method_; }

 private:
  double dense_norm(double lambda_imag) const;
  double lanczos_norm(double lambda_imag) const;

  const SemiDiscreteSystem* sys_;
  ResolventMethod method_;
  Eigen::MatrixXd G_;       // dense upper factor, dense route only
  Eigen::MatrixXd GAGinv_;  // G A_h G⁻¹, dense route only
  SparseMatrix Lw_;         // W = Lw Lwᵀ, Lanczos route
};

ResolventSample resolvent_norm(const SemiDiscreteSystem& sys, double lambda_imag,
                               ResolventMethod method = ResolventMethod::automatic);

/// Samples at every λ, spread over `jobs` threads. Output order follows
/// `lambdas`; results do not depend on `jobs`.
std::vector<ResolventSample> resolvent_sweep(const SemiDiscreteSystem& sys,
                                             const std::vector<double>& lambdas,
                                             ResolventMethod method = ResolventMethod::automatic,
                                             int jobs = 1);

std::string resolvent_csv(const std::vector<ResolventSample>& samples);

/// Explicit resolvent-growth witness for the global preset:
///   λₙ = nπ/L, Aₙ = iL/(c₀nπ), Bₙ = -inb₀π/(c₀²L) - (a-1)/c₀²,
///   Uₙ = (Aₙ s, iλₙAₙ s, Bₙ s, iλₙBₙ s), Fₙ = (0, 0, 0, s), s = sin(nπx/L),
/// with (iλₙ - A)Uₙ = Fₙ in the continuum.
struct HuangPrussTriple {
  int n = 0;
  double L = 0.0, a = 0.0, b0 = 0.0, c0 = 0.0;
  double lambda = 0.0;
  Complex A, B;
  /// The two amplitude equations; D1 = 0 and D2 = 1 hold exactly.
  Complex D1, D2;
  /// |D1| and |D2 - 1| divided by the sum of the magnitudes of their terms.
  double D1_rel = 0.0, D2_rel = 0.0;
  /// Continuum energy norms squared.
  double norm_U_sq = 0.0, norm_F_sq = 0.0;

  /// ‖Uₙ‖_W / (λₙ² ‖Fₙ‖_W).
  double growth_ratio() const;
};

/// Throws ConfigError unless the preset is global, DomainError for n < 1 and
/// NumericalError if D1 = 0 or D2 = 1 fails at 1e-12 relative.
HuangPrussTriple huang_pruss_sequence(const ProblemConfig& config, int n);

/// Limit of growth_ratio as n → ∞: √2 b₀ / c₀².
double huang_pruss_ratio_limit(const ProblemConfig& config);

struct DiscreteWitness {
  ComplexState U;
  ComplexState F;
};

/// Nodal interpolants of Uₙ and Fₙ on the system grid.
DiscreteWitness interpolate_witness(const SemiDiscreteSystem& sys, const HuangPrussTriple& triple);

/// ‖(iλₙ - A_h)Uₙʰ - Fₙʰ‖_W. Throws ConfigError if the system was not
/// assembled from the triple's global config.
double discrete_huang_pruss_check(const SemiDiscreteSystem& sys, const HuangPrussTriple& triple);

}  // namespace kvwave
