#include "kvwave/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <mutex>
#include <limits>
#include <exception>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "kvwave/csv.hpp"
#include "kvwave/error.hpp"

namespace kvwave {

namespace {

using ComplexSparse = Eigen::SparseMatrix<Complex>;
using NaturalLLT =
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>;

SparseMatrix energy_factor(const SemiDiscreteSystem& sys) {
  NaturalLLT llt(sys.W());
  if (llt.info() != Eigen::Success) throw NumericalError("energy Gram matrix is not SPD");
  return SparseMatrix(llt.matrixL());
}

}  // namespace

Eigen::MatrixXd dense_operator(const SemiDiscreteSystem& sys) {
  const Eigen::Index n = sys.n();
  Eigen::MatrixXd A = Eigen::MatrixXd(sys.A_tilde());
  const Eigen::LLT<Eigen::MatrixXd> mass(Eigen::MatrixXd(sys.M()));
  A.middleRows(n, n) = mass.solve(A.middleRows(n, n));
  A.middleRows(3 * n, n) = mass.solve(A.middleRows(3 * n, n));
  return A;
}

namespace {

double eigen_residual(const SemiDiscreteSystem& sys, const ComplexState& U, Complex lambda) {
  const ComplexState AU = apply_operator(sys, U);
  const ComplexState r(Eigen::VectorXcd(AU.data() - lambda * U.data()));
  return std::sqrt(energy_inner(sys, r, r).real() / energy_inner(sys, U, U).real());
}

// One step of (Ã - σB)x = BU, then the W-Rayleigh quotient, which minimizes
// ‖A_h x - μx‖_W over μ.
void refine_eigenpair(const SemiDiscreteSystem& sys, ComplexState& U, Complex& lambda) {
  using CSparse = Eigen::SparseMatrix<Complex>;
  const CSparse shifted = sys.A_tilde().cast<Complex>() - lambda * sys.B().cast<Complex>();
  Eigen::SparseLU<CSparse> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) return;  // shift hit the eigenvalue exactly
  Eigen::VectorXcd x = lu.solve(sys.B().cast<Complex>() * U.data());
  if (!x.allFinite()) return;
  ComplexState X(std::move(x));
  X.data() /= std::sqrt(energy_inner(sys, X, X).real());
  lambda = energy_inner(sys, X, apply_operator(sys, X));
  U = std::move(X);
}

}  // namespace

std::vector<EigenRecord> compute_spectrum(const SemiDiscreteSystem& sys, int count, Complex near) {
  const Eigen::Index N = 4 * sys.n();
  if (count < 1 || count > N) {
    throw ConfigError("eigenvalue count must be in [1, " + std::to_string(N) + "]");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense_operator(sys), true);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigensolver failed to converge (matrix size " + std::to_string(N) + ")");
  }
  const Eigen::VectorXcd values = es.eigenvalues();
  const Eigen::MatrixXcd vectors = es.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return std::abs(values[i] - near) < std::abs(values[j] - near);
  });
  order.resize(static_cast<std::size_t>(count));

  const double L = sys.config().L;
  std::vector<EigenRecord> out;
  out.reserve(order.size());
  for (Eigen::Index idx : order) {
    EigenRecord rec;
    rec.lambda = values[idx];
    ComplexState U(Eigen::VectorXcd(vectors.col(idx)));
    U.data() /= std::sqrt(energy_inner(sys, U, U).real());
    rec.residual = eigen_residual(sys, U, rec.lambda);
    // Clustered eigenvalues leave the dense eigenvectors poorly resolved;
    // polish with inverse iteration on the sparse pencil.
    for (int it = 0; it < 3 && rec.residual > 1e-12; ++it) {
      refine_eigenpair(sys, U, rec.lambda);
      rec.residual = eigen_residual(sys, U, rec.lambda);
    }
    rec.eigvec = std::move(U);
    rec.mode_index_hint = static_cast<int>(std::lround(std::abs(rec.lambda.imag()) * L / std::numbers::pi));
    if (!(rec.residual < 1e-8)) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "eigenpair residual " << rec.residual << " at lambda = " << rec.lambda
          << " exceeds 1e-8 (matrix size " << N << ")";
      throw NumericalError(msg.str());
    }
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(), [](const EigenRecord& p, const EigenRecord& q) {
    const double ap = std::abs(p.lambda.imag()), aq = std::abs(q.lambda.imag());
    if (ap != aq) return ap < aq;
    return p.lambda.imag() < q.lambda.imag();
  });
  return out;
}

double conjugate_pairing_error(const std::vector<EigenRecord>& records) {
  double worst = 0.0;
  for (const auto& r : records) {
    if (r.lambda.imag() == 0.0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : records) best = std::min(best, std::abs(s.lambda - std::conj(r.lambda)));
    worst = std::max(worst, best);
  }
  return worst;
}

std::string spectrum_csv(const std::vector<EigenRecord>& records) {
  CsvTable table{"re", "im", "residual"};
  for (const auto& r : records) table.row() << r.lambda.real() << r.lambda.imag() << r.residual;
  return table.str();
}

// ---------------------------------------------------------------------------

std::string_view to_string(ResolventMethod method) {
  switch (method) {
    case ResolventMethod::automatic: return "automatic";
    case ResolventMethod::dense: return "dense";
    case ResolventMethod::lanczos: return "lanczos";
  }
  return "unknown";
}

ResolventEvaluator::ResolventEvaluator(const SemiDiscreteSystem& sys, ResolventMethod method)
    : sys_(&sys), method_(method) {
  if (method_ == ResolventMethod::automatic) {
    method_ = 4 * sys.n() <= kDenseResolventLimit ? ResolventMethod::dense : ResolventMethod::lanczos;
  }
  Lw_ = energy_factor(sys);
  if (method_ == ResolventMethod::dense) {
    G_ = Eigen::MatrixXd(Lw_).transpose();
    const Eigen::MatrixXd GA = G_ * dense_operator(sys);
    // (G A) G⁻¹ = ((G⁻ᵀ (G A)ᵀ))ᵀ
    GAGinv_ = G_.transpose().triangularView<Eigen::Lower>().solve(GA.transpose()).transpose();
  }
}

ResolventSample ResolventEvaluator::operator()(double lambda_imag) const {
  const double norm =
      method_ == ResolventMethod::dense ? dense_norm(lambda_imag) : lanczos_norm(lambda_imag);
  return {lambda_imag, norm};
}

double ResolventEvaluator::dense_norm(double lambda_imag) const {
  const Eigen::Index N = GAGinv_.rows();
  Eigen::MatrixXcd X = -GAGinv_.cast<Complex>();
  X.diagonal().array() += Complex(0.0, lambda_imag);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(X);
  const double smin = svd.singularValues()(N - 1);
  if (!(smin > 0.0)) throw NumericalError("i*lambda is an eigenvalue of the operator");
  return 1.0 / smin;
}

double ResolventEvaluator::lanczos_norm(double lambda_imag) const {
  const SemiDiscreteSystem& sys = *sys_;
  const Eigen::Index N = 4 * sys.n();
  const ComplexSparse Bc = sys.B().cast<Complex>();
  const ComplexSparse T = Complex(0.0, lambda_imag) * Bc - sys.A_tilde().cast<Complex>();
  const ComplexSparse Th = ComplexSparse(T.adjoint());
  const ComplexSparse Lc = Lw_.cast<Complex>();
  const ComplexSparse Gc = ComplexSparse(Lc.transpose());

  Eigen::SparseLU<ComplexSparse> lu, luh;
  lu.compute(T);
  luh.compute(Th);
  if (lu.info() != Eigen::Success || luh.info() != Eigen::Success) {
    throw NumericalError("i*lambda is an eigenvalue of the operator (sparse LU failed)");
  }

  // R = G T⁻¹ B G⁻¹ and Rᴴ = G⁻ᵀ B T⁻ᴴ Gᵀ with Gᵀ = Lc.
  auto apply_R = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
    Eigen::VectorXcd w = Gc.triangularView<Eigen::Upper>().solve(x);
    w = lu.solve(Eigen::VectorXcd(Bc * w));
    return Gc * w;
  };
  auto apply_Rh = [&](const Eigen::VectorXcd& y) -> Eigen::VectorXcd {
    Eigen::VectorXcd w = luh.solve(Eigen::VectorXcd(Lc * y));
    w = Bc * w;
    return Lc.triangularView<Eigen::Lower>().solve(w);
  };

  const Eigen::Index max_steps = std::min<Eigen::Index>(N, 300);
  Eigen::MatrixXcd V(N, max_steps + 1), U(N, max_steps);
  std::vector<double> alpha, beta;

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXcd v(N);
  for (Eigen::Index i = 0; i < N; ++i) v[i] = Complex(gauss(rng), gauss(rng));
  V.col(0) = v / v.norm();

  double sigma_prev = 0.0, sigma = 0.0;
  for (Eigen::Index j = 0; j < max_steps; ++j) {
    Eigen::VectorXcd p = apply_R(V.col(j));
    if (j > 0) p -= beta.back() * U.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      p -= U.leftCols(j) * (U.leftCols(j).adjoint() * p);
    }
    const double a = p.norm();
    alpha.push_back(a);
    if (a == 0.0) break;
    U.col(j) = p / a;

    Eigen::VectorXcd r = apply_Rh(U.col(j)) - a * V.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      r -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * r);
    }
    const double b = r.norm();

    const auto k = static_cast<Eigen::Index>(alpha.size());
    if (k >= 4 || b <= 1e-14 * a) {
      Eigen::MatrixXd Bk = Eigen::MatrixXd::Zero(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        Bk(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < k) Bk(i, i + 1) = beta[static_cast<std::size_t>(i)];
      }
      sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(Bk).singularValues()(0);
      if (std::abs(sigma - sigma_prev) <= 1e-13 * sigma || b <= 1e-14 * a) break;
      sigma_prev = sigma;
    }
    beta.push_back(b);
    V.col(j + 1) = r / b;
  }
  if (!(sigma > 0.0)) sigma = alpha.empty() ? 0.0 : alpha.front();
  return sigma;
}

ResolventSample resolvent_norm(const SemiDiscreteSystem& sys, double lambda_imag,
                               ResolventMethod method) {
  return ResolventEvaluator(sys, method)(lambda_imag);
}

std::vector<ResolventSample> resolvent_sweep(const SemiDiscreteSystem& sys,
                                             const std::vector<double>& lambdas,
                                             ResolventMethod method, int jobs) {
  const ResolventEvaluator eval(sys, method);
  std::vector<ResolventSample> out(lambdas.size());
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(lambdas.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) out[i] = eval(lambdas[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < lambdas.size(); i = next++) {
        try {
          out[i] = eval(lambdas[i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::string resolvent_csv(const std::vector<ResolventSample>& samples) {
  CsvTable table{"lambda", "norm"};
  for (const auto& s : samples) table.row() << s.lambda_imag << s.norm;
  return table.str();
}

// ---------------------------------------------------------------------------

double HuangPrussTriple::growth_ratio() const {
  return std::sqrt(norm_U_sq) / (lambda * lambda * std::sqrt(norm_F_sq));
}

HuangPrussTriple huang_pruss_sequence(const ProblemConfig& config, int n) {
  if (config.preset != Preset::global) {
    throw ConfigError("Huang-Pruss sequence requires the global preset, got " +
                      std::string(to_string(config.preset)));
  }
  if (n < 1) throw DomainError("Huang-Pruss index must be n >= 1, got " + std::to_string(n));
  require_valid(config);
  if (!(config.c0 > 0.0)) throw ConfigError("Huang-Pruss sequence requires c0 > 0");

  using R = long double;
  using C = std::complex<R>;
  const R pi = std::numbers::pi_v<long double>;
  const R L = config.L, a = config.a, b0 = config.b0, c0 = config.c0;
  const R nn = n;
  const C I(0, 1);
  const R lam = nn * pi / L;
  const C A = I * L / (c0 * nn * pi);
  const C B = -I * nn * b0 * pi / (c0 * c0 * L) - (a - 1) / (c0 * c0);

  const C t1 = -(L * L * lam * lam) * A / (L * L);
  const C t2 = a * nn * nn * pi * pi * A / (L * L);
  const C t3 = I * pi * pi * b0 * lam * nn * nn * A / (L * L);
  const C t4 = I * B * c0 * lam;
  const C D1 = t1 + t2 + t3 + t4;
  const R scale1 = std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4);

  const C u1 = -I * A * c0 * lam;
  const C u2 = B * (pi * pi * nn * nn - L * L * lam * lam) / (L * L);
  const C D2 = u1 + u2;
  const R scale2 = std::abs(u1) + std::abs(B) * (pi * pi * nn * nn + L * L * lam * lam) / (L * L);

  HuangPrussTriple t;
  t.n = n;
  t.L = config.L;
  t.a = config.a;
  t.b0 = config.b0;
  t.c0 = config.c0;
  t.lambda = static_cast<double>(lam);
  t.A = Complex(static_cast<double>(A.real()), static_cast<double>(A.imag()));
  t.B = Complex(static_cast<double>(B.real()), static_cast<double>(B.imag()));
  t.D1 = Complex(static_cast<double>(D1.real()), static_cast<double>(D1.imag()));
  t.D2 = Complex(static_cast<double>(D2.real()), static_cast<double>(D2.imag()));
  t.D1_rel = static_cast<double>(std::abs(D1) / scale1);
  t.D2_rel = static_cast<double>(std::abs(D2 - C(1)) / scale2);

  const R absA2 = std::norm(A), absB2 = std::norm(B);
  t.norm_U_sq = static_cast<double>(L / 2 * lam * lam * ((a + 1) * absA2 + 2 * absB2));
  t.norm_F_sq = static_cast<double>(L / 2);

  if (!(t.D1_rel <= 1e-12) || !(t.D2_rel <= 1e-12)) {
    std::ostringstream msg;
    msg << "Huang-Pruss identities violated at n = " << n << ": |D1| rel " << t.D1_rel
        << ", |D2 - 1| rel " << t.D2_rel;
    throw NumericalError(msg.str());
  }
  return t;
}

double huang_pruss_ratio_limit(const ProblemConfig& config) {
  return std::numbers::sqrt2 * config.b0 / (config.c0 * config.c0);
}

DiscreteWitness interpolate_witness(const SemiDiscreteSystem& sys, const HuangPrussTriple& t) {
  const ProblemConfig& cfg = sys.config();
  if (cfg.preset != Preset::global || cfg.L != t.L || cfg.a != t.a || cfg.b0 != t.b0 ||
      cfg.c0 != t.c0) {
    throw ConfigError("system was not assembled from the Huang-Pruss triple's global config");
  }
  if (t.n < 1) throw DomainError("Huang-Pruss index must be n >= 1");
  const Eigen::VectorXcd s =
      interpolate(sys.grid(), [&](double x) { return std::sin(t.n * std::numbers::pi * x / t.L); })
          .cast<Complex>();
  const Complex il(0.0, t.lambda);
  const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(sys.n());
  return {ComplexState(t.A * s, il * t.A * s, t.B * s, il * t.B * s),
          ComplexState(zero, zero, zero, s)};
}

double discrete_huang_pruss_check(const SemiDiscreteSystem& sys, const HuangPrussTriple& triple) {
  const DiscreteWitness w = interpolate_witness(sys, triple);
  const ComplexState AU = apply_operator(sys, w.U);
  const ComplexState r(Eigen::VectorXcd(Complex(0.0, triple.lambda) * w.U.data() - AU.data() -
                                        w.F.data()));
  return std::sqrt(energy_inner(sys, r, r).real());
}

}  // namespace kvwave
