#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "kvwave/model.hpp"

namespace kvwave {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Complex = std::complex<double>;

/// Interface-aligned 1-D mesh of [0, L].
struct Grid {
  std::vector<double> nodes;
  /// Coefficient jump points, sorted, and the node index each one sits on.
  std::vector<double> breakpoints;
  std::vector<int> interface_node_indices;

  int n_cells() const { return static_cast<int>(nodes.size()) - 1; }
  int n_interior() const { return static_cast<int>(nodes.size()) - 2; }
  double length() const { return nodes.back(); }
  double width(int cell) const { return nodes[cell + 1] - nodes[cell]; }
  std::vector<double> widths() const;
  /// max / min cell width.
  double width_ratio() const;
  /// Interior nodes only (the Dirichlet unknowns).
  Eigen::VectorXd interior_nodes() const;
};

/// Uniform mesh with L / n_cells target spacing; every coefficient breakpoint
/// is moved onto its nearest node. When snapping leaves a width ratio above 2,
/// nodes between consecutive interfaces are redistributed uniformly.
/// Throws ConfigError("grid cannot resolve interfaces") if two breakpoints
/// compete for one node or the ratio bound cannot be met, and ConfigError for
/// n_cells < 8.
Grid build_grid(const ProblemConfig& config, int n_cells);

/// Displacement/velocity pair for both equations stored as one 4n vector
/// laid out as (u, v, y, z).
template <typename Scalar>
class BasicState {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicState() = default;
  explicit BasicState(Eigen::Index n) : data_(Vector::Zero(4 * n)) {}
  explicit BasicState(Vector data) : data_(std::move(data)) {
    if (data_.size() % 4 != 0) throw std::invalid_argument("state length must be 4n");
  }
  BasicState(const Vector& u, const Vector& v, const Vector& y, const Vector& z)
      : data_(4 * u.size()) {
    const Eigen::Index n = u.size();
    if (v.size() != n || y.size() != n || z.size() != n) {
      throw std::invalid_argument("state blocks must have equal length");
    }
    data_ << u, v, y, z;
  }

  Eigen::Index n() const { return data_.size() / 4; }

  auto u() { return data_.segment(0, n()); }
  auto v() { return data_.segment(n(), n()); }
  auto y() { return data_.segment(2 * n(), n()); }
  auto z() { return data_.segment(3 * n(), n()); }
  auto u() const { return data_.segment(0, n()); }
  auto v() const { return data_.segment(n(), n()); }
  auto y() const { return data_.segment(2 * n(), n()); }
  auto z() const { return data_.segment(3 * n(), n()); }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  BasicState<Complex> to_complex() const {
    return BasicState<Complex>(data_.template cast<Complex>().eval());
  }

 private:
  Vector data_;
};

using State = BasicState<double>;
using ComplexState = BasicState<Complex>;

/// Assembled P1 finite element semi-discretisation
///
///   M u'' + a K u + D_u u' + Mc y' = 0
///   M y'' +   K y + D_y y' - Mc u' = 0
///
/// where D = Kelvin-Voigt stiffness + viscous mass for that equation. The
/// first-order form is B U' = Ã U with B = diag(I, M, I, M); the energy is
/// ½ Uᵀ W U with W = diag(aK, M, K, M).
class SemiDiscreteSystem {
 public:
  Eigen::Index n() const { return n_; }
  double a() const { return config_.a; }
  const ProblemConfig& config() const { return config_; }
  const Grid& grid() const { return grid_; }

  const SparseMatrix& M() const { return M_; }
  const SparseMatrix& K() const { return K_; }
  const SparseMatrix& Mc() const { return Mc_; }
  /// Kelvin-Voigt (b-weighted stiffness) and viscous (indicator mass) forms.
  const SparseMatrix& kelvin_voigt(Equation eq) const { return eq == Equation::u ? Kb_u_ : Kb_y_; }
  const SparseMatrix& viscous(Equation eq) const { return eq == Equation::u ? Md_u_ : Md_y_; }
  /// Total damping form of one equation.
  const SparseMatrix& damping(Equation eq) const { return eq == Equation::u ? D_u_ : D_y_; }

  const SparseMatrix& W() const { return W_; }
  const SparseMatrix& B() const { return B_; }
  const SparseMatrix& A_tilde() const { return At_; }

  Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXcd solve_mass(const Eigen::VectorXcd& rhs) const;

  /// Process-unique id, used to key cached factorizations.
  std::uint64_t id() const { return id_; }

 private:
  friend SemiDiscreteSystem assemble(const ProblemConfig&, const Grid&);

  ProblemConfig config_;
  Grid grid_;
  Eigen::Index n_ = 0;
  SparseMatrix M_, K_, Mc_, Kb_u_, Kb_y_, Md_u_, Md_y_, D_u_, D_y_, W_, B_, At_;
  std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> mass_llt_;
  std::uint64_t id_ = 0;
};

/// Throws ConfigError when the config is invalid or the grid was not built
/// for it (length or breakpoints differ).
SemiDiscreteSystem assemble(const ProblemConfig& config, const Grid& grid);

/// Convenience: build_grid + assemble.
SemiDiscreteSystem assemble(const ProblemConfig& config, int n_cells);

/// A_h U = (v, -M⁻¹(aKu + D_u v + Mc z), z, -M⁻¹(Ky + D_y z - Mc v)).
State apply_operator(const SemiDiscreteSystem& sys, const State& U);
ComplexState apply_operator(const SemiDiscreteSystem& sys, const ComplexState& U);

/// ⟨U, V⟩_W = Uᴴ W V.
Complex energy_inner(const SemiDiscreteSystem& sys, const ComplexState& U,
                     const ComplexState& V);
double energy_inner(const SemiDiscreteSystem& sys, const State& U, const State& V);

/// ½ Uᴴ W U.
double energy(const SemiDiscreteSystem& sys, const State& U);
double energy(const SemiDiscreteSystem& sys, const ComplexState& U);

/// Re⟨A_h U, U⟩_W from W A_h = diag(aK, I, K, I) Ã, with no mass solve and
/// long double accumulation. The skew cross terms are O(1/h) while viscous
/// dissipation is O(h), so the plain route loses about h⁻² relative digits.
double generator_form(const SemiDiscreteSystem& sys, const State& U);

/// vᴴ D_u v + zᴴ D_y z, so that E' = -dissipation_rate along solutions.
double dissipation_rate(const SemiDiscreteSystem& sys, const State& U);
double dissipation_rate(const SemiDiscreteSystem& sys, const ComplexState& U);

/// Nodal interpolant of f at the interior nodes.
template <typename F>
Eigen::VectorXd interpolate(const Grid& grid, F&& f) {
  Eigen::VectorXd out(grid.n_interior());
  for (int i = 0; i < grid.n_interior(); ++i) out[i] = f(grid.nodes[i + 1]);
  return out;
}

/// "row col value" lines, 0-based, 17 significant digits.
void write_triplets(std::ostream& os, const SparseMatrix& matrix);

}  // namespace kvwave
