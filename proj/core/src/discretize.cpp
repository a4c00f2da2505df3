#include "kvwave/discretize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "kvwave/error.hpp"

namespace kvwave {

namespace {

constexpr double kMaxWidthRatio = 2.0;

std::atomic<std::uint64_t> g_next_system_id{1};

using Triplets = std::vector<Eigen::Triplet<double>>;

// Node-to-unknown map with Dirichlet ends eliminated.
int unknown(int node, int n_cells) {
  return (node <= 0 || node >= n_cells) ? -1 : node - 1;
}

void add_element(Triplets& t, int cell, int n_cells, double k00, double k01) {
  const int i = unknown(cell, n_cells);
  const int j = unknown(cell + 1, n_cells);
  if (i >= 0) t.emplace_back(i, i, k00);
  if (j >= 0) t.emplace_back(j, j, k00);
  if (i >= 0 && j >= 0) {
    t.emplace_back(i, j, k01);
    t.emplace_back(j, i, k01);
  }
}

// Stiffness ∫κ φ_i' φ_j' and mass ∫κ φ_i φ_j with κ constant per cell.
SparseMatrix assemble_form(const Grid& grid, const PiecewiseConstant& coeff, bool stiffness) {
  const int nc = grid.n_cells();
  Triplets t;
  t.reserve(4 * static_cast<std::size_t>(nc));
  for (int e = 0; e < nc; ++e) {
    const double h = grid.width(e);
    const double kappa = coeff(0.5 * (grid.nodes[e] + grid.nodes[e + 1]));
    if (kappa == 0.0) continue;
    if (stiffness) {
      add_element(t, e, nc, kappa / h, -kappa / h);
    } else {
      add_element(t, e, nc, kappa * h / 3.0, kappa * h / 6.0);
    }
  }
  SparseMatrix m(grid.n_interior(), grid.n_interior());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Places `blocks[r][c]` (n x n each, may be empty) into a 4n x 4n matrix.
SparseMatrix block4(Eigen::Index n,
                    const std::array<std::array<const SparseMatrix*, 4>, 4>& blocks,
                    const std::array<std::array<double, 4>, 4>& scale) {
  Triplets t;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const SparseMatrix* b = blocks[r][c];
      if (!b) continue;
      for (int k = 0; k < b->outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(*b, k); it; ++it) {
          t.emplace_back(r * n + it.row(), c * n + it.col(), scale[r][c] * it.value());
        }
      }
    }
  }
  SparseMatrix m(4 * n, 4 * n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

[[noreturn]] void unresolvable(int n_cells) {
  std::ostringstream msg;
  msg << "grid cannot resolve interfaces with n_cells = " << n_cells;
  throw ConfigError(msg.str());
}

}  // namespace

std::vector<double> Grid::widths() const {
  std::vector<double> w(nodes.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) w[i] = nodes[i + 1] - nodes[i];
  return w;
}

double Grid::width_ratio() const {
  const auto w = widths();
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  return *hi / *lo;
}

Eigen::VectorXd Grid::interior_nodes() const {
  return Eigen::Map<const Eigen::VectorXd>(nodes.data() + 1, n_interior());
}

Grid build_grid(const ProblemConfig& config, int n_cells) {
  const double L = config.L;
  const std::vector<double> bps = interior_breakpoints(config);
  if (n_cells < static_cast<int>(bps.size()) + 1) unresolvable(n_cells);
  if (n_cells < 8) {
    throw ConfigError("n_cells must be >= 8, got " + std::to_string(n_cells));
  }

  const double h = L / n_cells;
  Grid grid;
  grid.nodes.resize(n_cells + 1);
  for (int i = 0; i <= n_cells; ++i) grid.nodes[i] = i * h;
  grid.nodes.back() = L;

  std::vector<int> idx;
  for (double p : bps) {
    const int j = static_cast<int>(std::lround(p / h));
    if (j <= 0 || j >= n_cells || (!idx.empty() && j <= idx.back())) unresolvable(n_cells);
    idx.push_back(j);
    grid.nodes[j] = p;
  }

  if (grid.width_ratio() > kMaxWidthRatio) {
    // Uniform spacing inside each run between consecutive fixed nodes.
    std::vector<int> fixed_idx{0};
    std::vector<double> fixed_x{0.0};
    for (std::size_t k = 0; k < idx.size(); ++k) {
      fixed_idx.push_back(idx[k]);
      fixed_x.push_back(bps[k]);
    }
    fixed_idx.push_back(n_cells);
    fixed_x.push_back(L);
    for (std::size_t k = 0; k + 1 < fixed_idx.size(); ++k) {
      const int m = fixed_idx[k + 1] - fixed_idx[k];
      for (int i = 1; i < m; ++i) {
        grid.nodes[fixed_idx[k] + i] = fixed_x[k] + (fixed_x[k + 1] - fixed_x[k]) * i / m;
      }
    }
    if (grid.width_ratio() > kMaxWidthRatio) unresolvable(n_cells);
  }

  grid.breakpoints = bps;
  grid.interface_node_indices = idx;
  return grid;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd SemiDiscreteSystem::solve_mass(const Eigen::VectorXd& rhs) const {
  return mass_llt_->solve(rhs);
}

Eigen::VectorXcd SemiDiscreteSystem::solve_mass(const Eigen::VectorXcd& rhs) const {
  Eigen::VectorXcd out(rhs.size());
  out.real() = mass_llt_->solve(Eigen::VectorXd(rhs.real()));
  out.imag() = mass_llt_->solve(Eigen::VectorXd(rhs.imag()));
  return out;
}

SemiDiscreteSystem assemble(const ProblemConfig& config, const Grid& grid) {
  require_valid(config);
  const double tol = 1e-12 * config.L;
  if (grid.nodes.size() < 3 || std::abs(grid.length() - config.L) > tol) {
    throw ConfigError("grid/config mismatch: grid length differs from L");
  }
  for (double p : interior_breakpoints(config)) {
    const bool on_node = std::any_of(grid.nodes.begin(), grid.nodes.end(),
                                     [&](double x) { return std::abs(x - p) <= tol; });
    if (!on_node) {
      std::ostringstream msg;
      msg << "grid/config mismatch: breakpoint " << p << " is not a grid node";
      throw ConfigError(msg.str());
    }
  }

  SemiDiscreteSystem sys;
  sys.config_ = config;
  sys.grid_ = grid;
  const Eigen::Index n = grid.n_interior();
  sys.n_ = n;

  const PiecewiseConstant one({0.0, config.L}, {1.0});
  sys.M_ = assemble_form(grid, one, false);
  sys.K_ = assemble_form(grid, one, true);
  sys.Mc_ = assemble_form(grid, coupling_profile(config), false);
  sys.Kb_u_ = assemble_form(grid, damping_profile(config, Equation::u, DampingKind::kelvin_voigt), true);
  sys.Kb_y_ = assemble_form(grid, damping_profile(config, Equation::y, DampingKind::kelvin_voigt), true);
  sys.Md_u_ = assemble_form(grid, damping_profile(config, Equation::u, DampingKind::viscous), false);
  sys.Md_y_ = assemble_form(grid, damping_profile(config, Equation::y, DampingKind::viscous), false);
  sys.D_u_ = sys.Kb_u_ + sys.Md_u_;
  sys.D_y_ = sys.Kb_y_ + sys.Md_y_;

  SparseMatrix I(n, n);
  I.setIdentity();
  const double a = config.a;
  using Row = std::array<const SparseMatrix*, 4>;
  using SRow = std::array<double, 4>;
  sys.W_ = block4(n, {Row{&sys.K_, nullptr, nullptr, nullptr}, Row{nullptr, &sys.M_, nullptr, nullptr},
                      Row{nullptr, nullptr, &sys.K_, nullptr}, Row{nullptr, nullptr, nullptr, &sys.M_}},
                  {SRow{a, 0, 0, 0}, SRow{0, 1, 0, 0}, SRow{0, 0, 1, 0}, SRow{0, 0, 0, 1}});
  sys.B_ = block4(n, {Row{&I, nullptr, nullptr, nullptr}, Row{nullptr, &sys.M_, nullptr, nullptr},
                      Row{nullptr, nullptr, &I, nullptr}, Row{nullptr, nullptr, nullptr, &sys.M_}},
                  {SRow{1, 0, 0, 0}, SRow{0, 1, 0, 0}, SRow{0, 0, 1, 0}, SRow{0, 0, 0, 1}});
  sys.At_ = block4(n, {Row{nullptr, &I, nullptr, nullptr}, Row{&sys.K_, &sys.D_u_, nullptr, &sys.Mc_},
                       Row{nullptr, nullptr, nullptr, &I}, Row{nullptr, &sys.Mc_, &sys.K_, &sys.D_y_}},
                   {SRow{0, 1, 0, 0}, SRow{-a, -1, 0, -1}, SRow{0, 0, 0, 1}, SRow{0, 1, -1, -1}});

  auto llt = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(sys.M_);
  if (llt->info() != Eigen::Success) throw NumericalError("mass matrix factorization failed");
  sys.mass_llt_ = std::move(llt);
  sys.id_ = g_next_system_id.fetch_add(1);
  return sys;
}

SemiDiscreteSystem assemble(const ProblemConfig& config, int n_cells) {
  require_valid(config);
  return assemble(config, build_grid(config, n_cells));
}

// ---------------------------------------------------------------------------

namespace {

template <typename Scalar>
BasicState<Scalar> apply_impl(const SemiDiscreteSystem& sys, const BasicState<Scalar>& U) {
  if (U.n() != sys.n()) throw std::invalid_argument("state dimension does not match system");
  using Vec = typename BasicState<Scalar>::Vector;
  const Vec u = U.u(), v = U.v(), y = U.y(), z = U.z();
  const SparseMatrix& Du = sys.damping(Equation::u);
  const SparseMatrix& Dy = sys.damping(Equation::y);
  const Vec fu = sys.a() * (sys.K() * u) + Du * v + sys.Mc() * z;
  const Vec fy = sys.K() * y + Dy * z - sys.Mc() * v;
  return BasicState<Scalar>(v, Vec(-sys.solve_mass(fu)), z, Vec(-sys.solve_mass(fy)));
}

template <typename Scalar>
Complex inner_impl(const SemiDiscreteSystem& sys, const BasicState<Scalar>& U,
                   const BasicState<Scalar>& V) {
  if (U.n() != sys.n() || V.n() != sys.n()) {
    throw std::invalid_argument("state dimension does not match system");
  }
  return Complex(U.data().dot(sys.W() * V.data()));
}

template <typename Scalar>
double rate_impl(const SemiDiscreteSystem& sys, const BasicState<Scalar>& U) {
  if (U.n() != sys.n()) throw std::invalid_argument("state dimension does not match system");
  const auto v = U.v();
  const auto z = U.z();
  const Complex dv = v.dot(sys.damping(Equation::u) * v);
  const Complex dz = z.dot(sys.damping(Equation::y) * z);
  return (dv + dz).real();
}

}  // namespace

State apply_operator(const SemiDiscreteSystem& sys, const State& U) { return apply_impl(sys, U); }
ComplexState apply_operator(const SemiDiscreteSystem& sys, const ComplexState& U) {
  return apply_impl(sys, U);
}

Complex energy_inner(const SemiDiscreteSystem& sys, const ComplexState& U, const ComplexState& V) {
  return inner_impl(sys, U, V);
}
double energy_inner(const SemiDiscreteSystem& sys, const State& U, const State& V) {
  return inner_impl(sys, U, V).real();
}

double generator_form(const SemiDiscreteSystem& sys, const State& U) {
  if (U.n() != sys.n()) throw std::invalid_argument("state dimension does not match system");
  using LD = long double;
  using VecLD = Eigen::Matrix<LD, Eigen::Dynamic, 1>;
  const Eigen::Index n = sys.n();
  const VecLD x = U.data().cast<LD>();
  const VecLD ax = sys.A_tilde().cast<LD>() * x;
  const Eigen::SparseMatrix<LD> K = sys.K().cast<LD>();
  const LD sum = static_cast<LD>(sys.a()) * x.segment(0, n).dot(K * ax.segment(0, n)) +
                 x.segment(n, n).dot(ax.segment(n, n)) +
                 x.segment(2 * n, n).dot(K * ax.segment(2 * n, n)) +
                 x.segment(3 * n, n).dot(ax.segment(3 * n, n));
  return static_cast<double>(sum);
}

double energy(const SemiDiscreteSystem& sys, const State& U) {
  return 0.5 * inner_impl(sys, U, U).real();
}
double energy(const SemiDiscreteSystem& sys, const ComplexState& U) {
  return 0.5 * inner_impl(sys, U, U).real();
}

double dissipation_rate(const SemiDiscreteSystem& sys, const State& U) { return rate_impl(sys, U); }
double dissipation_rate(const SemiDiscreteSystem& sys, const ComplexState& U) {
  return rate_impl(sys, U);
}

void write_triplets(std::ostream& os, const SparseMatrix& matrix) {
  const auto old_precision = os.precision(17);
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace kvwave
