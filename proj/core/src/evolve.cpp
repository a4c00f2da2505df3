#include "kvwave/evolve.hpp"

#include <cmath>
#include <limits>
#include <list>
#include <numbers>
#include <sstream>

#include "kvwave/csv.hpp"
#include "kvwave/error.hpp"

namespace kvwave {

TrapezoidalStepper::TrapezoidalStepper(const SemiDiscreteSystem& sys, double dt)
    : dt_(dt), n_(sys.n()) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be > 0");
  const SparseMatrix lhs = sys.B() - (0.5 * dt) * sys.A_tilde();
  rhs_ = sys.B() + (0.5 * dt) * sys.A_tilde();
  lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu_->analyzePattern(lhs);
  lu_->factorize(lhs);
  if (lu_->info() != Eigen::Success) {
    throw NumericalError("internal error: singular trapezoidal step matrix (" +
                         lu_->lastErrorMessage() + ")");
  }
}

State TrapezoidalStepper::step(const State& U) const {
  if (U.n() != n_) throw std::invalid_argument("state dimension does not match system");
  Eigen::VectorXd next = lu_->solve(rhs_ * U.data());
  return State(std::move(next));
}

State step_trapezoidal(const SemiDiscreteSystem& sys, const State& U, double dt) {
  struct Entry {
    std::uint64_t id;
    double dt;
    std::shared_ptr<TrapezoidalStepper> stepper;
  };
  thread_local std::list<Entry> cache;
  constexpr std::size_t kCapacity = 8;
  for (auto it = cache.begin(); it != cache.end(); ++it) {
    if (it->id == sys.id() && it->dt == dt) {
      cache.splice(cache.begin(), cache, it);
      return cache.front().stepper->step(U);
    }
  }
  auto stepper = std::make_shared<TrapezoidalStepper>(sys, dt);
  cache.push_front({sys.id(), dt, stepper});
  if (cache.size() > kCapacity) cache.pop_back();
  return stepper->step(U);
}

Trajectory simulate(const SemiDiscreteSystem& sys, const State& U0, double T, double dt,
                    int snapshot_stride) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("final time T must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("time step must be > 0");
  if (snapshot_stride < 0) throw ConfigError("snapshot stride must be >= 0");
  const auto steps = static_cast<long long>(std::ceil(T / dt - 1e-9));

  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.energies.reserve(static_cast<std::size_t>(steps) + 1);
  traj.times.push_back(0.0);
  traj.energies.push_back(energy(sys, U0));
  if (snapshot_stride > 0) traj.snapshots.emplace_back(0.0, U0);
  if (steps <= 0) return traj;

  const TrapezoidalStepper stepper(sys, dt);
  State U = U0;
  for (long long k = 1; k <= steps; ++k) {
    U = stepper.step(U);
    const double t = static_cast<double>(k) * dt;
    traj.times.push_back(t);
    traj.energies.push_back(energy(sys, U));
    if (snapshot_stride > 0 && k % snapshot_stride == 0) traj.snapshots.emplace_back(t, U);
  }
  return traj;
}

double dissipation_residual(const SemiDiscreteSystem& sys, const State& U_before,
                            const State& U_after, double dt) {
  const State mid(Eigen::VectorXd(0.5 * (U_before.data() + U_after.data())));
  return std::abs(energy(sys, U_after) - energy(sys, U_before) +
                  dt * dissipation_rate(sys, mid));
}

std::string_view to_string(DecayModel model) {
  return model == DecayModel::polynomial ? "polynomial" : "exponential";
}

DecayFit fit_decay(const Trajectory& traj, DecayModel model, FitWindow window) {
  if (traj.size() == 0) throw ConfigError("empty trajectory");
  if (!(window.t_min < window.t_max)) throw ConfigError("fit window must satisfy t_min < t_max");
  if (window.t_min < traj.times.front() || window.t_max > traj.times.back() * (1 + 1e-12)) {
    std::ostringstream msg;
    msg << "fit window [" << window.t_min << ", " << window.t_max
        << "] is not inside the trajectory range [" << traj.times.front() << ", "
        << traj.times.back() << "]";
    throw ConfigError(msg.str());
  }
  if (model == DecayModel::polynomial && !(window.t_min > 0.0)) {
    throw ConfigError("polynomial fit needs t_min > 0");
  }

  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * traj.energies.front();
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    if (t < window.t_min || t > window.t_max) continue;
    const double E = traj.energies[i];
    if (!(E > floor)) throw NumericalError("energy floor reached, shrink window");
    xs.push_back(model == DecayModel::polynomial ? std::log(t) : t);
    ys.push_back(std::log(E));
  }
  if (xs.size() < 20) {
    throw ConfigError("fit window holds " + std::to_string(xs.size()) +
                      " samples, need at least 20");
  }

  // Centered normal equations for y = c0 + c1 x.
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ssr += r * r;
  }

  DecayFit fit;
  fit.model = model;
  fit.exponent_or_rate = model == DecayModel::polynomial ? -slope : -0.5 * slope;
  fit.amplitude = std::exp(intercept);
  fit.fit_window = window;
  fit.residual = std::sqrt(ssr / n);
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.samples = xs.size();
  return fit;
}

State smooth_initial_state(const SemiDiscreteSystem& sys) {
  const double L = sys.config().L;
  auto profile = [L](double x) { return std::sin(2.0 * std::numbers::pi * x / L) * x * (L - x); };
  const Eigen::VectorXd u0 = interpolate(sys.grid(), profile);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.n());
  return State(u0, zero, u0, zero);
}

std::string trajectory_csv(const Trajectory& traj) {
  CsvTable table{"t", "E"};
  for (std::size_t i = 0; i < traj.size(); ++i) table.row() << traj.times[i] << traj.energies[i];
  return table.str();
}

}  // namespace kvwave
