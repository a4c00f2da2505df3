#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseLU>

#include "kvwave/discretize.hpp"

namespace kvwave {

/// Crank-Nicolson step (B - dt/2 Ã) U₁ = (B + dt/2 Ã) U₀ with a cached sparse
/// LU of the left-hand matrix.
class TrapezoidalStepper {
 public:
  TrapezoidalStepper(const SemiDiscreteSystem& sys, double dt);

  State step(const State& U) const;
  double dt() const { return dt_; }

 private:
  double dt_;
  Eigen::Index n_;
  SparseMatrix rhs_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

/// One trapezoidal step. Factorizations are cached per (system, dt) and per
/// thread.
State step_trapezoidal(const SemiDiscreteSystem& sys, const State& U, double dt);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> energies;
  /// (time, state) every `snapshot_stride` steps, including t = 0.
  std::vector<std::pair<double, State>> snapshots;

  std::size_t size() const { return times.size(); }
};

/// ceil(T/dt) trapezoidal steps from U0, recording the energy after every
/// step. A stride of 0 disables snapshots.
Trajectory simulate(const SemiDiscreteSystem& sys, const State& U0, double T, double dt,
                    int snapshot_stride = 0);

/// |E(U₁) - E(U₀) + dt·D((U₀+U₁)/2)| where D is the dissipation rate.
double dissipation_residual(const SemiDiscreteSystem& sys, const State& U_before,
                            const State& U_after, double dt);

enum class DecayModel { polynomial, exponential };

std::string_view to_string(DecayModel model);

struct FitWindow {
  double t_min = 10.0;
  double t_max = 200.0;
};

/// E ≈ C t^{-α} (polynomial) or E ≈ C e^{-2τt} (exponential).
struct DecayFit {
  DecayModel model = DecayModel::polynomial;
  /// α for polynomial, τ for exponential.
  double exponent_or_rate = 0.0;
  double amplitude = 0.0;
  FitWindow fit_window;
  /// RMS of the log-energy residuals.
  double residual = 0.0;
  /// Coefficient of determination of the log-space fit.
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least squares in log space over samples with t in [t_min, t_max].
/// Throws ConfigError for fewer than 20 samples or a window outside the
/// trajectory, NumericalError("energy floor reached, shrink window") when an
/// energy in the window drops below 1e3·eps·E(0).
DecayFit fit_decay(const Trajectory& traj, DecayModel model, FitWindow window);

/// u₀ = sin(2πx/L)·x(L-x), y₀ the same, zero velocities.
State smooth_initial_state(const SemiDiscreteSystem& sys);

/// CSV with header `t,E`.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace kvwave
