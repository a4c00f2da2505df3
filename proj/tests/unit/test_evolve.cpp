#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kvwave/error.hpp"
#include "kvwave/evolve.hpp"
#include "random_state.hpp"

using namespace kvwave;

namespace {

Trajectory synthetic(double t0, double t1, int samples, double (*f)(double)) {
  Trajectory traj;
  for (int i = 0; i < samples; ++i) {
    const double t = t0 + (t1 - t0) * i / (samples - 1);
    traj.times.push_back(t);
    traj.energies.push_back(f(t));
  }
  return traj;
}

}  // namespace

TEST(Step, ZeroStaysZero) {
  const SemiDiscreteSystem sys = assemble(make_main_local(), 40);
  EXPECT_EQ(step_trapezoidal(sys, State(sys.n()), 1e-2).data().norm(), 0.0);
}

TEST(Step, MatchesDenseCayleyTransform) {
  // Oracle: (I - dt/2 A)^{-1}(I + dt/2 A) with dense A = B^{-1}Ã.
  std::mt19937_64 rng(3);
  const SemiDiscreteSystem sys = assemble(make_main_local(), 16);
  const Eigen::MatrixXd B = Eigen::MatrixXd(sys.B());
  const Eigen::MatrixXd A = B.inverse() * Eigen::MatrixXd(sys.A_tilde());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  const double dt = 0.05;
  const State U = oracle::random_state(sys.n(), rng);
  const Eigen::VectorXd ref = (I - 0.5 * dt * A).partialPivLu().solve((I + 0.5 * dt * A) * U.data());
  const State next = step_trapezoidal(sys, U, dt);
  EXPECT_LT((next.data() - ref).norm(), 1e-11 * ref.norm());
  // Second call reuses the cached factorization.
  EXPECT_LT((step_trapezoidal(sys, U, dt).data() - next.data()).norm(), 1e-15 * ref.norm());
}

TEST(Step, RejectsBadInput) {
  const SemiDiscreteSystem sys = assemble(make_main_local(), 20);
  EXPECT_THROW(TrapezoidalStepper(sys, 0.0), ConfigError);
  EXPECT_THROW(TrapezoidalStepper(sys, -1.0), ConfigError);
  EXPECT_THROW(TrapezoidalStepper(sys, 0.1).step(State(3)), std::invalid_argument);
}

TEST(Step, ConservativeEnergyPreserved) {
  std::mt19937_64 rng(4);
  const SemiDiscreteSystem sys = assemble(make_conservative(), 64);
  State U = oracle::random_state(sys.n(), rng);
  const double E0 = energy(sys, U);
  const TrapezoidalStepper stepper(sys, 1e-3);
  for (int k = 0; k < 10000; ++k) U = stepper.step(U);
  EXPECT_NEAR(energy(sys, U), E0, 1e-12 * E0);
}

TEST(Step, GlobalDampingStrictlyDecreases) {
  std::mt19937_64 rng(8);
  const SemiDiscreteSystem sys = assemble(make_global(), 50);
  State U = oracle::random_state(sys.n(), rng);
  for (int k = 0; k < 50; ++k) {
    const State next = step_trapezoidal(sys, U, 1e-2);
    EXPECT_LT(energy(sys, next), energy(sys, U));
    U = next;
  }
}

TEST(Simulate, ZeroHorizon) {
  const SemiDiscreteSystem sys = assemble(make_main_local(), 20);
  const Trajectory traj = simulate(sys, smooth_initial_state(sys), 0.0, 1e-2);
  EXPECT_EQ(traj.size(), 1u);
  EXPECT_EQ(traj.times.front(), 0.0);
}

TEST(Simulate, StepCountAndSnapshots) {
  const SemiDiscreteSystem sys = assemble(make_main_local(), 20);
  const Trajectory traj = simulate(sys, smooth_initial_state(sys), 1.0, 0.3, 2);
  EXPECT_EQ(traj.size(), 5u);  // ceil(1/0.3) = 4 steps
  EXPECT_DOUBLE_EQ(traj.times.back(), 1.2);
  EXPECT_EQ(traj.snapshots.size(), 3u);
  EXPECT_THROW(simulate(sys, smooth_initial_state(sys), -1.0, 0.1), ConfigError);
}

TEST(Simulate, MonotoneEnergyAllPresets) {
  for (const auto& cfg : {make_main_local(), make_global(), make_transmission_local(), make_auxiliary()}) {
    const SemiDiscreteSystem sys = assemble(cfg, 80);
    const Trajectory traj = simulate(sys, smooth_initial_state(sys), 5.0, 1e-2);
    const double E0 = traj.energies.front();
    for (std::size_t i = 1; i < traj.size(); ++i) {
      EXPECT_LE(traj.energies[i], traj.energies[i - 1] + 1e-12 * E0);
    }
    EXPECT_LT(traj.energies.back(), E0);
  }
}

TEST(Dissipation, ResidualPerStep) {
  std::mt19937_64 rng(12);
  for (const auto& cfg : {make_main_local(), make_auxiliary(), make_conservative()}) {
    const SemiDiscreteSystem sys = assemble(cfg, 60);
    State U = smooth_initial_state(sys);
    U.v() = oracle::random_state(sys.n(), rng).v();
    const double E0 = energy(sys, U);
    for (int k = 0; k < 20; ++k) {
      const State next = step_trapezoidal(sys, U, 1e-2);
      EXPECT_LE(dissipation_residual(sys, U, next, 1e-2), 1e-10 * E0);
      U = next;
    }
  }
  const SemiDiscreteSystem sys = assemble(make_main_local(), 20);
  EXPECT_EQ(dissipation_residual(sys, State(sys.n()), State(sys.n()), 0.1), 0.0);
}

TEST(Dissipation, TinySystemByDirectAlgebra) {
  // For the trapezoidal rule E1 - E0 = -dt·D(mid) exactly; check with the
  // explicit dense update at n_cells = 8.
  std::mt19937_64 rng(13);
  const SemiDiscreteSystem sys = assemble(make_main_local(1.0, 1.0, 1.0, 1.0, {0.25, 0.375, 0.5, 0.75}), 8);
  const Eigen::MatrixXd W = Eigen::MatrixXd(sys.W());
  const Eigen::MatrixXd A = Eigen::MatrixXd(sys.B()).inverse() * Eigen::MatrixXd(sys.A_tilde());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  const double dt = 0.1;
  const Eigen::VectorXd x0 = oracle::random_state(sys.n(), rng).data();
  const Eigen::VectorXd x1 = (I - 0.5 * dt * A).lu().solve((I + 0.5 * dt * A) * x0);
  const Eigen::VectorXd mid = 0.5 * (x0 + x1);
  const double lhs = 0.5 * x1.dot(W * x1) - 0.5 * x0.dot(W * x0);
  const double rhs = dt * mid.dot(W * A * mid);
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(x0.dot(W * x0)));
  EXPECT_LE(dissipation_residual(sys, State(x0), State(x1), dt), 1e-10 * 0.5 * x0.dot(W * x0));
}

TEST(FitDecay, PowerLaw) {
  const Trajectory traj = synthetic(1.0, 100.0, 500, [](double t) { return 5.0 / t; });
  const DecayFit fit = fit_decay(traj, DecayModel::polynomial, {1.0, 100.0});
  EXPECT_NEAR(fit.exponent_or_rate, 1.0, 1e-6);
  EXPECT_NEAR(fit.amplitude, 5.0, 1e-6);
  EXPECT_LT(fit.residual, 1e-12);
  EXPECT_EQ(fit.model, DecayModel::polynomial);
}

TEST(FitDecay, Exponential) {
  const Trajectory traj = synthetic(0.0, 5.0, 500, [](double t) { return std::exp(-4.0 * t); });
  const DecayFit fit = fit_decay(traj, DecayModel::exponential, {0.0, 5.0});
  EXPECT_NEAR(fit.exponent_or_rate, 2.0, 1e-6);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(FitDecay, ModelSelection) {
  const Trajectory traj = synthetic(1.0, 200.0, 1000, [](double t) { return 3.0 / (t * t); });
  const DecayFit p = fit_decay(traj, DecayModel::polynomial, {10.0, 200.0});
  const DecayFit e = fit_decay(traj, DecayModel::exponential, {10.0, 200.0});
  EXPECT_LT(p.residual, e.residual);
  EXPECT_NEAR(p.exponent_or_rate, 2.0, 1e-9);
}

TEST(FitDecay, Errors) {
  const Trajectory traj = synthetic(1.0, 100.0, 100, [](double t) { return 1.0 / t; });
  EXPECT_THROW(fit_decay(traj, DecayModel::polynomial, {0.5, 50.0}), ConfigError);
  EXPECT_THROW(fit_decay(traj, DecayModel::polynomial, {50.0, 200.0}), ConfigError);
  EXPECT_THROW(fit_decay(traj, DecayModel::polynomial, {50.0, 55.0}), ConfigError);  // < 20 samples
  const Trajectory floored = synthetic(0.0, 100.0, 1000, [](double t) { return std::exp(-t); });
  try {
    fit_decay(floored, DecayModel::exponential, {10.0, 100.0});
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_STREQ(e.what(), "energy floor reached, shrink window");
  }
}

TEST(Trajectory, Csv) {
  Trajectory traj;
  traj.times = {0.0, 0.5};
  traj.energies = {1.0, 0.25};
  EXPECT_EQ(trajectory_csv(traj), "t,E\n0,1\n0.5,0.25\n");
}

TEST(InitialData, VanishesAtBoundaryAndHasZeroVelocity) {
  const SemiDiscreteSystem sys = assemble(make_main_local(), 40);
  const State U = smooth_initial_state(sys);
  EXPECT_EQ(U.v().norm(), 0.0);
  EXPECT_EQ(U.z().norm(), 0.0);
  EXPECT_EQ((U.u() - U.y()).norm(), 0.0);
  const double x = sys.grid().nodes[10];
  EXPECT_DOUBLE_EQ(U.u()[9], std::sin(2 * std::numbers::pi * x) * x * (1 - x));
}

TEST(FitDecay, HalvingTimeStepMovesExponentLittle) {
  const SemiDiscreteSystem sys = assemble(make_main_local(), 400);
  const State U0 = smooth_initial_state(sys);
  const FitWindow window{10.0, 200.0};
  const double coarse = fit_decay(simulate(sys, U0, 200.0, 1e-3), DecayModel::polynomial, window).exponent_or_rate;
  const double fine = fit_decay(simulate(sys, U0, 200.0, 5e-4), DecayModel::polynomial, window).exponent_or_rate;
  EXPECT_LT(std::abs(coarse - fine), 0.02) << coarse << " vs " << fine;
}
