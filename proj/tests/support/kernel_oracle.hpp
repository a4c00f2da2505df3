#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "kvwave/charroots.hpp"

namespace oracle {

// Boundary matrices of the stationary problem on the damped interval, built
// from the general solution u = Σ cⱼφⱼ, y = Σ cⱼκⱼφⱼ with rows u, u', y, y'.
inline kvwave::Complex kernel_det(kvwave::KernelCase kc, double l, double a, double c0, double al) {
  const double disc = std::sqrt(std::pow(l, 4) * (a - 1) * (a - 1) + 4 * a * c0 * c0 * l * l);
  const double m1 = (-l * l * (a + 1) - disc) / (2 * a), m2 = (-l * l * (a + 1) + disc) / (2 * a);
  const kvwave::Complex I(0.0, 1.0);
  auto kappa = [&](double num) { return kvwave::Complex(num) / (I * l * c0); };
  std::array<kvwave::Complex, 4> phi, dphi, k;
  if (kc == kvwave::KernelCase::lt) {
    const double r1 = std::sqrt(-m1), r2 = std::sqrt(m2);
    phi = {std::sin(r1 * al), std::cos(r1 * al), std::cosh(r2 * al), std::sinh(r2 * al)};
    dphi = {r1 * std::cos(r1 * al), -r1 * std::sin(r1 * al), r2 * std::sinh(r2 * al), r2 * std::cosh(r2 * al)};
    k = {kappa(l * l - a * r1 * r1), kappa(l * l - a * r1 * r1), kappa(l * l + a * r2 * r2),
         kappa(l * l + a * r2 * r2)};
  } else if (kc == kvwave::KernelCase::eq) {
    const double r1 = std::sqrt(-m1);
    phi = {std::sin(r1 * al), std::cos(r1 * al), al, 1.0};
    dphi = {r1 * std::cos(r1 * al), -r1 * std::sin(r1 * al), 1.0, 0.0};
    k = {kappa(l * l - a * r1 * r1), kappa(l * l - a * r1 * r1), l / (I * c0), l / (I * c0)};
  } else {
    const double r1 = std::sqrt(-m1), r2 = std::sqrt(-m2);
    phi = {std::sin(r1 * al), std::cos(r1 * al), std::sin(r2 * al), std::cos(r2 * al)};
    dphi = {r1 * std::cos(r1 * al), -r1 * std::sin(r1 * al), r2 * std::cos(r2 * al), -r2 * std::sin(r2 * al)};
    k = {kappa(l * l - a * r1 * r1), kappa(l * l - a * r1 * r1), kappa(l * l - a * r2 * r2),
         kappa(l * l - a * r2 * r2)};
  }
  Eigen::Matrix4cd M;
  for (int j = 0; j < 4; ++j) {
    M(0, j) = phi[j];
    M(1, j) = dphi[j];
    M(2, j) = k[j] * phi[j];
    M(3, j) = k[j] * dphi[j];
  }
  return M.determinant();
}

}  // namespace oracle
