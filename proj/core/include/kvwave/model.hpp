#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kvwave {

/// Named problem families. Each preset fixes how the damping and coupling
/// layouts are derived from the scalar fields of ProblemConfig.
///
///  - main_local:          Kelvin-Voigt damping b0 on (alpha1, alpha3) acting
///                         on u, coupling c0 on (alpha2, alpha4).
///  - global:              b = b0 and c = c0 on all of (0, L).
///  - transmission_local:  L = 1, a = 1, Kelvin-Voigt damping of amplitude 1
///                         on (1/2, 1), constant coupling c on (0, 1).
///  - auxiliary:           viscous damping of amplitude 1 on
///                         (alpha2, alpha3 - 2 epsilon) for both equations,
///                         coupling c0 on (alpha2, alpha4).
enum class Preset { main_local, global, transmission_local, auxiliary };

enum class DampingKind { kelvin_voigt, viscous };

/// The two displacement fields: u (wave speed a, damped) and y (unit speed).
enum class Equation { u, y };

std::string_view to_string(Preset preset);
std::string_view to_string(DampingKind kind);
std::optional<Preset> parse_preset(std::string_view text);
std::optional<DampingKind> parse_damping_kind(std::string_view text);

/// Open interval (lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

struct DampingSpec {
  DampingKind kind = DampingKind::kelvin_voigt;
  Interval interval;
  double amplitude = 0.0;

  bool operator==(const DampingSpec&) const = default;
};

/// At most one damping mechanism per equation.
struct DampingLayout {
  std::optional<DampingSpec> u;
  std::optional<DampingSpec> y;

  const std::optional<DampingSpec>& operator[](Equation eq) const {
    return eq == Equation::u ? u : y;
  }
  std::optional<DampingSpec>& operator[](Equation eq) {
    return eq == Equation::u ? u : y;
  }
  bool operator==(const DampingLayout&) const = default;
};

/// Piecewise-constant function on [breakpoints.front(), breakpoints.back()].
/// Evaluation at an interior breakpoint returns the value of the cell to its
/// right; at the right end point it returns the value of the last cell.
class PiecewiseConstant {
 public:
  PiecewiseConstant(std::vector<double> breakpoints, std::vector<double> values);

  /// amplitude on `support`, zero elsewhere in [0, length].
  static PiecewiseConstant indicator(double length, Interval support, double amplitude);

  double operator()(double x) const;
  double integral() const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// Full description of one damped/coupled wave system instance.
///
/// The scalar fields are the user-facing parameters; `damping` and
/// `coupling_interval` are the resolved layout. The make_* factories fill both;
/// after editing scalars call apply_preset_layout() to re-derive the layout.
struct ProblemConfig {
  Preset preset = Preset::main_local;
  double L = 1.0;
  double a = 1.0;
  double b0 = 1.0;
  double c0 = 1.0;
  std::array<double, 4> alphas{0.2, 0.4, 0.6, 0.8};
  double epsilon = 0.0;

  DampingLayout damping;
  Interval coupling_interval;

  bool operator==(const ProblemConfig&) const = default;
};

ProblemConfig make_main_local(double L = 1.0, double a = 1.0, double b0 = 1.0,
                              double c0 = 1.0,
                              std::array<double, 4> alphas = {0.2, 0.4, 0.6, 0.8});
ProblemConfig make_global(double L = std::numbers::pi, double a = 2.0,
                          double b0 = 1.0, double c0 = 1.0);
ProblemConfig make_transmission_local(double c = 2.0);
ProblemConfig make_auxiliary(double L = 1.0, double a = 1.0, double c0 = 1.0,
                             std::array<double, 4> alphas = {0.2, 0.4, 0.6, 0.8},
                             double epsilon = 0.05);

/// Conservative decoupled system (b0 = c0 = 0), used as a spectral oracle.
ProblemConfig make_conservative(double L = 1.0, double a = 4.0);

/// Recomputes `damping` and `coupling_interval` from the preset and scalars.
void apply_preset_layout(ProblemConfig& config);

/// Sorted, de-duplicated coefficient jump points strictly inside (0, L),
/// together with alpha1..alpha4 for the presets that define them.
std::vector<double> interior_breakpoints(const ProblemConfig& config);

PiecewiseConstant damping_profile(const ProblemConfig& config, Equation eq,
                                  DampingKind kind);
PiecewiseConstant coupling_profile(const ProblemConfig& config);

/// Kelvin-Voigt coefficient b(x) of the u-equation. Throws DomainError for x
/// outside [0, L].
double coefficient_b(const ProblemConfig& config, double x);

/// Coupling coefficient c(x). Throws DomainError for x outside [0, L].
double coefficient_c(const ProblemConfig& config, double x);

struct Violation {
  std::string field;
  std::string message;
};

/// Every violated invariant; empty means the config is usable by all
/// assembly and spectral operations.
std::vector<Violation> validate(const ProblemConfig& config);

/// Throws ConfigError carrying every violation when validate() is non-empty.
void require_valid(const ProblemConfig& config);

std::string format_violations(const std::vector<Violation>& violations);

}  // namespace kvwave
