#include "kvwave/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kvwave/error.hpp"

namespace kvwave {

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::main_local: return "main_local";
    case Preset::global: return "global";
    case Preset::transmission_local: return "transmission_local";
    case Preset::auxiliary: return "auxiliary";
  }
  return "unknown";
}

std::string_view to_string(DampingKind kind) {
  return kind == DampingKind::kelvin_voigt ? "kelvin_voigt" : "viscous";
}

std::optional<Preset> parse_preset(std::string_view text) {
  for (Preset p : {Preset::main_local, Preset::global, Preset::transmission_local,
                   Preset::auxiliary}) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

std::optional<DampingKind> parse_damping_kind(std::string_view text) {
  if (text == "kelvin_voigt") return DampingKind::kelvin_voigt;
  if (text == "viscous") return DampingKind::viscous;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

PiecewiseConstant::PiecewiseConstant(std::vector<double> breakpoints,
                                     std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.size() < 2 || values_.size() + 1 != breakpoints_.size()) {
    throw ConfigError("PiecewiseConstant: need one value per cell");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw ConfigError("PiecewiseConstant: breakpoints must be strictly increasing");
    }
  }
}

PiecewiseConstant PiecewiseConstant::indicator(double length, Interval support,
                                               double amplitude) {
  const double lo = std::clamp(support.lo, 0.0, length);
  const double hi = std::clamp(support.hi, 0.0, length);
  std::vector<double> bp{0.0, lo, hi, length};
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  if (bp.size() < 2) bp = {0.0, length};
  std::vector<double> vals;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double mid = 0.5 * (bp[i] + bp[i + 1]);
    vals.push_back(mid > lo && mid < hi ? amplitude : 0.0);
  }
  return PiecewiseConstant(std::move(bp), std::move(vals));
}

double PiecewiseConstant::operator()(double x) const {
  if (!(x >= breakpoints_.front() && x <= breakpoints_.back())) {
    std::ostringstream msg;
    msg << "x = " << x << " outside [" << breakpoints_.front() << ", "
        << breakpoints_.back() << "]";
    throw DomainError(msg.str());
  }
  if (x == breakpoints_.back()) return values_.back();
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double PiecewiseConstant::integral() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    sum += values_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
  }
  return sum;
}

// ---------------------------------------------------------------------------

void apply_preset_layout(ProblemConfig& config) {
  const auto& al = config.alphas;
  config.damping = {};
  switch (config.preset) {
    case Preset::main_local:
      config.damping.u = DampingSpec{DampingKind::kelvin_voigt, {al[0], al[2]}, config.b0};
      config.coupling_interval = {al[1], al[3]};
      break;
    case Preset::global:
      config.damping.u = DampingSpec{DampingKind::kelvin_voigt, {0.0, config.L}, config.b0};
      config.coupling_interval = {0.0, config.L};
      break;
    case Preset::transmission_local:
      config.damping.u =
          DampingSpec{DampingKind::kelvin_voigt, {0.5 * config.L, config.L}, config.b0};
      config.coupling_interval = {0.0, config.L};
      break;
    case Preset::auxiliary: {
      const Interval damped{al[1], al[2] - 2.0 * config.epsilon};
      config.damping.u = DampingSpec{DampingKind::viscous, damped, 1.0};
      config.damping.y = DampingSpec{DampingKind::viscous, damped, 1.0};
      config.coupling_interval = {al[1], al[3]};
      break;
    }
  }
}

ProblemConfig make_main_local(double L, double a, double b0, double c0,
                              std::array<double, 4> alphas) {
  ProblemConfig cfg;
  cfg.preset = Preset::main_local;
  cfg.L = L;
  cfg.a = a;
  cfg.b0 = b0;
  cfg.c0 = c0;
  cfg.alphas = alphas;
  apply_preset_layout(cfg);
  return cfg;
}

ProblemConfig make_global(double L, double a, double b0, double c0) {
  ProblemConfig cfg;
  cfg.preset = Preset::global;
  cfg.L = L;
  cfg.a = a;
  cfg.b0 = b0;
  cfg.c0 = c0;
  cfg.alphas = {0.2 * L, 0.4 * L, 0.6 * L, 0.8 * L};
  apply_preset_layout(cfg);
  return cfg;
}

ProblemConfig make_transmission_local(double c) {
  ProblemConfig cfg;
  cfg.preset = Preset::transmission_local;
  cfg.L = 1.0;
  cfg.a = 1.0;
  cfg.b0 = 1.0;
  cfg.c0 = c;
  apply_preset_layout(cfg);
  return cfg;
}

ProblemConfig make_auxiliary(double L, double a, double c0, std::array<double, 4> alphas,
                             double epsilon) {
  ProblemConfig cfg;
  cfg.preset = Preset::auxiliary;
  cfg.L = L;
  cfg.a = a;
  cfg.b0 = 0.0;
  cfg.c0 = c0;
  cfg.alphas = alphas;
  cfg.epsilon = epsilon;
  apply_preset_layout(cfg);
  return cfg;
}

ProblemConfig make_conservative(double L, double a) {
  return make_global(L, a, 0.0, 0.0);
}

std::vector<double> interior_breakpoints(const ProblemConfig& config) {
  std::vector<double> pts;
  auto add = [&](const Interval& iv) {
    for (double p : {iv.lo, iv.hi}) {
      if (p > 0.0 && p < config.L) pts.push_back(p);
    }
  };
  for (Equation eq : {Equation::u, Equation::y}) {
    if (const auto& d = config.damping[eq]; d && d->amplitude != 0.0) add(d->interval);
  }
  if (config.c0 != 0.0) add(config.coupling_interval);
  if (config.preset == Preset::main_local || config.preset == Preset::auxiliary) {
    for (double p : config.alphas) {
      if (p > 0.0 && p < config.L) pts.push_back(p);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

PiecewiseConstant damping_profile(const ProblemConfig& config, Equation eq,
                                  DampingKind kind) {
  const auto& d = config.damping[eq];
  if (!d || d->kind != kind) return PiecewiseConstant({0.0, config.L}, {0.0});
  return PiecewiseConstant::indicator(config.L, d->interval, d->amplitude);
}

PiecewiseConstant coupling_profile(const ProblemConfig& config) {
  return PiecewiseConstant::indicator(config.L, config.coupling_interval, config.c0);
}

double coefficient_b(const ProblemConfig& config, double x) {
  return damping_profile(config, Equation::u, DampingKind::kelvin_voigt)(x);
}

double coefficient_c(const ProblemConfig& config, double x) {
  return coupling_profile(config)(x);
}

// ---------------------------------------------------------------------------

std::vector<Violation> validate(const ProblemConfig& config) {
  std::vector<Violation> out;
  auto fail = [&](std::string field, std::string message) {
    out.push_back({std::move(field), std::move(message)});
  };
  auto finite = [](double v) { return std::isfinite(v); };

  if (!finite(config.L) || config.L <= 0.0) fail("L", "domain length must be > 0");
  if (!finite(config.a) || config.a <= 0.0) fail("a", "wave speed coefficient must be > 0");
  if (!finite(config.b0) || config.b0 < 0.0) fail("b0", "damping amplitude must be >= 0");
  if (!finite(config.c0) || config.c0 < 0.0) fail("c0", "coupling amplitude must be >= 0");
  if (config.preset == Preset::main_local && config.b0 <= 0.0) {
    fail("b0", "main_local requires b0 > 0");
  }

  const auto& al = config.alphas;
  const bool uses_alphas =
      config.preset == Preset::main_local || config.preset == Preset::auxiliary;
  if (uses_alphas) {
    const bool ordered = 0.0 < al[0] && al[0] < al[1] && al[1] < al[2] && al[2] < al[3] &&
                         al[3] < config.L;
    if (!ordered) {
      fail("alphas", "interfaces not strictly ordered: need 0 < alpha1 < alpha2 < alpha3 < "
                     "alpha4 < L");
    }
  }

  if (config.preset == Preset::auxiliary) {
    const double bound = (al[2] - al[0]) / 4.0;
    if (!(config.epsilon > 0.0)) {
      fail("epsilon", "epsilon must be > 0");
    } else if (!(config.epsilon < bound)) {
      fail("epsilon", "epsilon too large: need 0 < epsilon < (alpha3 - alpha1)/4");
    } else if (!(al[2] - 2.0 * config.epsilon > al[1])) {
      fail("epsilon", "damping interval (alpha2, alpha3 - 2 epsilon) is empty");
    }
  }

  if (config.preset == Preset::transmission_local) {
    if (config.L != 1.0) fail("L", "transmission_local requires L = 1");
    if (config.a != 1.0) fail("a", "transmission_local requires a = 1");
  }

  for (Equation eq : {Equation::u, Equation::y}) {
    const auto& d = config.damping[eq];
    if (!d) continue;
    const std::string field = eq == Equation::u ? "damping.u" : "damping.y";
    if (!(d->amplitude >= 0.0) || !finite(d->amplitude)) {
      fail(field, "damping amplitude must be >= 0");
    }
    if (!(0.0 <= d->interval.lo && d->interval.lo < d->interval.hi &&
          d->interval.hi <= config.L)) {
      fail(field, "damping interval must be a non-empty subinterval of (0, L)");
    }
  }
  const auto& ci = config.coupling_interval;
  if (config.c0 != 0.0 && !(0.0 <= ci.lo && ci.lo < ci.hi && ci.hi <= config.L)) {
    fail("coupling_interval", "coupling interval must be a non-empty subinterval of (0, L)");
  }
  return out;
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (const auto& v : violations) os << "  " << v.field << ": " << v.message << '\n';
  return os.str();
}

void require_valid(const ProblemConfig& config) {
  auto violations = validate(config);
  if (!violations.empty()) {
    throw ConfigError("invalid problem config:\n" + format_violations(violations));
  }
}

}  // namespace kvwave
