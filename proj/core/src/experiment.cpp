#include "kvwave/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kvwave/charroots.hpp"
#include "kvwave/csv.hpp"
#include "kvwave/discretize.hpp"
#include "kvwave/error.hpp"
#include "kvwave/version.hpp"

namespace kvwave {

using nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::simulate, "simulate"},
    {ExperimentKind::spectrum, "spectrum"},
    {ExperimentKind::resolvent_sweep, "resolvent_sweep"},
    {ExperimentKind::huang_pruss, "huang_pruss"},
    {ExperimentKind::char_roots, "char_roots"},
    {ExperimentKind::kernel_check, "kernel_check"},
    {ExperimentKind::aux_check, "aux_check"},
};

// Keys of [experiment] accepted for each kind, besides `kind` and `seed`.
std::set<std::string_view> experiment_keys(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::simulate: return {"n_cells", "dt", "T", "fit_window"};
    case ExperimentKind::spectrum: return {"n_cells", "count", "near"};
    case ExperimentKind::resolvent_sweep:
      return {"n_cells", "k_range", "lambda_range", "lambda_count", "method"};
    case ExperimentKind::huang_pruss: return {"n_range", "mesh_cells", "witness_n"};
    case ExperimentKind::char_roots: return {"n_range", "lambda_range", "lambda_count"};
    case ExperimentKind::kernel_check: return {"draws"};
    case ExperimentKind::aux_check:
      return {"n_cells", "dt", "T", "fit_window", "lambda_range", "lambda_count", "method"};
  }
  return {};
}

std::set<std::string_view> model_keys(Preset preset) {
  switch (preset) {
    case Preset::main_local:
      return {"L", "a", "b0", "c0", "alpha1", "alpha2", "alpha3", "alpha4"};
    case Preset::global: return {"L", "a", "b0", "c0"};
    case Preset::transmission_local: return {"c"};
    case Preset::auxiliary:
      return {"L", "a", "c0", "alpha1", "alpha2", "alpha3", "alpha4", "epsilon"};
  }
  return {};
}

ProblemConfig factory_config(Preset preset) {
  switch (preset) {
    case Preset::main_local: return make_main_local();
    case Preset::global: return make_global();
    case Preset::transmission_local: return make_transmission_local();
    case Preset::auxiliary: return make_auxiliary();
  }
  return make_main_local();
}

std::optional<ResolventMethod> parse_method(std::string_view text) {
  for (auto m : {ResolventMethod::automatic, ResolventMethod::dense, ResolventMethod::lanczos}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

// 53 random bits mapped to [0, 1); identical on every platform.
double unit_draw(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double uniform(std::uint64_t& state, double lo, double hi) {
  return lo + (hi - lo) * unit_draw(state);
}

ordered_json config_json(const ProblemConfig& cfg) {
  ordered_json j;
  j["preset"] = to_string(cfg.preset);
  j["L"] = cfg.L;
  j["a"] = cfg.a;
  j["b0"] = cfg.b0;
  j["c0"] = cfg.c0;
  j["alphas"] = cfg.alphas;
  j["epsilon"] = cfg.epsilon;
  for (Equation eq : {Equation::u, Equation::y}) {
    const auto& d = cfg.damping[eq];
    const char* name = eq == Equation::u ? "damping_u" : "damping_y";
    if (!d) {
      j[name] = nullptr;
    } else {
      j[name] = {{"kind", to_string(d->kind)},
                 {"interval", {d->interval.lo, d->interval.hi}},
                 {"amplitude", d->amplitude}};
    }
  }
  j["coupling_interval"] = {cfg.coupling_interval.lo, cfg.coupling_interval.hi};
  return j;
}

ordered_json parameters_json(const ExperimentSpec& s) {
  const auto keys = experiment_keys(s.kind);
  ordered_json j;
  auto has = [&](std::string_view k) { return keys.count(k) > 0; };
  if (has("n_cells")) j["n_cells"] = s.n_cells;
  if (has("dt")) j["dt"] = s.dt;
  if (has("T")) j["T"] = s.T;
  if (has("fit_window")) j["fit_window"] = {s.fit_window.t_min, s.fit_window.t_max};
  if (has("n_range")) j["n_range"] = {s.n_range.first, s.n_range.second};
  if (has("k_range") && s.k_range) j["k_range"] = {s.k_range->first, s.k_range->second};
  if (has("lambda_range") && !s.k_range) {
    j["lambda_range"] = {s.lambda_range.first, s.lambda_range.second};
    j["lambda_count"] = s.lambda_count;
  }
  if (has("method")) j["method"] = to_string(s.method);
  if (has("count")) j["count"] = s.count;
  if (has("near")) j["near"] = {s.near.real(), s.near.imag()};
  if (has("mesh_cells")) j["mesh_cells"] = s.mesh_cells;
  if (has("witness_n")) j["witness_n"] = s.witness_n;
  if (has("draws")) j["draws"] = s.draws;
  j["seed"] = s.seed;
  j["jobs"] = s.jobs;
  return j;
}

std::string describe(const ExperimentSpec& s) {
  std::ostringstream os;
  os << "experiment " << to_string(s.kind) << " (preset " << to_string(s.config.preset);
  const ordered_json params = parameters_json(s);
  for (const auto& [k, v] : params.items()) os << ", " << k << "=" << v.dump();
  os << ")";
  return os.str();
}

std::string gnuplot_script(std::string_view csv, std::string_view title, std::string_view xlabel,
                           std::string_view ylabel, std::string_view using_cols, bool logx,
                           bool logy, std::string_view style = "lines") {
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set title '" << title << "'\n"
     << "set xlabel '" << xlabel << "'\n"
     << "set ylabel '" << ylabel << "'\n";
  if (logx) gp << "set logscale x\n";
  if (logy) gp << "set logscale y\n";
  gp << "plot '" << csv << "' using " << using_cols << " with " << style << "\n";
  return gp.str();
}

struct PendingFile {
  std::string name;
  std::string content;
};

ordered_json fit_json(const DecayFit& f) {
  return {{"model", to_string(f.model)},
          {f.model == DecayModel::polynomial ? "exponent" : "rate", f.exponent_or_rate},
          {"amplitude", f.amplitude},
          {"window", {f.fit_window.t_min, f.fit_window.t_max}},
          {"log_residual_rms", f.residual},
          {"r_squared", f.r_squared},
          {"samples", f.samples}};
}

struct Outcome {
  std::vector<PendingFile> files;
  ordered_json results;
  std::string summary;
};

Outcome run_simulate(const ExperimentSpec& s) {
  const SemiDiscreteSystem sys = assemble(s.config, s.n_cells);
  const Trajectory traj = simulate(sys, smooth_initial_state(sys), s.T, s.dt);
  const DecayFit poly = fit_decay(traj, DecayModel::polynomial, s.fit_window);
  const DecayFit expo = fit_decay(traj, DecayModel::exponential, s.fit_window);
  Outcome o;
  o.files.push_back({"energy.csv", trajectory_csv(traj)});
  o.files.push_back({"energy.gp", gnuplot_script("energy.csv", "energy decay", "t", "E(t)",
                                                 "1:2", true, true)});
  o.results["E0"] = traj.energies.front();
  o.results["E_final"] = traj.energies.back();
  o.results["polynomial_fit"] = fit_json(poly);
  o.results["exponential_fit"] = fit_json(expo);
  o.results["exponential_fits_worse"] = expo.residual > poly.residual;
  std::ostringstream os;
  os << "polynomial exponent " << poly.exponent_or_rate << " (log residual " << poly.residual
     << "), exponential rate " << expo.exponent_or_rate << " (log residual " << expo.residual
     << ")\n";
  o.summary = os.str();
  return o;
}

Outcome run_spectrum(const ExperimentSpec& s) {
  const SemiDiscreteSystem sys = assemble(s.config, s.n_cells);
  const auto recs = compute_spectrum(sys, s.count, s.near);
  Outcome o;
  o.files.push_back({"spectrum.csv", spectrum_csv(recs)});
  o.files.push_back({"spectrum.gp", gnuplot_script("spectrum.csv", "eigenvalues", "Re", "Im",
                                                   "1:2", false, false, "points")});
  double max_res = 0.0, max_re = -std::numeric_limits<double>::infinity();
  for (const auto& r : recs) {
    max_res = std::max(max_res, r.residual);
    max_re = std::max(max_re, r.lambda.real());
  }
  o.results["eigenvalues"] = recs.size();
  o.results["max_residual"] = max_res;
  o.results["max_real_part"] = max_re;
  o.results["conjugate_pairing_error"] = conjugate_pairing_error(recs);
  std::ostringstream os;
  os << recs.size() << " eigenvalues, max residual " << max_res << ", max Re " << max_re << "\n";
  o.summary = os.str();
  return o;
}

std::vector<double> norms_of(const std::vector<ResolventSample>& samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& r : samples) out.push_back(r.norm);
  return out;
}

Outcome run_resolvent(const ExperimentSpec& s) {
  const SemiDiscreteSystem sys = assemble(s.config, s.n_cells);
  const auto lambdas = sweep_points(s);
  const auto samples = resolvent_sweep(sys, lambdas, s.method, s.jobs);
  const auto norms = norms_of(samples);
  const double slope = loglog_slope(lambdas, norms);
  Outcome o;
  o.files.push_back({"resolvent.csv", resolvent_csv(samples)});
  o.files.push_back({"resolvent.gp", gnuplot_script("resolvent.csv", "resolvent norm on iR",
                                                    "lambda", "norm", "1:2", true, true,
                                                    "linespoints")});
  o.results["method"] = to_string(ResolventEvaluator(sys, s.method).method());
  o.results["loglog_slope"] = slope;
  o.results["max_norm"] = *std::max_element(norms.begin(), norms.end());
  std::ostringstream os;
  os << "log-log slope of the resolvent norm: " << slope << "\n";
  o.summary = os.str();
  return o;
}

Outcome run_huang_pruss(const ExperimentSpec& s) {
  Outcome o;
  CsvTable seq{"n", "lambda", "A_re", "A_im", "B_re", "B_im", "D1_rel", "D2_rel", "ratio"};
  double max_d1 = 0.0, max_d2 = 0.0, last_ratio = 0.0;
  for (int n = s.n_range.first; n <= s.n_range.second; ++n) {
    const HuangPrussTriple t = huang_pruss_sequence(s.config, n);
    seq.row() << n << t.lambda << t.A.real() << t.A.imag() << t.B.real() << t.B.imag()
              << t.D1_rel << t.D2_rel << t.growth_ratio();
    max_d1 = std::max(max_d1, t.D1_rel);
    max_d2 = std::max(max_d2, t.D2_rel);
    last_ratio = t.growth_ratio();
  }
  const HuangPrussTriple witness = huang_pruss_sequence(s.config, s.witness_n);
  CsvTable mesh{"n_cells", "h", "residual", "order"};
  std::vector<double> residuals;
  double prev_h = 0.0, prev_r = 0.0;
  ordered_json orders = ordered_json::array();
  for (int cells : s.mesh_cells) {
    const SemiDiscreteSystem sys = assemble(s.config, cells);
    const double r = discrete_huang_pruss_check(sys, witness);
    const double h = s.config.L / cells;
    const double order = prev_h > 0.0 ? std::log(prev_r / r) / std::log(prev_h / h)
                                      : std::numeric_limits<double>::quiet_NaN();
    mesh.row() << cells << h << r << order;
    if (prev_h > 0.0) orders.push_back(order);
    prev_h = h;
    prev_r = r;
  }
  o.files.push_back({"huang_pruss.csv", seq.str()});
  o.files.push_back({"huang_pruss_mesh.csv", mesh.str()});
  o.files.push_back({"huang_pruss.gp", gnuplot_script("huang_pruss.csv", "growth ratio", "n",
                                                      "ratio", "1:9", false, false)});
  o.results["max_D1_rel"] = max_d1;
  o.results["max_D2_rel"] = max_d2;
  o.results["ratio_at_n_max"] = last_ratio;
  o.results["ratio_limit"] = huang_pruss_ratio_limit(s.config);
  o.results["mesh_orders"] = orders;
  std::ostringstream os;
  os << "max D1 rel " << max_d1 << ", max D2 rel " << max_d2 << ", ratio " << last_ratio
     << " (limit " << huang_pruss_ratio_limit(s.config) << ")\n";
  o.summary = os.str();
  return o;
}

Outcome run_char_roots(const ExperimentSpec& s) {
  const double c = s.config.c0;
  const auto roots = find_branch_roots(c, s.n_range.first, s.n_range.second, s.jobs);
  CsvTable diag{"branch", "n", "count", "scaled_re", "coef_three_plus_cos", "coef_two_plus_cos",
                "newton_iters", "used_muller"};
  double err3 = 0.0, err2 = 0.0;
  int samples1 = 0;
  bool counts_ok = true;
  for (const auto& r : roots) {
    const RootCount cnt = count_roots_in_ball(r.ball_center, r.ball_radius, c);
    counts_ok = counts_ok && cnt.count == 1;
    const double scaled = std::abs(r.root.real()) * std::sqrt(r.n * kPi);
    const double k3 = real_part_coefficient(r.branch, c, Case1Constant::three_plus_cos);
    const double k2 = real_part_coefficient(r.branch, c, Case1Constant::two_plus_cos);
    diag.row() << (r.branch == Branch::branch1 ? 1 : 2) << r.n << cnt.count << scaled << k3 << k2
               << r.newton_iters << (r.used_muller ? 1 : 0);
    if (r.branch == Branch::branch1) {
      err3 += std::abs(std::log(scaled / k3));
      err2 += std::abs(std::log(scaled / k2));
      ++samples1;
    }
  }
  const Case1Constant fit = err3 <= err2 ? Case1Constant::three_plus_cos : Case1Constant::two_plus_cos;

  const int count = s.lambda_count;
  CsvTable rem{"t", "remainder_as_printed", "remainder_cos_corrected"};
  std::vector<double> ts, r_printed, r_corrected;
  for (double t : linspace(s.lambda_range.first, s.lambda_range.second, count)) {
    const Complex l(0.0, t);
    const double a = asymptotic_remainder(l, c, F4Form::as_printed);
    const double b = asymptotic_remainder(l, c, F4Form::cos_corrected);
    rem.row() << t << a << b;
    ts.push_back(t);
    r_printed.push_back(a);
    r_corrected.push_back(b);
  }

  Outcome o;
  o.files.push_back({"roots.csv", root_table_csv(roots, c, fit)});
  o.files.push_back({"roots_diagnostics.csv", diag.str()});
  o.files.push_back({"asymptotic_remainder.csv", rem.str()});
  o.files.push_back({"roots.gp", gnuplot_script("roots.csv", "characteristic roots", "Re", "Im",
                                                "3:4", false, false, "points")});
  o.files.push_back({"asymptotic_remainder.gp",
                     gnuplot_script("asymptotic_remainder.csv", "asymptotic remainder", "t",
                                    "remainder", "1:2", true, true)});
  o.results["roots"] = roots.size();
  o.results["all_balls_hold_one_root"] = counts_ok;
  o.results["case1_constant_fit"] = to_string(fit);
  o.results["case1_mean_abs_log_ratio"] = {{"three_plus_cos", samples1 ? err3 / samples1 : 0.0},
                                           {"two_plus_cos", samples1 ? err2 / samples1 : 0.0}};
  o.results["remainder_slope_as_printed"] = loglog_slope(ts, r_printed);
  o.results["remainder_slope_cos_corrected"] = loglog_slope(ts, r_corrected);
  std::ostringstream os;
  os << roots.size() << " roots, one per ball: " << (counts_ok ? "yes" : "no")
     << ", branch-1 constant fit: " << to_string(fit) << ", remainder slope "
     << loglog_slope(ts, r_printed) << "\n";
  o.summary = os.str();
  return o;
}

Outcome run_kernel_check(const ExperimentSpec& s) {
  std::uint64_t state = s.seed;
  CsvTable table{"case", "lambda", "a", "c0", "alpha3", "closed_re", "closed_im", "direct_re",
                 "direct_im", "rel_err", "rel_err_as_printed"};
  ordered_json max_err, max_err_printed;
  for (KernelCase kc : {KernelCase::lt, KernelCase::eq, KernelCase::gt}) {
    double worst = 0.0, worst_printed = 0.0;
    for (int i = 0; i < s.draws; ++i) {
      const double a = uniform(state, 0.5, 4.0);
      const double c0 = uniform(state, 0.5, 3.0);
      const double alpha3 = uniform(state, 0.1, 1.0);
      const double frac = uniform(state, 0.0, 1.0);
      const double lambda = kc == KernelCase::lt   ? c0 * (0.1 + 0.8 * frac)
                            : kc == KernelCase::eq ? c0
                                                   : c0 * (1.1 + 1.9 * frac);
      const KernelDet k = kernel_det(kc, lambda, a, c0, alpha3);
      const double err = std::abs(k.closed_form - k.direct) / std::abs(k.direct);
      const double err_p =
          std::abs(k.closed_form_as_printed - k.direct_as_printed) / std::abs(k.direct_as_printed);
      table.row() << to_string(kc) << lambda << a << c0 << alpha3 << k.closed_form.real()
                  << k.closed_form.imag() << k.direct.real() << k.direct.imag() << err << err_p;
      worst = std::max(worst, err);
      worst_printed = std::max(worst_printed, err_p);
    }
    max_err[std::string(to_string(kc))] = worst;
    max_err_printed[std::string(to_string(kc))] = worst_printed;
  }
  Outcome o;
  o.files.push_back({"kernel.csv", table.str()});
  o.files.push_back({"kernel.gp", gnuplot_script("kernel.csv", "closed form vs direct", "lambda",
                                                 "relative error", "2:10", false, true,
                                                 "points")});
  o.results["max_rel_err"] = max_err;
  o.results["max_rel_err_as_printed"] = max_err_printed;
  std::ostringstream os;
  os << "max rel err " << max_err.dump() << ", as printed " << max_err_printed.dump() << "\n";
  o.summary = os.str();
  return o;
}

Outcome run_aux_check(const ExperimentSpec& s) {
  const SemiDiscreteSystem sys = assemble(s.config, s.n_cells);
  const Trajectory traj = simulate(sys, smooth_initial_state(sys), s.T, s.dt);
  const DecayFit expo = fit_decay(traj, DecayModel::exponential, s.fit_window);
  const auto lambdas = sweep_points(s);
  const auto samples = resolvent_sweep(sys, lambdas, s.method, s.jobs);
  const auto norms = norms_of(samples);
  const double ratio = upper_envelope_ratio(norms);
  Outcome o;
  o.files.push_back({"aux_energy.csv", trajectory_csv(traj)});
  o.files.push_back({"aux_resolvent.csv", resolvent_csv(samples)});
  o.files.push_back({"aux_energy.gp", gnuplot_script("aux_energy.csv", "auxiliary energy", "t",
                                                     "E(t)", "1:2", false, true)});
  o.files.push_back({"aux_resolvent.gp",
                     gnuplot_script("aux_resolvent.csv", "auxiliary resolvent norm", "lambda",
                                    "norm", "1:2", false, false, "linespoints")});
  o.results["exponential_fit"] = fit_json(expo);
  o.results["resolvent_envelope_ratio"] = ratio;
  o.results["max_norm"] = *std::max_element(norms.begin(), norms.end());
  std::ostringstream os;
  os << "exponential fit R^2 " << expo.r_squared << ", resolvent envelope ratio " << ratio << "\n";
  o.summary = os.str();
  return o;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

ExperimentSpec default_spec(ExperimentKind kind, ProblemConfig config) {
  ExperimentSpec s;
  s.kind = kind;
  s.config = std::move(config);
  switch (kind) {
    case ExperimentKind::resolvent_sweep:
      s.k_range = std::make_pair(5, 60);
      break;
    case ExperimentKind::char_roots:
      s.n_range = {10, 60};
      s.lambda_range = {50.0, 500.0};
      s.lambda_count = 46;
      break;
    case ExperimentKind::aux_check:
      s.T = 50.0;
      s.fit_window = {5.0, 50.0};
      break;
    default:
      break;
  }
  return s;
}

namespace {

ExperimentSpec spec_from_document(const ConfigDocument& doc,
                                  std::optional<ExperimentKind> kind_hint) {
  for (const auto& sec : doc.sections()) {
    if (!sec.name.empty() && sec.name != "experiment" && sec.name != "damping.u" &&
        sec.name != "damping.y") {
      doc.fail(sec.line, "unknown section [" + sec.name + "]");
    }
  }

  // Problem definition.
  const ConfigSection& root = doc.root();
  const ConfigEntry* preset_entry = root.find("preset");
  if (!preset_entry) doc.fail(1, "missing required key 'preset'");
  const auto preset = parse_preset(preset_entry->value);
  if (!preset) doc.fail(preset_entry->line, "unknown preset '" + preset_entry->value + "'");
  const auto allowed = model_keys(*preset);
  ProblemConfig cfg = factory_config(*preset);
  for (const auto& e : root.entries) {
    if (e.key == "preset") continue;
    if (!allowed.count(e.key)) {
      doc.fail(e.line, "key '" + e.key + "' is not a parameter of preset " +
                           std::string(to_string(*preset)));
    }
    const double v = doc.get_double(e);
    if (e.key == "L") cfg.L = v;
    else if (e.key == "a") cfg.a = v;
    else if (e.key == "b0") cfg.b0 = v;
    else if (e.key == "c0" || e.key == "c") cfg.c0 = v;
    else if (e.key == "epsilon") cfg.epsilon = v;
    else cfg.alphas[static_cast<std::size_t>(e.key.back() - '1')] = v;
  }
  apply_preset_layout(cfg);

  for (Equation eq : {Equation::u, Equation::y}) {
    const ConfigSection* sec = doc.section(eq == Equation::u ? "damping.u" : "damping.y");
    if (!sec) continue;
    for (const auto& e : sec->entries) {
      if (e.key != "kind" && e.key != "interval" && e.key != "amplitude") {
        doc.fail(e.line, "unknown key '" + e.key + "' in [" + sec->name + "]");
      }
    }
    DampingSpec d;
    const ConfigEntry* kind = sec->find("kind");
    const ConfigEntry* interval = sec->find("interval");
    const ConfigEntry* amplitude = sec->find("amplitude");
    if (!kind || !interval || !amplitude) {
      doc.fail(sec->line, "[" + sec->name + "] needs kind, interval and amplitude");
    }
    const auto dk = parse_damping_kind(kind->value);
    if (!dk) doc.fail(kind->line, "unknown damping kind '" + kind->value + "'");
    d.kind = *dk;
    const auto iv = doc.get_doubles(*interval, 2);
    d.interval = {iv[0], iv[1]};
    d.amplitude = doc.get_double(*amplitude);
    cfg.damping[eq] = d;
  }

  // Experiment parameters.
  const ConfigSection* exp = doc.section("experiment");
  std::optional<ExperimentKind> kind;
  if (exp) {
    if (const ConfigEntry* k = exp->find("kind")) {
      kind = parse_experiment_kind(k->value);
      if (!kind) doc.fail(k->line, "unknown experiment kind '" + k->value + "'");
      if (kind_hint && *kind_hint != *kind) {
        doc.fail(k->line, "config declares kind " + k->value + " but " +
                              std::string(to_string(*kind_hint)) + " was requested");
      }
    }
  }
  if (!kind) kind = kind_hint;
  if (!kind) doc.fail(exp ? exp->line : 1, "missing required key 'kind' in [experiment]");

  ExperimentSpec s = default_spec(*kind, std::move(cfg));
  if (!exp) return s;
  const auto keys = experiment_keys(*kind);
  bool lambda_given = false;
  for (const auto& e : exp->entries) {
    if (e.key == "kind") continue;
    if (e.key == "seed") {
      s.seed = doc.get_u64(e);
      continue;
    }
    if (!keys.count(e.key)) {
      doc.fail(e.line, "key '" + e.key + "' does not apply to experiment " +
                           std::string(to_string(*kind)));
    }
    if (e.key == "n_cells") s.n_cells = doc.get_int(e);
    else if (e.key == "dt") s.dt = doc.get_double(e);
    else if (e.key == "T") s.T = doc.get_double(e);
    else if (e.key == "fit_window") {
      const auto v = doc.get_doubles(e, 2);
      s.fit_window = {v[0], v[1]};
    } else if (e.key == "n_range") {
      const auto v = doc.get_ints(e, 2);
      s.n_range = {v[0], v[1]};
    } else if (e.key == "k_range") {
      const auto v = doc.get_ints(e, 2);
      s.k_range = std::make_pair(v[0], v[1]);
    } else if (e.key == "lambda_range") {
      const auto v = doc.get_doubles(e, 2);
      s.lambda_range = {v[0], v[1]};
      lambda_given = true;
    } else if (e.key == "lambda_count") {
      s.lambda_count = doc.get_int(e);
      lambda_given = true;
    } else if (e.key == "method") {
      const auto m = parse_method(e.value);
      if (!m) doc.fail(e.line, "unknown resolvent method '" + e.value + "'");
      s.method = *m;
    } else if (e.key == "count") s.count = doc.get_int(e);
    else if (e.key == "near") {
      const auto v = doc.get_doubles(e, 2);
      s.near = {v[0], v[1]};
    } else if (e.key == "mesh_cells") s.mesh_cells = doc.get_ints(e);
    else if (e.key == "witness_n") s.witness_n = doc.get_int(e);
    else if (e.key == "draws") s.draws = doc.get_int(e);
  }
  if (*kind == ExperimentKind::resolvent_sweep && lambda_given) {
    if (const ConfigEntry* k = exp->find("k_range")) {
      doc.fail(k->line, "give either k_range or lambda_range/lambda_count, not both");
    }
    s.k_range.reset();
  }
  return s;
}

}  // namespace

ExperimentSpec parse_config(const std::filesystem::path& path,
                            std::optional<ExperimentKind> kind_hint) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return spec_from_document(ConfigDocument::load(path), kind_hint);
}

ExperimentSpec parse_config_text(std::string_view text, std::string_view source,
                                 std::optional<ExperimentKind> kind_hint) {
  return spec_from_document(ConfigDocument::parse(text, std::string(source)), kind_hint);
}

std::vector<std::string> validate_spec(const ExperimentSpec& s) {
  std::vector<std::string> out;
  for (const auto& v : validate(s.config)) out.push_back(v.field + ": " + v.message);
  const auto keys = experiment_keys(s.kind);
  auto need = [&](bool ok, std::string msg) {
    if (!ok) out.push_back(std::move(msg));
  };
  auto need_preset = [&](Preset p) {
    need(s.config.preset == p, std::string(to_string(s.kind)) + " requires preset " +
                                   std::string(to_string(p)));
  };
  if (keys.count("n_cells")) need(s.n_cells >= 8, "n_cells must be >= 8");
  if (keys.count("dt")) need(s.dt > 0.0 && std::isfinite(s.dt), "dt must be > 0");
  if (keys.count("T")) need(s.T > 0.0 && std::isfinite(s.T), "T must be > 0");
  if (keys.count("fit_window")) {
    need(s.fit_window.t_min >= 0.0 && s.fit_window.t_min < s.fit_window.t_max &&
             s.fit_window.t_max <= s.T,
         "fit_window must satisfy 0 <= t_min < t_max <= T");
  }
  if (keys.count("n_range")) {
    need(s.n_range.first >= 1 && s.n_range.first <= s.n_range.second,
         "n_range must satisfy 1 <= n_min <= n_max");
  }
  if (keys.count("lambda_range") && !s.k_range) {
    need(s.lambda_range.first > 0.0 && s.lambda_range.first < s.lambda_range.second,
         "lambda_range must satisfy 0 < lo < hi");
    need(s.lambda_count >= 2, "lambda_count must be >= 2");
  }
  if (s.k_range) {
    need(s.k_range->first >= 1 && s.k_range->first < s.k_range->second,
         "k_range must satisfy 1 <= k_min < k_max");
  }
  need(s.jobs >= 1, "jobs must be >= 1");
  switch (s.kind) {
    case ExperimentKind::spectrum:
      need(s.count >= 1, "count must be >= 1");
      break;
    case ExperimentKind::huang_pruss:
      need_preset(Preset::global);
      need(s.mesh_cells.size() >= 2, "mesh_cells needs at least two meshes");
      for (int m : s.mesh_cells) need(m >= 8, "mesh_cells entries must be >= 8");
      need(std::is_sorted(s.mesh_cells.begin(), s.mesh_cells.end()),
           "mesh_cells must be increasing");
      need(s.witness_n >= 1, "witness_n must be >= 1");
      break;
    case ExperimentKind::char_roots:
      need_preset(Preset::transmission_local);
      need(s.config.c0 != 0.0, "char_roots needs c != 0");
      break;
    case ExperimentKind::kernel_check:
      need(s.draws >= 1, "draws must be >= 1");
      break;
    case ExperimentKind::aux_check:
      need_preset(Preset::auxiliary);
      break;
    default:
      break;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const auto problems = validate_spec(spec);
  if (!problems.empty()) {
    std::string msg = describe(spec) + ": invalid specification";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }

  Outcome outcome;
  try {
    switch (spec.kind) {
      case ExperimentKind::simulate: outcome = run_simulate(spec); break;
      case ExperimentKind::spectrum: outcome = run_spectrum(spec); break;
      case ExperimentKind::resolvent_sweep: outcome = run_resolvent(spec); break;
      case ExperimentKind::huang_pruss: outcome = run_huang_pruss(spec); break;
      case ExperimentKind::char_roots: outcome = run_char_roots(spec); break;
      case ExperimentKind::kernel_check: outcome = run_kernel_check(spec); break;
      case ExperimentKind::aux_check: outcome = run_aux_check(spec); break;
    }
  } catch (const ConfigError& e) {
    throw ConfigError(describe(spec) + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(describe(spec) + ": " + e.what());
  } catch (const std::exception& e) {
    throw NumericalError(describe(spec) + ": " + e.what());
  }

  ordered_json meta;
  meta["tool"] = "kvwave";
  meta["version"] = kVersion;
  meta["kind"] = to_string(spec.kind);
  meta["config"] = config_json(spec.config);
  meta["parameters"] = parameters_json(spec);
  meta["results"] = outcome.results;
  ordered_json names = ordered_json::array();
  for (const auto& f : outcome.files) names.push_back(f.name);
  meta["artifacts"] = names;
  outcome.files.push_back({"metadata.json", meta.dump(2) + "\n"});

  ExperimentResult result;
  result.summary = outcome.summary;
  try {
    std::filesystem::create_directories(spec.output_dir);
    for (const auto& f : outcome.files) {
      const auto path = spec.output_dir / f.name;
      write_file_atomic(path, f.content);
      result.artifacts.push_back(path);
    }
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& p : result.artifacts) std::filesystem::remove(p, ec);
    throw NumericalError(describe(spec) + ": cannot write outputs: " + e.what());
  }
  return result;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope needs two equally sized samples of length >= 2");
  }
  double mx = 0.0, my = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

double upper_envelope_ratio(const std::vector<double>& values, int windows) {
  if (windows < 1 || values.size() < static_cast<std::size_t>(windows)) {
    throw std::invalid_argument("upper_envelope_ratio needs at least one sample per window");
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const std::size_t n = values.size();
  for (int w = 0; w < windows; ++w) {
    const std::size_t b = n * static_cast<std::size_t>(w) / static_cast<std::size_t>(windows);
    const std::size_t e = n * static_cast<std::size_t>(w + 1) / static_cast<std::size_t>(windows);
    const double m = *std::max_element(values.begin() + static_cast<std::ptrdiff_t>(b),
                                       values.begin() + static_cast<std::ptrdiff_t>(e));
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return hi / lo;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("linspace needs count >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  out.back() = hi;
  return out;
}

std::vector<double> sweep_points(const ExperimentSpec& spec) {
  if (spec.k_range) {
    std::vector<double> out;
    for (int k = spec.k_range->first; k <= spec.k_range->second; ++k) {
      out.push_back(k * kPi / spec.config.L);
    }
    return out;
  }
  return linspace(spec.lambda_range.first, spec.lambda_range.second, spec.lambda_count);
}

}  // namespace kvwave
