#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kvwave/error.hpp"
#include "kvwave/experiment.hpp"
#include "kvwave/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct CommonOptions {
  std::string config;
  std::string out = "out";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

int run(kvwave::ExperimentKind kind, const CommonOptions& opts) {
  try {
    kvwave::ExperimentSpec spec = kvwave::parse_config(opts.config, kind);
    spec.output_dir = opts.out;
    spec.jobs = opts.jobs;
    if (opts.seed) spec.seed = *opts.seed;

    const auto problems = kvwave::validate_spec(spec);
    if (!problems.empty()) {
      std::cerr << "kvlab: invalid configuration " << opts.config << ":\n";
      for (const auto& p : problems) std::cerr << "  " << p << "\n";
      return kExitUsage;
    }
    const auto result = kvwave::run_experiment(spec);
    std::cout << result.summary;
    for (const auto& path : result.artifacts) std::cout << "wrote " << path.string() << "\n";
    return kExitOk;
  } catch (const kvwave::ConfigError& e) {
    std::cerr << "kvlab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const kvwave::DomainError& e) {
    std::cerr << "kvlab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "kvlab: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch experiments for coupled wave systems with local Kelvin-Voigt damping"};
  app.set_version_flag("--version", std::string(kvwave::kVersion));
  app.require_subcommand(1);

  CommonOptions opts;
  std::uint64_t seed = 0;

  struct Entry {
    const char* name;
    kvwave::ExperimentKind kind;
    const char* help;
  };
  const Entry entries[] = {
      {"simulate", kvwave::ExperimentKind::simulate, "energy history and decay-law fits"},
      {"spectrum", kvwave::ExperimentKind::spectrum, "eigenvalues of the discrete operator"},
      {"resolvent", kvwave::ExperimentKind::resolvent_sweep, "resolvent norm along the imaginary axis"},
      {"huangpruss", kvwave::ExperimentKind::huang_pruss, "explicit resolvent-growth witness (global preset)"},
      {"roots", kvwave::ExperimentKind::char_roots, "characteristic roots vs asymptotic branches"},
      {"kerncheck", kvwave::ExperimentKind::kernel_check, "kernel determinant closed forms vs direct"},
      {"aux", kvwave::ExperimentKind::aux_check, "auxiliary viscous system: decay and resolvent bound"},
  };

  std::optional<kvwave::ExperimentKind> chosen;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", opts.config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory")->capture_default_str();
    sub->add_option("--jobs", opts.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->callback([&chosen, &e] { chosen = e.kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) opts.seed = seed;
  }
  return run(*chosen, opts);
}
