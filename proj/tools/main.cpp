#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "coopnet/experiment.hpp"

// Exit codes: 0 all comparisons passed, 1 a comparison exceeded its
// tolerance, 2 configuration or usage error.

namespace ex = coopnet::experiment;

namespace {

void print_report(const ex::ComparisonReport& report, double tolerance,
                  const std::string& out_dir) {
  for (const ex::CurveReport& curve : report.curves) {
    if (curve.empirical.empty()) {
      std::printf("  %-10s analytic only, %zu points -> %s\n",
                  curve.label.c_str(), curve.x.size(), curve.csv_path.c_str());
      continue;
    }
    std::printf(
        "  %-10s sup gap %.4g (tolerance %.4g), analytic in CI %.1f%%%s  %s\n",
        curve.label.c_str(), curve.sup_gap, tolerance,
        100.0 * curve.frac_in_ci,
        curve.clamped_points > 0 ? " (clamped)" : "",
        curve.pass ? "PASS" : "FAIL");
  }
  if (!report.argmax_cluster_size.empty()) {
    std::printf("  best cluster size over the grid:");
    for (int k : report.argmax_cluster_size) {
      std::printf(" %d", k);
    }
    std::printf("\n");
  }
  std::printf("%s: %s in %.1f s; summary %s/%s\n", report.name.c_str(),
              report.pass ? "PASS" : "FAIL", report.wall_seconds,
              out_dir.c_str(), report.summary_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Link, access, and overall success probabilities of a cooperative "
      "energy-harvesting network: analytic curves cross-validated against a "
      "built-in Monte Carlo simulator."};
  app.require_subcommand(1);

  std::string config_path;
  std::string figure_id;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::string out_dir;
  double tolerance = 0.0;
  std::string cluster_source;

  const auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master RNG seed override");
    cmd->add_option("--trials", trials, "Monte Carlo trial count override");
    cmd->add_option("--out-dir", out_dir, "Output directory override");
    cmd->add_option("--tolerance", tolerance, "Pass/fail tolerance override");
    cmd->add_option("--cluster-source", cluster_source,
                    "Cluster sampling mode: thinned (activity-thinned field) "
                    "or full (all nodes form clusters)")
        ->check(CLI::IsMember({"full", "thinned"}));
  };

  CLI::App* run_cmd =
      app.add_subcommand("run", "Run an experiment from a configuration file");
  run_cmd->add_option("config", config_path, "Path to a JSON configuration")
      ->required();
  add_overrides(run_cmd);

  CLI::App* repro_cmd = app.add_subcommand(
      "reproduce", "Reproduce one of the shipped reference studies");
  repro_cmd
      ->add_option("figure", figure_id,
                   "Study id: fig2, fig3a, fig3b, fig4a, fig4b, fig5, fig6, "
                   "prop1_distinct")
      ->required();
  add_overrides(repro_cmd);

  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Parse and validate a configuration file, then exit");
  validate_cmd
      ->add_option("config", config_path, "Path to a JSON configuration")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto collect_overrides = [&](CLI::App* cmd) {
    ex::Overrides overrides;
    if (cmd->count("--seed") > 0) {
      overrides.seed = seed;
    }
    if (cmd->count("--trials") > 0) {
      overrides.trials = trials;
    }
    if (cmd->count("--out-dir") > 0) {
      overrides.out_dir = out_dir;
    }
    if (cmd->count("--tolerance") > 0) {
      overrides.tolerance = tolerance;
    }
    if (cmd->count("--cluster-source") > 0) {
      overrides.cluster_source =
          cluster_source == "full"
              ? coopnet::mcsim::ClusterSource::full_process
              : coopnet::mcsim::ClusterSource::thinned_process;
    }
    return overrides;
  };

  try {
    if (validate_cmd->parsed()) {
      const ex::ExperimentSpec spec = ex::load_config(config_path);
      std::printf("OK: %s (%s), %zu curve%s\n", spec.name.c_str(),
                  ex::to_string(spec.kind).c_str(), spec.curves.size(),
                  spec.curves.size() == 1 ? "" : "s");
      return 0;
    }
    ex::ExperimentSpec spec;
    ex::Overrides overrides;
    if (run_cmd->parsed()) {
      spec = ex::load_config(config_path);
      if (spec.kind == ex::Kind::figure_repro) {
        // Resolve the delegation here so overrides reach the real spec.
        const std::string dir = spec.out_dir;
        spec = ex::preset(spec.figure_id);
        spec.out_dir = dir;
      }
      overrides = collect_overrides(run_cmd);
    } else {
      spec = ex::preset(figure_id);
      overrides = collect_overrides(repro_cmd);
    }
    ex::apply(overrides, spec);
    std::printf("%s [%s] -> %s/\n", spec.name.c_str(),
                ex::to_string(spec.kind).c_str(), spec.out_dir.c_str());
    const ex::ComparisonReport report = ex::run_experiment(spec);
    print_report(report, spec.tolerance, spec.out_dir);
    return report.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
