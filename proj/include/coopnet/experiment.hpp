#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopnet/energy.hpp"
#include "coopnet/mcsim.hpp"
#include "coopnet/model.hpp"

// Experiment orchestration: configuration files and named presets describe a
// comparison between an analytic curve and its Monte Carlo estimate (or a
// closed-form parameter sweep); running one emits CSV series plus a JSON
// summary and reports pass/fail against a tolerance.

namespace coopnet::experiment {

enum class Kind {
  link_thm1,        // conditioned link success curve, approximate form
  link_prop1,       // conditioned link success curve, exact distinct form
  link_thm2,        // distance-averaged link success curve
  cluster_access,   // selection probability vs density ratio
  overall_success,  // joint selection-and-decoding curve
  buffer_sweep,     // asymptotic outage vs buffer size
  rate_sweep,       // asymptotic outage vs harvesting rate
  beta_sweep,       // zero-threshold overall success vs density ratio
  figure_repro,     // delegate to a named preset
};

Kind kind_from_string(const std::string& text);
std::string to_string(Kind kind);

// One analytic-vs-empirical series. Which fields apply depends on the kind:
// conditioned kinds use distances + availability (optionally derived from
// per-node harvesting rates), averaged kinds use omega, and the access /
// sweep kinds use cluster_size.
struct CurveSpec {
  std::string label;
  std::vector<double> distances;
  std::vector<double> availability;
  std::vector<double> omega;
  int cluster_size = 0;
  int buffer_size = 0;  // rate-sweep curves carry their storage size
};

struct ExperimentSpec {
  Kind kind = Kind::link_thm2;
  std::string name = "experiment";
  NetworkModel model;
  mcsim::SimConfig sim;
  std::vector<double> theta_grid = {1.0};  // linear, ascending
  double q_tr = 0.0;               // common idle probability (averaged kinds)
  std::vector<CurveSpec> curves;
  std::vector<double> beta_grid;   // cluster_access, beta_sweep
  std::vector<int> buffer_grid;    // buffer_sweep
  std::vector<double> rho_grid;    // rate_sweep
  double rho = 0.0;                // harvesting rate for buffer/beta sweeps
  double charge_prob = 0.0;        // channel-access probability for sweeps
  double tolerance = 0.02;
  bool with_sim = true;
  std::string out_dir = "out";
  std::string figure_id;           // figure_repro only
};

// Throws std::domain_error naming the offending field.
void validate(const ExperimentSpec& spec);

struct CurveReport {
  std::string label;
  std::vector<double> x;
  std::vector<double> analytic;
  std::vector<double> empirical;   // empty when the sweep is analytic-only
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<double> extra;       // kind-specific column (outage floor)
  double sup_gap = 0.0;
  double frac_in_ci = 1.0;
  int clamped_points = 0;
  bool pass = true;
  std::string csv_path;
};

struct ComparisonReport {
  std::string name;
  Kind kind = Kind::link_thm2;
  bool pass = true;
  double wall_seconds = 0.0;
  std::vector<CurveReport> curves;
  // beta_sweep annotation: best cluster size at each grid point.
  std::vector<int> argmax_cluster_size;
  std::string summary_path;
};

// Parses and validates a configuration file. Unknown keys are rejected;
// messages carry "<path>:<line>:" positions where the offending token can be
// located in the file.
ExperimentSpec load_config(const std::string& path);

// Fully populated specs for the shipped reference studies.
ExperimentSpec preset(const std::string& figure_id);
std::vector<std::string> preset_ids();

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out_dir;
  std::optional<double> tolerance;
  std::optional<mcsim::ClusterSource> cluster_source;
};
void apply(const Overrides& overrides, ExperimentSpec& spec);

// Evaluates the analytic side, runs the simulator when requested, writes one
// CSV per curve plus <name>_summary.json under spec.out_dir, and returns the
// in-memory report. pass == (every curve's sup gap <= tolerance).
ComparisonReport run_experiment(const ExperimentSpec& spec);

// preset(figure_id) with overrides applied, then run_experiment.
ComparisonReport reproduce_figure(const std::string& figure_id,
                                  const Overrides& overrides);

// Numeric CSV helpers shared by the emitters. Values are written with nine
// significant digits; loading a written file and writing it again must give
// byte-identical output.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace coopnet::experiment
