#include "coopnet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "coopnet/analytic.hpp"
#include "json.hpp"

namespace coopnet::experiment {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

const std::map<std::string, Kind>& kind_table() {
  static const std::map<std::string, Kind> table = {
      {"link_thm1", Kind::link_thm1},
      {"link_prop1", Kind::link_prop1},
      {"link_thm2", Kind::link_thm2},
      {"cluster_access", Kind::cluster_access},
      {"overall_success", Kind::overall_success},
      {"buffer_sweep", Kind::buffer_sweep},
      {"rate_sweep", Kind::rate_sweep},
      {"beta_sweep", Kind::beta_sweep},
      {"figure_repro", Kind::figure_repro},
  };
  return table;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += items[i];
  }
  return out;
}

// ---- configuration parsing -------------------------------------------------

struct ConfigCtx {
  std::string path;
  std::string text;
};

// Best-effort line lookup: find the first occurrence of the quoted key in the
// raw text. Good enough to point an editor at the right place.
int line_of(const ConfigCtx& ctx, const std::string& key) {
  const std::size_t pos = ctx.text.find("\"" + key + "\"");
  if (pos == std::string::npos) {
    return 0;
  }
  return 1 + static_cast<int>(std::count(ctx.text.begin(),
                                         ctx.text.begin() + pos, '\n'));
}

std::string leaf(const std::string& key) {
  const std::size_t dot = key.rfind('.');
  return dot == std::string::npos ? key : key.substr(dot + 1);
}

[[noreturn]] void fail(const ConfigCtx& ctx, const std::string& key,
                       const std::string& message) {
  std::string where = ctx.path;
  if (const int line = line_of(ctx, leaf(key))) {
    where += ":" + std::to_string(line);
  }
  throw std::runtime_error(where + ": " + message);
}

void check_keys(const ConfigCtx& ctx, const json& obj, const std::string& scope,
                const std::vector<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) ==
        allowed.end()) {
      fail(ctx, item.key(),
           "unknown key \"" + item.key() + "\" in " + scope +
               " (allowed: " + join(allowed) + ")");
    }
  }
}

double as_number(const ConfigCtx& ctx, const json& v, const std::string& key) {
  if (!v.is_number()) {
    fail(ctx, key, key + " must be a number");
  }
  return v.get<double>();
}

long long as_integer(const ConfigCtx& ctx, const json& v,
                     const std::string& key) {
  if (!v.is_number_integer()) {
    fail(ctx, key, key + " must be an integer");
  }
  return v.get<long long>();
}

bool as_bool(const ConfigCtx& ctx, const json& v, const std::string& key) {
  if (!v.is_boolean()) {
    fail(ctx, key, key + " must be a boolean");
  }
  return v.get<bool>();
}

std::string as_string(const ConfigCtx& ctx, const json& v,
                      const std::string& key) {
  if (!v.is_string()) {
    fail(ctx, key, key + " must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> as_number_array(const ConfigCtx& ctx, const json& v,
                                    const std::string& key) {
  if (!v.is_array() || v.empty()) {
    fail(ctx, key, key + " must be a non-empty array of numbers");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& item : v) {
    out.push_back(as_number(ctx, item, key));
  }
  return out;
}

std::vector<int> as_int_array(const ConfigCtx& ctx, const json& v,
                              const std::string& key) {
  if (!v.is_array() || v.empty()) {
    fail(ctx, key, key + " must be a non-empty array of integers");
  }
  std::vector<int> out;
  out.reserve(v.size());
  for (const json& item : v) {
    out.push_back(static_cast<int>(as_integer(ctx, item, key)));
  }
  return out;
}

struct EnergyBlock {
  std::optional<double> rho;
  std::optional<double> out_rho;
  std::optional<double> charge_prob;
  std::optional<int> buffer_size;
};

EnergyBlock parse_energy(const ConfigCtx& ctx, const json& root) {
  EnergyBlock block;
  if (!root.contains("energy")) {
    return block;
  }
  const json& e = root.at("energy");
  if (!e.is_object()) {
    fail(ctx, "energy", "energy must be an object");
  }
  check_keys(ctx, e, "energy", {"rho", "buffer_size", "charge_prob", "out_rho"});
  if (e.contains("rho")) {
    block.rho = as_number(ctx, e.at("rho"), "energy.rho");
  }
  if (e.contains("out_rho")) {
    block.out_rho = as_number(ctx, e.at("out_rho"), "energy.out_rho");
  }
  if (e.contains("charge_prob")) {
    block.charge_prob = as_number(ctx, e.at("charge_prob"), "energy.charge_prob");
  }
  if (e.contains("buffer_size")) {
    block.buffer_size =
        static_cast<int>(as_integer(ctx, e.at("buffer_size"), "energy.buffer_size"));
  }
  return block;
}

double idle_from_profile(const ConfigCtx& ctx, const std::string& key,
                         double rho, int buffer_size, double charge_prob) {
  try {
    return 1.0 - energy::transmission_probability(
                     energy::EnergyProfile{rho, buffer_size, charge_prob, 1});
  } catch (const std::domain_error& e) {
    fail(ctx, key, key + ": " + e.what());
  }
}

void parse_model(const ConfigCtx& ctx, const json& root, NetworkModel* model) {
  if (!root.contains("model")) {
    return;
  }
  const json& m = root.at("model");
  if (!m.is_object()) {
    fail(ctx, "model", "model must be an object");
  }
  check_keys(ctx, m, "model",
             {"tx_intensity", "rx_intensity", "eta", "noise", "noise_dbm",
              "out_cluster_tx_prob", "tiers"});
  if (m.contains("tx_intensity")) {
    model->tx_intensity = as_number(ctx, m.at("tx_intensity"), "model.tx_intensity");
  }
  if (m.contains("rx_intensity")) {
    model->rx_intensity = as_number(ctx, m.at("rx_intensity"), "model.rx_intensity");
  }
  if (m.contains("eta")) {
    model->eta = as_number(ctx, m.at("eta"), "model.eta");
    if (!(model->eta > 2.0)) {
      fail(ctx, "eta", "model.eta must exceed 2 (pathloss integrals diverge)");
    }
  }
  if (m.contains("noise") && m.contains("noise_dbm")) {
    fail(ctx, "noise", "model.noise and model.noise_dbm are mutually exclusive");
  }
  if (m.contains("noise")) {
    model->noise = as_number(ctx, m.at("noise"), "model.noise");
  }
  if (m.contains("noise_dbm")) {
    const double dbm = as_number(ctx, m.at("noise_dbm"), "model.noise_dbm");
    model->noise = std::pow(10.0, (dbm - 30.0) / 10.0);
  }
  if (m.contains("out_cluster_tx_prob")) {
    model->out_cluster_tx_prob =
        as_number(ctx, m.at("out_cluster_tx_prob"), "model.out_cluster_tx_prob");
  }
  if (m.contains("tiers")) {
    const json& tiers = m.at("tiers");
    if (!tiers.is_array()) {
      fail(ctx, "tiers", "model.tiers must be an array");
    }
    model->tiers.clear();
    for (const json& t : tiers) {
      if (!t.is_object()) {
        fail(ctx, "tiers", "model.tiers entries must be objects");
      }
      check_keys(ctx, t, "model.tiers", {"intensity", "tx_prob", "power"});
      if (!t.contains("intensity")) {
        fail(ctx, "tiers", "model.tiers entries need an intensity");
      }
      TierConfig tier;
      tier.intensity = as_number(ctx, t.at("intensity"), "model.tiers.intensity");
      if (t.contains("tx_prob")) {
        tier.tx_prob = as_number(ctx, t.at("tx_prob"), "model.tiers.tx_prob");
      }
      if (t.contains("power")) {
        tier.power = as_number(ctx, t.at("power"), "model.tiers.power");
      }
      model->tiers.push_back(tier);
    }
  }
}

void parse_sim(const ConfigCtx& ctx, const json& root, mcsim::SimConfig* sim) {
  if (!root.contains("sim")) {
    return;
  }
  const json& s = root.at("sim");
  if (!s.is_object()) {
    fail(ctx, "sim", "sim must be an object");
  }
  check_keys(ctx, s, "sim",
             {"trials", "master_seed", "window_radius", "cluster_source",
              "steady_state_indicators"});
  if (s.contains("trials")) {
    const long long trials = as_integer(ctx, s.at("trials"), "sim.trials");
    if (trials < 1) {
      fail(ctx, "trials", "sim.trials must be at least 1");
    }
    sim->trials = static_cast<std::uint64_t>(trials);
  }
  if (s.contains("master_seed")) {
    sim->master_seed = static_cast<std::uint64_t>(
        as_integer(ctx, s.at("master_seed"), "sim.master_seed"));
  }
  if (s.contains("window_radius")) {
    sim->window_radius = as_number(ctx, s.at("window_radius"), "sim.window_radius");
  }
  if (s.contains("cluster_source")) {
    const std::string mode =
        as_string(ctx, s.at("cluster_source"), "sim.cluster_source");
    if (mode == "thinned") {
      sim->cluster_source = mcsim::ClusterSource::thinned_process;
    } else if (mode == "full") {
      sim->cluster_source = mcsim::ClusterSource::full_process;
    } else {
      fail(ctx, "cluster_source",
           "sim.cluster_source must be \"thinned\" or \"full\"");
    }
  }
  if (s.contains("steady_state_indicators")) {
    sim->steady_state_indicators =
        as_bool(ctx, s.at("steady_state_indicators"), "sim.steady_state_indicators");
  }
}

std::vector<double> parse_theta_grid(const ConfigCtx& ctx, const json& root) {
  if (root.contains("theta_grid_db") && root.contains("theta_grid")) {
    fail(ctx, "theta_grid",
         "theta_grid_db and theta_grid are mutually exclusive");
  }
  std::vector<double> grid;
  if (root.contains("theta_grid_db")) {
    const json& g = root.at("theta_grid_db");
    if (g.is_object()) {
      check_keys(ctx, g, "theta_grid_db", {"from", "to", "step"});
      for (const char* req : {"from", "to", "step"}) {
        if (!g.contains(req)) {
          fail(ctx, "theta_grid_db",
               std::string("theta_grid_db needs ") + req);
        }
      }
      const double from = as_number(ctx, g.at("from"), "theta_grid_db.from");
      const double to = as_number(ctx, g.at("to"), "theta_grid_db.to");
      const double step = as_number(ctx, g.at("step"), "theta_grid_db.step");
      if (!(step > 0.0)) {
        fail(ctx, "step", "theta_grid_db.step must be positive");
      }
      if (from > to) {
        fail(ctx, "from", "theta_grid_db.from must not exceed .to");
      }
      for (double db = from; db <= to + 1e-9; db += step) {
        grid.push_back(std::pow(10.0, db / 10.0));
      }
    } else {
      for (double db : as_number_array(ctx, g, "theta_grid_db")) {
        grid.push_back(std::pow(10.0, db / 10.0));
      }
    }
  } else if (root.contains("theta_grid")) {
    grid = as_number_array(ctx, root.at("theta_grid"), "theta_grid");
  } else {
    for (double db = -10.0; db <= 30.0 + 1e-9; db += 2.0) {
      grid.push_back(std::pow(10.0, db / 10.0));
    }
  }
  return grid;
}

// Resolves the common idle probability: an explicit q_tr, or the complement
// of the stationary transmit probability of the given harvesting profile.
double parse_q_tr(const ConfigCtx& ctx, const json& root,
                  const EnergyBlock& energy) {
  if (root.contains("q_tr") && energy.rho) {
    fail(ctx, "q_tr", "q_tr and energy.rho are mutually exclusive");
  }
  if (root.contains("q_tr")) {
    const double q = as_number(ctx, root.at("q_tr"), "q_tr");
    if (!(q >= 0.0 && q < 1.0)) {
      fail(ctx, "q_tr", "q_tr must lie in [0, 1)");
    }
    return q;
  }
  if (energy.rho) {
    if (!energy.buffer_size || !energy.charge_prob) {
      fail(ctx, "energy",
           "energy.rho needs energy.buffer_size and energy.charge_prob");
    }
    return idle_from_profile(ctx, "energy.rho", *energy.rho,
                             *energy.buffer_size, *energy.charge_prob);
  }
  return 0.0;
}

void parse_conditioned_curves(const ConfigCtx& ctx, const json& root,
                              const EnergyBlock& energy, ExperimentSpec* spec) {
  if (!root.contains("curves")) {
    fail(ctx, "curves", "conditioned link experiments need a curves array");
  }
  const json& curves = root.at("curves");
  if (!curves.is_array() || curves.empty()) {
    fail(ctx, "curves", "curves must be a non-empty array");
  }
  for (const json& cj : curves) {
    if (!cj.is_object()) {
      fail(ctx, "curves", "curves entries must be objects");
    }
    check_keys(ctx, cj, "curves", {"label", "distances", "availability", "rho_list"});
    CurveSpec curve;
    if (!cj.contains("distances")) {
      fail(ctx, "distances", "each curve needs distances");
    }
    curve.distances = as_number_array(ctx, cj.at("distances"), "curves.distances");
    if (cj.contains("availability") && cj.contains("rho_list")) {
      fail(ctx, "availability",
           "curves.availability and curves.rho_list are mutually exclusive");
    }
    if (cj.contains("availability")) {
      curve.availability =
          as_number_array(ctx, cj.at("availability"), "curves.availability");
    } else if (cj.contains("rho_list")) {
      if (!energy.buffer_size || !energy.charge_prob) {
        fail(ctx, "rho_list",
             "curves.rho_list needs energy.buffer_size and energy.charge_prob");
      }
      for (double rho :
           as_number_array(ctx, cj.at("rho_list"), "curves.rho_list")) {
        curve.availability.push_back(idle_from_profile(
            ctx, "curves.rho_list", rho, *energy.buffer_size, *energy.charge_prob));
      }
    } else {
      fail(ctx, "curves", "each curve needs availability or rho_list");
    }
    curve.label = cj.contains("label")
                      ? as_string(ctx, cj.at("label"), "curves.label")
                      : "K" + std::to_string(curve.distances.size());
    spec->curves.push_back(std::move(curve));
  }
}

void parse_averaged_curves(const ConfigCtx& ctx, const json& root,
                           ExperimentSpec* spec) {
  if (!root.contains("curves")) {
    fail(ctx, "curves", "averaged link experiments need a curves array");
  }
  const json& curves = root.at("curves");
  if (!curves.is_array() || curves.empty()) {
    fail(ctx, "curves", "curves must be a non-empty array");
  }
  for (const json& cj : curves) {
    if (!cj.is_object()) {
      fail(ctx, "curves", "curves entries must be objects");
    }
    check_keys(ctx, cj, "curves", {"label", "omega"});
    if (!cj.contains("omega")) {
      fail(ctx, "omega", "each curve needs omega");
    }
    CurveSpec curve;
    curve.omega = as_number_array(ctx, cj.at("omega"), "curves.omega");
    curve.label = cj.contains("label")
                      ? as_string(ctx, cj.at("label"), "curves.label")
                      : "K" + std::to_string(curve.omega.size());
    spec->curves.push_back(std::move(curve));
  }
}

void parse_cluster_size_curves(const ConfigCtx& ctx, const json& root,
                               ExperimentSpec* spec) {
  if (!root.contains("cluster_sizes")) {
    fail(ctx, "cluster_sizes", "this experiment kind needs cluster_sizes");
  }
  for (int k : as_int_array(ctx, root.at("cluster_sizes"), "cluster_sizes")) {
    CurveSpec curve;
    curve.cluster_size = k;
    curve.label = "K" + std::to_string(k);
    spec->curves.push_back(std::move(curve));
  }
}

}  // namespace

Kind kind_from_string(const std::string& text) {
  const auto it = kind_table().find(text);
  if (it == kind_table().end()) {
    std::vector<std::string> names;
    for (const auto& [name, kind] : kind_table()) {
      (void)kind;
      names.push_back(name);
    }
    throw std::domain_error("unknown experiment kind \"" + text +
                            "\" (expected one of: " + join(names) + ")");
  }
  return it->second;
}

std::string to_string(Kind kind) {
  for (const auto& [name, value] : kind_table()) {
    if (value == kind) {
      return name;
    }
  }
  return "unknown";
}

void validate(const ExperimentSpec& spec) {
  if (spec.name.empty()) {
    throw std::domain_error("experiment name must not be empty");
  }
  if (!(spec.tolerance > 0.0)) {
    throw std::domain_error("tolerance must be positive");
  }
  if (spec.out_dir.empty()) {
    throw std::domain_error("out_dir must not be empty");
  }
  if (spec.kind == Kind::figure_repro) {
    preset(spec.figure_id);  // throws on an unknown id
    return;
  }
  coopnet::validate(spec.model);
  mcsim::validate(spec.sim);

  const bool theta_kind =
      spec.kind == Kind::link_thm1 || spec.kind == Kind::link_prop1 ||
      spec.kind == Kind::link_thm2 || spec.kind == Kind::overall_success;
  if (theta_kind) {
    if (spec.theta_grid.empty()) {
      throw std::domain_error("theta_grid must not be empty");
    }
    for (std::size_t i = 0; i < spec.theta_grid.size(); ++i) {
      if (!(spec.theta_grid[i] >= 0.0) ||
          (i > 0 && spec.theta_grid[i] <= spec.theta_grid[i - 1])) {
        throw std::domain_error(
            "theta_grid must be non-negative and strictly ascending");
      }
    }
  }
  if (spec.curves.empty()) {
    throw std::domain_error("experiment needs at least one curve");
  }

  switch (spec.kind) {
    case Kind::link_thm1:
    case Kind::link_prop1:
      for (const CurveSpec& c : spec.curves) {
        if (c.distances.empty()) {
          throw std::domain_error("curve \"" + c.label + "\": distances empty");
        }
        if (c.availability.size() != c.distances.size()) {
          throw std::domain_error(
              "curve \"" + c.label +
              "\": availability must match distances in length");
        }
        for (double q : c.availability) {
          if (!(q >= 0.0 && q <= 1.0)) {
            throw std::domain_error("curve \"" + c.label +
                                    "\": availability entries must lie in [0, 1]");
          }
        }
      }
      break;
    case Kind::link_thm2:
    case Kind::overall_success:
      if (!(spec.q_tr >= 0.0 && spec.q_tr < 1.0)) {
        throw std::domain_error("q_tr must lie in [0, 1)");
      }
      for (const CurveSpec& c : spec.curves) {
        if (c.omega.empty()) {
          throw std::domain_error("curve \"" + c.label + "\": omega empty");
        }
      }
      break;
    case Kind::cluster_access:
    case Kind::beta_sweep:
      if (!(spec.q_tr >= 0.0 && spec.q_tr < 1.0)) {
        throw std::domain_error("q_tr must lie in [0, 1)");
      }
      if (spec.beta_grid.empty()) {
        throw std::domain_error("beta_grid must not be empty");
      }
      for (std::size_t i = 0; i < spec.beta_grid.size(); ++i) {
        if (!(spec.beta_grid[i] > 0.0) ||
            (i > 0 && spec.beta_grid[i] <= spec.beta_grid[i - 1])) {
          throw std::domain_error(
              "beta_grid must be positive and strictly ascending");
        }
      }
      for (const CurveSpec& c : spec.curves) {
        if (c.cluster_size < 1) {
          throw std::domain_error("cluster sizes must be at least 1");
        }
      }
      break;
    case Kind::buffer_sweep:
      if (spec.buffer_grid.empty()) {
        throw std::domain_error("buffer_grid must not be empty");
      }
      for (std::size_t i = 0; i < spec.buffer_grid.size(); ++i) {
        if (spec.buffer_grid[i] < 1 ||
            (i > 0 && spec.buffer_grid[i] <= spec.buffer_grid[i - 1])) {
          throw std::domain_error(
              "buffer_grid must contain ascending sizes of at least 1");
        }
      }
      if (!(spec.rho > 0.0 && spec.rho <= 1.0)) {
        throw std::domain_error("buffer sweeps need rho in (0, 1]");
      }
      if (!(spec.charge_prob > 0.0 && spec.charge_prob <= 1.0)) {
        throw std::domain_error("buffer sweeps need charge_prob in (0, 1]");
      }
      for (const CurveSpec& c : spec.curves) {
        if (c.cluster_size < 1) {
          throw std::domain_error("cluster sizes must be at least 1");
        }
      }
      break;
    case Kind::rate_sweep:
      if (spec.rho_grid.empty()) {
        throw std::domain_error("rho_grid must not be empty");
      }
      for (std::size_t i = 0; i < spec.rho_grid.size(); ++i) {
        if (!(spec.rho_grid[i] > 0.0 && spec.rho_grid[i] <= 1.0) ||
            (i > 0 && spec.rho_grid[i] <= spec.rho_grid[i - 1])) {
          throw std::domain_error(
              "rho_grid must be strictly ascending within (0, 1]");
        }
      }
      if (!(spec.charge_prob > 0.0 && spec.charge_prob <= 1.0)) {
        throw std::domain_error("rate sweeps need charge_prob in (0, 1]");
      }
      for (const CurveSpec& c : spec.curves) {
        if (c.cluster_size < 1 || c.buffer_size < 1) {
          throw std::domain_error(
              "rate-sweep curves need cluster_size and buffer_size of at least 1");
        }
      }
      break;
    case Kind::figure_repro:
      break;  // handled above
  }
}

ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error(path + ": cannot open configuration file");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const ConfigCtx ctx{path, buffer.str()};

  json root;
  try {
    root = json::parse(ctx.text);
  } catch (const json::parse_error& e) {
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    byte = std::min(byte, ctx.text.size());
    const int line = 1 + static_cast<int>(std::count(
                             ctx.text.begin(), ctx.text.begin() + byte, '\n'));
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + e.what());
  }
  if (!root.is_object()) {
    throw std::runtime_error(path + ": top level must be a JSON object");
  }
  if (!root.contains("kind")) {
    throw std::runtime_error(path + ": missing required key \"kind\"");
  }

  ExperimentSpec spec;
  try {
    spec.kind = kind_from_string(as_string(ctx, root.at("kind"), "kind"));
  } catch (const std::domain_error& e) {
    fail(ctx, "kind", e.what());
  }
  spec.sim.trials = 100000;  // experiment-level default

  std::vector<std::string> allowed = {"kind",    "name",     "model", "sim",
                                      "tolerance", "with_sim", "out_dir"};
  switch (spec.kind) {
    case Kind::link_thm1:
    case Kind::link_prop1:
      allowed.insert(allowed.end(),
                     {"theta_grid_db", "theta_grid", "curves", "energy"});
      break;
    case Kind::link_thm2:
    case Kind::overall_success:
      allowed.insert(allowed.end(),
                     {"theta_grid_db", "theta_grid", "curves", "energy", "q_tr"});
      break;
    case Kind::cluster_access:
    case Kind::beta_sweep:
      allowed.insert(allowed.end(),
                     {"beta_grid", "cluster_sizes", "energy", "q_tr"});
      break;
    case Kind::buffer_sweep:
      allowed.insert(allowed.end(), {"buffer_grid", "cluster_sizes", "energy"});
      break;
    case Kind::rate_sweep:
      allowed.insert(allowed.end(),
                     {"rho_grid", "buffer_grid", "cluster_sizes", "energy"});
      break;
    case Kind::figure_repro:
      allowed = {"kind", "figure", "out_dir"};
      break;
  }
  check_keys(ctx, root, "configuration", allowed);

  spec.name = root.contains("name")
                  ? as_string(ctx, root.at("name"), "name")
                  : fs::path(path).stem().string();
  if (root.contains("out_dir")) {
    spec.out_dir = as_string(ctx, root.at("out_dir"), "out_dir");
  }
  if (root.contains("tolerance")) {
    spec.tolerance = as_number(ctx, root.at("tolerance"), "tolerance");
  }
  spec.with_sim = spec.kind != Kind::buffer_sweep &&
                  spec.kind != Kind::rate_sweep && spec.kind != Kind::beta_sweep;
  if (root.contains("with_sim")) {
    spec.with_sim = as_bool(ctx, root.at("with_sim"), "with_sim");
  }

  if (spec.kind == Kind::figure_repro) {
    if (!root.contains("figure")) {
      fail(ctx, "figure", "figure_repro needs a figure id");
    }
    spec.figure_id = as_string(ctx, root.at("figure"), "figure");
    try {
      validate(spec);
    } catch (const std::domain_error& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
    return spec;
  }

  parse_model(ctx, root, &spec.model);
  parse_sim(ctx, root, &spec.sim);
  const EnergyBlock energy = parse_energy(ctx, root);

  switch (spec.kind) {
    case Kind::link_thm1:
    case Kind::link_prop1:
      spec.theta_grid = parse_theta_grid(ctx, root);
      parse_conditioned_curves(ctx, root, energy, &spec);
      if (energy.out_rho) {
        if (!energy.buffer_size || !energy.charge_prob) {
          fail(ctx, "out_rho",
               "energy.out_rho needs energy.buffer_size and energy.charge_prob");
        }
        spec.model.out_cluster_tx_prob =
            1.0 - idle_from_profile(ctx, "energy.out_rho", *energy.out_rho,
                                    *energy.buffer_size, *energy.charge_prob);
      }
      break;
    case Kind::link_thm2:
    case Kind::overall_success:
      spec.theta_grid = parse_theta_grid(ctx, root);
      spec.q_tr = parse_q_tr(ctx, root, energy);
      parse_averaged_curves(ctx, root, &spec);
      break;
    case Kind::cluster_access:
    case Kind::beta_sweep:
      if (!root.contains("beta_grid")) {
        fail(ctx, "beta_grid", "this experiment kind needs a beta_grid");
      }
      spec.beta_grid = as_number_array(ctx, root.at("beta_grid"), "beta_grid");
      spec.q_tr = parse_q_tr(ctx, root, energy);
      parse_cluster_size_curves(ctx, root, &spec);
      break;
    case Kind::buffer_sweep: {
      if (!root.contains("buffer_grid")) {
        fail(ctx, "buffer_grid", "buffer sweeps need a buffer_grid");
      }
      for (int s : as_int_array(ctx, root.at("buffer_grid"), "buffer_grid")) {
        spec.buffer_grid.push_back(s);
      }
      if (!energy.rho || !energy.charge_prob) {
        fail(ctx, "energy", "buffer sweeps need energy.rho and energy.charge_prob");
      }
      spec.rho = *energy.rho;
      spec.charge_prob = *energy.charge_prob;
      parse_cluster_size_curves(ctx, root, &spec);
      break;
    }
    case Kind::rate_sweep: {
      if (!root.contains("rho_grid")) {
        fail(ctx, "rho_grid", "rate sweeps need a rho_grid");
      }
      spec.rho_grid = as_number_array(ctx, root.at("rho_grid"), "rho_grid");
      if (!root.contains("buffer_grid")) {
        fail(ctx, "buffer_grid", "rate sweeps need a buffer_grid");
      }
      for (int s : as_int_array(ctx, root.at("buffer_grid"), "buffer_grid")) {
        spec.buffer_grid.push_back(s);
      }
      if (!energy.charge_prob) {
        fail(ctx, "energy", "rate sweeps need energy.charge_prob");
      }
      spec.charge_prob = *energy.charge_prob;
      if (!root.contains("cluster_sizes")) {
        fail(ctx, "cluster_sizes", "rate sweeps need cluster_sizes");
      }
      const std::vector<int> sizes =
          as_int_array(ctx, root.at("cluster_sizes"), "cluster_sizes");
      for (int s : spec.buffer_grid) {
        for (int k : sizes) {
          CurveSpec curve;
          curve.buffer_size = s;
          curve.cluster_size = k;
          curve.label = "S" + std::to_string(s) + "_K" + std::to_string(k);
          spec.curves.push_back(std::move(curve));
        }
      }
      break;
    }
    case Kind::figure_repro:
      break;  // unreachable
  }

  try {
    validate(spec);
  } catch (const std::domain_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return spec;
}

void apply(const Overrides& overrides, ExperimentSpec& spec) {
  if (overrides.seed) {
    spec.sim.master_seed = *overrides.seed;
  }
  if (overrides.trials) {
    spec.sim.trials = *overrides.trials;
  }
  if (overrides.out_dir) {
    spec.out_dir = *overrides.out_dir;
  }
  if (overrides.tolerance) {
    spec.tolerance = *overrides.tolerance;
  }
  if (overrides.cluster_source) {
    spec.sim.cluster_source = *overrides.cluster_source;
  }
}

// ---- CSV emission ----------------------------------------------------------

namespace {

std::string format9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

}  // namespace

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) {
      out << ',';
    }
    out << table.header[i];
  }
  out << '\n';
  for (const std::vector<double>& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) {
        out << ',';
      }
      out << format9(row[i]);
    }
    out << '\n';
  }
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error(path + ": cannot open");
  }
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file");
  }
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw std::runtime_error(path + ": row width does not match header");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const std::string& cell : cells) {
      char* end = nullptr;
      const double value = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw std::runtime_error(path + ": non-numeric cell \"" + cell + "\"");
      }
      row.push_back(value);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---- experiment execution --------------------------------------------------

namespace {

// Fills gap statistics, writes the curve's CSV, and records its file name.
void finish_curve(const ExperimentSpec& spec, const std::string& x_name,
                  CurveReport* r) {
  if (!r->empirical.empty()) {
    double gap = 0.0;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < r->analytic.size(); ++i) {
      gap = std::max(gap, std::fabs(r->analytic[i] - r->empirical[i]));
      if (r->analytic[i] >= r->ci_low[i] && r->analytic[i] <= r->ci_high[i]) {
        ++inside;
      }
    }
    r->sup_gap = gap;
    r->frac_in_ci = static_cast<double>(inside) /
                    static_cast<double>(r->analytic.size());
  }
  r->pass = r->sup_gap <= spec.tolerance;

  CsvTable table;
  table.header = {x_name, "analytic"};
  if (!r->empirical.empty()) {
    table.header.insert(table.header.end(), {"empirical", "ci_low", "ci_high"});
  }
  for (std::size_t i = 0; i < r->x.size(); ++i) {
    std::vector<double> row = {r->x[i], r->analytic[i]};
    if (!r->empirical.empty()) {
      row.insert(row.end(), {r->empirical[i], r->ci_low[i], r->ci_high[i]});
    }
    table.rows.push_back(std::move(row));
  }
  r->csv_path = spec.name + "_" + r->label + ".csv";
  write_csv((fs::path(spec.out_dir) / r->csv_path).string(), table);
}

void run_conditioned(const ExperimentSpec& spec, ComparisonReport* report) {
  for (const CurveSpec& c : spec.curves) {
    const geometry::ClusterGeometry geom{c.distances, spec.model.eta};
    NetworkModel model = spec.model;
    model.in_cluster = geometry::InClusterAvailability{c.availability};

    CurveReport r;
    r.label = c.label;
    r.x = spec.theta_grid;
    for (double theta : spec.theta_grid) {
      if (spec.kind == Kind::link_thm1) {
        bool clamped = false;
        r.analytic.push_back(
            analytic::link_ccdf_theorem1(model, geom, theta, &clamped));
        if (clamped) {
          ++r.clamped_points;
        }
      } else {
        r.analytic.push_back(analytic::link_ccdf_prop1(model, geom, theta));
      }
    }
    if (spec.with_sim) {
      mcsim::SimConfig cfg = spec.sim;
      cfg.theta_grid = spec.theta_grid;
      const mcsim::EmpiricalEstimate est =
          mcsim::simulate_link_ccdf(model, geom, cfg);
      r.empirical = est.success_freq;
      r.ci_low = est.ci_low;
      r.ci_high = est.ci_high;
    }
    finish_curve(spec, "theta", &r);
    report->curves.push_back(std::move(r));
  }
}

void run_averaged(const ExperimentSpec& spec, ComparisonReport* report) {
  for (const CurveSpec& c : spec.curves) {
    CurveReport r;
    r.label = c.label;
    r.x = spec.theta_grid;
    for (double theta : spec.theta_grid) {
      r.analytic.push_back(
          spec.kind == Kind::link_thm2
              ? analytic::link_ccdf_theorem2(spec.model, c.omega, spec.q_tr, theta)
              : analytic::overall_success_theorem3(spec.model, c.omega,
                                                   spec.q_tr, theta));
    }
    if (spec.with_sim) {
      mcsim::SimConfig cfg = spec.sim;
      cfg.theta_grid = spec.theta_grid;
      const mcsim::EmpiricalEstimate est =
          spec.kind == Kind::link_thm2
              ? mcsim::simulate_link_ccdf_normalized(spec.model, c.omega,
                                                     spec.q_tr, cfg)
              : mcsim::simulate_overall_success(spec.model, c.omega, spec.q_tr,
                                                cfg);
      r.empirical = est.success_freq;
      r.ci_low = est.ci_low;
      r.ci_high = est.ci_high;
    }
    finish_curve(spec, "theta", &r);
    report->curves.push_back(std::move(r));
  }
}

void run_access(const ExperimentSpec& spec, ComparisonReport* report) {
  for (const CurveSpec& c : spec.curves) {
    CurveReport r;
    r.label = c.label;
    r.x = spec.beta_grid;
    for (double beta : spec.beta_grid) {
      r.analytic.push_back(analytic::cluster_access_approx(c.cluster_size, beta));
    }
    if (spec.with_sim) {
      for (double beta : spec.beta_grid) {
        NetworkModel model = spec.model;
        // beta is the effective density ratio: active transmitters per user.
        model.tx_intensity =
            beta * spec.model.rx_intensity / (1.0 - spec.q_tr);
        const mcsim::ProbabilityEstimate est = mcsim::simulate_cluster_access(
            model, c.cluster_size, spec.q_tr, spec.sim);
        r.empirical.push_back(est.freq);
        r.ci_low.push_back(est.ci_low);
        r.ci_high.push_back(est.ci_high);
      }
    }
    finish_curve(spec, "beta", &r);
    report->curves.push_back(std::move(r));
  }
}

void run_buffer_sweep(const ExperimentSpec& spec, ComparisonReport* report) {
  for (const CurveSpec& c : spec.curves) {
    CurveReport r;
    r.label = c.label;
    CsvTable table;
    table.header = {"buffer_size", "outage", "floor"};
    for (int s : spec.buffer_grid) {
      const energy::EnergyProfile profile{spec.rho, s, spec.charge_prob, 1};
      const double idle = 1.0 - energy::transmission_probability(profile);
      const double outage = std::pow(idle, c.cluster_size);
      const double floor = std::pow(
          1.0 - energy::infinite_buffer_limit(profile), c.cluster_size);
      r.x.push_back(static_cast<double>(s));
      r.analytic.push_back(outage);
      r.extra.push_back(floor);
      table.rows.push_back({static_cast<double>(s), outage, floor});
    }
    r.csv_path = spec.name + "_" + r.label + ".csv";
    write_csv((fs::path(spec.out_dir) / r.csv_path).string(), table);
    report->curves.push_back(std::move(r));
  }
}

void run_rate_sweep(const ExperimentSpec& spec, ComparisonReport* report) {
  for (const CurveSpec& c : spec.curves) {
    CurveReport r;
    r.label = c.label;
    CsvTable table;
    table.header = {"rho", "outage"};
    for (double rho : spec.rho_grid) {
      const energy::EnergyProfile profile{rho, c.buffer_size, spec.charge_prob, 1};
      const double idle = 1.0 - energy::transmission_probability(profile);
      const double outage = std::pow(idle, c.cluster_size);
      r.x.push_back(rho);
      r.analytic.push_back(outage);
      table.rows.push_back({rho, outage});
    }
    r.csv_path = spec.name + "_" + r.label + ".csv";
    write_csv((fs::path(spec.out_dir) / r.csv_path).string(), table);
    report->curves.push_back(std::move(r));
  }
}

void run_beta_sweep(const ExperimentSpec& spec, ComparisonReport* report) {
  for (const CurveSpec& c : spec.curves) {
    CurveReport r;
    r.label = c.label;
    CsvTable table;
    table.header = {"beta", "p_suc"};
    for (double beta : spec.beta_grid) {
      const double value =
          analytic::cluster_access_approx(c.cluster_size, beta) *
          (1.0 - std::pow(spec.q_tr, c.cluster_size));
      r.x.push_back(beta);
      r.analytic.push_back(value);
      table.rows.push_back({beta, value});
    }
    r.csv_path = spec.name + "_" + r.label + ".csv";
    write_csv((fs::path(spec.out_dir) / r.csv_path).string(), table);
    report->curves.push_back(std::move(r));
  }
  for (std::size_t b = 0; b < spec.beta_grid.size(); ++b) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < report->curves.size(); ++i) {
      if (report->curves[i].analytic[b] > report->curves[best].analytic[b]) {
        best = i;
      }
    }
    report->argmax_cluster_size.push_back(spec.curves[best].cluster_size);
  }
}

void write_summary(const ExperimentSpec& spec, ComparisonReport* report) {
  ojson j;
  j["name"] = spec.name;
  j["kind"] = to_string(spec.kind);
  j["pass"] = report->pass;
  j["tolerance"] = spec.tolerance;
  j["wall_seconds"] = report->wall_seconds;
  j["with_sim"] = spec.with_sim;
  j["sim"] = {
      {"trials", spec.sim.trials},
      {"master_seed", spec.sim.master_seed},
      {"window_radius", spec.sim.window_radius},
      {"cluster_source", spec.sim.cluster_source ==
                                 mcsim::ClusterSource::thinned_process
                             ? "thinned"
                             : "full"},
      {"steady_state_indicators", spec.sim.steady_state_indicators},
  };
  ojson tiers = ojson::array();
  for (const TierConfig& t : spec.model.tiers) {
    tiers.push_back({{"intensity", t.intensity},
                     {"tx_prob", t.tx_prob},
                     {"power", t.power}});
  }
  j["model"] = {
      {"tx_intensity", spec.model.tx_intensity},
      {"rx_intensity", spec.model.rx_intensity},
      {"eta", spec.model.eta},
      {"noise", spec.model.noise},
      {"out_cluster_tx_prob", spec.model.out_cluster_tx_prob},
      {"tiers", tiers},
  };
  switch (spec.kind) {
    case Kind::link_thm1:
    case Kind::link_prop1:
      j["theta_grid"] = spec.theta_grid;
      break;
    case Kind::link_thm2:
    case Kind::overall_success:
      j["theta_grid"] = spec.theta_grid;
      j["q_tr"] = spec.q_tr;
      break;
    case Kind::cluster_access:
    case Kind::beta_sweep:
      j["beta_grid"] = spec.beta_grid;
      j["q_tr"] = spec.q_tr;
      break;
    case Kind::buffer_sweep:
      j["buffer_grid"] = spec.buffer_grid;
      j["rho"] = spec.rho;
      j["charge_prob"] = spec.charge_prob;
      break;
    case Kind::rate_sweep:
      j["rho_grid"] = spec.rho_grid;
      j["buffer_grid"] = spec.buffer_grid;
      j["charge_prob"] = spec.charge_prob;
      break;
    case Kind::figure_repro:
      break;
  }
  ojson curves = ojson::array();
  for (const CurveReport& r : report->curves) {
    curves.push_back({{"label", r.label},
                      {"csv", r.csv_path},
                      {"sup_gap", r.sup_gap},
                      {"frac_in_ci", r.frac_in_ci},
                      {"clamped_points", r.clamped_points},
                      {"pass", r.pass}});
  }
  j["curves"] = curves;
  if (!report->argmax_cluster_size.empty()) {
    j["argmax_cluster_size"] = report->argmax_cluster_size;
  }

  report->summary_path = spec.name + "_summary.json";
  const std::string full =
      (fs::path(spec.out_dir) / report->summary_path).string();
  std::ofstream out(full, std::ios::binary);
  if (!out) {
    throw std::runtime_error(full + ": cannot open for writing");
  }
  out << j.dump(2) << '\n';
}

}  // namespace

ComparisonReport run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.kind == Kind::figure_repro) {
    ExperimentSpec inner = preset(spec.figure_id);
    inner.out_dir = spec.out_dir;
    return run_experiment(inner);
  }

  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(spec.out_dir);

  ComparisonReport report;
  report.name = spec.name;
  report.kind = spec.kind;

  switch (spec.kind) {
    case Kind::link_thm1:
    case Kind::link_prop1:
      run_conditioned(spec, &report);
      break;
    case Kind::link_thm2:
    case Kind::overall_success:
      run_averaged(spec, &report);
      break;
    case Kind::cluster_access:
      run_access(spec, &report);
      break;
    case Kind::buffer_sweep:
      run_buffer_sweep(spec, &report);
      break;
    case Kind::rate_sweep:
      run_rate_sweep(spec, &report);
      break;
    case Kind::beta_sweep:
      run_beta_sweep(spec, &report);
      break;
    case Kind::figure_repro:
      break;  // handled above
  }

  report.pass = true;
  for (const CurveReport& r : report.curves) {
    report.pass = report.pass && r.pass;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  write_summary(spec, &report);
  return report;
}

ComparisonReport reproduce_figure(const std::string& figure_id,
                                  const Overrides& overrides) {
  ExperimentSpec spec = preset(figure_id);
  apply(overrides, spec);
  return run_experiment(spec);
}

}  // namespace coopnet::experiment
