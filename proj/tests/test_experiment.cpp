#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopnet/energy.hpp"
#include "coopnet/experiment.hpp"
#include "doctest.h"
#include "json.hpp"

namespace ex = coopnet::experiment;
namespace fs = std::filesystem;

#ifndef COOPNET_SOURCE_DIR
#define COOPNET_SOURCE_DIR "."
#endif

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    const auto tick =
        std::chrono::steady_clock::now().time_since_epoch().count();
    path = fs::temp_directory_path() /
           ("coopnet_exp_" + std::to_string(tick) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string write_file(const TempDir& dir, const std::string& name,
                       const std::string& body) {
  const fs::path full = dir.path / name;
  std::ofstream out(full, std::ios::binary);
  out << body;
  return full.string();
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

template <typename F>
std::string error_text(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

double idle_prob(double rho, int buffer_size, double p_ch) {
  return 1.0 - coopnet::energy::transmission_probability(
                   coopnet::energy::EnergyProfile{rho, buffer_size, p_ch, 1});
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("kind names round-trip") {
  for (const char* name :
       {"link_thm1", "link_prop1", "link_thm2", "cluster_access",
        "overall_success", "buffer_sweep", "rate_sweep", "beta_sweep",
        "figure_repro"}) {
    CHECK(ex::to_string(ex::kind_from_string(name)) == name);
  }
  CHECK_THROWS_AS(ex::kind_from_string("link_thm9"), std::domain_error);
}

TEST_CASE("minimal configuration is filled with defaults") {
  TempDir dir;
  const std::string path = write_file(
      dir, "minimal.json", R"({"kind":"link_thm2","curves":[{"omega":[1.0]}]})");
  const ex::ExperimentSpec spec = ex::load_config(path);
  CHECK(spec.kind == ex::Kind::link_thm2);
  CHECK(spec.name == "minimal");
  CHECK(spec.sim.trials == 100000);
  CHECK(spec.sim.master_seed == 1);
  CHECK(spec.q_tr == 0.0);
  CHECK(spec.tolerance == 0.02);
  CHECK(spec.with_sim);
  CHECK(spec.out_dir == "out");
  REQUIRE(spec.theta_grid.size() == 21);  // -10..30 dB in 2 dB steps
  CHECK(spec.theta_grid.front() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(spec.theta_grid.back() == doctest::Approx(1000.0).epsilon(1e-12));
  REQUIRE(spec.curves.size() == 1);
  CHECK(spec.curves[0].label == "K1");
}

TEST_CASE("configuration errors carry positions and field names") {
  TempDir dir;
  SUBCASE("unknown key with line number") {
    const std::string path = write_file(dir, "bad.json",
                                        "{\n"
                                        "  \"kind\": \"link_thm2\",\n"
                                        "  \"curves\": [{\"omega\": [1.0]}],\n"
                                        "  \"windoww\": 3\n"
                                        "}\n");
    const std::string msg = error_text([&] { ex::load_config(path); });
    CHECK(msg.find("unknown key \"windoww\"") != std::string::npos);
    CHECK(msg.find(":4:") != std::string::npos);
  }
  SUBCASE("parse error with line number") {
    const std::string path = write_file(dir, "broken.json",
                                        "{\n  \"kind\": \"link_thm2\",\n");
    const std::string msg = error_text([&] { ex::load_config(path); });
    CHECK(msg.find("broken.json:") != std::string::npos);
    CHECK(msg.find("parse error") != std::string::npos);
  }
  SUBCASE("pathloss exponent boundary") {
    const std::string path = write_file(
        dir, "eta.json",
        R"({"kind":"link_thm2","model":{"eta":2.0},"curves":[{"omega":[1.0]}]})");
    const std::string msg = error_text([&] { ex::load_config(path); });
    CHECK(msg.find("eta must exceed 2") != std::string::npos);
  }
  SUBCASE("missing kind") {
    const std::string path = write_file(dir, "nokind.json", R"({"name":"x"})");
    CHECK(error_text([&] { ex::load_config(path); }).find("kind") !=
          std::string::npos);
  }
  SUBCASE("unknown kind") {
    const std::string path =
        write_file(dir, "badkind.json", R"({"kind":"frobnicate"})");
    CHECK(error_text([&] { ex::load_config(path); })
              .find("unknown experiment kind") != std::string::npos);
  }
  SUBCASE("exclusive threshold specifications") {
    const std::string path = write_file(
        dir, "grids.json",
        R"({"kind":"link_thm2","theta_grid":[1.0],"theta_grid_db":[0.0],
            "curves":[{"omega":[1.0]}]})");
    CHECK(error_text([&] { ex::load_config(path); })
              .find("mutually exclusive") != std::string::npos);
  }
  SUBCASE("exclusive idle-probability sources") {
    const std::string path = write_file(
        dir, "qtr.json",
        R"({"kind":"link_thm2","q_tr":0.3,
            "energy":{"rho":0.75,"buffer_size":2,"charge_prob":0.8},
            "curves":[{"omega":[1.0]}]})");
    CHECK(error_text([&] { ex::load_config(path); })
              .find("mutually exclusive") != std::string::npos);
  }
  SUBCASE("exclusive noise specifications") {
    const std::string path = write_file(
        dir, "noise.json",
        R"({"kind":"link_thm2","model":{"noise":0.0,"noise_dbm":-114},
            "curves":[{"omega":[1.0]}]})");
    CHECK(error_text([&] { ex::load_config(path); })
              .find("mutually exclusive") != std::string::npos);
  }
  SUBCASE("curve without a scale profile") {
    const std::string path = write_file(
        dir, "noomega.json", R"({"kind":"link_thm2","curves":[{"label":"x"}]})");
    CHECK(error_text([&] { ex::load_config(path); }).find("omega") !=
          std::string::npos);
  }
  SUBCASE("bad simulator fields") {
    const std::string path = write_file(
        dir, "sim.json",
        R"({"kind":"link_thm2","curves":[{"omega":[1.0]}],
            "sim":{"trials":0}})");
    CHECK(error_text([&] { ex::load_config(path); }).find("trials") !=
          std::string::npos);
    const std::string path2 = write_file(
        dir, "sim2.json",
        R"({"kind":"link_thm2","curves":[{"omega":[1.0]}],
            "sim":{"cluster_source":"both"}})");
    CHECK(error_text([&] { ex::load_config(path2); })
              .find("cluster_source") != std::string::npos);
  }
  SUBCASE("missing file") {
    CHECK(error_text([&] { ex::load_config("/nonexistent/x.json"); })
              .find("cannot open") != std::string::npos);
  }
}

TEST_CASE("presets are valid and carry the reference parameters") {
  for (const std::string& id : ex::preset_ids()) {
    const ex::ExperimentSpec spec = ex::preset(id);
    CHECK(spec.name == id);
    CHECK_NOTHROW(ex::validate(spec));
  }
  CHECK_THROWS_AS(ex::preset("fig99"), std::domain_error);

  SUBCASE("averaged reference study") {
    const ex::ExperimentSpec spec = ex::preset("fig3a");
    CHECK(spec.kind == ex::Kind::link_thm2);
    CHECK(spec.q_tr == doctest::Approx(37.0 / 121.0).epsilon(1e-14));
    CHECK(spec.model.tiers.empty());
    CHECK(spec.model.noise == 0.0);
    CHECK(spec.tolerance == 0.015);
    CHECK(spec.sim.trials == 100000);
    REQUIRE(spec.curves.size() == 2);
    CHECK(spec.curves[0].omega == std::vector<double>{1.0});
    CHECK(spec.curves[1].omega == std::vector<double>{0.5, 1.0});
  }
  SUBCASE("conditioned reference study") {
    const ex::ExperimentSpec spec = ex::preset("fig2");
    REQUIRE(spec.curves.size() == 4);
    CHECK(spec.curves[3].distances == std::vector<double>{5, 10, 10, 10});
    CHECK(spec.curves[0].availability[0] ==
          doctest::Approx(idle_prob(0.4, 2, 0.7)).epsilon(1e-15));
    CHECK(spec.model.out_cluster_tx_prob ==
          doctest::Approx(1.0 - idle_prob(0.55, 2, 0.7)).epsilon(1e-15));
    CHECK(spec.model.noise == doctest::Approx(3.9810717055349695e-15));
    REQUIRE(spec.model.tiers.size() == 1);
    CHECK(spec.model.tiers[0].power == 2.0);
  }
  SUBCASE("sweep studies") {
    CHECK(ex::preset("fig4a").buffer_grid.size() == 7);
    CHECK(ex::preset("fig4b").curves.size() == 12);
    CHECK_FALSE(ex::preset("fig6").with_sim);
    CHECK(ex::preset("fig6").beta_grid.size() == 30);
    CHECK(ex::preset("fig5").tolerance == 0.03);
    CHECK(ex::preset("fig5").q_tr == 0.0);
  }
}

TEST_CASE("shipped config files mirror the presets") {
  const std::string base = std::string(COOPNET_SOURCE_DIR) + "/configs/";
  for (const std::string& id : ex::preset_ids()) {
    const ex::ExperimentSpec loaded = ex::load_config(base + id + ".json");
    const ex::ExperimentSpec built = ex::preset(id);
    CHECK(loaded.kind == built.kind);
    CHECK(loaded.name == built.name);
    CHECK(loaded.curves.size() == built.curves.size());
  }
  SUBCASE("field-level agreement for the averaged study") {
    const ex::ExperimentSpec loaded = ex::load_config(base + "fig3a.json");
    const ex::ExperimentSpec built = ex::preset("fig3a");
    CHECK(loaded.q_tr == built.q_tr);
    CHECK(loaded.tolerance == built.tolerance);
    CHECK(loaded.sim.trials == built.sim.trials);
    CHECK(loaded.sim.master_seed == built.sim.master_seed);
    REQUIRE(loaded.theta_grid.size() == built.theta_grid.size());
    for (std::size_t i = 0; i < built.theta_grid.size(); ++i) {
      CHECK(loaded.theta_grid[i] == built.theta_grid[i]);
    }
    for (std::size_t c = 0; c < built.curves.size(); ++c) {
      CHECK(loaded.curves[c].label == built.curves[c].label);
      CHECK(loaded.curves[c].omega == built.curves[c].omega);
    }
  }
  SUBCASE("field-level agreement for the conditioned study") {
    const ex::ExperimentSpec loaded = ex::load_config(base + "fig2.json");
    const ex::ExperimentSpec built = ex::preset("fig2");
    CHECK(loaded.model.noise ==
          doctest::Approx(built.model.noise).epsilon(1e-12));
    CHECK(loaded.model.out_cluster_tx_prob == built.model.out_cluster_tx_prob);
    for (std::size_t c = 0; c < built.curves.size(); ++c) {
      CHECK(loaded.curves[c].distances == built.curves[c].distances);
      REQUIRE(loaded.curves[c].availability.size() ==
              built.curves[c].availability.size());
      for (std::size_t i = 0; i < built.curves[c].availability.size(); ++i) {
        CHECK(loaded.curves[c].availability[i] ==
              built.curves[c].availability[i]);
      }
    }
  }
}

TEST_CASE("spec validation rejects structural mistakes") {
  ex::ExperimentSpec spec = ex::preset("fig3a");
  spec.tolerance = -1.0;
  CHECK_THROWS_AS(ex::validate(spec), std::domain_error);

  spec = ex::preset("fig3a");
  spec.curves[0].omega.clear();
  CHECK_THROWS_AS(ex::validate(spec), std::domain_error);

  spec = ex::preset("fig3a");
  spec.theta_grid = {1.0, 0.5};
  CHECK_THROWS_AS(ex::validate(spec), std::domain_error);

  spec = ex::preset("fig5");
  spec.beta_grid = {2.0, 1.0};
  CHECK_THROWS_AS(ex::validate(spec), std::domain_error);

  spec = ex::preset("fig4b");
  spec.curves[0].buffer_size = 0;
  CHECK_THROWS_AS(ex::validate(spec), std::domain_error);

  spec = ex::preset("fig4a");
  spec.rho = 0.9;
  spec.charge_prob = 0.0;
  CHECK_THROWS_AS(ex::validate(spec), std::domain_error);
}

TEST_CASE("csv output round-trips byte-identically") {
  TempDir dir;
  ex::CsvTable table;
  table.header = {"x", "value"};
  table.rows = {{1.0 / 3.0, 1e-14},
                {0.1 + 0.2, 123456789.123},
                {1e30, 0.0},
                {7.0, -2.5e-7}};
  const std::string first = (dir.path / "a.csv").string();
  const std::string second = (dir.path / "b.csv").string();
  ex::write_csv(first, table);
  ex::write_csv(second, ex::read_csv(first));
  CHECK(read_bytes(first) == read_bytes(second));
  CHECK(read_bytes(first).find("x,value\n") == 0);

  SUBCASE("reader rejects malformed input") {
    CHECK_THROWS_AS(ex::read_csv((dir.path / "missing.csv").string()),
                    std::runtime_error);
    const std::string bad =
        write_file(dir, "bad.csv", "a,b\n1.0,banana\n");
    CHECK_THROWS_AS(ex::read_csv(bad), std::runtime_error);
    const std::string ragged =
        write_file(dir, "ragged.csv", "a,b\n1.0\n");
    CHECK_THROWS_AS(ex::read_csv(ragged), std::runtime_error);
  }
}

TEST_CASE("analytic-only sweeps run end to end") {
  TempDir dir;
  SUBCASE("buffer sweep with its outage floor") {
    ex::ExperimentSpec spec = ex::preset("fig4a");
    spec.out_dir = dir.path.string();
    const ex::ComparisonReport report = ex::run_experiment(spec);
    CHECK(report.pass);
    CHECK(report.wall_seconds >= 0.0);
    CHECK(fs::exists(dir.path / "fig4a_summary.json"));

    const ex::CsvTable k3 = ex::read_csv((dir.path / "fig4a_K3.csv").string());
    CHECK(k3.header == std::vector<std::string>{"buffer_size", "outage", "floor"});
    REQUIRE(k3.rows.size() == 7);
    for (std::size_t i = 0; i < k3.rows.size(); ++i) {
      const int s = static_cast<int>(k3.rows[i][0]);
      const double direct = std::pow(idle_prob(0.75, s, 0.8), 3);
      CHECK(k3.rows[i][1] == doctest::Approx(direct).epsilon(1e-8));
      CHECK(k3.rows[i][2] == doctest::Approx(std::pow(0.25, 3)).epsilon(1e-8));
      if (i > 0) {
        CHECK(k3.rows[i][1] < k3.rows[i - 1][1]);  // deeper buffer, less outage
      }
    }
    const nlohmann::json summary = nlohmann::json::parse(
        read_bytes((dir.path / "fig4a_summary.json").string()));
    CHECK(summary.at("kind") == "buffer_sweep");
    CHECK(summary.at("pass") == true);
    CHECK(summary.at("curves").size() == 3);
  }
  SUBCASE("density-ratio sweep reports the best cluster size") {
    ex::ExperimentSpec spec = ex::preset("fig6");
    spec.out_dir = dir.path.string();
    const ex::ComparisonReport report = ex::run_experiment(spec);
    REQUIRE(report.argmax_cluster_size.size() == spec.beta_grid.size());
    for (std::size_t i = 0; i < report.argmax_cluster_size.size(); ++i) {
      CHECK(report.argmax_cluster_size[i] >= 1);
      CHECK(report.argmax_cluster_size[i] <= 6);
      if (i > 0) {
        CHECK(report.argmax_cluster_size[i] >=
              report.argmax_cluster_size[i - 1]);
      }
    }
    const nlohmann::json summary = nlohmann::json::parse(
        read_bytes((dir.path / "fig6_summary.json").string()));
    CHECK(summary.contains("argmax_cluster_size"));
  }
}

TEST_CASE("comparison experiment runs end to end") {
  TempDir dir;
  ex::ExperimentSpec spec;
  spec.kind = ex::Kind::link_thm2;
  spec.name = "smoke";
  spec.model.tx_intensity = 0.01;
  spec.model.rx_intensity = 0.01;
  spec.model.eta = 4.0;
  spec.model.noise = 0.0;
  spec.q_tr = 37.0 / 121.0;
  spec.theta_grid = {0.5, 1.0, 2.0};
  spec.sim.trials = 4000;
  spec.sim.master_seed = 9;
  spec.tolerance = 0.05;
  spec.out_dir = dir.path.string();
  ex::CurveSpec curve;
  curve.label = "K2";
  curve.omega = {0.5, 1.0};
  spec.curves.push_back(curve);

  const ex::ComparisonReport report = ex::run_experiment(spec);
  REQUIRE(report.curves.size() == 1);
  const ex::CurveReport& r = report.curves[0];
  CHECK(r.csv_path == "smoke_K2.csv");
  CHECK(report.pass);
  CHECK(r.sup_gap <= 0.05);
  CHECK(r.frac_in_ci > 0.0);

  const std::string csv = (dir.path / r.csv_path).string();
  const ex::CsvTable table = ex::read_csv(csv);
  CHECK(table.header == std::vector<std::string>{"theta", "analytic",
                                                 "empirical", "ci_low",
                                                 "ci_high"});
  REQUIRE(table.rows.size() == 3);
  for (const auto& row : table.rows) {
    CHECK(row[3] <= row[2]);
    CHECK(row[2] <= row[4]);
  }
  // Emitted files reload and re-emit without changing a byte.
  const std::string copy = (dir.path / "copy.csv").string();
  ex::write_csv(copy, table);
  CHECK(read_bytes(csv) == read_bytes(copy));

  const nlohmann::json summary =
      nlohmann::json::parse(read_bytes((dir.path / "smoke_summary.json").string()));
  CHECK(summary.at("pass") == true);
  CHECK(summary.at("sim").at("master_seed") == 9);
  CHECK(summary.at("curves")[0].at("sup_gap").get<double>() ==
        doctest::Approx(r.sup_gap));
}

TEST_CASE("figure delegation and overrides") {
  TempDir dir;
  SUBCASE("figure_repro kind delegates to the preset") {
    ex::ExperimentSpec spec;
    spec.kind = ex::Kind::figure_repro;
    spec.figure_id = "fig4a";
    spec.out_dir = dir.path.string();
    const ex::ComparisonReport report = ex::run_experiment(spec);
    CHECK(report.name == "fig4a");
    CHECK(fs::exists(dir.path / "fig4a_K1.csv"));
  }
  SUBCASE("overrides reach the spec") {
    ex::ExperimentSpec spec = ex::preset("fig5");
    ex::Overrides overrides;
    overrides.seed = 123;
    overrides.trials = 555;
    overrides.out_dir = "elsewhere";
    overrides.tolerance = 0.5;
    overrides.cluster_source = coopnet::mcsim::ClusterSource::full_process;
    ex::apply(overrides, spec);
    CHECK(spec.sim.master_seed == 123);
    CHECK(spec.sim.trials == 555);
    CHECK(spec.out_dir == "elsewhere");
    CHECK(spec.tolerance == 0.5);
    CHECK(spec.sim.cluster_source ==
          coopnet::mcsim::ClusterSource::full_process);
  }
  SUBCASE("unknown figure id is rejected before running") {
    ex::ExperimentSpec spec;
    spec.kind = ex::Kind::figure_repro;
    spec.figure_id = "fig0";
    CHECK_THROWS_AS(ex::validate(spec), std::domain_error);
  }
}

}  // TEST_SUITE
