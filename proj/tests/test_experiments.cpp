#include "nyfem/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace nyfem;

namespace {

std::string csv(const Table& t) {
  std::ostringstream out;
  t.write_csv(out);
  return out.str();
}

const Table& table(const ExperimentResult& r, const std::string& name) {
  for (const auto& t : r.tables) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("missing table " + name);
}

}  // namespace

TEST_CASE("order of convergence by mesh size") {
  const auto o = noc({1e-2, 2.5e-3}, {1.0, 0.5}, NocMode::h);
  REQUIRE(o.size() == 1);
  CHECK(o[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("order of convergence by degrees of freedom") {
  const auto o = noc({3.238e-3, 8.015e-4}, {40, 126}, NocMode::dof);
  CHECK(std::round(o[0] * 100) / 100 == doctest::Approx(1.22));
  const auto flat = noc({1e-3, 1e-3, 1e-3}, {10, 20, 40}, NocMode::dof);
  for (double x : flat) CHECK(x == 0.0);
  CHECK_THROWS_AS(noc({1.0}, {1.0}, NocMode::h), std::invalid_argument);
  CHECK_THROWS_AS(noc({1.0, 0.0}, {1.0, 2.0}, NocMode::h), std::invalid_argument);
}

TEST_CASE("configuration defaults") {
  ExperimentConfig cfg;
  cfg.experiment = "nystrom_L";
  const ExperimentConfig r = resolve_config(cfg);
  CHECK(r.n == std::vector<int>{16, 32, 64, 128, 256, 512});
  CHECK(r.p == 6);
  cfg.experiment = "interp_square";
  CHECK(resolve_config(cfg).m == std::vector<int>{1, 2, 3});
  CHECK(resolve_config(cfg).levels == 4);
  CHECK(experiment_ids().size() == 6);
}

TEST_CASE("configuration validation") {
  ExperimentConfig cfg;
  cfg.experiment = "nystrom_X";
  CHECK_THROWS_AS(resolve_config(cfg), ConfigError);
  cfg.experiment = "nystrom_sector";
  cfg.n = {1024};
  CHECK_THROWS_AS(resolve_config(cfg), ConfigError);
  cfg.large_n = true;
  CHECK_NOTHROW(resolve_config(cfg));
  cfg.n = {2};
  CHECK_THROWS_AS(resolve_config(cfg), ConfigError);
  cfg.n = {32};
  cfg.p = 1;
  CHECK_THROWS_AS(resolve_config(cfg), ConfigError);
  cfg.p = 6;
  cfg.m = {0};
  CHECK_THROWS_AS(resolve_config(cfg), ConfigError);
  cfg.m = {1};
  cfg.mesh_file = "mesh.json";
  CHECK_THROWS_AS(resolve_config(cfg), ConfigError);
}

TEST_CASE("CSV formatting") {
  Table t{"demo", {{"k", Format::integer}, {"err", Format::scientific}, {"ratio", Format::fixed}, {"name", Format::text}},
          {}};
  t.rows.push_back({7LL, 1.5e-3, 4.00101, std::string("a")});
  t.rows.push_back({8LL, Value{}, Value{}, std::string("b")});
  const std::string s = csv(t);
  std::istringstream in(s);
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "k,err,ratio,name");
  CHECK(first.rfind("7,1.5", 0) == 0);
  CHECK(first.find("e-03") != std::string::npos);
  CHECK(first.find(",4.0010") != std::string::npos);
  CHECK(second == "8,,,b");
}

TEST_CASE("Nystrom table on the L-hexagon") {
  ExperimentConfig cfg;
  cfg.experiment = "nystrom_L";
  cfg.n = {64};
  const ExperimentResult r = run_experiment(cfg);
  const Table& t = table(r, "nystrom_L");
  REQUIRE(t.rows.size() == 1);
  // Column after n is the point (0.5, 0.5).
  CHECK(t.columns[1].name.find("0.5") != std::string::npos);
  CHECK(std::get<double>(t.rows[0][1]) <= 1e-11);
}

TEST_CASE("identical configurations give identical tables") {
  ExperimentConfig cfg;
  cfg.experiment = "nystrom_sector";
  cfg.n = {16, 32};
  cfg.seed = 42;
  const ExperimentResult a = run_experiment(cfg);
  const ExperimentResult b = run_experiment(cfg);
  REQUIRE(a.tables.size() == b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) CHECK(csv(a.tables[i]) == csv(b.tables[i]));
  cfg.seed = 43;
  const ExperimentResult c = run_experiment(cfg);
  CHECK(csv(table(a, "nystrom_sector")) == csv(table(c, "nystrom_sector")));
  CHECK(csv(table(a, "nystrom_sector_sampled")) != csv(table(c, "nystrom_sector_sampled")));
}

TEST_CASE("basis dump writes one grid per basis function") {
  const auto dir = std::filesystem::temp_directory_path() / "nyfem_basis_dump_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg;
  cfg.experiment = "basis_dump";
  cfg.out_dir = dir.string();
  cfg.grid = 21;
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.pass());
  CHECK(r.files.size() == 8);
  for (const auto& f : r.files) CHECK(std::filesystem::exists(dir / f));
  write_reports(r, resolve_config(cfg), "test");
  CHECK(std::filesystem::exists(dir / "basis_dump.csv"));
  CHECK(std::filesystem::exists(dir / "basis_dump.json"));
  const std::string json = summary_json(r, resolve_config(cfg), "test");
  CHECK(json.find("\"experiment\"") != std::string::npos);
  CHECK(json.find("\"rows\"") != std::string::npos);
  CHECK(json.find("\"pass\": true") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("configuration echo") {
  ExperimentConfig cfg;
  cfg.experiment = "curved_dirichlet";
  const std::string d = describe(cfg);
  CHECK(d.find("curved_dirichlet") != std::string::npos);
  CHECK(d.find("64") != std::string::npos);
}
