#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spde/cli.hpp"
#include "spde/config.hpp"

namespace fs = std::filesystem;
using namespace spde;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spde_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args, std::string* err = nullptr) {
  std::ostringstream out, e;
  const int code = cli::run(args, out, e);
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST_CASE("key-value parsing with sections and comments") {
  const KeyValues kv = parse_key_values("# top\nrun.seed = 4\n[grid]\nnx = 31  # inline\nnt=10\n\n[model]\npreset = burgers\n");
  CHECK(kv.at("run.seed") == "4");
  CHECK(kv.at("grid.nx") == "31");
  CHECK(kv.at("grid.nt") == "10");
  CHECK(kv.at("model.preset") == "burgers");
  CHECK_THROWS_AS(parse_key_values("nx 31\n"), ValidationError);
  CHECK_THROWS_AS(parse_key_values("[grid\n"), ValidationError);
  CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n"), ValidationError);
}

TEST_CASE("config keys are validated") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.apply({{"grid.nz", "3"}}), ValidationError);
  CHECK_THROWS_AS(cfg.apply({{"grid.nx", "3.5"}}), ValidationError);
  CHECK_THROWS_AS(cfg.apply({{"mc.method", "fancy"}}), ValidationError);
  CHECK_THROWS_AS(cfg.apply({{"run.seed", "-3"}}), ValidationError);
  cfg.apply({{"grid.nx", "3"}, {"initial.values", "1, 2"}});
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.apply({{"initial.values", "1,2,3"}});
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.eta() == std::vector<double>{1, 2, 3});
  cfg.apply({{"a1.n_list", "4,4"}});
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("canonical dump reloads to the same configuration") {
  RunConfig a;
  a.apply({{"grid.nx", "17"}, {"model.preset", "reaction_diffusion"}, {"sweep.epsilons", "0.3,0.1"},
           {"solve.truncation_level", "4"}});
  RunConfig b;
  b.apply(parse_key_values(a.canonical()));
  CHECK(b.canonical() == a.canonical());
  CHECK(b.grid.nx == 17);
  CHECK(b.epsilons == std::vector<double>{0.3, 0.1});
}

TEST_CASE("kernel-check succeeds with a passing report") {
  const fs::path dir = scratch("kernel");
  REQUIRE(run({"kernel-check", "--out", dir.string(), "--set", "kernel.n_time=16", "kernel.n_space=16",
               "kernel.holder_modes=300", "kernel.identity_nx=64"}) == cli::ok);
  const std::string csv = slurp(dir / "results.csv");
  CHECK(csv.rfind(cli::results_header("kernel-check") + "\n", 0) == 0);
  CHECK(csv.find("false") == std::string::npos);
  CHECK(slurp(dir / "identities.csv").find("false") == std::string::npos);
}

TEST_CASE("validation failure leaves only the manifest") {
  const fs::path dir = scratch("mismatch");
  std::string err;
  CHECK(run({"simulate", "--out", dir.string(), "--set", "initial.values=1,2,3"}, &err) == cli::validation_error);
  CHECK(err.find("initial.values") != std::string::npos);
  CHECK(fs::exists(dir / "manifest.jsonl"));
  CHECK_FALSE(fs::exists(dir / "results.csv"));
  CHECK(run({"mc", "--out", dir.string(), "--set", "bogus.key=1"}) == cli::validation_error);
  CHECK(run({"mc", "--out", dir.string(), "--config", (dir / "missing.cfg").string()}) == cli::validation_error);
  CHECK(run({"no-such-command"}) == cli::validation_error);
}

TEST_CASE("numerical failures exit with 2") {
  const fs::path dir = scratch("blowup");
  CHECK(run({"simulate", "--out", dir.string(), "--set", "grid.nx=7", "grid.nt=10", "initial.amplitude=3",
             "solve.max_sup_l2=0.1"}) == cli::numerical_failure);
  CHECK(run({"rate-min", "--out", dir.string(), "--set", "grid.nx=7", "grid.nt=10", "rate.max_iterations=1",
             "rate.tolerance=1e-12"}) == cli::numerical_failure);
}

TEST_CASE("manifest records the run") {
  const fs::path dir = scratch("manifest");
  const fs::path cfg = dir / "run.cfg";
  fs::create_directories(dir);
  std::ofstream(cfg) << "[grid]\nnx = 7\nnt = 10\n[run]\nseed = 31\n";
  REQUIRE(run({"skeleton", "--config", cfg.string(), "--out", dir.string(), "--seed", "32"}) == cli::ok);
  std::ifstream in(dir / "manifest.jsonl");
  std::string line;
  std::getline(in, line);
  const auto m = nlohmann::json::parse(line);
  CHECK(m["subcommand"] == "skeleton");
  CHECK(m["master_seed"] == 32);  // flag overrides the file
  CHECK(m["grid"]["nx"] == 7);
  CHECK(m["preset"] == "linear_heat");
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m.contains("git_describe"));
  CHECK(m.contains("timestamp"));
  CHECK(slurp(dir / "results.csv").rfind("t,x,value\n", 0) == 0);
}

TEST_CASE("same config and seed give byte-identical results") {
  const std::vector<std::string> sub{"mc", "ldp", "a2", "simulate"};
  for (const auto& s : sub) {
    const fs::path a = scratch("rep_a_" + s), b = scratch("rep_b_" + s);
    const std::vector<std::string> common{"--set", "grid.nx=7", "grid.nt=20", "mc.samples=300", "solve.epsilon=0.3",
                                          "sweep.epsilons=0.3,0.2", "a2.seeds=4", "--seed", "9"};
    std::vector<std::string> ra{s, "--out", a.string(), "--threads", "1"}, rb{s, "--out", b.string(), "--threads", "4"};
    ra.insert(ra.end(), common.begin(), common.end());
    rb.insert(rb.end(), common.begin(), common.end());
    REQUIRE(run(ra) == cli::ok);
    REQUIRE(run(rb) == cli::ok);
    CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
    CHECK(slurp(a / "results.csv").rfind(cli::results_header(s) + "\n", 0) == 0);
  }
}
