#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "morsebif/config.hpp"
#include "morsebif/csv.hpp"

using namespace morsebif;
namespace fs = std::filesystem;

namespace {

const char* kSample = R"({
  "family": {"name": "pendulum", "l": 1.0, "g": 1.0},
  "dim": 1,
  "boundary": {"type": "twist", "E": [[1.0]]},
  "tau": 6.283185307179586,
  "lambda_range": [-0.3, 0.3],
  "lambda_grid": 11,
  "grid": 64,
  "tol": 1e-8,
  "seed": 7
})";

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

// Strips comment lines (they carry the config hash, which differs when the
// out dir differs) for content comparison.
std::string data_lines(const std::string& csv) {
    std::istringstream is(csv);
    std::string line, out;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') out += line + "\n";
    return out;
}

int run_cli(const std::string& args, const fs::path& log) {
    const char* bin = std::getenv("MORSEBIF_CLI");
    REQUIRE(bin != nullptr);
    const std::string cmd = std::string(bin) + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config round trip through the canonical form") {
    const RunConfig a = parse_config(kSample);
    const RunConfig b = parse_config(canonical_text(a));
    CHECK(canonical_text(a) == canonical_text(b));
    CHECK(a.family_name == "pendulum");
    CHECK(a.tau == doctest::Approx(2.0 * M_PI));
    CHECK(a.lambda_grid == 11);
    CHECK(std::get<OrthogonalTwist>(a.boundary).E(0, 0) == 1.0);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(parse_config("{\"tol\": -1}"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\"grid\": 16}"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\"boundary\": {\"type\": \"nope\"}}"), ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(
        parse_config("{\"dim\": 2, \"boundary\": {\"type\": \"twist\", \"E\": [[1,1],[0,1]]}}"),
        ConfigError);
    RunConfig cfg = parse_config("{}");
    cfg.family_name = "unknown";
    CHECK_THROWS_AS(make_family(cfg), ConfigError);
}

TEST_CASE("product boundary spans are orthonormalized on load") {
    const RunConfig cfg = parse_config(R"({
        "dim": 2,
        "boundary": {"type": "product", "v0": [[2.0, 0.0]], "v1": [[1.0, 1.0], [2.0, 2.0]]}
    })");
    const auto& p = std::get<ProductSubspaces>(cfg.boundary);
    CHECK(p.v0_basis.cols() == 1);
    CHECK(p.v1_basis.cols() == 1);  // dependent spanning vectors collapse
    CHECK(std::abs(p.v0_basis.col(0).norm() - 1.0) < 1e-12);
}

TEST_CASE("deterministic csv output and exit codes") {
    const fs::path tmp = fs::temp_directory_path() / "morsebif_cli_test";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const fs::path cfg_path = tmp / "cfg.json";
    {
        std::ofstream os(cfg_path);
        os << kSample;
    }

    const fs::path out1 = tmp / "run1", out2 = tmp / "run2", out3 = tmp / "run3";
    CHECK(run_cli("scan --config " + cfg_path.string() + " --out " + out1.string(),
                  tmp / "log1") == 0);
    CHECK(run_cli("scan --config " + cfg_path.string() + " --out " + out2.string(),
                  tmp / "log2") == 0);
    const std::string csv1 = slurp(out1 / "scan.csv");
    CHECK(csv1 == slurp(out2 / "scan.csv"));
    CHECK(!csv1.empty());

    // svg emission must not change the csv bytes
    CHECK(run_cli("scan --config " + cfg_path.string() + " --out " + out3.string() + " --svg",
                  tmp / "log3") == 0);
    CHECK(data_lines(csv1) == data_lines(slurp(out3 / "scan.csv")));
    CHECK(fs::exists(out3 / "scan.svg"));

    // config errors exit with 2
    CHECK(run_cli("scan --config " + (tmp / "missing.json").string(), tmp / "log4") == 2);
    {
        std::ofstream os(tmp / "bad.json");
        os << "{\"grid\": 4}";
    }
    CHECK(run_cli("index --config " + (tmp / "bad.json").string(), tmp / "log5") == 2);
}

TEST_CASE("free-particle index run and perturb self-test through the cli") {
    const fs::path tmp = fs::temp_directory_path() / "morsebif_cli_test2";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    {
        std::ofstream os(tmp / "free.json");
        os << R"({
            "family": {"name": "free"},
            "dim": 1,
            "boundary": {"type": "product", "v0": [], "v1": []},
            "tau": 1.0,
            "grid": 64,
            "tol": 1e-8
        })";
    }
    CHECK(run_cli("index --config " + (tmp / "free.json").string(), tmp / "log") == 0);
    const std::string log = slurp(tmp / "log");
    CHECK(log.find("m- = 0, m0 = 0") != std::string::npos);

    CHECK(run_cli("perturb --selftest --trials 25 --seed 7", tmp / "plog") == 0);
    CHECK(slurp(tmp / "plog").find("self-test passed") != std::string::npos);
}
