#include "doctest.h"

#include "wgspec/errors.hpp"
#include "wgspec/homogenization.hpp"
#include "wgspec/run.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wgspec;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("homogenize run writes tensors with Q = I for a == 1") {
    TempDir dir("wgspec_test_hom");
    RunConfig c;
    c.mode = "homogenize";
    c.kind = "periodic_cell";
    c.expr = "1";
    c.cell_resolution = 16;
    c.directory = (dir.path / "out").string();
    RunResult res = run(c);
    REQUIRE_FALSE(res.files_written.empty());

    HomogenizedTensors t = tensors_from_json(slurp(dir.path / "out" / "tensors.json"));
    CHECK(t.abar == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.Q[0][0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(t.Q[0][1]) < 1e-12);

    // every output carries the manifest hash
    nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "out" / "tensors.json"));
    CHECK(j.at("manifest_hash").get<std::string>() == config_hash(c));
    CHECK(fs::exists(dir.path / "out" / "manifest.json"));
}

TEST_CASE("effective run on the straight homogeneous tube") {
    TempDir dir("wgspec_test_eff");
    RunConfig c;
    c.mode = "effective";
    c.kind = "periodic_cell";
    c.expr = "1";
    c.cell_resolution = 8;
    c.resolution = 24;
    c.eigenpairs = 3;
    c.scales = {0.1};
    c.formats = {"json", "csv"};
    c.directory = (dir.path / "out").string();
    run(c);

    nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "out" / "effective_model.json"));
    CHECK(j.at("regime").get<std::string>() == "homogenized");
    CHECK_FALSE(j.at("conjectural").get<bool>());
    const auto lam = j.at("lambda").at("0.1").get<std::vector<double>>();
    REQUIRE(lam.size() == 3);
    CHECK(lam[0] == doctest::Approx(2 * M_PI * M_PI * 100 + M_PI * M_PI).epsilon(1e-4));
    CHECK(lam[1] == doctest::Approx(2 * M_PI * M_PI * 100 + 4 * M_PI * M_PI).epsilon(1e-4));
    CHECK(fs::exists(dir.path / "out" / "potential.csv"));
    CHECK(fs::exists(dir.path / "out" / "geometry.csv"));
    // csv files carry the hash in a comment line
    const std::string csv = slurp(dir.path / "out" / "potential.csv");
    CHECK(csv.rfind("# manifest_hash=", 0) == 0);
}

TEST_CASE("localize run writes the model file") {
    TempDir dir("wgspec_test_loc");
    RunConfig c;
    c.mode = "localize";
    c.kind = "cross_section";
    c.expr = "1 + x1";
    c.resolution = 16;
    c.k = "1 + (s-0.5)^2"; // b1 < 0, so h has its minimum where k is largest
    c.eigenpairs = 2;
    c.scales = {0.1, 0.05};
    c.directory = (dir.path / "out").string();
    run(c);
    nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "out" / "localization.json"));
    CHECK(j.at("class").get<std::string>() == "endpoint");
    CHECK(j.at("eta").size() == 2);
}

TEST_CASE("effective run redirects to localize when propagation fails") {
    TempDir dir("wgspec_test_redirect");
    RunConfig c;
    c.mode = "effective";
    c.kind = "cross_section";
    c.expr = "1 + x1";
    c.resolution = 16;
    c.k = "1 + (s-0.5)^2";
    c.directory = (dir.path / "out").string();
    CHECK_THROWS_WITH_AS(run(c), doctest::Contains("localize"), SolverError);
}

TEST_CASE("verify run emits report and summary") {
    TempDir dir("wgspec_test_ver");
    RunConfig c;
    c.mode = "verify";
    c.verify_case = "beta_only";
    c.kind = "cross_section";
    c.expr = "1";
    c.resolution = 24;
    c.k = "1 - 0.5*sin(2*pi*s)";
    c.s = 0.3;
    c.scales = {0.125, 0.0625, 0.03125};
    c.directory = (dir.path / "out").string();
    RunResult res = run(c);
    CHECK(res.summary.find("slope") != std::string::npos);
    nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "out" / "verify.json"));
    CHECK(j.at("slope").get<double>() > 2.5);
    const std::string csv = slurp(dir.path / "out" / "report.csv");
    CHECK(csv.find("scale,error") != std::string::npos);
}

TEST_CASE("oracle run records provenance") {
    TempDir dir("wgspec_test_orc");
    RunConfig c;
    c.mode = "oracle";
    c.kind = "cross_section";
    c.expr = "1";
    c.resolution = 8;
    c.oracle_ns = 16;
    c.eigenpairs = 1;
    c.scales = {0.1};
    c.concentration_s0 = 0.5;
    c.directory = (dir.path / "out").string();
    run(c);
    nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "out" / "oracle.json"));
    REQUIRE(j.at("runs").size() == 1);
    CHECK(j["runs"][0]["provenance"]["basis"].get<std::string>() == "P2(s) x P2(x) product");
    CHECK(j["runs"][0].contains("concentration_moment"));
    const double lam = j["runs"][0]["lambda"][0].get<double>();
    CHECK(lam == doctest::Approx(2 * M_PI * M_PI * 100 + M_PI * M_PI).epsilon(1e-3));
}

TEST_CASE("grid-file coefficients") {
    TempDir dir("wgspec_test_grid");
    // constant-4 grid on the cell
    {
        std::ofstream g(dir.path / "grid.txt");
        g << "3 3\n";
        for (int i = 0; i < 9; ++i) g << "4.0 ";
    }
    RunConfig c;
    c.mode = "homogenize";
    c.kind = "periodic_cell";
    c.grid_file = (dir.path / "grid.txt").string();
    c.cell_resolution = 8;
    c.directory = (dir.path / "out").string();
    run(c);
    HomogenizedTensors t = tensors_from_json(slurp(dir.path / "out" / "tensors.json"));
    CHECK(t.abar == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(t.Q[0][0] == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("determinism: identical runs produce identical numeric payloads") {
    RunConfig c;
    c.mode = "effective";
    c.kind = "periodic_cell";
    c.expr = "2+cos(2*pi*y1)";
    c.cell_resolution = 8;
    c.resolution = 16;
    c.eigenpairs = 2;
    c.scales = {0.1};
    TempDir dir("wgspec_test_det");
    c.directory = (dir.path / "a").string();
    run(c);
    c.directory = (dir.path / "b").string();
    run(c);
    CHECK(slurp(dir.path / "a" / "effective_model.json") ==
          slurp(dir.path / "b" / "effective_model.json"));
}

TEST_SUITE_END();
