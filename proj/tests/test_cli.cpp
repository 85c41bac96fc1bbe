#include "pmlab/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using pmlab::cli::run;

namespace {
fs::path tmp_dir(const std::string& name) {
    const char* env = std::getenv("PMLAB_TEST_TMP");
    fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "pmlab_cli_tests";
    p /= name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string body(const std::string& csv) { return csv.substr(csv.find('\n') + 1); }

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }
} // namespace

TEST_CASE("alpha outside (0,1) is a validation error") {
    const auto d = tmp_dir("bad_alpha");
    CHECK(run({"decay", "--alpha", "1.2", "--out-dir", d.string()}) == pmlab::cli::kExitInvalid);
    CHECK(run({"an-fit", "--alpha", "zero", "--out-dir", d.string()}) == pmlab::cli::kExitInvalid);
    CHECK(run({"no-such-command"}) == pmlab::cli::kExitInvalid);
}

TEST_CASE("cone-check reports zero violations") {
    const auto d = tmp_dir("cone");
    REQUIRE(run({"cone-check", "--alpha", "0.5", "--samples", "20", "--mesh-cells", "2048", "--assert",
                 "--out-dir", d.string()}) == pmlab::cli::kExitOk);
    const auto side = nlohmann::json::parse(slurp(d / "cone-check.json"));
    CHECK(side.at("check_passed") == true);
    CHECK(side.at("command") == "cone-check");
    CHECK(slurp(d / "cone-check.csv").find("sample,beta,c1_ok,c2_ok,violations") != std::string::npos);
}

TEST_CASE("reruns reproduce CSV bodies; every file carries the config hash") {
    const auto d1 = tmp_dir("rerun1");
    const auto d2 = tmp_dir("rerun2");
    const auto cfg = d1 / "cfg.json";
    write(cfg, R"({"alpha": 0.5, "seed": 7, "n_max": 60})");
    REQUIRE(run({"decay", "--config", cfg.string(), "--out-dir", d1.string(), "--plot"}) == 0);
    REQUIRE(run({"decay", "--config", cfg.string(), "--out-dir", d2.string(), "--plot"}) == 0);
    const auto a = slurp(d1 / "decay.csv");
    const auto b = slurp(d2 / "decay.csv");
    CHECK(body(a) == body(b));
    CHECK(body(a).rfind("n,D_n\n", 0) == 0);

    const auto side = nlohmann::json::parse(slurp(d1 / "decay.json"));
    const std::string hash = side.at("config_hash");
    CHECK(hash.size() == 16);
    CHECK(a.rfind("# config_hash=" + hash, 0) == 0);
    CHECK(side.at("config").at("seed") == 7);
    CHECK(side.at("fit").contains("slope"));
    CHECK(side.contains("wall_time_s"));

    const auto svg = slurp(d1 / "decay.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find(hash) != std::string::npos);
}

TEST_CASE("flags override the config file") {
    const auto d = tmp_dir("override");
    const auto cfg = d / "cfg.json";
    write(cfg, R"({"alpha": 0.5, "n_max": 500})");
    REQUIRE(run({"an-fit", "--config", cfg.string(), "--n-max", "200", "--out-dir", d.string()}) == 0);
    const auto side = nlohmann::json::parse(slurp(d / "an-fit.json"));
    CHECK(side.at("config").at("n_max") == 200);
    CHECK(side.at("config").at("alpha") == 0.5);

    const auto m = pmlab::cli::merge_config("an-fit", {{"alpha", 0.5}, {"n_max", 500}}, {{"n_max", 200}});
    CHECK(m.values.at("n_max") == 200);
    CHECK(pmlab::cli::config_hash(m) != pmlab::cli::config_hash(pmlab::cli::merge_config("an-fit", {{"alpha", 0.5}}, {})));
}

TEST_CASE("config errors name the field") {
    const auto d = tmp_dir("errors");
    write(d / "unknown.json", R"({"alpha": 0.5, "colour": 3})");
    CHECK(run({"an-fit", "--config", (d / "unknown.json").string(), "--out-dir", d.string()}) == 2);
    write(d / "type.json", R"({"alpha": "half"})");
    CHECK(run({"an-fit", "--config", (d / "type.json").string(), "--out-dir", d.string()}) == 2);
    write(d / "broken.json", "{\"alpha\": 0.5,\n");
    CHECK(run({"an-fit", "--config", (d / "broken.json").string(), "--out-dir", d.string()}) == 2);
    CHECK(run({"an-fit", "--config", (d / "missing.json").string(), "--out-dir", d.string()}) == 2);
    CHECK_THROWS_WITH_AS((void)pmlab::cli::merge_config("an-fit", {{"colour", 1}}, {}),
                         doctest::Contains("colour"), std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)pmlab::cli::merge_config("an-fit", {{"n_max", "many"}}, {}),
                         doctest::Contains("n_max"), std::invalid_argument);
}

TEST_CASE("--assert maps a missed band to exit 3") {
    const auto d = tmp_dir("assert");
    CHECK(run({"an-fit", "--alpha", "0.5", "--n-max", "500", "--band-lo", "5", "--band-hi", "6", "--assert",
               "--out-dir", d.string()}) == pmlab::cli::kExitBand);
    CHECK(run({"an-fit", "--alpha", "0.5", "--n-max", "500", "--band-lo", "5", "--band-hi", "6",
               "--out-dir", d.string()}) == 0);
    CHECK(run({"an-fit", "--alpha", "0.5", "--n-max", "500", "--band-lo", "-3", "--band-hi", "-1", "--assert",
               "--out-dir", d.string()}) == 0);
}

TEST_CASE("other commands run and write their schemas") {
    const auto d = tmp_dir("smoke");
    const std::string o = d.string();
    CHECK(run({"cover", "--alpha", "0.5", "--eps-list", "0.0625,0.03125,0.015625", "--band-lo", "0", "--band-hi", "1",
               "--out-dir", o}) == 0);
    CHECK(slurp(d / "cover.csv").find("eps,cover_time") != std::string::npos);
    CHECK(run({"distortion", "--alpha", "0.5", "--steps", "10", "--out-dir", o}) == 0);
    CHECK(slurp(d / "distortion.csv").find("n,distortion") != std::string::npos);
    CHECK(run({"ulam-dump", "--alpha", "0.5", "--mesh-cells", "16", "--out-dir", o}) == 0);
    CHECK(slurp(d / "ulam-dump.csv").find("row,col,value") != std::string::npos);
    CHECK(run({"correlation", "--alpha", "0.5", "--n-max", "40", "--mesh-cells", "1024", "--out-dir", o}) == 0);
    CHECK(slurp(d / "correlation.csv").find("n,correlation,bound") != std::string::npos);
    CHECK(run({"kernel", "--alpha", "0.5", "--eps", "0.0625", "--n-eps", "8", "--nz", "4", "--nx", "4",
               "--mesh-cells", "1024", "--out-dir", o, "--prefix", "k"}) == 0);
    CHECK(slurp(d / "k.csv").find("eps,n_eps,z,x,K") != std::string::npos);
}
