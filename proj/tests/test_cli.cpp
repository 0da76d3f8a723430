#include "rmg1/commands.hpp"
#include "rmg1/embedded.hpp"
#include "rmg1/errors.hpp"
#include "rmg1/spec_io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace rmg1;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string spec(const std::string& name) { return std::string(RMG1_SPEC_DIR) + "/" + name + ".json"; }

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "rmg1_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "rmg1");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_spec(const std::string& name, const json& j) {
    const auto p = scratch(name);
    std::ofstream(p) << j.dump();
    return p;
}

json uniform_spec(double lambda0, const json& reshape) {
    return {{"lambda0", lambda0}, {"service", {{"family", "uniform"}, {"a", 0.0}, {"b", 1.0}}}, {"reshape", reshape}};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("spec parsing") {
    const auto m = io::load_model(spec("uniform_increasing"));
    CHECK(m.lambda0() == 0.6);
    CHECK(m.rho() == doctest::Approx(0.3));
    const auto inf = io::model_from_json(
        {{"lambda0", 0.5}, {"service", {{"family", "exponential"}, {"mean", 1.0}}}, {"reshape", {{"family", "window"}, {"t", "inf"}}}});
    CHECK(inf.rho() == doctest::Approx(0.5));
    CHECK_THROWS_AS(io::model_from_json({{"lambda0", 0.5}}), ConfigError);
    CHECK_THROWS_AS(io::model_from_json(uniform_spec(0.5, {{"family", "zigzag"}})), ConfigError);
    CHECK_THROWS_AS(io::model_from_json(uniform_spec(-1.0, {{"family", "constant"}})), ConfigError);

    const auto base = io::read_json_file(spec("window_t3"));
    CHECK(io::with_parameter(base, "lambda0", 0.3)["lambda0"] == 0.3);
    CHECK(io::with_parameter(base, "reshape.t", 2.0)["reshape"]["t"] == 2.0);
    CHECK(io::with_parameter(base, "t", 2.0)["reshape"]["t"] == 2.0);
    CHECK_THROWS_AS(io::with_parameter(base, "reshape.slope", 1.0), ConfigError);
}

TEST_CASE("tolerance from the environment") {
    unsetenv("RMG1_TOL");
    CHECK(cli::tolerance_from_env() == kDefaultEpsTail);
    setenv("RMG1_TOL", "1e-8", 1);
    CHECK(cli::tolerance_from_env() == 1e-8);
    setenv("RMG1_TOL", "0.5", 1);
    CHECK_THROWS_AS(cli::tolerance_from_env(), ConfigError);
    setenv("RMG1_TOL", "abc", 1);
    CHECK_THROWS_AS(cli::tolerance_from_env(), ConfigError);
    CHECK(invoke({"analyze", "--spec", spec("mm1")}) == cli::kBadInput);
    unsetenv("RMG1_TOL");
}

TEST_CASE("analyze") {
    const auto out = scratch("mm1.json");
    REQUIRE(invoke({"analyze", "--spec", spec("mm1"), "--out", out.string()}) == cli::kOk);
    const auto j = json::parse(slurp(out));
    CHECK(j["stable"] == true);
    CHECK(j["rho"].get<double>() == doctest::Approx(0.5));
    CHECK(j["omega"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(j["mean_queue_length"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(j["empty_probability"].get<double>() == doctest::Approx(0.5));
    CHECK(j["rate_preserving"] == true);
    CHECK(j["density_checks"]["converged"] == true);
    CHECK(j["q"].size() > 10);

    const auto out2 = scratch("inc.json");
    const auto sp = write_spec("inc_spec.json", uniform_spec(0.8, {{"family", "linear"}, {"a", 0.0}, {"b", 3.0}, {"end", 1.0}}));
    REQUIRE(invoke({"analyze", "--spec", sp.string(), "--out", out2.string()}) == cli::kOk);
    const auto k = json::parse(slurp(out2));
    CHECK(k["rho"].get<double>() == doctest::Approx(0.4));
    CHECK(k["q"][0].get<double>() == doctest::Approx(0.6));
    CHECK(k["marginal"][1].get<double>() == doctest::Approx(0.2366772392).epsilon(1e-7));
}

TEST_CASE("analyze on an unstable model") {
    const auto sp = write_spec("unstable.json", uniform_spec(2.5, {{"family", "constant"}}));
    const auto out = scratch("unstable_out.json");
    REQUIRE(invoke({"analyze", "--spec", sp.string(), "--out", out.string()}) == cli::kOk);
    const auto j = json::parse(slurp(out));
    CHECK(j["stable"] == false);
    CHECK_FALSE(j.contains("q"));
    CHECK(invoke({"compare", "--spec", sp.string(), "--horizon", "1000", "--out", scratch("x.json").string()}) ==
          cli::kUnstable);
}

TEST_CASE("input errors") {
    CHECK(invoke({"analyze", "--spec", "/nonexistent/spec.json"}) == cli::kBadInput);
    CHECK(invoke({"frobnicate"}) == cli::kBadInput);
    CHECK(invoke({}) == cli::kBadInput);
    const auto broken = scratch("broken.json");
    std::ofstream(broken) << "{ not json";
    CHECK(invoke({"analyze", "--spec", broken.string()}) == cli::kBadInput);
    CHECK(invoke({"simulate", "--spec", spec("mm1"), "--mode", "sideways"}) == cli::kBadInput);
    CHECK(invoke({"simulate", "--spec", spec("mm1"), "--horizon", "-5"}) == cli::kBadInput);
    CHECK(invoke({"sweep", "--spec", spec("mm1"), "--param", "reshape.bogus", "--from", "0", "--to", "1"}) ==
          cli::kBadInput);
}

TEST_CASE("simulate is reproducible") {
    const auto a = scratch("sim_a.json"), b = scratch("sim_b.json");
    REQUIRE(invoke({"simulate", "--spec", spec("uniform_increasing"), "--horizon", "20000", "--seed", "9", "--out", a.string()}) == 0);
    REQUIRE(invoke({"simulate", "--spec", spec("uniform_increasing"), "--horizon", "20000", "--seed", "9", "--out", b.string()}) == 0);
    CHECK(slurp(a) == slurp(b));
    const auto j = json::parse(slurp(a));
    CHECK(j["seed"] == 9);
    CHECK(j["arrivals"].get<std::uint64_t>() > 1000);

    // A window of height zero admits arrivals only to an empty system.
    const auto sp = write_spec("zero_height.json",
                               uniform_spec(0.5, {{"family", "window"}, {"t", 1.0}, {"height", 0.0}}));
    const auto c = scratch("sim_c.json");
    REQUIRE(invoke({"simulate", "--spec", sp.string(), "--horizon", "20000", "--out", c.string()}) == 0);
    CHECK(json::parse(slurp(c))["max_queue"] == 1);
}

TEST_CASE("compare verdicts") {
    const auto out = scratch("cmp.json");
    CHECK(invoke({"compare", "--spec", spec("uniform_increasing"), "--horizon", "300000", "--seed", "3", "--out", out.string()}) ==
          cli::kOk);
    const auto j = json::parse(slurp(out));
    CHECK(j["all_pass"] == true);
    CHECK(j["rows"].size() >= 8);
    CHECK_FALSE(j.contains("waiting_time_check"));

    CHECK(invoke({"compare", "--spec", spec("uniform_increasing"), "--horizon", "300000", "--seed", "3",
                  "--perturb-analytic", "0.2", "--out", out.string()}) == cli::kCompareFailed);

    REQUIRE(invoke({"compare", "--spec", spec("window_t3"), "--horizon", "100000", "--out", out.string()}) !=
            cli::kBadInput);
    const auto w = json::parse(slurp(out));
    REQUIRE(w.contains("waiting_time_check"));
    CHECK(w["waiting_time_check"]["balance_formula"].get<double>() == doctest::Approx(2.0386910813439877));
    CHECK(w["waiting_time_check"]["reference_closed_form"].get<double>() == doctest::Approx(1.6040744681513002));
}

TEST_CASE("sweep") {
    const auto out = scratch("sweep.csv");
    REQUIRE(invoke({"sweep", "--spec", spec("window_t3"), "--param", "reshape.t", "--from", "0.5", "--to", "6",
                    "--steps", "12", "--out", out.string()}) == cli::kOk);
    auto rows = csv_rows(slurp(out));
    REQUIRE(rows.size() == 13);
    CHECK(rows[0][0] == "value");
    double prev = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double omega = std::stod(rows[i][2]);
        CHECK(omega > prev);
        prev = omega;
    }

    REQUIRE(invoke({"sweep", "--spec", spec("mm1"), "--param", "lambda0", "--from", "0", "--to", "1.5", "--steps",
                    "4", "--out", out.string()}) == cli::kOk);
    rows = csv_rows(slurp(out));
    REQUIRE(rows.size() == 5);
    CHECK(std::stod(rows[1][2]) == 0.0);          // lambda0 = 0: no waiting
    CHECK(std::stod(rows[2][2]) == doctest::Approx(1.0));  // lambda0 = 0.5
    CHECK(rows[3][2].empty());                    // lambda0 = 1: unstable
    CHECK(rows[4][2].empty());

    const auto direct = cli::sweep(io::read_json_file(spec("uniform_constant")), "lambda0", 0.2, 1.2, 6);
    const auto dec = cli::sweep(io::read_json_file(spec("uniform_decreasing")), "lambda0", 0.2, 1.2, 6);
    const auto inc = cli::sweep(io::read_json_file(spec("uniform_increasing")), "lambda0", 0.2, 1.2, 6);
    for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK(dec[i].omega < direct[i].omega);
        CHECK(direct[i].omega < inc[i].omega);
    }
}
