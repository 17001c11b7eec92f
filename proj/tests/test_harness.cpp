#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcfo/harness.hpp"
#include "rcfo/scenario_io.hpp"

using namespace rcfo;

namespace {

Scenario small(ChannelKind kind, int trials) {
    Scenario s;
    s.channel = kind;
    s.trials = trials;
    s.snr_db = {20.0};
    s.seed = 99;
    return s;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_path(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("scenario parsing") {
    const Scenario s = parse_scenario(
        "# comment\n"
        "channel = flat   # trailing\n"
        "epsilon = -0.01\n"
        "snr_db = 0, 10, inf\n"
        "trials = 50\n"
        "mode = simplified\n"
        "nulls = 0, 255-257\n"
        "data = 7\n");
    CHECK(s.channel == ChannelKind::Flat);
    CHECK(s.epsilon == -0.01);
    CHECK(s.snr_db.size() == 3);
    CHECK(std::isinf(s.snr_db[2]));
    CHECK(s.trials == 50);
    CHECK(s.mode == WeightMode::Simplified);
    CHECK(s.cfg.is_null(0));
    CHECK(s.cfg.is_null(256));
    CHECK(s.cfg.role(7) == Role::Data);
    CHECK(s.cfg.role(8) == Role::Pilot);

    SUBCASE("unknown key") { CHECK_THROWS_WITH_AS(parse_scenario("n = 512\nbogus = 1\n"), doctest::Contains("line 2"), std::invalid_argument); }
    SUBCASE("repeated key") { CHECK_THROWS_AS(parse_scenario("eta = 1e-5\neta = 2e-5\n"), std::invalid_argument); }
    SUBCASE("malformed value") { CHECK_THROWS_AS(parse_scenario("trials = many\n"), std::invalid_argument); }
    SUBCASE("round trip") {
        const Scenario back = parse_scenario(format_scenario(s));
        CHECK(format_scenario(back) == format_scenario(s));
        CHECK(back.cfg.roles == s.cfg.roles);
    }
}

TEST_CASE("noiseless simplified runs are exact") {
    Scenario s = small(ChannelKind::Multipath, 20);
    s.snr_db = {std::numeric_limits<double>::infinity()};
    s.mode = WeightMode::Simplified;
    const auto rows = run_scenario(s);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].trials == 20);
    CHECK(rows[0].mse_eta < 1e-18);
    CHECK(rows[0].mse_eps < 1e-18);
}

TEST_CASE("weighted combining without noise is rejected and counted") {
    Scenario s = small(ChannelKind::Flat, 5);
    s.snr_db = {std::numeric_limits<double>::infinity()};
    const auto rows = run_scenario(s);
    CHECK(rows[0].trials == 0);
    CHECK(rows[0].rejected == 5);
}

TEST_CASE("same seed gives byte-identical CSV, different seed does not") {
    Scenario s = small(ChannelKind::Multipath, 40);
    s.snr_db = {10.0, 20.0};
    const std::string a = format_csv(run_scenario(s, {1}));
    const std::string b = format_csv(run_scenario(s, {3}));
    CHECK(a == b);
    s.seed = 100;
    CHECK(format_csv(run_scenario(s)) != a);
}

TEST_CASE("CSV emission") {
    Scenario s = small(ChannelKind::Flat, 10);
    const auto rows = run_scenario(s);
    const auto path = temp_path("rcfo_test_one_row.csv");
    emit_csv(rows, path);
    const std::string text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.rfind(std::string(kCsvHeader), 0) == 0);

    const auto back = read_csv(path);
    REQUIRE(back.size() == 1);
    CHECK(std::isnan(back[0].key));
    CHECK(back[0].row.mse_eta == rows[0].mse_eta);
    CHECK(back[0].row.trials == rows[0].trials);
    CHECK(back[0].row.mode == rows[0].mode);

    const auto sweep_path = temp_path("rcfo_test_sweep.csv");
    emit_sweep_csv("kappa", {{0.25, rows[0]}}, sweep_path);
    const auto swept = read_csv(sweep_path);
    REQUIRE(swept.size() == 1);
    CHECK(swept[0].key == 0.25);
    CHECK(swept[0].row.mse_eps == rows[0].mse_eps);

    CHECK_THROWS_AS(emit_csv(rows, "/nonexistent-dir/x.csv"), std::runtime_error);
    std::filesystem::remove(path);
    std::filesystem::remove(sweep_path);
}

TEST_CASE("kappa = 0 reproduces genie CSI and speed 0 reproduces the static channel") {
    Scenario s = small(ChannelKind::Multipath, 30);
    const auto genie = run_scenario(s);
    const auto kappa0 = sweep_kappa(s, {0.0});
    CHECK(kappa0[0].row.mse_eta == genie[0].mse_eta);
    CHECK(kappa0[0].row.mse_eps == genie[0].mse_eps);

    s.csi = CsiKind::Stale;
    const auto still = sweep_mobility(s, {0.0});
    CHECK(still[0].row.mse_eta == genie[0].mse_eta);
    CHECK(still[0].row.mse_eps == genie[0].mse_eps);
}

TEST_CASE("MSE falls with SNR and tracks the prediction") {
    Scenario s = small(ChannelKind::Flat, 500);
    s.snr_db = {10.0, 20.0, 30.0};
    const auto rows = run_scenario(s);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].mse_eta < rows[i - 1].mse_eta);
        CHECK(rows[i].mse_eps < rows[i - 1].mse_eps);
    }
    for (const auto& r : rows) {
        CHECK(r.mse_eta / r.var_eta_pred > 0.7);
        CHECK(r.mse_eta / r.var_eta_pred < 1.4);
    }
}

TEST_CASE("sweeps key their rows and validate the range") {
    Scenario s = small(ChannelKind::Flat, 5);
    const auto rows = sweep_eta(s, {-1e-4, 0.0, 1e-4});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].key == -1e-4);
    CHECK(rows[2].key == 1e-4);
    CHECK_THROWS_AS(sweep_eps(s, {}), std::invalid_argument);
    s.trials = 0;
    CHECK_THROWS_AS(run_scenario(s), std::invalid_argument);
}

TEST_CASE("time-domain model runs end to end") {
    Scenario s = small(ChannelKind::Multipath, 4);
    s.model = ChannelModel::TimeDomain;
    const auto rows = run_scenario(s);
    CHECK(rows[0].trials == 4);
    CHECK(rows[0].mse_eta < 1e-10);
}
