#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magsq/errors.hpp"
#include "magsq/scenarios.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace magsq;
namespace sc = magsq::scenarios;
namespace fs = std::filesystem;
using config::Dim;

namespace {

sc::ScenarioConfig config_with(std::initializer_list<std::pair<std::string, std::string>> kv) {
    config::RawConfig raw;
    for (const auto& [k, v] : kv) raw.set(k, v, "test");
    return sc::build_config(raw);
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("magsq_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("quantities require units") {
    CHECK(config::parse_quantity("1.513 GHz", Dim::frequency, "k") == doctest::Approx(1.513));
    CHECK(config::parse_quantity("12 MHz", Dim::frequency, "k") == doctest::Approx(0.012));
    CHECK(config::parse_quantity("3 kHz", Dim::frequency, "k") == doctest::Approx(3e-6));
    CHECK(config::parse_quantity("6.283185307179586 rad/ns", Dim::frequency, "k") == doctest::Approx(1.0));
    CHECK(config::parse_quantity("0.5 K", Dim::temperature, "k") == doctest::Approx(500.0));
    CHECK(config::parse_quantity("90 deg", Dim::angle, "k") == doctest::Approx(std::numbers::pi / 2));
    CHECK(config::parse_quantity("0.25 pi", Dim::angle, "k") == doctest::Approx(std::numbers::pi / 4));
    CHECK(config::parse_quantity("2 us", Dim::time, "k") == doctest::Approx(2000.0));
    CHECK(config::parse_quantity("1 mm", Dim::length, "k") == doctest::Approx(1000.0));
    CHECK(config::parse_quantity("2.1e28 m^-3", Dim::density, "k") == doctest::Approx(2.1e22));
    CHECK(config::parse_quantity("1e-8", Dim::number, "k") == doctest::Approx(1e-8));
    CHECK_THROWS_AS(config::parse_quantity("1.513", Dim::frequency, "k"), ConfigError);
    CHECK_THROWS_AS(config::parse_quantity("10 mK", Dim::frequency, "k"), ConfigError);
    CHECK_THROWS_AS(config::parse_quantity("3 GHz", Dim::number, "k"), ConfigError);
    CHECK_THROWS_AS(config::parse_quantity("2.5", Dim::integer, "k"), ConfigError);
    CHECK_THROWS_AS(config::parse_quantity("abc GHz", Dim::frequency, "k"), ConfigError);
}

TEST_CASE("lists and ranges") {
    const auto a = config::parse_list("0.5 MHz, 1 MHz,2 MHz", Dim::frequency, "k");
    REQUIRE(a.size() == 3);
    CHECK(a[2] == doctest::Approx(0.002));
    const auto r = config::parse_list("0 MHz .. 4 MHz : 5", Dim::frequency, "k");
    REQUIRE(r.size() == 5);
    CHECK(r[1] == doctest::Approx(0.001));
    CHECK(r[4] == doctest::Approx(0.004));
}

TEST_CASE("config files: sections, comments, duplicates") {
    const auto raw = config::RawConfig::parse("scenario = kappa_sweep  # comment\n[params]\nkappa = 1 MHz\n", "f.cfg");
    CHECK(raw.get("scenario").value == "kappa_sweep");
    CHECK(raw.get("params.kappa").value == "1 MHz");
    CHECK(raw.get("params.kappa").source == "f.cfg:3");
    CHECK_THROWS_AS(config::RawConfig::parse("a = 1\na = 2\n", "f.cfg"), ConfigError);
    CHECK_THROWS_AS(config::RawConfig::parse("no equals sign\n", "f.cfg"), ConfigError);
    CHECK(config::env_name("params.kappa") == "MAGSQ_PARAMS_KAPPA");
}

TEST_CASE("build_config is strict") {
    CHECK_THROWS_AS(config_with({{"params.kapa", "1 MHz"}}), ConfigError);
    CHECK_THROWS_AS(config_with({{"params.kappa", "1"}}), ConfigError);
    CHECK_THROWS_AS(config_with({{"fock_dim", "20"}}), ConfigError);
    CHECK_THROWS_AS(config_with({{"scenario", "nonsense"}}), ConfigError);
    CHECK_THROWS_AS(config_with({{"full.qubit_dissipators", "persistent"}, {"full.frame", "rotating_exact"}}),
                    ConfigError);
    try {
        config_with({{"params.kappa", "1 mK"}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("params.kappa") != std::string::npos);
    }
    const auto c = config_with({});
    CHECK(c.fock_dim == 80);
    CHECK(c.params.kappa_mhz == doctest::Approx(0.5));
    CHECK(c.delta_eff_mode == sc::DeltaEffMode::calibrated);
    CHECK(c.sample_times().size() == 301);
    CHECK(c.raw.get("fock_dim").source == "default");
}

TEST_CASE("environment overrides the file") {
    const fs::path dir = scratch("env");
    const fs::path file = dir / "a.cfg";
    std::ofstream(file) << "[params]\nkappa = 1 MHz\ntemperature = 20 mK\n";
    ::setenv("MAGSQ_PARAMS_KAPPA", "2 MHz", 1);
    const auto c = sc::load_config(file.string());
    ::unsetenv("MAGSQ_PARAMS_KAPPA");
    CHECK(c.params.kappa_mhz == doctest::Approx(2.0));
    CHECK(c.params.temperature_mk == doctest::Approx(20.0));
    CHECK(c.raw.get("params.kappa").source == "env:MAGSQ_PARAMS_KAPPA");
    CHECK(sc::load_config(file.string()).params.kappa_mhz == doctest::Approx(1.0));
    CHECK_THROWS_AS(sc::load_config((dir / "missing.cfg").string()), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("calibration recovers a synthetic Delta_eff") {
    auto cfg = config_with({{"time.t_end", "30 ns"},
                            {"time.dt", "1 ns"},
                            {"fock_dim", "40"},
                            {"calibration.coarse_step", "1 MHz"},
                            {"calibration.fine_step", "0.05 MHz"}});
    model::PhysicalParams p = cfg.params;
    // a detuning on the fine grid around the analytic centre
    const double centre = model::analytic_delta_eff(model::derive(p)) / model::kTwoPi * 1e3;
    const double target_mhz = centre + 14.4;
    p.delta_eff_mhz = target_mhz;
    const auto target = sc::run_effective(cfg, model::derive(p));
    const auto cal = sc::calibrate_delta_eff(cfg, target.series.at("S_dB"));
    CHECK(cal.delta_eff / model::kTwoPi * 1e3 == doctest::Approx(target_mhz).epsilon(1e-9));
    CHECK(cal.max_dev_db < 1e-9);
    CHECK(cal.points_below_002 == int(cal.times.size()));
    CHECK(!cal.scan.empty());
}

TEST_CASE("convergence check flags a truncated squeezed state and passes a weak one") {
    auto strong = config_with({{"scenario", "custom"},
                               {"fock_dim", "40"},
                               {"params.delta_eff", "0 MHz"},
                               {"custom.dissipation", "false"},
                               {"time.t_end", "14 ns"},
                               {"time.dt", "1 ns"}});
    const auto d = sc::resolve_params(strong);
    // r = 2 |g_cs| t
    CHECK(2.0 * std::abs(d.g_cs) * 14.0 == doctest::Approx(1.3).epsilon(0.02));
    const auto rs = sc::convergence_check(strong, d);
    CHECK(rs.flagged);
    CHECK(rs.max_dS_db > 0.02);

    auto weak = strong;
    weak.t_end_ns = 2.0;
    const auto rw = sc::convergence_check(weak, d);
    CHECK(!rw.flagged);
    CHECK(rw.max_dS_db < 1e-4);

    auto map = config_with({{"scenario", "coupling_map_a"}});
    CHECK(!sc::convergence_check(map, d).flagged);
}

TEST_CASE("runs are deterministic and thread-count independent") {
    const fs::path dir = scratch("det");
    auto once = [&](const std::string& scenario, int threads, const std::string& sub) {
        const auto c = config_with({{"scenario", scenario},
                                    {"threads", std::to_string(threads)},
                                    {"output_dir", (dir / sub).string()},
                                    {"params.delta_eff", "17.3 MHz"},
                                    {"fock_dim", "40"},
                                    {"time.t_end", "10 ns"},
                                    {"time.dt", "1 ns"},
                                    {"sweep.kappa", "0.5 MHz, 4 MHz"},
                                    {"coupling.radii", "0.2 um .. 1 um : 3"},
                                    {"coupling.currents", "0.1 uA .. 1 uA : 3"},
                                    {"coupling.x0", "-2 um .. 2 um : 3"}});
        const auto m = sc::run(c, false);
        CHECK(fs::exists(dir / sub / (scenario + ".manifest.json")));
        return m;
    };
    for (const char* s : {"coupling_map_a", "coupling_map_b", "kappa_sweep"}) {
        const auto a = once(s, 1, std::string(s) + "1");
        const auto b = once(s, 1, std::string(s) + "2");
        const auto c = once(s, 3, std::string(s) + "3");
        REQUIRE(!a.outputs.empty());
        REQUIRE(a.outputs.size() == c.outputs.size());
        for (std::size_t i = 0; i < a.outputs.size(); ++i) {
            CHECK(a.outputs[i].sha256 == b.outputs[i].sha256);
            CHECK(a.outputs[i].sha256 == c.outputs[i].sha256);
            CHECK(a.outputs[i].sha256.size() == 64);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("sha256 of a known file") {
    const fs::path dir = scratch("sha");
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(sc::sha256_file((dir / "abc.txt").string()) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove_all(dir);
}

TEST_CASE("scenario names round-trip") {
    for (auto s : {sc::Scenario::coupling_map_a, sc::Scenario::squeeze_compare, sc::Scenario::max_squeeze_heatmap,
                   sc::Scenario::superposition_fidelity, sc::Scenario::custom})
        CHECK(sc::parse_scenario(sc::scenario_name(s)) == s);
    CHECK_THROWS(sc::parse_scenario("nope"));
}
