#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rotq/scenario.hpp"

using namespace rotq;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::string preset_dir() {
#ifdef ROTQ_DEFAULT_PRESET_DIR
    return ROTQ_DEFAULT_PRESET_DIR;
#else
    return "presets";
#endif
}

ScenarioConfig load_preset(const std::string& name) {
    return load_config(preset_path(preset_dir(), name));
}

std::string csv_string(const SweepTable& t) {
    std::ostringstream os;
    emit_csv(t, os);
    return os.str();
}
}  // namespace

TEST_CASE("config validation reports the offending field") {
    auto expect_error = [](const std::string& json, const std::string& fragment) {
        try {
            parse_config(json);
            FAIL("expected ValidationError for " << json);
        } catch (const ValidationError& e) {
            INFO("message: " << e.what());
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };

    expect_error(R"({"channel":[{"op":"warp","factor":2}]})", "channel[0].op");
    expect_error(R"({"channel":[{"op":"aperture","radius":1,"bogus":2}]})", "channel[0].bogus");
    expect_error(R"({"channel":[{"op":"aperture"}]})", "channel[0].radius");
    expect_error(R"({"protocol":"teleport"})", "protocol");
    expect_error(R"({"encoding":"frequency"})", "encoding");
    expect_error(R"({"basis":{"m_max":0}})", "basis");
    expect_error(R"({"sweep":{"variable":"theta_deg","start":0,"stop":10,"step":-1}})",
                 "sweep.step");
    expect_error(R"({"sweep":{"variable":"channel[0].radius","start":1,"stop":2,"step":1}})",
                 "sweep.variable");
    expect_error(
        R"({"channel":[{"op":"knife","edge":0}],"sweep":{"variable":"channel[0].radius","start":1,"stop":2,"step":1}})",
        "no parameter 'radius'");
    expect_error(R"({"protocol":"mub_fidelity","theta_mix_deg":[0,15]})", "theta_mix_deg");
    expect_error(R"({"channel":[{"op":"phase_screen"}]})", "phase_screen");
    expect_error("{nonsense", "parse error");

    // a valid config parses and carries defaults
    ScenarioConfig ok = parse_config(R"({"protocol":"bb84"})");
    CHECK(ok.basis.m_max == 5);
    CHECK(ok.basis.p_max == 8);
    CHECK(ok.grid.n_radial == 200);
}

TEST_CASE("preset sweeps reproduce the headline curves") {
    SUBCASE("hybrid BB84 fidelity is constant 1") {
        SweepTable t = run_scenario(load_preset("fig3a-hybrid"));
        CHECK(t.rows.size() == 24);
        CHECK(t.header[5] == "avg_fidelity");
        for (const auto& row : t.rows) {
            CHECK(row[5] >= 1.0 - 1e-12);
            CHECK(row[9] == 1.0);  // secure
        }
    }

    SUBCASE("polarization BB84 fidelity follows cos^2") {
        SweepTable t = run_scenario(load_preset("fig3a-polarization"));
        for (const auto& row : t.rows) {
            double th = row[0] * kPi / 180.0;
            CHECK(row[5] == doctest::Approx(std::cos(th) * std::cos(th)).epsilon(1e-12));
        }
    }

    SUBCASE("off-center pinhole degrades pure OAM qubits monotonically") {
        SweepTable t = run_scenario(load_preset("si-fig6a-oam-offcenter"));
        REQUIRE(t.rows.size() >= 8);
        for (size_t i = 1; i < t.rows.size(); ++i) {
            CHECK(t.rows[i][0] < t.rows[i - 1][0]);  // radius shrinking
            CHECK(t.rows[i][1] < t.rows[i - 1][1]);  // fidelity strictly decreasing
        }
        CHECK(t.rows.back()[1] < 1.0 - 1e-4);
    }
}

TEST_CASE("efficiency scalars cost photons, never fidelity") {
    ScenarioConfig cfg = parse_config(R"({
        "encoding": "hybrid", "protocol": "bb84",
        "channel": [{"op": "efficiency_scalar", "value": 0.94},
                    {"op": "efficiency_scalar", "value": 0.85}],
        "theta_deg": 30.0
    })");
    SweepTable with = run_scenario(cfg);
    cfg.channel.clear();
    SweepTable without = run_scenario(cfg);
    REQUIRE(with.rows.size() == 1);
    CHECK(with.rows[0][5] >= 1.0 - 1e-12);  // avg fidelity untouched
    CHECK(with.rows[0][10] ==
          doctest::Approx(0.94 * 0.85 * without.rows[0][10]).epsilon(1e-12));  // survival scaled
}

TEST_CASE("determinism: identical configs give byte-identical CSV") {
    ScenarioConfig cfg = load_preset("si-fig7-displacement-hybrid");
    cfg.sweep->stop = 0.3;  // three points are enough here
    std::string a = csv_string(run_scenario(cfg, 1));
    std::string b = csv_string(run_scenario(cfg, 2));
    std::string c = csv_string(run_scenario(cfg));
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("emit_csv formatting") {
    SweepTable t;
    t.header = {"value", "fidelity"};
    CHECK(csv_string(t) == "value,fidelity\n");

    t.rows.push_back({1.0, 0.123456789012345});
    std::string s = csv_string(t);
    CHECK(std::count(s.begin(), s.end(), '\n') == 2);
    CHECK(s.find('\r') == std::string::npos);

    // parse-back reproduces the values to 12 significant digits
    std::istringstream is(s);
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    double v1 = 0, v2 = 0;
    CHECK(std::sscanf(line.c_str(), "%lf,%lf", &v1, &v2) == 2);
    CHECK(v1 == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(v2 == doctest::Approx(0.123456789012345).epsilon(1e-11));
}

TEST_CASE("channel classifier: symmetry decides fidelity") {
    SUBCASE("knife-edge channel") {
        ScenarioConfig cfg = parse_config(
            R"({"channel":[{"op":"knife","edge":-0.3,"orientation_deg":25}]})");
        ClassifyReport rep = classify_channel(cfg);
        CHECK(rep.holds);
        CHECK(rep.predicted_fidelity == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rep.direct_fidelity == doctest::Approx(rep.predicted_fidelity).epsilon(1e-9));
    }

    SUBCASE("aligned displacement + tilt") {
        ClassifyReport rep = classify_channel(load_preset("classify-displacement-tilt-aligned"));
        CHECK(rep.holds);
        CHECK(rep.direct_fidelity >= 1.0 - 1e-9);
    }

    SUBCASE("perpendicular displacement + tilt") {
        ClassifyReport rep = classify_channel(load_preset("classify-displacement-tilt-perp"));
        CHECK_FALSE(rep.holds);
        CHECK(rep.max_dev > 1e-3);
        CHECK(rep.direct_fidelity < 1.0 - 1e-4);
        CHECK(rep.direct_fidelity == doctest::Approx(rep.predicted_fidelity).epsilon(1e-9));
    }

    SUBCASE("frame rotations are rejected") {
        ScenarioConfig cfg = parse_config(R"({"channel":[{"op":"rotate","theta_deg":10}]})");
        CHECK_THROWS_AS(classify_channel(cfg), ValidationError);
    }
}

TEST_CASE("coupling table export through the scenario layer") {
    ScenarioConfig cfg = load_preset("coeffs-offcenter-pinhole");
    cfg.basis = make_basis(2, 2, 1.0, 7.9e3);
    ModeCoupling c = pipeline_coupling(cfg);
    std::ostringstream os;
    write_coupling_csv(os, c);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "m,m_prime,p,p_prime,re,im");
    int lines = 0;
    for (std::string line; std::getline(is, line);) ++lines;
    CHECK(lines == 15 * 15);  // (5 m values x 3 p values)^2
}

#ifdef ROTQ_CLI_PATH
TEST_CASE("CLI smoke tests: exit codes and artifacts") {
    std::string cli = ROTQ_CLI_PATH;
    std::string dir = preset_dir();

    auto run = [&](const std::string& args) {
        std::string cmd = "ROTQ_PRESETS_DIR=" + dir + " " + cli + " " + args + " >/dev/null 2>&1";
        int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };

    CHECK(run("list-presets") == 0);

    // validation failures exit with 1
    std::string bad = "/tmp/rotq_bad_config.json";
    {
        std::ofstream os(bad);
        os << R"({"channel":[{"op":"warp"}]})";
    }
    CHECK(run("run " + bad) == 1);
    CHECK(run("run /tmp/definitely_missing_config.json") == 1);

    // a real preset writes its table
    std::string out = "/tmp/rotq_smoke_fig3a.csv";
    std::remove(out.c_str());
    CHECK(run("preset fig3a-hybrid --threads 2 --out " + out) == 0);
    std::ifstream check(out);
    CHECK(check.good());
    std::string header;
    std::getline(check, header);
    CHECK(header.rfind("value,", 0) == 0);

    // classify on a shipped channel config
    CHECK(run("classify " + dir + "/classify-displacement-tilt-perp.json") == 0);

    // coefficient dump
    std::string coeffs_out = "/tmp/rotq_smoke_coeffs.csv";
    std::remove(coeffs_out.c_str());
    CHECK(run("coeffs " + dir + "/coeffs-offcenter-pinhole.json --out " + coeffs_out) == 0);
    std::ifstream ccheck(coeffs_out);
    CHECK(ccheck.good());
}
#endif
