#include <filesystem>
#include <fstream>

#include <catch_amalgamated.hpp>

#include "msw/report.hpp"

using namespace msw;
namespace fs = std::filesystem;

TEST_CASE("Morse runs")
{
    const auto s = run_morse("sphere-height", Ring::integers);
    CHECK(s.pass());
    CHECK(s.data["polynomials"]["morse"]["text"] == "1 + t^2");
    CHECK(s.data["polynomials"]["remainder"]["text"] == "0");
    CHECK(s.data["schema_version"] == kSchemaVersion);

    const auto t = run_morse("torus-tilted", Ring::integers);
    CHECK(t.pass());
    CHECK(t.data["polynomials"]["poincare"]["text"] == "1 + 2t + t^2");

    try {
        run_morse("rp2", Ring::integers);
        FAIL("expected a ring error");
    } catch (const StageError& e) {
        CHECK(e.kind() == ErrorKind::ring);
        CHECK(e.stage() == "precondition");
    }
    CHECK(run_morse("rp2", Ring::mod2).pass());
    CHECK_THROWS_AS(run_morse("sphere-z2", Ring::integers), StageError);
    CHECK_THROWS_AS(run_morse("no-such-model", Ring::integers), StageError);
}

TEST_CASE("Morse-Bott runs")
{
    const auto s = run_morse_bott("sphere-z2", Ring::integers);
    CHECK(s.pass());
    CHECK(s.data["polynomials"]["morse_bott"]["text"] == "1 + t + 2t^2");
    CHECK(s.data["polynomials"]["poincare"]["text"] == "1 + t^2");
    CHECK(s.data["polynomials"]["remainder"]["text"] == "t");

    const auto v = run_morse_bott("torus-vertical", Ring::integers);
    CHECK(v.pass());
    CHECK(v.data["polynomials"]["remainder"]["text"] == "0");

    const auto k = run_morse_bott("klein-bott-model", Ring::mod2);
    CHECK(k.pass());
    CHECK(k.data["ring"] == "Z2");
    CHECK_THROWS_AS(run_morse_bott("klein-bott-model", Ring::integers), StageError);
}

TEST_CASE("an oversized epsilon is caught")
{
    RunOptions opt;
    opt.epsilon_override = 0.5;
    try {
        const auto r = run_morse_bott("sphere-z2", Ring::integers, opt);
        CHECK_FALSE(r.pass());
    } catch (const StageError& e) {
        CHECK(e.stage() == "critical-points");
        CHECK(e.kind() == ErrorKind::perturbation);
    }
}

TEST_CASE("reports are deterministic")
{
    const auto a = run_morse_bott("torus-vertical", Ring::mod2);
    const auto b = run_morse_bott("torus-vertical", Ring::mod2);
    CHECK(a.data.dump() == b.data.dump());
    const auto c = run_morse("sphere3-quadric", Ring::integers);
    const auto d = run_morse("sphere3-quadric", Ring::integers);
    CHECK(c.data.dump() == d.data.dump());
}

TEST_CASE("flow dumps")
{
    const fs::path base = fs::temp_directory_path() / "msw_flow_dump_test";
    fs::remove_all(base);
    const auto t = dump_flows("torus-tilted", (base / "tt").string());
    CHECK(t.line_files.size() == 8);
    for (const auto& f : t.line_files) {
        std::ifstream in(f);
        std::string header;
        std::getline(in, header);
        CHECK(header == "t,x1,x2,x3,f");
    }
    CHECK(fs::exists(t.basin_file));
    const auto s = dump_flows("sphere-height", (base / "sh").string());
    CHECK(s.line_files.empty());
    CHECK(fs::exists(s.basin_file));
    try {
        dump_flows("torus-tilted", "/proc/msw-cannot-write-here");
        FAIL("expected an io error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::io);
    }
    fs::remove_all(base);
}

TEST_CASE("density multiplier")
{
    CHECK(flow_config_for(2.0).link_samples == 96);
    CHECK(BottConfig{}.scaled(0.5).shell_samples == 5000);
}
