#include <filesystem>
#include <fstream>
#include <random>

#include <catch_amalgamated.hpp>

#include "msw/catalog.hpp"
#include "msw/flow.hpp"

using namespace msw;

namespace
{

CriticalSet classify_all(const CatalogEntry& e)
{
    CriticalSet s;
    for (const auto& seed : e.seeds)
        s.points.push_back(classify_critical_point(e.manifold, e.field, seed.location, seed.id));
    return s;
}

int find(const CriticalSet& s, const std::string& id)
{
    for (int i = 0; i < static_cast<int>(s.points.size()); ++i)
        if (s.points[i].id == id)
            return i;
    FAIL("no critical point " << id);
    return -1;
}

} // namespace

TEST_CASE("orientation sign of frame pairs")
{
    Frame id = Mat::Identity(3, 3);
    CHECK(orientation_sign(id, id) == 1);
    Frame swapped = id;
    swapped.col(0) = id.col(1);
    swapped.col(1) = id.col(0);
    CHECK(orientation_sign(swapped, id) == -1);
    Frame two = id.leftCols(2);
    CHECK_THROWS_AS(orientation_sign(two, id), Error);
    Frame singular = id;
    singular.col(2) = id.col(0);
    try {
        orientation_sign(singular, id);
        FAIL("expected an orientation error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::orientation);
    }
}

TEST_CASE("trajectories decrease f and converge to the minimum")
{
    const auto& e = lookup("sphere-height");
    const CriticalSet crit = classify_all(e);
    std::mt19937_64 rng(11);
    for (int k = 0; k < 10; ++k) {
        Vec x = e.manifold.random_point(rng);
        if (x[2] > 0.999)
            continue;
        const Trajectory tr = integrate(e.manifold, e.field, x, Direction::forward, crit, {}, true);
        CHECK(tr.limit == "min");
        CHECK(tr.monotone);
        for (std::size_t i = 1; i < tr.samples.size(); ++i) {
            CHECK(tr.samples[i].f <= tr.samples[i - 1].f + 1e-10);
            CHECK(e.manifold.on_manifold(tr.samples[i].x, 1e-9));
        }
    }
}

TEST_CASE("backward flow converges to the maximum")
{
    const auto& e = lookup("circle-height");
    const CriticalSet crit = classify_all(e);
    const Trajectory tr = integrate(e.manifold, e.field, detail::vec({1, 0}), Direction::backward, crit);
    CHECK(tr.limit == "max");
    CHECK(limit_assignment(e.manifold, e.field, detail::vec({1, 0}), crit) == "min");
}

TEST_CASE("starting at a critical point is detected immediately")
{
    const auto& e = lookup("circle-height");
    const CriticalSet crit = classify_all(e);
    const Trajectory tr = integrate(e.manifold, e.field, detail::vec({0, 1}), Direction::forward, crit);
    CHECK(tr.limit == "max");
    CHECK(tr.steps == 0);
    CriticalSet empty;
    CHECK_THROWS_AS(integrate(e.manifold, e.field, detail::vec({0, 1}), Direction::forward, empty), Error);
}

TEST_CASE("flow lines on the tilted torus")
{
    const auto& e = lookup("torus-tilted");
    const CriticalSet crit = classify_all(e);
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"max", "saddle-lo"}, {"max", "saddle-hi"}, {"saddle-lo", "min"}, {"saddle-hi", "min"}};
    for (const auto& [q, p] : pairs) {
        INFO(q << " -> " << p);
        const FlowLineCount c = count_flow_lines(e.manifold, e.field, crit, find(crit, q), find(crit, p));
        CHECK(c.unsigned_count == 2);
        REQUIRE(c.signed_sum.has_value());
        CHECK(*c.signed_sum == 0);
        CHECK(c.mod2_sum == 0);
    }
    CHECK_THROWS_AS(count_flow_lines(e.manifold, e.field, crit, find(crit, "max"), find(crit, "min")), Error);
}

TEST_CASE("link bisection agrees with stable shooting")
{
    // Models whose maxima have mildly anisotropic Hessians, so link bisection
    // resolves every basin transition.
    for (const char* name : {"torus-tilted", "rp2"}) {
        const auto& e = lookup(name);
        const CriticalSet crit = classify_all(e);
        for (int qi = 0; qi < static_cast<int>(crit.points.size()); ++qi) {
            if (crit.points[qi].index != 2)
                continue;
            for (int pi = 0; pi < static_cast<int>(crit.points.size()); ++pi) {
                if (crit.points[pi].index != 1)
                    continue;
                INFO(name << ": " << crit.points[qi].id << " -> " << crit.points[pi].id);
                const auto link = count_flow_lines(e.manifold, e.field, crit, qi, pi, {}, CountRoute::link_bisection);
                const auto shot = count_flow_lines(e.manifold, e.field, crit, qi, pi, {}, CountRoute::stable_shooting);
                CHECK(link.unsigned_count == count_by_stable_shooting(e.manifold, e.field, crit, qi, pi));
                CHECK(link.unsigned_count == shot.unsigned_count);
                CHECK(link.signed_sum == shot.signed_sum);
            }
        }
    }
}

TEST_CASE("individual flow line signs agree between routes")
{
    const auto& e = lookup("torus-tilted");
    const CriticalSet crit = classify_all(e);
    const int q = find(crit, "max");
    const auto a = sweep_unstable_link(e.manifold, e.field, crit, q, {}, false, CountRoute::link_bisection);
    const auto b = sweep_unstable_link(e.manifold, e.field, crit, q, {}, false, CountRoute::stable_shooting);
    REQUIRE(a.lines.size() == 4);
    REQUIRE(b.lines.size() == 4);
    // Lines are matched by where they arrive at their target.
    for (const auto& la : a.lines) {
        int matched = 0;
        for (const auto& lb : b.lines) {
            if (la.target != lb.target)
                continue;
            const Vec pa = la.trajectory.end, pb = lb.trajectory.end;
            const Vec p = crit.points[la.target_point].location;
            if ((pa - p).dot(pb - p) > 0) {
                ++matched;
                CHECK(la.sign == lb.sign);
            }
        }
        CHECK(matched == 1);
    }
}

TEST_CASE("signed counts on the 3-sphere")
{
    const auto& e = lookup("sphere3-quadric");
    const CriticalSet crit = classify_all(e);
    for (int qi = 0; qi < static_cast<int>(crit.points.size()); ++qi)
        for (int pi = 0; pi < static_cast<int>(crit.points.size()); ++pi) {
            if (crit.points[qi].index != crit.points[pi].index + 1)
                continue;
            INFO(crit.points[qi].id << " -> " << crit.points[pi].id);
            const auto c = count_flow_lines(e.manifold, e.field, crit, qi, pi);
            CHECK(c.unsigned_count == 1);
            REQUIRE(c.signed_sum.has_value());
            CHECK(std::abs(*c.signed_sum) == 1);
        }
}

TEST_CASE("transversality probe passes on the tilted torus")
{
    const auto& e = lookup("torus-tilted");
    const CriticalSet crit = classify_all(e);
    const auto rep = transversality_probe(e.manifold, e.field, crit);
    CHECK(rep.violations.empty());
    CHECK(rep.stable_under_refinement);
    CHECK(rep.pass);
}

TEST_CASE("trajectory CSV has a header and one row per sample")
{
    const auto& e = lookup("circle-height");
    const CriticalSet crit = classify_all(e);
    const Trajectory tr = integrate(e.manifold, e.field, detail::vec({1, 0}), Direction::forward, crit, {}, true);
    const auto path = std::filesystem::temp_directory_path() / "msw_traj_test.csv";
    write_trajectory_csv(tr, path.string());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x1,x2,f");
    std::size_t rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == tr.samples.size());
    std::filesystem::remove(path);
    CHECK_THROWS_AS(write_trajectory_csv(tr, "/nonexistent-dir/x.csv"), Error);
}
