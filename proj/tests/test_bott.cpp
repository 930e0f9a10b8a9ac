#include <map>
#include <random>

#include <catch_amalgamated.hpp>

#include "msw/bott.hpp"

using namespace msw;

namespace
{

struct Run
{
    const CatalogEntry* e;
    PerturbationPlan plan;
    HCriticalData hc;
    ChainComplexData cx;
    std::vector<SubComplex> sc;
};

const Run& run(const std::string& name)
{
    static std::map<std::string, Run> cache;
    auto it = cache.find(name);
    if (it != cache.end())
        return it->second;
    const auto& e = lookup(name);
    Run r{&e, make_plan(e), {}, {}, {}};
    r.hc = critical_points_of_h(e.manifold, r.plan);
    r.cx = build_complex(e.manifold, r.plan.h, r.hc.points, e.default_ring());
    r.sc = build_sub_complexes(r.plan, e.default_ring());
    return cache.emplace(name, std::move(r)).first->second;
}

std::vector<int> sorted_indices(const HCriticalData& hc)
{
    std::vector<int> v;
    for (const auto& p : hc.points)
        v.push_back(p.index);
    std::sort(v.begin(), v.end());
    return v;
}

const char* kModels[] = {"sphere-z2", "sphere-mz2", "torus-vertical", "klein-bott-model"};

} // namespace

TEST_CASE("height order")
{
    CHECK(order_by_height(lookup("sphere-z2").subs) == std::vector<int>{0, 1, 2});
    CHECK(order_by_height(lookup("sphere-mz2").subs) == std::vector<int>{1, 2, 0});
    CHECK(order_by_height(lookup("torus-vertical").subs) == std::vector<int>{0, 1});
    CHECK(order_by_height({lookup("sphere-z2").subs[0]}) == std::vector<int>{0});
}

TEST_CASE("bump profile")
{
    const BumpProfile b(0.1, 0.3);
    CHECK(b(0.0) == 1.0);
    CHECK(b(0.1) == 1.0);
    CHECK(b(0.3) == 0.0);
    CHECK(b(0.5) == 0.0);
    double prev = 1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = b(0.4 * i / 1000.0);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
    // Sup of the derivative, by finite differences.
    double best = 0.0;
    for (int i = 1; i < 2000; ++i) {
        const double r = 0.1 + 0.2 * i / 2000.0;
        best = std::max(best, std::abs(b(r + 1e-7) - b(r - 1e-7)) / 2e-7);
    }
    CHECK(b.gradient_bound == Catch::Approx(best).epsilon(1e-3));
    // Jet derivative of rho(q) agrees with the chain rule on the closed form.
    Jet q(0.04, 1);
    q.g[0] = 1.0;
    const Jet r = b.of_squared(q);
    const double fd = (b(std::sqrt(0.04 + 1e-7)) - b(std::sqrt(0.04 - 1e-7))) / 2e-7;
    CHECK(r.g[0] == Catch::Approx(fd).epsilon(1e-5));
}

TEST_CASE("neighborhood conditions on sphere-z2")
{
    const auto& e = lookup("sphere-z2");
    const auto ok = check_neighborhoods(e.manifold, e.field, e.subs, {0.25, 0.25, 0.25});
    CHECK(ok.pass);
    for (double v : ok.var)
        CHECK(v == Catch::Approx(0.0625).epsilon(0.02));
    // var ~ r^2 and gap 1: the sum bound needs r^2 < 1/6 before the margin.
    const auto big = check_neighborhoods(e.manifold, e.field, e.subs, {0.4, 0.4, 0.4});
    CHECK_FALSE(big.variation);
    CHECK_FALSE(big.pass);

    const auto built = build_neighborhoods(e.manifold, e.field, e.subs);
    CHECK(built.report.pass);
    for (const auto& t : built.tubes) {
        CHECK(t.inner_radius < t.outer_radius);
        CHECK(t.outer_radius * t.outer_radius < 1.0 / 6.0);
    }

    BottConfig strict;
    strict.radius_floor = 0.4;
    try {
        build_neighborhoods(e.manifold, e.field, e.subs, strict);
        FAIL("expected a construction error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::construction);
    }
}

TEST_CASE("equal heights skip the gap condition")
{
    const auto& e = lookup("sphere-z2");
    const std::vector<CriticalSubmanifold> poles{e.subs[1], e.subs[2]};
    const auto rep = check_neighborhoods(e.manifold, e.field, poles, {0.6, 0.6});
    CHECK(rep.variation);
    CHECK(rep.disjoint);
}

TEST_CASE("torus-vertical neighborhoods")
{
    const auto& e = lookup("torus-vertical");
    const auto built = build_neighborhoods(e.manifold, e.field, e.subs);
    REQUIRE(built.report.pass);
    const double gap = 2.0;
    CHECK(1.1 * (built.report.var[0] + built.report.var[1]) < gap / 3);
    CHECK(built.report.drop_samples > 0);
}

TEST_CASE("epsilon selection")
{
    const auto& e = lookup("sphere-z2");
    const auto nb = build_neighborhoods(e.manifold, e.field, e.subs);
    auto perts = [&](const std::vector<BumpProfile>& bumps, double scale) {
        std::vector<ScalarField> p;
        for (std::size_t j = 0; j < e.subs.size(); ++j)
            p.push_back(bump_times_fj(e.manifold, e.subs[j], bumps[j], e.fj[j].fj, scale));
        return p;
    };
    const auto base = choose_epsilon(e.manifold, e.field, e.subs, nb.bumps, perts(nb.bumps, 1.0));
    CHECK(base.epsilon > 0);
    CHECK(base.verified);
    CHECK(base.verify_margin > 1.0);

    const auto doubled = choose_epsilon(e.manifold, e.field, e.subs, nb.bumps, perts(nb.bumps, 2.0));
    CHECK(doubled.epsilon == Catch::Approx(base.epsilon / 2).epsilon(1e-9));

    std::vector<BumpProfile> steep;
    for (const auto& b : nb.bumps)
        steep.emplace_back(0.9 * b.outer, b.outer);
    const auto s = choose_epsilon(e.manifold, e.field, e.subs, steep, perts(steep, 1.0));
    CHECK(s.epsilon < base.epsilon);

    const auto forced = choose_epsilon(e.manifold, e.field, e.subs, nb.bumps, perts(nb.bumps, 1.0), {}, 5.0);
    CHECK(forced.epsilon == 5.0);
    CHECK_FALSE(forced.verified);
}

TEST_CASE("h agrees with f away from the neighborhoods")
{
    const Run& r = run("sphere-z2");
    const auto& e = *r.e;
    std::mt19937_64 rng(3);
    int outside = 0;
    for (int i = 0; i < 2000; ++i) {
        const Vec x = e.manifold.random_point(rng);
        bool in = false;
        for (std::size_t j = 0; j < e.subs.size(); ++j)
            for (const auto& t : e.subs[j].lifts)
                in = in || (t.in_domain(x) && t.normal_coords.value(x).norm() < r.plan.neighborhoods.tubes[j].outer_radius);
        if (in)
            continue;
        ++outside;
        CHECK(r.plan.h.value(x) == e.field.value(x));
        CHECK((r.plan.h.ambient_gradient(x) - e.field.ambient_gradient(x)).norm() == 0.0);
    }
    CHECK(outside > 100);
    // Inside the inner tube, h = f + eps f_j.
    const auto& eq = e.subs[0];
    const double eps = r.plan.eps.epsilon;
    for (double u : {0.0, 1.0, 2.5, 4.0}) {
        const Vec x = eq.lifts[0].chart_point(u, detail::vec({0.5 * r.plan.neighborhoods.tubes[0].inner_radius}));
        CHECK(r.plan.h.value(x) == Catch::Approx(e.field.value(x) + eps * e.fj[0].fj.value(x)).epsilon(1e-14));
    }
    // In the shell the gradient of f dominates.
    std::mt19937_64 rs(4);
    const auto& tb = r.plan.neighborhoods.tubes[0];
    for (int i = 0; i < 200; ++i) {
        std::uniform_real_distribution<double> uu(0, 6.28), rr(tb.inner_radius, tb.outer_radius);
        const Vec x = eq.lifts[0].chart_point(uu(rs), detail::vec({(i % 2 ? 1 : -1) * rr(rs)}));
        const Vec gh = projected_gradient(e.manifold, r.plan.h, x);
        const Vec gf = projected_gradient(e.manifold, e.field, x);
        CHECK((gh - gf).norm() < gf.norm());
        CHECK(gh.norm() > 0);
    }
}

TEST_CASE("critical points of h")
{
    CHECK(sorted_indices(run("sphere-z2").hc) == std::vector<int>{0, 1, 2, 2});
    CHECK(sorted_indices(run("sphere-mz2").hc) == std::vector<int>{0, 0, 1, 2});
    CHECK(sorted_indices(run("torus-vertical").hc) == std::vector<int>{0, 1, 1, 2});
    CHECK(sorted_indices(run("klein-bott-model").hc) == std::vector<int>{0, 0, 1, 1, 1, 2});
    for (const char* m : kModels) {
        const Run& r = run(m);
        INFO(m);
        CHECK(r.hc.stray_checked == r.plan.cfg.stray_samples);
        for (std::size_t i = 0; i < r.hc.points.size(); ++i) {
            const auto& sub = r.plan.subs[r.hc.owner[i]];
            CHECK(r.hc.points[i].index == sub.bott_index + r.hc.relative_index[i]);
            CHECK(projected_gradient(r.e->manifold, r.plan.h, r.hc.points[i].location).norm() < 1e-9);
        }
        // Chain groups: nu_n^h = sum_{lambda_j + k = n} nu_k^j.
        for (int n = 0; n <= r.cx.dim; ++n) {
            int s = 0;
            for (const auto& c : r.sc) {
                const int k = n - r.plan.subs[c.sub].bott_index;
                s += c.cx.nu(k);
            }
            CHECK(s == r.cx.nu(n));
        }
    }
    CHECK(morse_polynomial(run("sphere-z2").cx.nu_profile()).pretty() == "1 + t + 2t^2");
}

TEST_CASE("chain decomposition")
{
    const Run& s = run("sphere-z2");
    REQUIRE(s.cx.generators[1] == std::vector<std::string>{"equator.max"});
    const auto one = decompose_chain({1}, 1, s.cx, s.plan, s.sc);
    REQUIRE(one.components.size() == 1);
    CHECK(one.top == 0);
    CHECK(s.plan.subs[one.components[0].sub].id == "equator");

    REQUIRE(s.cx.generators[2] == std::vector<std::string>{"north", "south"});
    const auto ns = decompose_chain({1, -1}, 2, s.cx, s.plan, s.sc);
    REQUIRE(ns.components.size() == 2);
    CHECK(s.plan.subs[ns.components[ns.top].sub].id == "south");

    const Run& t = run("torus-vertical");
    std::vector<BigInt> mixed(t.cx.nu(1), 1);
    const auto g = decompose_chain(mixed, 1, t.cx, t.plan, t.sc);
    REQUIRE(g.components.size() == 2);
    CHECK(t.plan.subs[g.components[g.top].sub].id == "top");
    CHECK(t.plan.subs[g.components[0].sub].id == "bottom");

    ChainComplexData fake = s.cx;
    fake.generators[1] = {"bogus"};
    try {
        decompose_chain({1}, 1, fake, s.plan, s.sc);
        FAIL("expected a bookkeeping error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::bookkeeping);
    }
}

TEST_CASE("boundary lemma, downhill flow and top parts")
{
    for (const char* m : kModels) {
        INFO(m);
        const Run& r = run(m);
        const auto bl = verify_boundary_lemma(r.plan, r.cx, r.sc);
        CHECK(bl.pass);
        for (const auto& f : bl.failures)
            WARN(f);
        int circles = 0;
        for (const auto& s : r.plan.subs)
            circles += s.dim == 1;
        CHECK(static_cast<int>(bl.pairs.size()) == circles);
        for (const auto& p : bl.pairs) {
            CHECK(p.unsigned_h == 2);
            CHECK(p.mod2_h == 0);
        }
        CHECK(verify_no_uphill_connections(r.plan, r.hc, r.cx).pass);
        const auto tp = verify_top_part(r.cx, r.plan, r.sc);
        CHECK(tp.pass);
        for (const auto& d : tp.degrees) {
            CHECK(d.sum_sub_kernels >= d.kernel_rank_h);
            CHECK(d.selected == d.kernel_rank_h);
        }
    }
    const auto tp = verify_top_part(run("sphere-z2").cx, run("sphere-z2").plan, run("sphere-z2").sc);
    CHECK(tp.degrees[2].kernel_rank_h == 1);
    CHECK(tp.degrees[2].sum_sub_kernels == 2);
    CHECK(tp.degrees[1].kernel_rank_h == 1);
    CHECK(tp.degrees[1].sum_sub_kernels == 1);
}

TEST_CASE("Morse-Bott remainder agrees with polynomial division")
{
    for (const char* m : kModels) {
        INFO(m);
        const Run& r = run(m);
        const Ring ring = r.e->default_ring();
        std::vector<BottTerm> terms;
        std::vector<SubmanifoldKernels> ks;
        for (std::size_t j = 0; j < r.plan.subs.size(); ++j) {
            terms.push_back({from_profile(r.plan.fj[j].betti), r.plan.subs[j].bott_index});
            ks.push_back({r.plan.subs[j].bott_index, kernel_ranks(r.sc[j].cx)});
        }
        const auto mb = morse_bott_polynomial(terms);
        const auto p = from_profile(r.e->known_betti(ring));
        const auto rr = morse_bott_R(ks, kernel_ranks(r.cx));
        CHECK(rr.nonnegative);
        const auto q = (mb - p).divide_by_one_plus_t();
        REQUIRE(q);
        CHECK(*q == rr.R);
        CHECK(verify_morse_bott_identity(mb, p, rr.R).pass);
        CHECK(poincare_polynomial(homology_profile(r.cx)) == p);
    }
    const Run& s = run("sphere-z2");
    std::vector<SubmanifoldKernels> ks;
    for (std::size_t j = 0; j < s.plan.subs.size(); ++j)
        ks.push_back({s.plan.subs[j].bott_index, kernel_ranks(s.sc[j].cx)});
    CHECK(morse_bott_R(ks, kernel_ranks(s.cx)).R == IntPolynomial{0, 1});
    auto z = kernel_ranks(s.cx);
    z[2] = 3;
    const auto bad = morse_bott_R(ks, z);
    CHECK_FALSE(bad.nonnegative);
    CHECK(bad.negative_degree == 1);
}

TEST_CASE("plan JSON")
{
    const auto j = to_json(run("sphere-z2").plan);
    CHECK(j["model"] == "sphere-z2");
    CHECK(j["submanifolds"].size() == 3);
    CHECK(j["epsilon"].get<double>() > 0);
    CHECK(j["submanifolds"][0]["f_j"]["a"] == 2.0);
    CHECK(j["height_order"][0] == "equator");
}
