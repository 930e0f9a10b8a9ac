#include <random>

#include <boost/multiprecision/cpp_int.hpp>
#include <catch_amalgamated.hpp>

#include "msw/complex.hpp"

using namespace msw;
using boost::multiprecision::cpp_rational;

namespace
{

int rational_rank(const IntMatrix& m)
{
    std::vector<std::vector<cpp_rational>> a(m.rows(), std::vector<cpp_rational>(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            a[i][j] = cpp_rational(m(i, j));
    int rank = 0;
    for (int j = 0; j < m.cols() && rank < m.rows(); ++j) {
        int p = -1;
        for (int i = rank; i < m.rows(); ++i)
            if (a[i][j] != 0) {
                p = i;
                break;
            }
        if (p < 0)
            continue;
        std::swap(a[rank], a[p]);
        for (int i = rank + 1; i < m.rows(); ++i) {
            const cpp_rational f = a[i][j] / a[rank][j];
            for (int k = j; k < m.cols(); ++k)
                a[i][k] -= f * a[rank][k];
        }
        ++rank;
    }
    return rank;
}

IntMatrix random_matrix(std::mt19937_64& rng, int r, int c, int lo, int hi)
{
    std::uniform_int_distribution<int> d(lo, hi);
    IntMatrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            m(i, j) = d(rng);
    return m;
}

std::vector<CriticalPoint> classify(const CatalogEntry& e)
{
    std::vector<CriticalPoint> pts;
    for (const auto& s : e.seeds)
        pts.push_back(classify_critical_point(e.manifold, e.field, s.location, s.id));
    return pts;
}

} // namespace

TEST_CASE("smith rank examples")
{
    const auto r = smith_rank(IntMatrix{{2, 0}, {0, 0}});
    CHECK(r.rank == 1);
    CHECK(r.kernel_rank == 1);
    const auto z = smith_rank(IntMatrix(3, 4));
    CHECK(z.rank == 0);
    CHECK(z.kernel_rank == 4);
    const auto e = smith_rank(IntMatrix(0, 2));
    CHECK(e.rank == 0);
    CHECK(e.kernel_rank == 2);
}

TEST_CASE("smith normal form invariants divide each other")
{
    const SmithForm s = smith_normal_form(IntMatrix{{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}});
    REQUIRE(s.invariants.size() == 3);
    CHECK(s.invariants[0] == 2);
    CHECK(s.invariants[1] == 6);
    CHECK(s.invariants[2] == 12);
    CHECK(torsion(IntMatrix{{2}}) == std::vector<BigInt>{2});
}

TEST_CASE("smith rank agrees with rational elimination on random matrices")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int r = 1 + trial % 5, c = 1 + (trial / 5) % 5;
        IntMatrix m = random_matrix(rng, r, c, -3, 3);
        if (trial % 3 == 0 && r > 1)  // force dependent rows
            for (int j = 0; j < c; ++j)
                m(r - 1, j) = 2 * m(0, j) - m(r - 2, j);
        INFO("trial " << trial << "\n" << m.to_text());
        const auto sr = smith_rank(m);
        CHECK(sr.rank == rational_rank(m));
        CHECK(sr.kernel_rank == c - sr.rank);
        const IntMatrix k = kernel_basis(m);
        CHECK(k.cols() == sr.kernel_rank);
        CHECK((m * k).is_zero());
        CHECK(rational_rank(k) == k.cols());
    }
}

TEST_CASE("large entries do not overflow")
{
    IntMatrix m(2, 2);
    m(0, 0) = BigInt("123456789012345678901234567890");
    m(0, 1) = BigInt("246913578024691357802469135780");
    m(1, 0) = 1;
    m(1, 1) = 2;
    CHECK(smith_rank(m).rank == 1);
}

TEST_CASE("mod-2 elimination")
{
    CHECK(rank_mod2(IntMatrix{{2, 0}, {0, 0}}).rank == 0);
    CHECK(rank_mod2(IntMatrix{{1, 1}, {1, 1}}).rank == 1);
    CHECK(rank_mod2(IntMatrix{{1, 0}, {1, 1}}).rank == 2);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
        const IntMatrix m = random_matrix(rng, 4, 5, 0, 1);
        const IntMatrix k = kernel_basis_mod2(m);
        CHECK(k.cols() == rank_mod2(m).kernel_rank);
        CHECK((m * k).reduced_mod2().is_zero());
    }
}

TEST_CASE("d squared witness on a hand-built complex")
{
    const auto bad = make_complex(Ring::integers, {{"a"}, {"b"}, {"c"}}, {IntMatrix(0, 1), IntMatrix{{1}}, IntMatrix{{1}}});
    const DdResult r = verify_dd_zero(bad);
    CHECK_FALSE(r.pass);
    CHECK(r.degree == 1);
    CHECK(r.source == "c");
    CHECK(r.target == "a");
    CHECK(r.value == 1);
    const auto zero = make_complex(Ring::integers, {{"a"}, {"b"}, {"c"}}, {IntMatrix(0, 1), IntMatrix(1, 1), IntMatrix(1, 1)});
    CHECK(verify_dd_zero(zero).pass);
    // Over Z2 the product 2 vanishes.
    const auto two = make_complex(Ring::mod2, {{"a"}, {"b", "b2"}, {"c"}},
                                  {IntMatrix(0, 1), IntMatrix{{1, 1}}, IntMatrix{{1}, {1}}});
    CHECK(verify_dd_zero(two).pass);
    CHECK_THROWS_AS(make_complex(Ring::integers, {{"a"}, {"b"}}, {IntMatrix(0, 1), IntMatrix(2, 1)}), Error);
}

TEST_CASE("sphere-height complex")
{
    const auto& e = lookup("sphere-height");
    const auto cx = build_complex(e.manifold, e.field, classify(e), Ring::integers);
    CHECK(cx.nu_profile() == std::vector<int>{1, 0, 1});
    CHECK(cx.boundary(1).is_zero());
    CHECK(cx.boundary(2).is_zero());
    CHECK(kernel_ranks(cx) == std::vector<int>{1, 0, 1});
    CHECK(homology_profile(cx).betti == std::vector<int>{1, 0, 1});
}

TEST_CASE("tilted torus boundaries vanish over Z")
{
    const auto& e = lookup("torus-tilted");
    const auto cx = build_complex(e.manifold, e.field, classify(e), Ring::integers);
    CHECK(cx.boundary(1).rows() == 1);
    CHECK(cx.boundary(1).cols() == 2);
    CHECK(cx.boundary(2).rows() == 2);
    CHECK(cx.boundary(2).cols() == 1);
    CHECK(cx.boundary(1).is_zero());
    CHECK(cx.boundary(2).is_zero());
    CHECK(kernel_ranks(cx) == std::vector<int>{1, 2, 1});
    for (const auto& c : cx.counts)
        CHECK(c.unsigned_count == 2);
}

TEST_CASE("integer coefficients are refused on nonorientable models")
{
    for (const char* name : {"rp2", "klein"}) {
        const auto& e = lookup(name);
        try {
            build_complex(e.manifold, e.field, classify(e), Ring::integers);
            FAIL("expected a ring error");
        } catch (const Error& err) {
            CHECK(err.kind() == ErrorKind::ring);
        }
    }
}

TEST_CASE("catalog Morse complexes reproduce singular homology")
{
    for (const auto& e : catalog()) {
        if (e.kind != ModelKind::morse)
            continue;
        const auto pts = classify(e);
        for (Ring ring : {Ring::integers, Ring::mod2}) {
            if (ring == Ring::integers && !e.manifold.orientable)
                continue;
            INFO(e.name << " " << to_string(ring));
            const auto cx = build_complex(e.manifold, e.field, pts, ring);
            CHECK(verify_dd_zero(cx).pass);
            const auto h = homology_profile(cx);
            CHECK(h.betti == e.known_betti(ring));
            int chi_nu = 0, chi_b = 0;
            for (int k = 0; k <= cx.dim; ++k) {
                chi_nu += (k % 2 ? -1 : 1) * cx.nu(k);
                chi_b += (k % 2 ? -1 : 1) * h.betti[k];
                CHECK(cx.nu(k) == h.kernel_ranks[k] + h.image_ranks[k]);
            }
            CHECK(chi_nu == chi_b);
            if (ring == Ring::integers) {
                // Reducing the integer complex mod 2 agrees with the independent mod-2 run.
                const auto cx2 = build_complex(e.manifold, e.field, pts, Ring::mod2);
                for (int k = 0; k <= cx.dim; ++k)
                    CHECK(rank_mod2(cx.boundary(k)).kernel_rank == kernel_ranks(cx2)[k]);
            }
        }
    }
}

TEST_CASE("complex JSON carries generators and matrices")
{
    const auto& e = lookup("circle-height");
    const auto cx = build_complex(e.manifold, e.field, classify(e), Ring::integers);
    const auto j = to_json(cx);
    CHECK(j["ring"] == "Z");
    CHECK(j["generators"][0][0] == "min");
    CHECK(j["boundaries"][0]["entries"].size() == 1);
    CHECK(cx.boundary(1).to_text() == "1 1\n0\n");
}
