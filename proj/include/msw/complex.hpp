#ifndef MSW_COMPLEX_HPP_
#define MSW_COMPLEX_HPP_

// Morse-Smale-Witten chain complex from flow-line counts; ranks, kernels,
// homology over the integers and mod 2.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msw/catalog.hpp"
#include "msw/flow.hpp"
#include "msw/integer_matrix.hpp"

namespace msw
{

struct ChainComplexData
{
    Ring ring = Ring::integers;
    int dim = 0;
    std::vector<std::vector<std::string>> generators;  // degree k -> ids
    std::vector<std::vector<double>> values;           // parallel to generators
    // boundaries[k] : C_k -> C_{k-1}, shape nu_{k-1} x nu_k; boundaries[0] is 0 x nu_0.
    std::vector<IntMatrix> boundaries;
    std::vector<FlowLineCount> counts;
    std::vector<LinkSweep> sweeps;  // kept when built with recording

    int nu(int k) const { return k < 0 || k > dim ? 0 : static_cast<int>(generators[k].size()); }
    std::vector<int> nu_profile() const
    {
        std::vector<int> v;
        for (int k = 0; k <= dim; ++k)
            v.push_back(nu(k));
        return v;
    }
    const IntMatrix& boundary(int k) const { return boundaries.at(k); }
};

/// Critical points grouped by index, ordered by (value, input order) within each degree.
inline std::vector<std::vector<int>> order_generators(const std::vector<CriticalPoint>& pts, int dim)
{
    std::vector<std::vector<int>> by_degree(dim + 1);
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        if (pts[i].index < 0 || pts[i].index > dim)
            throw Error(ErrorKind::index, "critical point " + pts[i].id + " has index out of range");
        by_degree[pts[i].index].push_back(i);
    }
    for (auto& d : by_degree)
        std::stable_sort(d.begin(), d.end(), [&](int a, int b) {
            return pts[a].function_value < pts[b].function_value;
        });
    return by_degree;
}

/// Matrix-only complex (used for hand-built examples and tests).
inline ChainComplexData make_complex(Ring ring, std::vector<std::vector<std::string>> generators,
                                     std::vector<IntMatrix> boundaries)
{
    ChainComplexData cx;
    cx.ring = ring;
    cx.dim = static_cast<int>(generators.size()) - 1;
    cx.generators = std::move(generators);
    for (const auto& g : cx.generators)
        cx.values.emplace_back(g.size(), 0.0);
    cx.boundaries = std::move(boundaries);
    if (static_cast<int>(cx.boundaries.size()) != cx.dim + 1)
        throw Error(ErrorKind::domain, "make_complex: need one boundary matrix per degree");
    for (int k = 0; k <= cx.dim; ++k)
        if (cx.boundaries[k].rows() != cx.nu(k - 1) || cx.boundaries[k].cols() != cx.nu(k))
            throw Error(ErrorKind::domain, "make_complex: boundary " + std::to_string(k) + " has wrong shape");
    return cx;
}

/// Builds the complex of a Morse function from its classified critical points.
/// Entry (p, q) of D_k is n(q, p): the signed count over the integers, the
/// parity count mod 2.
inline ChainComplexData build_complex(const ManifoldModel& mfd, const ScalarField& field,
                                      const std::vector<CriticalPoint>& pts, Ring ring, const FlowConfig& cfg = {},
                                      bool record = false)
{
    if (ring == Ring::integers && (!mfd.orientable || mfd.deck))
        throw Error(ErrorKind::ring, "build_complex: " + mfd.name +
                                         " is not orientable; integer coefficients are unavailable (use mod 2)");
    const int m = mfd.intrinsic_dim;
    CriticalSet crit;
    crit.points = pts;
    const auto order = order_generators(pts, m);

    ChainComplexData cx;
    cx.ring = ring;
    cx.dim = m;
    cx.generators.resize(m + 1);
    cx.values.resize(m + 1);
    for (int k = 0; k <= m; ++k)
        for (int i : order[k]) {
            cx.generators[k].push_back(pts[i].id);
            cx.values[k].push_back(pts[i].function_value);
        }

    // One sweep per source of positive index; sources are independent.
    std::vector<int> sources;
    for (int k = 1; k <= m; ++k)
        for (int i : order[k])
            sources.push_back(i);
    std::vector<LinkSweep> sweeps(sources.size());
    detail::parallel_for(static_cast<int>(sources.size()), cfg.threads, [&](int s) {
        FlowConfig inner = cfg;
        inner.threads = 1;
        sweeps[s] = sweep_unstable_link(mfd, field, crit, sources[s], inner, record, CountRoute::automatic,
                                        ring == Ring::integers);
    });
    for (const auto& sw : sweeps)
        if (!sw.violations.empty()) {
            const auto& v = sw.violations.front();
            throw Error(ErrorKind::transversality, "build_complex: connection " + v.source + " -> " + v.target +
                                                       " between critical points whose index does not drop");
        }

    cx.boundaries.emplace_back(0, cx.nu(0));
    std::size_t s = 0;
    for (int k = 1; k <= m; ++k) {
        IntMatrix d(cx.nu(k - 1), cx.nu(k));
        for (int col = 0; col < cx.nu(k); ++col, ++s) {
            for (int row = 0; row < cx.nu(k - 1); ++row) {
                const FlowLineCount c = tally(sweeps[s], crit, order[k - 1][row], ring == Ring::integers);
                d(row, col) = ring == Ring::integers ? BigInt(*c.signed_sum) : BigInt(c.mod2_sum);
                cx.counts.push_back(c);
            }
        }
        cx.boundaries.push_back(std::move(d));
    }
    if (record)
        cx.sweeps = std::move(sweeps);
    return cx;
}

struct DdResult
{
    bool pass = true;
    int degree = -1;  // k with D_k D_{k+1} != 0
    std::string source;  // generator in degree k + 1
    std::string target;  // generator in degree k - 1
    BigInt value = 0;
};

/// Exact check D_k D_{k+1} = 0 (mod 2 for mod-2 complexes).
inline DdResult verify_dd_zero(const ChainComplexData& cx)
{
    DdResult r;
    for (int k = 1; k < cx.dim; ++k) {
        const IntMatrix p = cx.boundaries[k] * cx.boundaries[k + 1];
        for (int i = 0; i < p.rows(); ++i)
            for (int j = 0; j < p.cols(); ++j) {
                BigInt v = p(i, j);
                if (cx.ring == Ring::mod2)
                    v %= 2;
                if (v != 0) {
                    r.pass = false;
                    r.degree = k;
                    r.source = cx.generators[k + 1][j];
                    r.target = cx.generators[k - 1][i];
                    r.value = p(i, j);
                    return r;
                }
            }
    }
    return r;
}

inline RankPair ring_rank(const IntMatrix& m, Ring ring) { return ring == Ring::integers ? smith_rank(m) : rank_mod2(m); }

/// z_k = rank ker D_k for k = 0..m.
inline std::vector<int> kernel_ranks(const ChainComplexData& cx)
{
    std::vector<int> z;
    for (int k = 0; k <= cx.dim; ++k)
        z.push_back(ring_rank(cx.boundaries[k], cx.ring).kernel_rank);
    return z;
}

struct HomologyProfile
{
    std::vector<int> betti;
    std::vector<int> kernel_ranks;
    std::vector<int> image_ranks;  // rank D_k
    std::vector<std::vector<std::string>> torsion;  // integer runs: invariants > 1 of D_{k+1}
};

inline HomologyProfile homology_profile(const ChainComplexData& cx)
{
    HomologyProfile h;
    for (int k = 0; k <= cx.dim; ++k) {
        const RankPair r = ring_rank(cx.boundaries[k], cx.ring);
        h.kernel_ranks.push_back(r.kernel_rank);
        h.image_ranks.push_back(r.rank);
    }
    for (int k = 0; k <= cx.dim; ++k) {
        const int next = k < cx.dim ? h.image_ranks[k + 1] : 0;
        const int b = h.kernel_ranks[k] - next;
        if (b < 0)
            throw Error(ErrorKind::internal, "homology_profile: negative Betti number in degree " + std::to_string(k));
        h.betti.push_back(b);
        std::vector<std::string> t;
        if (cx.ring == Ring::integers && k < cx.dim)
            for (const auto& d : torsion(cx.boundaries[k + 1]))
                t.push_back(d.str());
        h.torsion.push_back(std::move(t));
    }
    return h;
}

inline nlohmann::json matrix_json(const IntMatrix& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j)
            r.push_back(m(i, j).convert_to<long long>());
        rows.push_back(r);
    }
    return rows;
}

inline nlohmann::json to_json(const ChainComplexData& cx)
{
    nlohmann::json j;
    j["ring"] = to_string(cx.ring);
    j["generators"] = cx.generators;
    nlohmann::json b = nlohmann::json::array();
    for (int k = 1; k <= cx.dim; ++k)
        b.push_back({{"degree", k},
                     {"rows", cx.boundaries[k].rows()},
                     {"cols", cx.boundaries[k].cols()},
                     {"entries", matrix_json(cx.boundaries[k])}});
    j["boundaries"] = b;
    nlohmann::json c = nlohmann::json::array();
    for (const auto& fc : cx.counts)
        c.push_back(to_json(fc));
    j["flow_counts"] = c;
    return j;
}

inline nlohmann::json to_json(const HomologyProfile& h)
{
    return {{"betti", h.betti},
            {"kernel_ranks", h.kernel_ranks},
            {"image_ranks", h.image_ranks},
            {"torsion", h.torsion}};
}

} // namespace msw

#endif // MSW_COMPLEX_HPP_
