#ifndef MSW_REPORT_HPP_
#define MSW_REPORT_HPP_

// End-to-end runs over catalog models, JSON reports and trajectory dumps.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "msw/bott.hpp"
#include "msw/catalog.hpp"
#include "msw/complex.hpp"
#include "msw/flow.hpp"
#include "msw/poly.hpp"

namespace msw
{

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kDensityEnv = "MSW_SAMPLE_DENSITY";

/// Sample-density multiplier from the environment (1 when unset or invalid).
inline double sample_density()
{
    const char* s = std::getenv(kDensityEnv);
    if (!s || !*s)
        return 1.0;
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || !(v > 0) || v > 100)
        throw Error(ErrorKind::domain, std::string(kDensityEnv) + " must be a positive number up to 100, got '" +
                                           s + "'");
    return v;
}

inline FlowConfig flow_config_for(double density)
{
    FlowConfig c;
    c.link_samples = std::max(8, static_cast<int>(std::lround(c.link_samples * density)));
    return c;
}

struct RunOptions
{
    FlowConfig flow;
    BottConfig bott;
    std::optional<double> epsilon_override;
    std::optional<std::uint64_t> seed_override;  // sampling seed of the perturbation plan

    static RunOptions from_environment()
    {
        const double d = sample_density();
        RunOptions o;
        o.flow = flow_config_for(d);
        o.bott = BottConfig{}.scaled(d);
        return o;
    }
};

struct RunReport
{
    std::string model;
    Ring ring = Ring::integers;
    nlohmann::json data;  // deterministic content
    std::vector<std::pair<std::string, bool>> verdicts;
    double seconds = 0.0;  // wall time, kept out of `data`

    bool pass() const
    {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.second; });
    }
    bool verdict(const std::string& name) const
    {
        for (const auto& [n, v] : verdicts)
            if (n == name)
                return v;
        throw Error(ErrorKind::internal, "no verdict named " + name);
    }
    void set(const std::string& name, bool v)
    {
        verdicts.emplace_back(name, v);
        data["verdicts"][name] = v;
    }
};

namespace detail
{

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e);
    }
}

inline nlohmann::json census_json(const std::vector<CriticalPoint>& pts)
{
    nlohmann::json c = nlohmann::json::array();
    for (const auto& p : pts)
        c.push_back({{"id", p.id}, {"index", p.index}, {"value", p.function_value}, {"location", to_json_vec(p.location)}});
    return c;
}

inline nlohmann::json poly_json(const IntPolynomial& p) { return {{"coefficients", p.coefficients()}, {"text", p.pretty()}}; }

inline void require_ring(const CatalogEntry& e, Ring ring)
{
    if (ring == Ring::integers && (!e.manifold.orientable || e.manifold.deck))
        throw Error(ErrorKind::ring, e.name + " is not orientable; integer coefficients are unavailable (use z2)");
}

inline double since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// classify -> count -> complex -> homology -> polynomials -> verdicts.
inline RunReport run_morse(const std::string& model, Ring ring, const RunOptions& opt = {})
{
    const auto t0 = std::chrono::steady_clock::now();
    const CatalogEntry& e = detail::stage("lookup", [&]() -> const CatalogEntry& {
        const auto& c = lookup(model);
        if (c.kind != ModelKind::morse)
            throw Error(ErrorKind::domain, model + " is a Morse-Bott model; use the bott verb");
        return c;
    });
    detail::stage("precondition", [&] {
        detail::require_ring(e, ring);
        return 0;
    });
    RunReport r;
    r.model = model;
    r.ring = ring;
    r.data["schema_version"] = kSchemaVersion;
    r.data["model"] = model;
    r.data["kind"] = "morse";
    r.data["ring"] = to_string(ring);

    const auto pts = detail::stage("classify", [&] {
        std::vector<CriticalPoint> v;
        for (const auto& s : e.seeds) {
            v.push_back(classify_critical_point(e.manifold, e.field, s.location, s.id));
            if (v.back().index != s.expected_index)
                throw Error(ErrorKind::inconsistency, s.id + " has index " + std::to_string(v.back().index) +
                                                          ", catalog says " + std::to_string(s.expected_index));
        }
        return v;
    });
    r.data["critical_points"] = detail::census_json(pts);
    const auto cx = detail::stage("complex", [&] { return build_complex(e.manifold, e.field, pts, ring, opt.flow); });
    r.data["complex"] = to_json(cx);
    const auto dd = verify_dd_zero(cx);
    const auto h = detail::stage("homology", [&] { return homology_profile(cx); });
    r.data["homology"] = to_json(h);

    detail::stage("polynomials", [&] {
        const IntPolynomial M = morse_polynomial(cx.nu_profile());
        const IntPolynomial P = poincare_polynomial(h);
        const RemainderResult R = morse_R(cx.nu_profile(), h.kernel_ranks);
        const auto Rdiv = (M - P).divide_by_one_plus_t();
        const IdentityCheck id = verify_morse_identity(M, P, R.R);
        const InequalityCheck ineq = check_inequalities(M, P, cx.dim);
        r.data["polynomials"] = {{"morse", detail::poly_json(M)},
                                 {"poincare", detail::poly_json(P)},
                                 {"remainder", detail::poly_json(R.R)},
                                 {"remainder_by_division", Rdiv ? detail::poly_json(*Rdiv) : nlohmann::json()}};
        r.set("dd_zero", dd.pass);
        r.set("betti_oracle", h.betti == e.known_betti(ring));
        r.set("divisible_by_1_plus_t", Rdiv.has_value());
        r.set("remainder_two_routes", Rdiv && *Rdiv == R.R);
        r.set("remainder_nonnegative", R.nonnegative);
        r.set("morse_identity", id.pass);
        r.set("weak_inequalities", ineq.weak);
        r.set("strong_inequalities", ineq.strong && ineq.euler_equality);
        return 0;
    });
    if (!dd.pass)
        r.data["dd_witness"] = {{"degree", dd.degree}, {"source", dd.source}, {"target", dd.target}, {"value", dd.value.str()}};
    r.seconds = detail::since(t0);
    return r;
}

/// Plan -> h -> complexes of h and of each f_j -> perturbation checks ->
/// Morse-Bott polynomial identity.
inline RunReport run_morse_bott(const std::string& model, Ring ring, const RunOptions& opt = {})
{
    const auto t0 = std::chrono::steady_clock::now();
    const CatalogEntry& e = detail::stage("lookup", [&]() -> const CatalogEntry& {
        const auto& c = lookup(model);
        if (c.kind != ModelKind::morse_bott)
            throw Error(ErrorKind::domain, model + " is a Morse model; use the morse verb");
        return c;
    });
    detail::stage("precondition", [&] {
        detail::require_ring(e, ring);
        return 0;
    });
    RunReport r;
    r.model = model;
    r.ring = ring;
    r.data["schema_version"] = kSchemaVersion;
    r.data["model"] = model;
    r.data["kind"] = "morse-bott";
    r.data["ring"] = to_string(ring);

    BottConfig bc = opt.bott;
    if (opt.seed_override)
        bc.seed = *opt.seed_override;
    const PerturbationPlan plan = detail::stage("plan", [&] { return make_plan(e, bc, opt.epsilon_override); });
    r.data["plan"] = to_json(plan);
    const HCriticalData hc = detail::stage("critical-points", [&] { return critical_points_of_h(e.manifold, plan); });
    r.data["critical_points"] = detail::census_json(hc.points);
    r.data["stray_sweep"] = {{"samples", hc.stray_checked}, {"newton_searches", hc.stray_newton}};
    const auto cx = detail::stage("complex-h", [&] { return build_complex(e.manifold, plan.h, hc.points, ring, opt.flow); });
    r.data["complex_h"] = to_json(cx);
    const auto sc = detail::stage("complex-fj", [&] { return build_sub_complexes(plan, ring, opt.flow); });
    nlohmann::json scj = nlohmann::json::array();
    for (const auto& s : sc)
        scj.push_back({{"submanifold", plan.subs[s.sub].id}, {"complex", to_json(s.cx)}, {"kernel_ranks", kernel_ranks(s.cx)}});
    r.data["complexes_fj"] = scj;
    const auto hp = detail::stage("homology", [&] { return homology_profile(cx); });
    r.data["homology_h"] = to_json(hp);

    detail::stage("verification", [&] {
        r.set("epsilon_condition", plan.eps.verified);
        r.set("neighborhoods", plan.neighborhoods.report.pass);
        bool additive = true;
        for (std::size_t i = 0; i < hc.points.size(); ++i)
            additive = additive && hc.points[i].index == plan.subs[hc.owner[i]].bott_index + hc.relative_index[i];
        r.set("index_additivity", additive);
        r.set("stray_free", hc.stray_checked == bc.stray_samples);
        bool groups = true;
        for (int n = 0; n <= cx.dim; ++n) {
            int s = 0;
            for (const auto& c : sc)
                s += c.cx.nu(n - plan.subs[c.sub].bott_index);
            groups = groups && s == cx.nu(n);
        }
        r.set("chain_groups", groups);
        bool dd = verify_dd_zero(cx).pass;
        for (const auto& s : sc)
            dd = dd && verify_dd_zero(s.cx).pass;
        r.set("dd_zero", dd);

        const auto bl = verify_boundary_lemma(plan, cx, sc);
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& p : bl.pairs)
            pairs.push_back({{"submanifold", plan.subs[p.sub].id},
                             {"source", p.source},
                             {"target", p.target},
                             {"unsigned_h", p.unsigned_h},
                             {"unsigned_fj", p.unsigned_fj},
                             {"signed_h", p.signed_h ? nlohmann::json(*p.signed_h) : nlohmann::json()},
                             {"signed_fj", p.signed_fj ? nlohmann::json(*p.signed_fj) : nlohmann::json()}});
        r.data["boundary_lemma"] = {{"pairs", pairs}, {"global_sign", bl.global_sign}, {"failures", bl.failures}};
        r.set("boundary_lemma", bl.pass);

        const auto up = verify_no_uphill_connections(plan, hc, cx);
        r.data["uphill"] = {{"cross_connections", up.cross_entries}, {"violations", up.violations}};
        r.set("no_uphill_connections", up.pass);

        const auto tp = verify_top_part(cx, plan, sc);
        nlohmann::json degs = nlohmann::json::array();
        bool ineq = true;
        for (const auto& d : tp.degrees) {
            ineq = ineq && d.inequality;
            degs.push_back({{"degree", d.degree},
                            {"kernel_rank_h", d.kernel_rank_h},
                            {"sum_sub_kernel_ranks", d.sum_sub_kernels},
                            {"selected", d.selected},
                            {"top_parts", d.witnesses},
                            {"failures", d.failures}});
        }
        r.data["top_part"] = degs;
        r.set("top_part", tp.pass);
        r.set("kernel_inequality", ineq);
        return 0;
    });

    detail::stage("polynomials", [&] {
        std::vector<BottTerm> terms;
        std::vector<SubmanifoldKernels> ks;
        bool sub_betti = true;
        for (std::size_t j = 0; j < plan.subs.size(); ++j) {
            terms.push_back({from_profile(plan.fj[j].betti), plan.subs[j].bott_index});
            ks.push_back({plan.subs[j].bott_index, kernel_ranks(sc[j].cx)});
            // Stored P_t(C_j) checked against the complex of f_j on C_j.
            sub_betti = sub_betti && homology_profile(sc[j].cx).betti == plan.fj[j].betti;
        }
        const IntPolynomial MB = morse_bott_polynomial(terms);
        const IntPolynomial P = poincare_polynomial(hp);
        const RemainderResult R = morse_bott_R(ks, kernel_ranks(cx));
        const auto Rdiv = (MB - P).divide_by_one_plus_t();
        const IdentityCheck id = verify_morse_bott_identity(MB, P, R.R);
        r.data["polynomials"] = {{"morse_bott", detail::poly_json(MB)},
                                 {"morse_h", detail::poly_json(morse_polynomial(cx.nu_profile()))},
                                 {"poincare", detail::poly_json(P)},
                                 {"remainder", detail::poly_json(R.R)},
                                 {"remainder_by_division", Rdiv ? detail::poly_json(*Rdiv) : nlohmann::json()}};
        if (R.negative_degree)
            r.data["remainder_negative_degree"] = *R.negative_degree;
        r.set("submanifold_poincare", sub_betti);
        r.set("betti_oracle", hp.betti == e.known_betti(ring));
        r.set("divisible_by_1_plus_t", Rdiv.has_value());
        r.set("remainder_two_routes", Rdiv && *Rdiv == R.R);
        r.set("remainder_nonnegative", R.nonnegative);
        r.set("morse_bott_identity", id.pass);
        return 0;
    });
    r.seconds = detail::since(t0);
    return r;
}

struct FlowDump
{
    std::vector<std::string> line_files;
    std::string basin_file;
};

/// Trajectory CSVs, one per flow line between critical points of adjacent
/// index (of h for Morse-Bott models), plus a file of basin samples.
inline FlowDump dump_flows(const std::string& model, const std::string& out_dir, const RunOptions& opt = {},
                           int basin_samples = 200)
{
    namespace fs = std::filesystem;
    const CatalogEntry& e = lookup(model);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw Error(ErrorKind::io, "cannot create output directory '" + out_dir + "'");

    ScalarField field = e.field;
    std::vector<CriticalPoint> pts;
    if (e.kind == ModelKind::morse) {
        for (const auto& s : e.seeds)
            pts.push_back(classify_critical_point(e.manifold, e.field, s.location, s.id));
    } else {
        BottConfig bc = opt.bott;
        if (opt.seed_override)
            bc.seed = *opt.seed_override;
        const PerturbationPlan plan = make_plan(e, bc, opt.epsilon_override);
        pts = critical_points_of_h(e.manifold, plan).points;
        field = plan.h;
    }
    CriticalSet crit;
    crit.points = pts;
    FlowDump d;
    for (int qi = 0; qi < static_cast<int>(pts.size()); ++qi) {
        if (pts[qi].index == 0)
            continue;
        const LinkSweep sw = sweep_unstable_link(e.manifold, field, crit, qi, opt.flow, true, CountRoute::automatic,
                                                 e.manifold.orientable && !e.manifold.deck);
        int n = 0;
        for (const auto& l : sw.lines) {
            const std::string f = (fs::path(out_dir) / (l.source + "__" + l.target + "__" + std::to_string(n++) + ".csv")).string();
            write_trajectory_csv(l.trajectory, f);
            d.line_files.push_back(f);
        }
    }
    d.basin_file = (fs::path(out_dir) / "basin_samples.csv").string();
    std::ofstream out(d.basin_file);
    if (!out)
        throw Error(ErrorKind::io, "cannot open '" + d.basin_file + "' for writing");
    std::mt19937_64 rng(7);
    out << "sample";
    for (int i = 1; i <= e.manifold.ambient_dim; ++i)
        out << ",x" << i;
    out << ",limit\n";
    out.precision(17);
    for (int i = 0; i < basin_samples; ++i) {
        const Vec x = e.manifold.random_point(rng);
        std::string lim;
        try {
            lim = limit_assignment(e.manifold, field, x, crit, opt.flow);
        } catch (const Error& err) {
            lim = std::string("error:") + to_string(err.kind());
        }
        out << i;
        for (int k = 0; k < x.size(); ++k)
            out << ',' << x[k];
        out << ',' << lim << '\n';
    }
    if (!out)
        throw Error(ErrorKind::io, "write failed for '" + d.basin_file + "'");
    return d;
}

/// Runs every catalog model with every compatible ring.
inline std::vector<RunReport> run_catalog(const RunOptions& opt = {})
{
    std::vector<RunReport> out;
    for (const auto& e : catalog())
        for (Ring ring : {Ring::integers, Ring::mod2}) {
            if (ring == Ring::integers && (!e.manifold.orientable || e.manifold.deck))
                continue;
            out.push_back(e.kind == ModelKind::morse ? run_morse(e.name, ring, opt) : run_morse_bott(e.name, ring, opt));
        }
    return out;
}

inline nlohmann::json catalog_report_json(const std::vector<RunReport>& runs)
{
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    nlohmann::json a = nlohmann::json::array();
    bool all = true;
    for (const auto& r : runs) {
        a.push_back(r.data);
        all = all && r.pass();
    }
    j["runs"] = a;
    j["all_pass"] = all;
    return j;
}

} // namespace msw

#endif // MSW_REPORT_HPP_
