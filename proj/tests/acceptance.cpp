// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "msw/report.hpp"

using namespace msw;

namespace
{

struct Run
{
    std::string model;
    Ring ring;
    bool bott;
    RunReport report;
    std::string error;
    double seconds = 0.0;
};

double since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Run> run_all(const RunOptions& opt)
{
    std::vector<Run> out;
    for (const auto& e : catalog())
        for (Ring ring : {Ring::integers, Ring::mod2}) {
            if (ring == Ring::integers && (!e.manifold.orientable || e.manifold.deck))
                continue;
            Run r{e.name, ring, e.kind == ModelKind::morse_bott, {}, {}};
            const auto t0 = std::chrono::steady_clock::now();
            try {
                r.report = r.bott ? run_morse_bott(e.name, ring, opt) : run_morse(e.name, ring, opt);
            } catch (const Error& err) {
                r.error = err.what();
            }
            r.seconds = since(t0);
            out.push_back(std::move(r));
        }
    return out;
}

std::string label(const Run& r) { return r.model + "/" + to_string(r.ring); }

bool ok(const Run& r, const std::string& verdict) { return r.error.empty() && r.report.verdict(verdict); }

const Run* find(const std::vector<Run>& runs, const std::string& model, Ring ring)
{
    for (const auto& r : runs)
        if (r.model == model && r.ring == ring)
            return &r;
    return nullptr;
}

nlohmann::json flow_counts(const Run& r)
{
    if (!r.error.empty())
        return nullptr;
    if (!r.bott)
        return r.report.data["complex"]["flow_counts"];
    nlohmann::json j = {{"h", r.report.data["complex_h"]["flow_counts"]}};
    for (const auto& c : r.report.data["complexes_fj"])
        j["fj"].push_back(c.contains("complex") ? c["complex"]["flow_counts"] : c);
    return j;
}

int failures = 0;

void line(int n, const std::string& title, bool pass, const std::string& detail)
{
    std::printf("%s  %d. %s%s%s\n", pass ? "PASS" : "FAIL", n, title.c_str(), detail.empty() ? "" : ": ",
                detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

} // namespace

int main()
{
    const auto t_suite = std::chrono::steady_clock::now();
    const std::vector<Run> runs = run_all({});

    // 1
    {
        bool pass = true;
        std::string detail;
        double worst = 0;
        for (const auto& r : runs) {
            worst = std::max(worst, r.seconds);
            if (!ok(r, "dd_zero") || r.seconds >= 60.0) {
                pass = false;
                detail += label(r) + (r.error.empty() ? "" : " (" + r.error + ")") + "; ";
            }
        }
        if (pass)
            detail = std::to_string(runs.size()) + " complexes, slowest " + std::to_string(worst) + " s";
        line(1, "chain complexes square to zero", pass, detail);
    }

    // 2
    {
        struct Oracle
        {
            std::string model;
            Ring ring;
            std::vector<int> betti;
        };
        const std::vector<Oracle> oracles = {
            {"sphere-height", Ring::integers, {1, 0, 1}}, {"torus-tilted", Ring::integers, {1, 2, 1}},
            {"circle-height", Ring::integers, {1, 1}},    {"rp2", Ring::mod2, {1, 1, 1}},
            {"klein", Ring::mod2, {1, 2, 1}},
        };
        bool pass = true;
        std::string detail;
        for (const auto& o : oracles) {
            const Run* r = find(runs, o.model, o.ring);
            if (!r || !r->error.empty() || r->report.data["homology"]["betti"].get<std::vector<int>>() != o.betti) {
                pass = false;
                detail += o.model + "; ";
            }
        }
        for (const auto& r : runs)
            if (!ok(r, "betti_oracle")) {
                pass = false;
                detail += label(r) + "; ";
            }
        line(2, "Betti numbers match singular homology", pass, detail);
    }

    // 3
    {
        bool pass = true;
        std::string detail;
        int n = 0;
        for (const auto& r : runs) {
            if (r.bott)
                continue;
            ++n;
            for (const char* v : {"morse_identity", "remainder_nonnegative", "divisible_by_1_plus_t",
                                  "remainder_two_routes", "weak_inequalities", "strong_inequalities"})
                if (!ok(r, v)) {
                    pass = false;
                    detail += label(r) + " " + v + "; ";
                }
        }
        line(3, "polynomial Morse inequalities", pass, pass ? std::to_string(n) + " Morse runs" : detail);
    }

    // 4
    {
        bool pass = true;
        std::string detail;
        const Run* s = find(runs, "sphere-z2", Ring::integers);
        if (!s || !s->error.empty()) {
            pass = false;
            detail += "sphere-z2 did not run; ";
        } else {
            const auto& p = s->report.data["polynomials"];
            if (p["morse_bott"]["text"] != "1 + t + 2t^2" || p["poincare"]["text"] != "1 + t^2" ||
                p["remainder"]["text"] != "t") {
                pass = false;
                detail += "sphere-z2 polynomials " + p.dump() + "; ";
            }
        }
        const Run* v = find(runs, "torus-vertical", Ring::integers);
        if (!v || !v->error.empty() || v->report.data["polynomials"]["remainder"]["text"] != "0") {
            pass = false;
            detail += "torus-vertical remainder; ";
        }
        for (const auto& r : runs)
            if (r.bott)
                for (const char* n : {"morse_bott_identity", "remainder_nonnegative", "remainder_two_routes"})
                    if (!ok(r, n)) {
                        pass = false;
                        detail += label(r) + " " + n + "; ";
                    }
        line(4, "Morse-Bott inequalities", pass, detail);
    }

    // 5
    {
        bool pass = true;
        std::string detail;
        int pairs = 0;
        for (const auto& r : runs) {
            if (!r.bott)
                continue;
            if (!ok(r, "boundary_lemma")) {
                pass = false;
                detail += label(r) + "; ";
                continue;
            }
            pairs += static_cast<int>(r.report.data["boundary_lemma"]["pairs"].size());
        }
        line(5, "boundary operator restricts to each submanifold", pass,
             pass ? std::to_string(pairs) + " relative-index-one pairs, no mismatches" : detail);
    }

    // 6
    {
        bool pass = true;
        std::string detail;
        for (const auto& r : runs)
            if (r.bott && !(ok(r, "top_part") && ok(r, "kernel_inequality") && ok(r, "no_uphill_connections"))) {
                pass = false;
                detail += label(r) + "; ";
            }
        line(6, "independent top parts and kernel-rank inequality", pass, detail);
    }

    // 7
    {
        bool pass = true;
        std::string detail;
        for (const auto& r : runs) {
            if (!r.bott)
                continue;
            for (const char* n : {"epsilon_condition", "index_additivity", "stray_free", "neighborhoods"})
                if (!ok(r, n)) {
                    pass = false;
                    detail += label(r) + " " + n + "; ";
                }
            if (r.error.empty()) {
                const auto& plan = r.report.data["plan"];
                if (plan["epsilon_verify_samples"].get<int>() < 1000 ||
                    r.report.data["stray_sweep"]["samples"].get<int>() < 10000) {
                    pass = false;
                    detail += label(r) + " sample counts; ";
                }
            }
        }
        line(7, "perturbation is well formed", pass, detail);
    }

    // 8
    {
        RunOptions fine;
        fine.flow = FlowConfig{}.refined();
        const auto refined = run_all(fine);
        bool pass = refined.size() == runs.size();
        std::string detail;
        for (std::size_t i = 0; pass && i < runs.size(); ++i) {
            const Run& a = runs[i];
            const Run& b = refined[i];
            if (!b.error.empty() || flow_counts(a) != flow_counts(b) ||
                a.report.data["verdicts"] != b.report.data["verdicts"]) {
                pass = false;
                detail += label(a) + (b.error.empty() ? "" : " (" + b.error + ")") + "; ";
            }
        }
        const double total = since(t_suite);
        pass = pass && total < 900.0;
        line(8, "counts and verdicts stable under refinement", pass,
             detail.empty() ? std::to_string(runs.size()) + " runs, 2 configurations, " + std::to_string(total) + " s"
                            : detail);
    }
    return failures ? 1 : 0;
}
