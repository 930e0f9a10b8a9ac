#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "msw/report.hpp"

namespace
{

using namespace msw;

Ring parse_ring(const std::string& s, const CatalogEntry& e)
{
    if (s.empty())
        return e.default_ring();
    if (s == "z" || s == "Z")
        return Ring::integers;
    if (s == "z2" || s == "Z2")
        return Ring::mod2;
    throw Error(ErrorKind::domain, "unknown ring '" + s + "' (expected z or z2)");
}

void print_matrices(const nlohmann::json& cx)
{
    for (const auto& b : cx["boundaries"]) {
        std::cout << "  d_" << b["degree"].get<int>() << " (" << b["rows"].get<int>() << "x" << b["cols"].get<int>()
                  << "):";
        if (b["entries"].empty() || b["entries"][0].empty())
            std::cout << " (empty)";
        for (const auto& row : b["entries"]) {
            std::cout << "\n    ";
            for (const auto& v : row)
                std::cout << ' ' << v.get<long long>();
        }
        std::cout << '\n';
    }
}

void print_report(const RunReport& r)
{
    const auto& d = r.data;
    std::cout << r.model << " over " << to_string(r.ring) << '\n';
    std::cout << "critical points:\n";
    for (const auto& p : d["critical_points"])
        std::cout << "  " << p["id"].get<std::string>() << "  index " << p["index"].get<int>() << "  value "
                  << p["value"].get<double>() << '\n';
    if (d.contains("plan"))
        std::cout << "epsilon: " << d["plan"]["epsilon"].get<double>() << '\n';
    std::cout << "boundary matrices:\n";
    print_matrices(d.contains("complex") ? d["complex"] : d["complex_h"]);
    const auto& h = d.contains("homology") ? d["homology"] : d["homology_h"];
    std::cout << "kernel ranks: " << h["kernel_ranks"].dump() << "\nbetti: " << h["betti"].dump() << '\n';
    const auto& poly = d["polynomials"];
    for (const auto& [name, p] : poly.items())
        if (!p.is_null())
            std::cout << name << ": " << p["text"].get<std::string>() << '\n';
    std::cout << "verdicts:\n";
    for (const auto& [name, v] : r.verdicts)
        std::cout << "  " << (v ? "PASS " : "FAIL ") << name << '\n';
    std::cout << (r.pass() ? "all verdicts pass" : "some verdicts fail") << " (" << r.seconds << " s)\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Morse-Smale-Witten complexes and Morse-Bott perturbations on catalog manifolds.\n"
                 "Set " + std::string(kDensityEnv) + " to scale every sample count (default 1)."};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "List catalog models");
    bool list_json = false;
    list->add_flag("--json", list_json, "Print the catalog descriptors as JSON");

    std::string model, ring, out_dir, json_path, report_json;
    std::optional<double> eps_override;
    std::optional<std::uint64_t> seed;

    auto* morse = app.add_subcommand("morse", "Morse complex, homology and polynomial Morse inequalities");
    morse->add_option("model", model, "Catalog model")->required();
    morse->add_option("--ring", ring, "Coefficients: z or z2 (default: z when orientable)");
    morse->add_option("--json", json_path, "Also write the run report to this file");

    auto* bott = app.add_subcommand("bott", "Perturb a Morse-Bott model and verify the Morse-Bott inequalities");
    bott->add_option("model", model, "Catalog model")->required();
    bott->add_option("--ring", ring, "Coefficients: z or z2 (default: z when orientable)");
    bott->add_option("--epsilon-override", eps_override, "Use this epsilon instead of the computed one");
    bott->add_option("--seed", seed, "Sampling seed for the perturbation plan");
    bott->add_option("--json", json_path, "Also write the run report to this file");

    auto* flows = app.add_subcommand("flows", "Dump flow-line trajectories as CSV");
    flows->add_option("model", model, "Catalog model")->required();
    flows->add_option("--out", out_dir, "Output directory")->required();

    auto* report = app.add_subcommand("report", "Run every catalog model and write a JSON report");
    report->add_option("--json", report_json, "Output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunOptions opt = RunOptions::from_environment();
        opt.epsilon_override = eps_override;
        opt.seed_override = seed;
        auto write_json = [](const nlohmann::json& j, const std::string& path) {
            std::ofstream out(path);
            if (!out)
                throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
            out << j.dump(2) << '\n';
            if (!out)
                throw Error(ErrorKind::io, "write failed for '" + path + "'");
        };

        if (*list) {
            if (list_json) {
                nlohmann::json a = nlohmann::json::array();
                for (const auto& e : catalog())
                    a.push_back(describe(e));
                std::cout << a.dump(2) << '\n';
            } else {
                for (const auto& e : catalog())
                    std::printf("%-18s %-10s dim %d in R^%d  %-13s %s\n", e.name.c_str(),
                                e.kind == ModelKind::morse ? "morse" : "morse-bott", e.manifold.intrinsic_dim,
                                e.manifold.ambient_dim, e.manifold.orientable ? "orientable" : "nonorientable",
                                e.description.c_str());
            }
            return 0;
        }
        if (*morse || *bott) {
            const Ring r = parse_ring(ring, lookup(model));
            const RunReport rep = *morse ? run_morse(model, r, opt) : run_morse_bott(model, r, opt);
            print_report(rep);
            if (!json_path.empty())
                write_json(rep.data, json_path);
            return rep.pass() ? 0 : 1;
        }
        if (*flows) {
            const FlowDump d = dump_flows(model, out_dir, opt);
            for (const auto& f : d.line_files)
                std::cout << f << '\n';
            std::cout << d.basin_file << '\n' << d.line_files.size() << " flow-line files\n";
            return 0;
        }
        if (*report) {
            const auto runs = run_catalog(opt);
            const nlohmann::json j = catalog_report_json(runs);
            write_json(j, report_json);
            for (const auto& r : runs)
                std::printf("%-4s %-18s %-3s %6.1f s\n", r.pass() ? "PASS" : "FAIL", r.model.c_str(),
                            to_string(r.ring), r.seconds);
            return j["all_pass"].get<bool>() ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    return 0;
}
