// dualsim: simulate consistent conservative particle systems and verify
// their intertwining, duality and reversibility identities.

#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dualsim/gsip.hpp"
#include "dualsim/orthopoly.hpp"
#include "dualsim/suite.hpp"

namespace {

using dualsim::AlphaMeasure;
using dualsim::ConductanceFn;
using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    return json::parse(in);
}

int cmd_sample_pascal(const std::string& config_path, std::size_t draws,
                      std::uint64_t seed, const std::string& out_path) {
    const json cfg = load_json(config_path);
    const AlphaMeasure alpha = dualsim::parse_alpha(cfg.at("alpha"));
    const double p = cfg.at("p").get<double>();
    const auto cells = dualsim::parse_cells(cfg.at("cells"), dualsim::Space::Continuum);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", out_path));
    out << "draw";
    for (std::size_t k = 0; k < cells.size(); ++k) out << fmt::format(",cell{}", k);
    out << "\n";
    for (std::size_t r = 0; r < draws; ++r) {
        const auto eta = dualsim::sample_pascal(alpha, p, seed, r);
        out << r;
        for (const auto& cell : cells) out << fmt::format(",{}", eta.count_in(cell));
        out << "\n";
    }
    return 0;
}

int cmd_simulate_gsip(const std::string& config_path, const std::string& out_path) {
    const json cfg = load_json(config_path);
    const AlphaMeasure alpha = dualsim::parse_alpha(cfg.at("alpha"));
    const ConductanceFn c = dualsim::parse_conductance(cfg.at("c"));
    dualsim::GsipConfig run;
    run.t_end = cfg.at("t_end").get<double>();
    run.seed = cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 1u;
    run.record_events = true;
    if (cfg.contains("max_events"))
        run.max_events = cfg.at("max_events").get<std::uint64_t>();
    const auto eta0 = cfg.at("eta0").get<std::vector<double>>();

    const auto result = dualsim::labelled_gsip_simulate(eta0, c, alpha, run);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", out_path));
    for (const auto& ev : result.log) {
        nlohmann::ordered_json line;
        line["time"] = ev.time;
        line["event"] = ev.piled ? "pile" : "fresh";
        line["particle"] = ev.particle;
        line["destination"] = ev.destination;
        out << line.dump() << "\n";
    }
    nlohmann::ordered_json tail;
    tail["time"] = result.time_reached;
    tail["event"] = result.truncated ? "truncated" : "end";
    tail["positions"] = result.positions;
    out << tail.dump() << "\n";
    return 0;
}

int cmd_emit_polynomials(const std::string& family, unsigned n_max, unsigned x_max,
                         double a, double p, const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", out_path));
    out << "n,x,value\n";
    for (unsigned n = 0; n <= n_max; ++n) {
        for (unsigned x = 0; x <= x_max; ++x) {
            double value = 0.0;
            if (family == "charlier")
                value = dualsim::charlier(n, static_cast<double>(x), a);
            else if (family == "meixner")
                value = dualsim::meixner(n, static_cast<double>(x), a, p);
            else if (family == "krawtchouk")
                value = dualsim::krawtchouk(n, static_cast<double>(x),
                                            static_cast<unsigned>(a), p);
            else
                throw std::runtime_error(fmt::format("unknown family '{}'", family));
            out << fmt::format("{},{},{}\n", n, x, value);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"particle system duality and intertwining verification"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "execute a verification suite from a JSON config");
    std::string config_path;
    dualsim::SuiteOverrides overrides;
    std::uint64_t seed_flag = 0;
    std::size_t samples_flag = 0;
    run->add_option("--config", config_path, "suite configuration file")->required();
    auto* seed_opt = run->add_option("--seed", seed_flag, "override the master seed");
    auto* samples_opt =
        run->add_option("--samples", samples_flag, "override the Monte Carlo sample count");
    run->add_option("--out", overrides.out_dir, "output directory for report.json/csv");

    // sample-pascal
    auto* pascal = app.add_subcommand("sample-pascal", "draw Pascal point process cell counts");
    std::string pascal_config, pascal_out = "pascal_counts.csv";
    std::size_t draws = 10000;
    std::uint64_t pascal_seed = 1;
    pascal->add_option("--config", pascal_config, "JSON with alpha, p, cells")->required();
    pascal->add_option("--draws", draws, "number of configurations");
    pascal->add_option("--seed", pascal_seed, "RNG seed");
    pascal->add_option("--out", pascal_out, "output CSV path");

    // simulate-gsip
    auto* gsip = app.add_subcommand("simulate-gsip", "run one trajectory with an event log");
    std::string gsip_config, gsip_out = "gsip_events.jsonl";
    gsip->add_option("--config", gsip_config, "JSON with alpha, c, eta0, t_end, seed")
        ->required();
    gsip->add_option("--out", gsip_out, "output JSON-lines path");

    // emit-polynomials
    auto* poly = app.add_subcommand("emit-polynomials", "tabulate a polynomial family as CSV");
    std::string family = "meixner", poly_out = "polynomials.csv";
    unsigned n_max = 5, x_max = 20;
    double fam_a = 1.0, fam_p = 0.5;
    poly->add_option("--family", family, "charlier | meixner | krawtchouk");
    poly->add_option("--n-max", n_max, "highest degree");
    poly->add_option("--x-max", x_max, "highest evaluation point");
    poly->add_option("--a", fam_a, "Charlier mean / Meixner shape / Krawtchouk trials");
    poly->add_option("--p", fam_p, "Meixner or Krawtchouk success parameter");
    poly->add_option("--out", poly_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (*seed_opt) overrides.seed = seed_flag;
            if (*samples_opt) overrides.samples = samples_flag;
            return dualsim::run_suite(config_path, overrides);
        }
        if (pascal->parsed())
            return cmd_sample_pascal(pascal_config, draws, pascal_seed, pascal_out);
        if (gsip->parsed()) return cmd_simulate_gsip(gsip_config, gsip_out);
        if (poly->parsed())
            return cmd_emit_polynomials(family, n_max, x_max, fam_a, fam_p, poly_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
