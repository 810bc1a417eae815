#include "dualsim/suite.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <stdexcept>

#include <fmt/format.h>

#include "dualsim/report.hpp"
#include "dualsim/verify.hpp"

namespace dualsim {

namespace {

using nlohmann::json;

double get_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace

SiteSystem parse_site_system(const json& j) {
    SiteSystem sys;
    sys.m = j.at("m").get<int>();
    sys.c = j.at("c").get<std::vector<std::vector<double>>>();
    sys.alpha = j.at("alpha").get<std::vector<double>>();
    sys.sigma = j.at("sigma").get<int>();
    sys.validate();
    return sys;
}

AlphaMeasure parse_alpha(const json& j) {
    std::vector<double> levels = j.at("cells").get<std::vector<double>>();
    std::vector<std::pair<double, double>> atoms;
    if (j.contains("atoms"))
        for (const auto& a : j.at("atoms"))
            atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    return AlphaMeasure(std::move(levels), std::move(atoms));
}

ConductanceFn parse_conductance(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return ConductanceFn::constant(j.at("kappa").get<double>());
    if (kind == "piecewise")
        return ConductanceFn::piecewise(j.at("boundaries").get<std::vector<double>>(),
                                        j.at("d").get<std::vector<std::vector<double>>>());
    throw std::invalid_argument(fmt::format("unknown conductance kind '{}'", kind));
}

std::vector<Cell> parse_cells(const json& j, Space space) {
    std::vector<Cell> cells;
    for (const auto& c : j) {
        if (space == Space::Continuum)
            cells.push_back(Cell::interval(c.at(0).get<double>(), c.at(1).get<double>()));
        else
            cells.push_back(Cell::of_sites(c.get<std::vector<int>>()));
    }
    return cells;
}

SymmetricFn parse_tensor_fn(const json& j, Space space) {
    return SymmetricFn::tensor_indicator(parse_cells(j.at("cells"), space),
                                         j.at("degrees").get<std::vector<unsigned>>());
}

namespace {

using CheckFn = std::function<std::vector<VerificationReport>()>;

struct PlannedCheck {
    std::string name;
    CheckFn run;
};

IntertwinerKind parse_mode(const json& j) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "classical") return IntertwinerKind::Classical;
    if (mode == "orthogonal") return IntertwinerKind::Orthogonal;
    throw std::invalid_argument(fmt::format("unknown intertwiner mode '{}'", mode));
}

DualityKind parse_duality_kind(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cheap") return DualityKind::Cheap;
    if (kind == "classical") return DualityKind::Classical;
    if (kind == "orthogonal") return DualityKind::Orthogonal;
    throw std::invalid_argument(fmt::format("unknown duality kind '{}'", kind));
}

PlannedCheck plan_check(const json& entry, std::uint64_t seed, std::size_t samples) {
    const std::string name = entry.at("name").get<std::string>();

    if (name == "commutator") {
        const SiteSystem sys = parse_site_system(entry.at("system"));
        const unsigned n = entry.at("n").get<unsigned>();
        const double tol = get_or(entry, "tolerance", 1e-12);
        return {name, [=] {
                    return std::vector<VerificationReport>{commutator_check(sys, n, tol)};
                }};
    }
    if (name == "duality") {
        const SiteSystem sys = parse_site_system(entry.at("system"));
        const double theta = entry.at("theta").get<double>();
        const DualityKind kind = parse_duality_kind(entry);
        const double t = entry.at("t").get<double>();
        const auto xi = entry.at("xi").get<std::vector<int>>();
        const auto eta = entry.at("eta").get<std::vector<int>>();
        const double tol = get_or(entry, "tolerance", 1e-10);
        return {name, [=] {
                    return std::vector<VerificationReport>{
                        duality_check(sys, theta, kind, t, xi, eta, tol)};
                }};
    }
    if (name == "intertwining") {
        const SiteSystem sys = parse_site_system(entry.at("system"));
        const unsigned n = entry.at("n").get<unsigned>();
        const unsigned total = entry.at("total").get<unsigned>();
        const double t = entry.at("t").get<double>();
        const IntertwinerKind kind = parse_mode(entry);
        const double theta = get_or(entry, "theta", 1.0);
        const double tol = get_or(entry, "tolerance", 1e-9);
        const SymmetricFn f = parse_tensor_fn(entry.at("f"), Space::Discrete);
        return {name, [=] {
                    return std::vector<VerificationReport>{exact_intertwining_discrete(
                        sys, n, total, t, f, kind, theta, tol)};
                }};
    }
    if (name == "meixner-product") {
        const AlphaMeasure alpha = parse_alpha(entry.at("alpha"));
        const double p = entry.at("p").get<double>();
        const auto cells = parse_cells(entry.at("cells"), Space::Continuum);
        const auto degrees = entry.at("degrees").get<std::vector<unsigned>>();
        const auto configs = static_cast<std::size_t>(get_or(entry, "configs", 100));
        const auto mc = static_cast<std::size_t>(get_or(
            entry, "mc_samples", static_cast<double>(samples)));
        return {name, [=] {
                    return meixner_product_check(alpha, p, cells, degrees, configs, mc, seed);
                }};
    }
    if (name == "charlier-product") {
        const AlphaMeasure intensity = parse_alpha(entry.at("alpha"));
        const auto cells = parse_cells(entry.at("cells"), Space::Continuum);
        const auto degrees = entry.at("degrees").get<std::vector<unsigned>>();
        const auto configs = static_cast<std::size_t>(get_or(entry, "configs", 100));
        return {name, [=] {
                    return charlier_product_check(intensity, cells, degrees, configs, seed);
                }};
    }
    if (name == "lambda-orthogonality") {
        const AlphaMeasure alpha = parse_alpha(entry.at("alpha"));
        const double p = entry.at("p").get<double>();
        const auto cells = parse_cells(entry.at("cells"), Space::Continuum);
        const auto degrees = entry.at("degrees").get<std::vector<unsigned>>();
        return {name, [=] { return lambda_orthogonality_check(alpha, p, cells, degrees); }};
    }
    if (name == "factorization") {
        const AlphaMeasure alpha = parse_alpha(entry.at("alpha"));
        const double p = get_or(entry, "p", 0.5);
        const auto cells = parse_cells(entry.at("cells"), Space::Continuum);
        const auto left = entry.at("left").get<std::vector<unsigned>>();
        const auto right = entry.at("right").get<std::vector<unsigned>>();
        const auto configs = static_cast<std::size_t>(get_or(entry, "configs", 100));
        const std::string sampler_name = entry.at("sampler").get<std::string>();
        IndependentSampler sampler;
        if (sampler_name == "poisson")
            sampler = IndependentSampler::Poisson;
        else if (sampler_name == "pascal")
            sampler = IndependentSampler::Pascal;
        else
            throw std::invalid_argument(
                fmt::format("unknown sampler '{}'", sampler_name));
        return {name, [=] {
                    return std::vector<VerificationReport>{factorization_check(
                        sampler, alpha, p, cells, left, right, configs, seed)};
                }};
    }
    if (name == "pascal-sampler") {
        const AlphaMeasure alpha = parse_alpha(entry.at("alpha"));
        const double p = entry.at("p").get<double>();
        const auto cells = parse_cells(entry.at("cells"), Space::Continuum);
        std::vector<std::vector<double>> laplace;
        if (entry.contains("laplace"))
            laplace = entry.at("laplace").get<std::vector<std::vector<double>>>();
        const auto n = static_cast<std::size_t>(
            get_or(entry, "samples", static_cast<double>(samples)));
        return {name, [=] { return pascal_sampler_check(alpha, p, cells, laplace, n, seed); }};
    }
    if (name == "stationarity-gsip") {
        const AlphaMeasure alpha = parse_alpha(entry.at("alpha"));
        const double p = entry.at("p").get<double>();
        const ConductanceFn c = parse_conductance(entry.at("c"));
        const double t = entry.at("t").get<double>();
        const auto n = static_cast<std::size_t>(
            get_or(entry, "samples", static_cast<double>(samples)));
        return {name, [=] { return stationarity_check_gsip(alpha, p, c, t, n, seed); }};
    }
    if (name == "gsip-reduction") {
        const AlphaMeasure alpha = parse_alpha(entry.at("alpha"));
        const ConductanceFn c = parse_conductance(entry.at("c"));
        const auto counts = entry.at("counts").get<std::vector<int>>();
        const double t = entry.at("t").get<double>();
        const auto n = static_cast<std::size_t>(
            get_or(entry, "samples", static_cast<double>(samples)));
        return {name, [=] { return gsip_reduction_check(alpha, c, counts, t, n, seed); }};
    }
    if (name == "mc-intertwining-gsip") {
        const AlphaMeasure alpha = parse_alpha(entry.at("alpha"));
        const ConductanceFn c = parse_conductance(entry.at("c"));
        const auto eta0 =
            CountingMeasure::continuum(entry.at("eta0").get<std::vector<double>>());
        const SymmetricFn f = parse_tensor_fn(entry.at("f"), Space::Continuum);
        McIntertwiningOptions opt;
        opt.n = entry.at("n").get<unsigned>();
        opt.t = entry.at("t").get<double>();
        opt.samples = static_cast<std::size_t>(
            get_or(entry, "samples", static_cast<double>(samples)));
        opt.seed = seed;
        return {name, [=] {
                    return std::vector<VerificationReport>{
                        mc_classical_intertwining_gsip(eta0, f, c, alpha, opt)};
                }};
    }
    throw std::invalid_argument(fmt::format("unknown check '{}'", name));
}

}  // namespace

int run_suite(const std::string& config_path, const SuiteOverrides& overrides) {
    json config;
    std::vector<PlannedCheck> plan;
    try {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", config_path));
        config = json::parse(in);
        const auto master_seed = overrides.seed.value_or(
            config.contains("seed") ? config.at("seed").get<std::uint64_t>() : 1u);
        const auto samples = overrides.samples.value_or(
            config.contains("samples") ? config.at("samples").get<std::size_t>() : 10000u);
        std::size_t idx = 0;
        for (const auto& entry : config.at("checks")) {
            const std::uint64_t check_seed =
                entry.contains("seed") ? entry.at("seed").get<std::uint64_t>()
                                      : master_seed + 7919 * idx;
            plan.push_back(plan_check(entry, check_seed, samples));
            ++idx;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    // run checks concurrently, merge reports in declaration order
    std::vector<std::future<std::vector<VerificationReport>>> futures;
    futures.reserve(plan.size());
    for (auto& check : plan)
        futures.push_back(std::async(std::launch::async, [&check] {
            const auto start = std::chrono::steady_clock::now();
            auto reports = check.run();
            const auto stop = std::chrono::steady_clock::now();
            const double ms =
                std::chrono::duration<double, std::milli>(stop - start).count();
            for (auto& r : reports) r.wall_ms = ms;
            return reports;
        }));

    std::vector<VerificationReport> all;
    bool failed = false;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        try {
            for (auto& r : futures[i].get()) {
                failed = failed || !r.pass;
                all.push_back(std::move(r));
            }
        } catch (const std::exception& e) {
            std::fprintf(stderr, "check '%s' error: %s\n", plan[i].name.c_str(), e.what());
            return 2;
        }
    }

    namespace fs = std::filesystem;
    fs::create_directories(overrides.out_dir);
    {
        std::ofstream out(fs::path(overrides.out_dir) / "report.json");
        out << to_json(all);
    }
    {
        std::ofstream out(fs::path(overrides.out_dir) / "report.csv");
        out << to_csv(all);
    }
    for (const auto& r : all)
        std::printf("%-38s %s\n", r.check.c_str(), r.pass ? "pass" : "FAIL");
    return failed ? 1 : 0;
}

}  // namespace dualsim
