#include "dualsim/report.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

namespace dualsim {

VerificationReport VerificationReport::exact_check(std::string name, std::string inputs,
                                                   double lhs, double rhs,
                                                   double tolerance) {
    VerificationReport r;
    r.check = std::move(name);
    r.inputs = std::move(inputs);
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_diff = std::fabs(lhs - rhs);
    r.exact = true;
    r.tolerance = tolerance;
    r.pass = r.abs_diff <= tolerance;
    return r;
}

VerificationReport VerificationReport::exact_max(std::string name, std::string inputs,
                                                 double max_abs_dev, double lhs_at_worst,
                                                 double rhs_at_worst, double tolerance) {
    VerificationReport r;
    r.check = std::move(name);
    r.inputs = std::move(inputs);
    r.lhs = lhs_at_worst;
    r.rhs = rhs_at_worst;
    r.abs_diff = max_abs_dev;
    r.exact = true;
    r.tolerance = tolerance;
    r.pass = max_abs_dev <= tolerance;
    return r;
}

VerificationReport VerificationReport::mc_check(std::string name, std::string inputs,
                                                double lhs, double rhs, double std_error,
                                                std::uint64_t seed) {
    VerificationReport r;
    r.check = std::move(name);
    r.inputs = std::move(inputs);
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_diff = std::fabs(lhs - rhs);
    r.exact = false;
    r.std_error = std::max(std_error, kMcErrorFloor);
    r.z_score = r.abs_diff / r.std_error;
    r.seed = seed;
    r.pass = std::fabs(r.z_score) <= 3.0;
    return r;
}

std::string to_json(const std::vector<VerificationReport>& reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["check"] = r.check;
        j["inputs"] = r.inputs;
        j["lhs"] = r.lhs;
        j["rhs"] = r.rhs;
        j["abs_diff"] = r.abs_diff;
        if (r.exact) {
            j["tolerance"] = r.tolerance;
        } else {
            j["std_error"] = r.std_error;
            j["z_score"] = r.z_score;
            j["seed"] = r.seed;
        }
        j["pass"] = r.pass;
        // wall time stays in memory only: identical config + seed must give
        // byte-identical report files
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string to_csv(const std::vector<VerificationReport>& reports) {
    std::string out = "check,lhs,rhs,diff,tol_or_se,pass\n";
    for (const auto& r : reports) {
        out += fmt::format("{},{},{},{},{},{}\n", r.check, r.lhs, r.rhs, r.abs_diff,
                           r.exact ? r.tolerance : r.std_error, r.pass ? 1 : 0);
    }
    return out;
}

}  // namespace dualsim
