#pragma once

// Verification reports: one record per named check, exact (tolerance) or
// Monte Carlo (standard error + z score), with deterministic JSON and CSV
// renderings.

#include <cstdint>
#include <string>
#include <vector>

namespace dualsim {

struct VerificationReport {
    std::string check;
    std::string inputs;      // short digest of the inputs
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
    bool exact = true;       // exact mode (tolerance) vs MC mode (std error)
    double tolerance = 0.0;  // exact mode
    double std_error = 0.0;  // MC mode
    double z_score = 0.0;    // MC mode
    bool pass = false;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;

    // pass <=> abs_diff <= tolerance
    static VerificationReport exact_check(std::string name, std::string inputs, double lhs,
                                          double rhs, double tolerance);
    // pass <=> |z| <= 3, with z = diff / max(se, floor)
    static VerificationReport mc_check(std::string name, std::string inputs, double lhs,
                                       double rhs, double std_error, std::uint64_t seed);
    // worst deviation over a family of exact comparisons
    static VerificationReport exact_max(std::string name, std::string inputs,
                                        double max_abs_dev, double lhs_at_worst,
                                        double rhs_at_worst, double tolerance);
};

// variance floor that prevents vacuous MC passes when the variance is ~0
inline constexpr double kMcErrorFloor = 1e-12;

std::string to_json(const std::vector<VerificationReport>& reports);
std::string to_csv(const std::vector<VerificationReport>& reports);

}  // namespace dualsim
