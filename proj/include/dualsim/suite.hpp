#pragma once

// Config-driven suite runner behind the CLI: parses the JSON run
// configuration, executes the referenced checks (in parallel, merged in
// declaration order) and writes the report files.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "dualsim/discrete.hpp"
#include "dualsim/gsip.hpp"
#include "dualsim/pointconfig.hpp"

namespace dualsim {

struct SuiteOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::string out_dir = ".";
};

// exit code contract: 0 all checks pass, 1 any failure, 2 config error
int run_suite(const std::string& config_path, const SuiteOverrides& overrides);

// config fragments shared with the data-emission subcommands
SiteSystem parse_site_system(const nlohmann::json& j);
AlphaMeasure parse_alpha(const nlohmann::json& j);
ConductanceFn parse_conductance(const nlohmann::json& j);
std::vector<Cell> parse_cells(const nlohmann::json& j, Space space);
SymmetricFn parse_tensor_fn(const nlohmann::json& j, Space space);

}  // namespace dualsim
