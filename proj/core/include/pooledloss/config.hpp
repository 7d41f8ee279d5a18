#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pooledloss/model.hpp"
#include "pooledloss/types.hpp"

namespace pooledloss {

// JSON run configuration:
// {
//   "portfolio": {
//     "names": 1000,
//     "types": [{"alpha":4,"lambda_bar":0.2,"sigma":0.9,
//                "beta_c":1,"beta_s":1,"lambda0":0.2,"weight":1.0}]
//   },
//   "systematic": {"kind":"ou","mean":1,"speed":2,"vol":1,"x0":1},
//   "grid": {"horizon":0.5,"dt":0.005}
// }
struct RunConfig {
    PortfolioSpec portfolio;
    SystematicRiskSpec systematic;
    double horizon = 0.0;
    double dt = 0.0;

    TimeGrid grid() const { return TimeGrid(horizon, dt); }
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& file);
std::string config_to_json(const RunConfig& cfg);

// FNV-1a over the raw bytes; stable across runs and platforms.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace pooledloss
