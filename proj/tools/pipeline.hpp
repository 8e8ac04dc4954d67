#pragma once

#include <string>
#include <vector>

#include "ob/io.hpp"

namespace ob::cli {

// Full configuration as a JSON document; defaults are merged under the user
// file and dotted overrides.
json default_config();

// Applies "a.b.c=value"; the value is parsed as JSON when possible and kept
// as a string otherwise.
void apply_override(json& cfg, const std::string& assignment);

struct RunConfig {
    json raw;
    std::string out = "ob_out";
    unsigned seed = 1;
    int threads = 1;
    bool plot = false;
    bool strict_calibration = false;

    double b = 30, s0 = 0.98, s2 = 0.05;
    CuConvention convention = CuConvention::Consistent;
    std::vector<int> kset{1, 7};
    int kmax = 21;
    int grid_n = 240;
    double grid_l = 1.0;
    bool full_closure = false;

    int p = 2;
    std::string target = "contraction";
    ControlMethod control_method = ControlMethod::Projected;

    RealizeOptions realize;
};

// Validates and extracts typed fields; throws Error("config", ...).
RunConfig make_run_config(const json& cfg);

void cmd_spectrum(const RunConfig& c);
void cmd_reduce(const RunConfig& c);
void cmd_control(const RunConfig& c);
void cmd_realize(const RunConfig& c);

}  // namespace ob::cli
