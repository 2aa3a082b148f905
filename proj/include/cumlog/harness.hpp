#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cumlog/dynamics.hpp"
#include "cumlog/network.hpp"

namespace cumlog {

// Flat key=value experiment description with [section] headers. Sections:
// [experiment] network=..., routes=..., engine=..., eta=..., r=..., s0=...,
// max_days=..., gap_tol=..., out_dir=..., seeds=..., classes=...
struct ExperimentConfig {
    // network: builtin name, or "tntp:<net path>:<trips path>"
    std::string network = "3n4l";
    // routes: "all-simple" | "k-shortest:<k>" | "k-shortest:<k>:we-costs"
    std::string routes = "all-simple";
    std::string engine = "cumlog";            // cumlog | sa
    std::string eta = "constant:1";           // constant:v | power:a | harmonic
    std::string r = "constant:1";             // constant:v | power:b
    std::string s0 = "zeros";                 // zeros | normal:<seed>[:<sigma>]
    int max_days = 1000;
    double gap_tol = 0.0;
    std::string out_dir;
    std::vector<std::uint64_t> seeds;         // repeats with normal s0 per seed
    // classes: "r1:share1,r2:share2,..." (empty => single class)
    std::string classes;

    std::string serialize() const;
    static ExperimentConfig parse(const std::string& text);  // throws on bad input
};

struct RunSummary {
    std::string label;
    Termination status = Termination::MaxDays;
    int days = 0;
    double initial_gap = 0.0;
    double final_gap = 0.0;
    double entropy = 0.0;
    int used_routes = 0;
};

struct ExperimentResult {
    std::vector<RunSummary> runs;
    int exit_code = 0;  // 0 all converged/max-days-ok, 2 any diverged
};

// Executes the config; when out_dir is nonempty writes one trajectory CSV and
// JSON per run plus summary.json.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers = 1);

std::vector<std::string> list_presets();
std::string describe_preset(const std::string& name);           // throws on unknown name
ExperimentConfig preset_config(const std::string& name);        // throws on unknown name
// Some presets expand into several parameterizations executed in order.
std::vector<ExperimentConfig> preset_configs(const std::string& name);

}  // namespace cumlog
