#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cortex/environments.hpp"
#include "cortex/io.hpp"
#include "cortex/network.hpp"
#include "cortex/properness.hpp"

namespace cortex {

// Built-in experiment presets with fully explicit topology sections. A config
// file overlays these; environment variables overlay the file.
nlohmann::json default_experiment_config(const std::string& kind);

// path may be a file or a preset name ("tracker", "foveator").
nlohmann::json load_experiment_config(const std::string& path_or_preset);

void merge_config(nlohmann::json& base, const nlohmann::json& overlay);

// PREFIX_SECTION_KEY=value overrides, e.g. CORTEXLAB_DYNAMICS_THETA=1.2.
void apply_env_overrides(nlohmann::json& config, const std::string& prefix = "CORTEXLAB");

// "all" leaves plastic flags as declared; "m_only" freezes everything except
// drive banks into reward layers.
void apply_plasticity_mode(nlohmann::json& config);

// axes: "delay" (sensor delay lines to 0), "feedback" (m_only), "trace"
void apply_ablation(nlohmann::json& config, const std::string& axis);

Topology topology_from_json(const nlohmann::json& t);
DynamicsConfig dynamics_from_json(const nlohmann::json& d);
SleepConfig sleep_from_json(const nlohmann::json& s);

struct RunResult {
    uint64_t seed = 0;
    Metrics metrics;
    std::vector<Matrix> ff_maps;  // per motor area, sensor-indexed path averages
    std::vector<Matrix> fb_maps;

    // usefulness diagnostics over the final evaluation window; means are over
    // (tic, neuron) samples with at least one downstream cospike
    double usefulness_gap_mean = 0.0;     // |sum_k 1_jk (w_jk - w_fb_kj)|
    double downstream_weight_mean = 0.0;  // sum_k 1_jk |w_jk|
    double gmap_gap_mean = 0.0;           // G-map form with the diagnostic config
    int64_t cospike_samples = 0;

    std::vector<std::pair<std::string, double>> layer_rates;  // mean spikes per tic

    struct Window {
        int64_t start = 0;
        int64_t events = 0;
        int64_t correct = 0;
    };
    std::vector<Window> windows;  // learning curve, fixed-width windows
};

RunResult run_experiment(const nlohmann::json& config, uint64_t seed,
                         const std::string& snapshot_dir = "");

// Mean over all sensor->via->motor paths of the products of the two weights
// on each path; feedback_path pairs the sensor->via weight with the
// motor->via feedback weight instead.
Matrix path_average_matrix(const Network& net, const std::string& src_layer,
                           const std::string& via_layer, const std::string& m_layer,
                           int area_begin, int area_end, bool feedback_path);

struct Aggregate {
    int seeds = 0;
    double mean_pc = 0, median_pc = 0, std_pc = 0;
    double mean_c1000 = 0, median_c1000 = 0, std_c1000 = 0;
};

Aggregate aggregate_metrics(const std::vector<RunResult>& runs);

}  // namespace cortex
