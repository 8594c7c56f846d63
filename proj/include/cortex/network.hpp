#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "cortex/scoring.hpp"
#include "cortex/types.hpp"

namespace cortex {

// How a layer's plastic synapses move.
//   None:     static (sensor, inhibitory pool)
//   Feedback: feedforward bank follows feedback current * trace, feedback
//             bank follows margin * trace
//   Reward:   cospike counts paid out on neuromodulatory events
enum class Learning { None, Feedback, Reward };

enum class Bank { Drive, Inhibit, Feedback };

struct LayerSpec {
    std::string name;
    int size = 0;
    bool inhibitory = false;
    Learning learning = Learning::None;
};

struct ProjectionSpec {
    std::string name;
    std::string src;
    std::string dst;
    Bank bank = Bank::Drive;
    bool plastic = false;
    int delay = 0;
    double mask_density = 1.0;  // probability a synapse exists
    double init_lo = 0.0;       // uniform weight init (Drive/Feedback)
    double init_hi = 0.2;
    double fixed_weight = 0.5;  // magnitude of Inhibit synapses
    // fractional index ranges the mask may touch (structured wiring)
    double src_lo = 0.0, src_hi = 1.0;
    double dst_lo = 0.0, dst_hi = 1.0;
};

struct Topology {
    std::vector<LayerSpec> layers;  // in processing order; layers[0] is the sensor
    std::vector<ProjectionSpec> projections;

    int layer_index(const std::string& name) const;
    void validate() const;
};

struct DynamicsConfig {
    double theta = 1.0;
    double delta = 0.05;  // voltage leak per tic
    double trace_decay = 0.95;
    double trace_increment = 0.4;
    double lr_ff = 0.01;
    double lr_fb = 0.01;
    double lr_m = 0.05;
    int m_window = 20;             // cospike window cap, tics
    bool use_trace = true;         // false: raw output spike gates learning
    bool per_tic_penalty = false;  // theory mode: subtract dA/dw every tic
    ScoringConfig penalty_cfg{Regularizer::L1, 10.0, 1.0};
};

struct SleepConfig {
    bool enabled = true;
    int interval = 1000;                // tics between regularization events
    std::map<std::string, int> k_ff;    // layer -> synapses kept, drive bank
    std::map<std::string, int> k_fb;    // layer -> synapses kept, feedback bank
};

struct SpikeReport {
    std::vector<std::vector<uint8_t>> spikes;  // per layer
    int total = 0;
};

// --- pure update rules (the engine applies these row by row) ---------------

// Feedforward delta: lr * fb_current * x_i * gate, minus lr * dA/dw_i when a
// penalty config is supplied.
std::vector<double> learn_ff_delta(const WeightVector& w_ff, const StateVector& x_ff,
                                   double fb_current, double gate, double lr,
                                   const ScoringConfig* penalty = nullptr);

// Feedback delta: lr * margin * x_k * gate (same penalty treatment).
std::vector<double> learn_fb_delta(const WeightVector& w_fb, const StateVector& x_fb,
                                   double ff_margin, double gate, double lr,
                                   const ScoringConfig* penalty = nullptr);

// Reward-window delta: lr * reward * cospike_count per synapse.
std::vector<double> learn_m_delta(const std::vector<double>& cospike_counts, double reward,
                                  double lr);

// Attention-gated baseline, real-valued activations.
double agrel_update(double w_fb_kj, double x_k, double x_i, double x_j, double f_delta,
                    double lr);

// Top-K binarization: the K largest masked weights become 1, the rest 0.
// Ties at the K-th rank keep the lower synapse index. Fewer than K masked
// synapses: all set to 1.
std::vector<double> sleep_topk(const std::vector<double>& w, const std::vector<uint8_t>& mask,
                               int k);

// Diagnostic the feedback updates ascend: fb * margin * spike - A(w).
double feedback_score(const WeightVector& w_ff, const WeightVector& w_fb, const StateVector& x_ff,
                      const StateVector& x_fb, const ScoringConfig& cfg);

// --- engine -----------------------------------------------------------------

class Network {
public:
    Network(Topology topo, DynamicsConfig dyn, SleepConfig sleep, uint64_t seed);

    const Topology& topology() const { return topo_; }
    const DynamicsConfig& dynamics() const { return dyn_; }
    const SleepConfig& sleep_config() const { return sleep_; }
    int64_t now() const { return tic_; }

    // One simulation step. The input drives the sensor layer verbatim.
    const SpikeReport& tic(const std::vector<uint8_t>& sensor_input);

    // Neuromodulatory event: per-neuron reward for one Reward layer. Nonzero
    // entries pay out the cospike windows and reset them.
    void deliver_reward(const std::string& layer, const std::vector<double>& mu);

    // Top-K binarize and prune every plastic bank.
    void sleep_regularize();

    // introspection
    const std::vector<uint8_t>& layer_spikes(const std::string& layer) const;
    const std::vector<double>& layer_voltage(const std::string& layer) const;
    const std::vector<double>& layer_trace(const std::string& layer) const;
    const std::vector<double>& layer_drive(const std::string& layer) const;     // incl. inhibition
    const std::vector<double>& layer_ff_drive(const std::string& layer) const;  // drive banks only
    const std::vector<double>& layer_feedback(const std::string& layer) const;

    int projection_id(const std::string& name) const;
    std::pair<int, int> projection_shape(const std::string& name) const;  // (dst, src) sizes
    const std::vector<double>& projection_weights(const std::string& name) const;
    const std::vector<uint8_t>& projection_mask(const std::string& name) const;
    double weight_at(const std::string& proj, int dst, int src) const;
    void set_weight(const std::string& proj, int dst, int src, double v);

    // Dense CSV per projection: header of source indices, one row per target.
    void save_weights_csv(const std::string& directory) const;

private:
    struct Proj {
        ProjectionSpec spec;
        int src = 0, dst = 0;  // layer ids
        std::vector<double> w;
        std::vector<uint8_t> mask;
    };

    struct CospikeWindow {
        std::vector<double> counts;
        std::deque<std::pair<int64_t, std::vector<int32_t>>> events;
    };

    const std::vector<uint8_t>& spikes_at(int layer, int64_t t) const;
    void validate_sleep_config() const;

    Topology topo_;
    DynamicsConfig dyn_;
    SleepConfig sleep_;
    std::vector<Proj> projs_;
    std::vector<std::vector<int>> in_current_;   // per layer: Drive/Inhibit proj ids
    std::vector<std::vector<int>> in_feedback_;  // per layer: Feedback proj ids

    int64_t tic_ = 0;
    int ring_ = 1;
    std::vector<std::vector<std::vector<uint8_t>>> history_;  // layer -> slot -> spikes
    std::vector<std::vector<uint8_t>> spikes_;                // this tic
    std::vector<std::vector<double>> voltage_, trace_, drive_, ffdrive_, fbcur_;
    std::vector<std::vector<CospikeWindow>> windows_;  // proj id -> dst -> window
    SpikeReport report_;
    std::vector<std::vector<uint8_t>> zeros_;
};

}  // namespace cortex
