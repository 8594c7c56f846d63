#include "cortex/network.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

namespace cortex {

int Topology::layer_index(const std::string& name) const {
    for (size_t i = 0; i < layers.size(); ++i)
        if (layers[i].name == name) return static_cast<int>(i);
    throw ConfigError("unknown layer: " + name);
}

void Topology::validate() const {
    if (layers.empty()) throw ConfigError("topology needs at least one layer");
    if (layers.front().inhibitory) throw ConfigError("sensor layer cannot be inhibitory");
    if (layers.front().learning != Learning::None)
        throw ConfigError("sensor layer cannot learn");
    for (const LayerSpec& l : layers) {
        if (l.size <= 0) throw ConfigError("layer size must be positive: " + l.name);
        if (l.inhibitory && l.learning != Learning::None)
            throw ConfigError("inhibitory layer cannot learn: " + l.name);
    }
    for (size_t a = 0; a < layers.size(); ++a)
        for (size_t b = a + 1; b < layers.size(); ++b)
            if (layers[a].name == layers[b].name)
                throw ConfigError("duplicate layer name: " + layers[a].name);

    for (const ProjectionSpec& p : projections) {
        int s = layer_index(p.src);
        int d = layer_index(p.dst);
        if (p.delay < 0) throw ConfigError("projection delay must be >= 0: " + p.name);
        if (d == 0) throw ConfigError("sensor layer cannot receive projections: " + p.name);
        if (p.plastic && (layers[s].inhibitory || layers[d].inhibitory))
            throw ConfigError("plastic projection touches an inhibitory layer: " + p.name);
        if (p.bank == Bank::Inhibit && !layers[s].inhibitory)
            throw ConfigError("inhibit bank must originate from an inhibitory layer: " + p.name);
        if (p.bank != Bank::Feedback && p.delay == 0 && s >= d)
            throw ConfigError("zero-delay drive requires the source earlier in layer order: " +
                              p.name);
        if (p.mask_density <= 0.0 || p.mask_density > 1.0)
            throw ConfigError("mask density must lie in (0,1]: " + p.name);
    }
    // feedforward and feedback source populations of a neuron must be disjoint
    for (size_t a = 0; a < projections.size(); ++a) {
        for (size_t b = 0; b < projections.size(); ++b) {
            const ProjectionSpec& pa = projections[a];
            const ProjectionSpec& pb = projections[b];
            if (pa.bank == Bank::Drive && pb.bank == Bank::Feedback && pa.dst == pb.dst &&
                pa.src == pb.src)
                throw ConfigError("feedforward and feedback populations overlap at " + pa.dst);
        }
    }
    for (size_t a = 0; a < projections.size(); ++a)
        for (size_t b = a + 1; b < projections.size(); ++b)
            if (projections[a].name == projections[b].name)
                throw ConfigError("duplicate projection name: " + projections[a].name);
}

// --- pure update rules ------------------------------------------------------

std::vector<double> learn_ff_delta(const WeightVector& w_ff, const StateVector& x_ff,
                                   double fb_current, double gate, double lr,
                                   const ScoringConfig* penalty) {
    if (w_ff.size() != x_ff.size()) throw DimensionError("ff bank/input length mismatch");
    std::vector<double> d(w_ff.size(), 0.0);
    for (size_t i = 0; i < d.size(); ++i) {
        if (!w_ff.mask[i]) continue;
        d[i] = lr * fb_current * x_ff.bits[i] * gate;
        if (penalty) d[i] -= lr * penalty_derivative(*penalty, w_ff.weights[i]);
    }
    return d;
}

std::vector<double> learn_fb_delta(const WeightVector& w_fb, const StateVector& x_fb,
                                   double ff_margin, double gate, double lr,
                                   const ScoringConfig* penalty) {
    if (w_fb.size() != x_fb.size()) throw DimensionError("fb bank/input length mismatch");
    std::vector<double> d(w_fb.size(), 0.0);
    for (size_t k = 0; k < d.size(); ++k) {
        if (!w_fb.mask[k]) continue;
        d[k] = lr * ff_margin * x_fb.bits[k] * gate;
        if (penalty) d[k] -= lr * penalty_derivative(*penalty, w_fb.weights[k]);
    }
    return d;
}

std::vector<double> learn_m_delta(const std::vector<double>& cospike_counts, double reward,
                                  double lr) {
    std::vector<double> d(cospike_counts.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = lr * reward * cospike_counts[i];
    return d;
}

double agrel_update(double w_fb_kj, double x_k, double x_i, double x_j, double f_delta,
                    double lr) {
    return lr * w_fb_kj * x_k * x_i * x_j * (1.0 - x_j) * f_delta;
}

std::vector<double> sleep_topk(const std::vector<double>& w, const std::vector<uint8_t>& mask,
                               int k) {
    if (w.size() != mask.size()) throw DimensionError("weights/mask length mismatch");
    if (k < 1) throw ConfigError("sleep K must be >= 1");
    std::vector<int> order;
    for (size_t i = 0; i < w.size(); ++i)
        if (mask[i]) order.push_back(static_cast<int>(i));
    std::vector<double> out(w.size(), 0.0);
    if (static_cast<int>(order.size()) <= k) {
        for (int i : order) out[i] = 1.0;
        return out;
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (w[a] != w[b]) return w[a] > w[b];
        return a < b;
    });
    for (int r = 0; r < k; ++r) out[order[r]] = 1.0;
    return out;
}

double feedback_score(const WeightVector& w_ff, const WeightVector& w_fb, const StateVector& x_ff,
                      const StateVector& x_fb, const ScoringConfig& cfg) {
    double margin = dot(w_ff, x_ff) - cfg.theta;
    double fb = dot(w_fb, x_fb);
    double pay = margin > 0.0 ? fb * margin : 0.0;
    return pay - regularizer_cost(cfg, w_ff) - regularizer_cost(cfg, w_fb);
}

// --- engine -----------------------------------------------------------------

Network::Network(Topology topo, DynamicsConfig dyn, SleepConfig sleep, uint64_t seed)
    : topo_(std::move(topo)), dyn_(std::move(dyn)), sleep_(std::move(sleep)) {
    topo_.validate();
    if (dyn_.trace_decay <= 0.0 || dyn_.trace_decay >= 1.0)
        throw ConfigError("trace decay must lie in (0,1)");
    if (dyn_.m_window < 1) throw ConfigError("m_window must be >= 1");

    size_t nl = topo_.layers.size();
    in_current_.resize(nl);
    in_feedback_.resize(nl);
    spikes_.resize(nl);
    voltage_.resize(nl);
    trace_.resize(nl);
    drive_.resize(nl);
    fbcur_.resize(nl);
    ffdrive_.resize(nl);
    zeros_.resize(nl);
    for (size_t l = 0; l < nl; ++l) {
        int n = topo_.layers[l].size;
        spikes_[l].assign(n, 0);
        voltage_[l].assign(n, 0.0);
        trace_[l].assign(n, 0.0);
        drive_[l].assign(n, 0.0);
        ffdrive_[l].assign(n, 0.0);
        fbcur_[l].assign(n, 0.0);
        zeros_[l].assign(n, 0);
    }

    std::mt19937_64 rng(seed);
    int max_delay = 0;
    for (const ProjectionSpec& spec : topo_.projections) {
        Proj p;
        p.spec = spec;
        p.src = topo_.layer_index(spec.src);
        p.dst = topo_.layer_index(spec.dst);
        max_delay = std::max(max_delay, spec.delay);
        size_t rows = topo_.layers[p.dst].size;
        size_t cols = topo_.layers[p.src].size;
        p.w.assign(rows * cols, 0.0);
        p.mask.assign(rows * cols, 0);

        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_real_distribution<double> init(spec.init_lo, spec.init_hi);
        size_t src_begin = static_cast<size_t>(spec.src_lo * cols);
        size_t src_end = static_cast<size_t>(spec.src_hi * cols);
        size_t dst_begin = static_cast<size_t>(spec.dst_lo * rows);
        size_t dst_end = static_cast<size_t>(spec.dst_hi * rows);
        for (size_t r = 0; r < rows; ++r) {
            for (size_t c = 0; c < cols; ++c) {
                size_t i = r * cols + c;
                bool in_range = r >= dst_begin && r < dst_end && c >= src_begin && c < src_end;
                bool present =
                    in_range && (spec.mask_density >= 1.0 || unit(rng) < spec.mask_density);
                if (!present) continue;
                p.mask[i] = 1;
                p.w[i] = spec.bank == Bank::Inhibit ? -spec.fixed_weight : init(rng);
            }
        }
        int id = static_cast<int>(projs_.size());
        if (spec.bank == Bank::Feedback)
            in_feedback_[p.dst].push_back(id);
        else
            in_current_[p.dst].push_back(id);
        projs_.push_back(std::move(p));
    }

    ring_ = max_delay + 1;
    history_.resize(nl);
    for (size_t l = 0; l < nl; ++l)
        history_[l].assign(ring_, std::vector<uint8_t>(topo_.layers[l].size, 0));

    windows_.resize(projs_.size());
    for (size_t pi = 0; pi < projs_.size(); ++pi) {
        const Proj& p = projs_[pi];
        if (p.spec.plastic && p.spec.bank == Bank::Drive &&
            topo_.layers[p.dst].learning == Learning::Reward) {
            windows_[pi].resize(topo_.layers[p.dst].size);
            for (auto& wdw : windows_[pi])
                wdw.counts.assign(topo_.layers[p.src].size, 0.0);
        }
    }

    if (sleep_.enabled) validate_sleep_config();
    report_.spikes.resize(nl);
}

void Network::validate_sleep_config() const {
    if (sleep_.interval < 1) throw ConfigError("sleep interval must be >= 1");
    // layers absent from the K tables keep continuous weights
    for (const auto& [layer, k] : sleep_.k_ff)
        if (k < 1) throw ConfigError("sleep K must be >= 1 for " + layer);
    for (const auto& [layer, k] : sleep_.k_fb)
        if (k < 1) throw ConfigError("sleep K must be >= 1 for " + layer);
}

const std::vector<uint8_t>& Network::spikes_at(int layer, int64_t t) const {
    if (t < 0) return zeros_[layer];
    if (t == tic_) return spikes_[layer];
    return history_[layer][t % ring_];
}

const SpikeReport& Network::tic(const std::vector<uint8_t>& sensor_input) {
    if (sensor_input.size() != static_cast<size_t>(topo_.layers[0].size))
        throw DimensionError("sensor input size mismatch");

    // 1+2. deliver spikes and integrate, layer by layer in topology order
    spikes_[0] = sensor_input;
    for (size_t l = 1; l < topo_.layers.size(); ++l) {
        int n = topo_.layers[l].size;
        std::vector<double>& cur = drive_[l];
        std::vector<double>& ff = ffdrive_[l];
        std::fill(cur.begin(), cur.end(), 0.0);
        std::fill(ff.begin(), ff.end(), 0.0);
        for (int pi : in_current_[l]) {
            const Proj& p = projs_[pi];
            int64_t t_src = tic_ - p.spec.delay;
            // zero-delay sources were resolved earlier this tic
            const std::vector<uint8_t>& src =
                p.spec.delay == 0 ? spikes_[p.src] : spikes_at(p.src, t_src);
            size_t cols = src.size();
            bool excitatory = p.spec.bank == Bank::Drive;
            for (size_t s = 0; s < cols; ++s) {
                if (!src[s]) continue;
                const double* col = p.w.data() + s;
                for (int d = 0; d < n; ++d) {
                    double v = col[d * cols];
                    cur[d] += v;
                    if (excitatory) ff[d] += v;
                }
            }
        }
        for (int d = 0; d < n; ++d) {
            double v = voltage_[l][d] + cur[d] - dyn_.delta;
            if (v > dyn_.theta) {
                spikes_[l][d] = 1;
                voltage_[l][d] = 0.0;
            } else {
                spikes_[l][d] = 0;
                voltage_[l][d] = std::max(0.0, v);
            }
        }
    }

    // 3. feedback currents from this tic's resolved spikes, weights as of tic start
    for (size_t l = 0; l < topo_.layers.size(); ++l) {
        if (in_feedback_[l].empty()) continue;
        std::fill(fbcur_[l].begin(), fbcur_[l].end(), 0.0);
        for (int pi : in_feedback_[l]) {
            const Proj& p = projs_[pi];
            const std::vector<uint8_t>& src = spikes_at(p.src, tic_ - p.spec.delay);
            size_t cols = src.size();
            int n = topo_.layers[l].size;
            for (size_t s = 0; s < cols; ++s) {
                if (!src[s]) continue;
                const double* col = p.w.data() + s;
                for (int d = 0; d < n; ++d) fbcur_[l][d] += col[d * cols];
            }
        }
    }

    // 4. learning (traces still reflect tics < now)
    const ScoringConfig* penalty = dyn_.per_tic_penalty ? &dyn_.penalty_cfg : nullptr;
    for (size_t l = 1; l < topo_.layers.size(); ++l) {
        Learning mode = topo_.layers[l].learning;
        if (mode == Learning::Feedback) {
            int n = topo_.layers[l].size;
            for (int pi : in_current_[l]) {
                Proj& p = projs_[pi];
                if (!p.spec.plastic) continue;
                const std::vector<uint8_t>& src = p.spec.delay == 0
                                                      ? spikes_[p.src]
                                                      : spikes_at(p.src, tic_ - p.spec.delay);
                size_t cols = src.size();
                for (int d = 0; d < n; ++d) {
                    double gate = dyn_.use_trace ? trace_[l][d] : double(spikes_[l][d]);
                    double scale = dyn_.lr_ff * fbcur_[l][d] * gate;
                    double* row = p.w.data() + size_t(d) * cols;
                    const uint8_t* mrow = p.mask.data() + size_t(d) * cols;
                    if (scale != 0.0) {
                        for (size_t s = 0; s < cols; ++s) {
                            if (!src[s] || !mrow[s]) continue;
                            row[s] = std::clamp(row[s] + scale, 0.0, 1.0);
                        }
                    }
                    if (penalty) {
                        for (size_t s = 0; s < cols; ++s) {
                            if (!mrow[s]) continue;
                            row[s] = std::clamp(
                                row[s] - dyn_.lr_ff * penalty_derivative(*penalty, row[s]), 0.0,
                                1.0);
                        }
                    }
                }
            }
            for (int pi : in_feedback_[l]) {
                Proj& p = projs_[pi];
                if (!p.spec.plastic) continue;
                const std::vector<uint8_t>& src = spikes_at(p.src, tic_ - p.spec.delay);
                size_t cols = src.size();
                for (int d = 0; d < n; ++d) {
                    double gate = dyn_.use_trace ? trace_[l][d] : double(spikes_[l][d]);
                    double margin = ffdrive_[l][d] - dyn_.theta;
                    double scale = dyn_.lr_fb * margin * gate;
                    double* row = p.w.data() + size_t(d) * cols;
                    const uint8_t* mrow = p.mask.data() + size_t(d) * cols;
                    if (scale != 0.0) {
                        for (size_t s = 0; s < cols; ++s) {
                            if (!src[s] || !mrow[s]) continue;
                            row[s] = std::clamp(row[s] + scale, 0.0, 1.0);
                        }
                    }
                    if (penalty) {
                        for (size_t s = 0; s < cols; ++s) {
                            if (!mrow[s]) continue;
                            row[s] = std::clamp(
                                row[s] - dyn_.lr_fb * penalty_derivative(*penalty, row[s]), 0.0,
                                1.0);
                        }
                    }
                }
            }
        } else if (mode == Learning::Reward) {
            for (int pi : in_current_[l]) {
                Proj& p = projs_[pi];
                if (windows_[pi].empty()) continue;
                const std::vector<uint8_t>& src = p.spec.delay == 0
                                                      ? spikes_[p.src]
                                                      : spikes_at(p.src, tic_ - p.spec.delay);
                size_t cols = src.size();
                int64_t oldest = tic_ - dyn_.m_window + 1;
                for (int d = 0; d < topo_.layers[l].size; ++d) {
                    CospikeWindow& wdw = windows_[pi][d];
                    while (!wdw.events.empty() && wdw.events.front().first < oldest) {
                        for (int32_t s : wdw.events.front().second) wdw.counts[s] -= 1.0;
                        wdw.events.pop_front();
                    }
                    if (!spikes_[l][d]) continue;
                    std::vector<int32_t> active;
                    const uint8_t* mrow = p.mask.data() + size_t(d) * cols;
                    for (size_t s = 0; s < cols; ++s)
                        if (src[s] && mrow[s]) active.push_back(static_cast<int32_t>(s));
                    if (active.empty()) continue;
                    for (int32_t s : active) wdw.counts[s] += 1.0;
                    wdw.events.emplace_back(tic_, std::move(active));
                }
            }
        }
    }

    // 5. decay traces
    for (size_t l = 0; l < topo_.layers.size(); ++l)
        for (size_t d = 0; d < trace_[l].size(); ++d)
            trace_[l][d] = dyn_.trace_decay * (trace_[l][d] + dyn_.trace_increment * spikes_[l][d]);

    // commit spikes to history
    for (size_t l = 0; l < topo_.layers.size(); ++l)
        history_[l][tic_ % ring_] = spikes_[l];

    report_.total = 0;
    for (size_t l = 0; l < topo_.layers.size(); ++l) {
        report_.spikes[l] = spikes_[l];
        for (uint8_t b : spikes_[l]) report_.total += b;
    }
    ++tic_;
    return report_;
}

void Network::deliver_reward(const std::string& layer, const std::vector<double>& mu) {
    int l = topo_.layer_index(layer);
    if (topo_.layers[l].learning != Learning::Reward)
        throw ConfigError("layer does not take neuromodulatory events: " + layer);
    if (mu.size() != static_cast<size_t>(topo_.layers[l].size))
        throw DimensionError("reward vector size mismatch");

    // the neuromodulatory signal is global: rewarded neurons pay out their
    // cospike windows, and the event resets every window in the layer
    for (size_t pi = 0; pi < projs_.size(); ++pi) {
        Proj& p = projs_[pi];
        if (p.dst != l || windows_[pi].empty()) continue;
        size_t cols = topo_.layers[p.src].size;
        for (int d = 0; d < topo_.layers[l].size; ++d) {
            CospikeWindow& wdw = windows_[pi][d];
            if (mu[d] != 0.0) {
                double* row = p.w.data() + size_t(d) * cols;
                for (size_t s = 0; s < cols; ++s) {
                    if (wdw.counts[s] == 0.0) continue;
                    row[s] = std::clamp(row[s] + dyn_.lr_m * mu[d] * wdw.counts[s], 0.0, 1.0);
                }
            }
            std::fill(wdw.counts.begin(), wdw.counts.end(), 0.0);
            wdw.events.clear();
        }
    }
}

void Network::sleep_regularize() {
    if (!sleep_.enabled) return;
    for (Proj& p : projs_) {
        if (!p.spec.plastic) continue;
        const auto& table = p.spec.bank == Bank::Feedback ? sleep_.k_fb : sleep_.k_ff;
        auto it = table.find(p.spec.dst);
        if (it == table.end()) continue;
        int k = it->second;
        size_t cols = topo_.layers[p.src].size;
        for (int d = 0; d < topo_.layers[p.dst].size; ++d) {
            std::vector<double> row(p.w.begin() + size_t(d) * cols,
                                    p.w.begin() + size_t(d + 1) * cols);
            std::vector<uint8_t> mask(p.mask.begin() + size_t(d) * cols,
                                      p.mask.begin() + size_t(d + 1) * cols);
            std::vector<double> kept = sleep_topk(row, mask, k);
            std::copy(kept.begin(), kept.end(), p.w.begin() + size_t(d) * cols);
        }
    }
}

const std::vector<uint8_t>& Network::layer_spikes(const std::string& layer) const {
    return spikes_[topo_.layer_index(layer)];
}
const std::vector<double>& Network::layer_voltage(const std::string& layer) const {
    return voltage_[topo_.layer_index(layer)];
}
const std::vector<double>& Network::layer_trace(const std::string& layer) const {
    return trace_[topo_.layer_index(layer)];
}
const std::vector<double>& Network::layer_drive(const std::string& layer) const {
    return drive_[topo_.layer_index(layer)];
}
const std::vector<double>& Network::layer_ff_drive(const std::string& layer) const {
    return ffdrive_[topo_.layer_index(layer)];
}
const std::vector<double>& Network::layer_feedback(const std::string& layer) const {
    return fbcur_[topo_.layer_index(layer)];
}

int Network::projection_id(const std::string& name) const {
    for (size_t i = 0; i < projs_.size(); ++i)
        if (projs_[i].spec.name == name) return static_cast<int>(i);
    throw ConfigError("unknown projection: " + name);
}

std::pair<int, int> Network::projection_shape(const std::string& name) const {
    const Proj& p = projs_[projection_id(name)];
    return {topo_.layers[p.dst].size, topo_.layers[p.src].size};
}

const std::vector<double>& Network::projection_weights(const std::string& name) const {
    return projs_[projection_id(name)].w;
}

const std::vector<uint8_t>& Network::projection_mask(const std::string& name) const {
    return projs_[projection_id(name)].mask;
}

double Network::weight_at(const std::string& proj, int dst, int src) const {
    const Proj& p = projs_[projection_id(proj)];
    return p.w[size_t(dst) * topo_.layers[p.src].size + src];
}

void Network::set_weight(const std::string& proj, int dst, int src, double v) {
    Proj& p = projs_[projection_id(proj)];
    size_t i = size_t(dst) * topo_.layers[p.src].size + src;
    if (!p.mask[i]) throw ConfigError("cannot set weight outside the mask");
    p.w[i] = v;
}

void Network::save_weights_csv(const std::string& directory) const {
    std::filesystem::create_directories(directory);
    for (const Proj& p : projs_) {
        std::ofstream out(directory + "/" + p.spec.name + ".csv");
        if (!out) throw ConfigError("cannot write snapshot in " + directory);
        out.precision(17);
        size_t cols = topo_.layers[p.src].size;
        out << "target";
        for (size_t s = 0; s < cols; ++s) out << "," << s;
        out << "\n";
        for (int d = 0; d < topo_.layers[p.dst].size; ++d) {
            out << d;
            for (size_t s = 0; s < cols; ++s) out << "," << p.w[size_t(d) * cols + s];
            out << "\n";
        }
    }
}

}  // namespace cortex
