#include "cortex/utilities.hpp"

#include <cmath>

namespace cortex {

NeuromodulatorModel NeuromodulatorModel::from_table(
    std::map<std::vector<uint8_t>, std::vector<std::pair<double, double>>> table) {
    NeuromodulatorModel m;
    m.conditional_mean = [tab = std::move(table)](const StateVector& x) {
        auto it = tab.find(x.bits);
        if (it == tab.end()) throw ConfigError("neuromodulator conditional undefined for state");
        double mean = 0.0, mass = 0.0;
        for (auto [value, prob] : it->second) {
            mean += value * prob;
            mass += prob;
        }
        if (std::abs(mass - 1.0) > 1e-9)
            throw ConfigError("neuromodulator conditional probabilities must sum to 1");
        return mean;
    };
    return m;
}

double u_frequency(const StateVector&) { return 1.0; }

double u_invariance(const StateVector& x_prev, const WeightVector& w, double theta) {
    return static_cast<double>(activate(w, x_prev, theta));
}

double u_invariance_discounted(const std::vector<StateVector>& history, const WeightVector& w,
                               double theta, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw DomainError("discount must lie in [0,1]");
    double u = 0.0, g = 1.0;
    for (const StateVector& x : history) {
        u += g * activate(w, x, theta);
        g *= gamma;
    }
    return u;
}

double u_neuromodulator(const NeuromodulatorModel& model, const StateVector& x) {
    double v = model(x);
    if (!std::isfinite(v)) throw DomainError("neuromodulator expectation must be finite");
    return v;
}

double u_feedback(const WeightVector& w_fb, const StateVector& x) {
    return dot(w_fb, x);
}

double u_feedback_checked(const WeightVector& w_fb, const WeightVector& w_ff,
                          const StateVector& x) {
    if (w_fb.size() != w_ff.size())
        throw DimensionError("feedback/feedforward banks must have equal length");
    for (size_t i = 0; i < w_fb.size(); ++i)
        if (w_fb.mask[i] && w_ff.mask[i])
            throw ConfigError("feedback and feedforward populations must be disjoint");
    return dot(w_fb, x);
}

}  // namespace cortex
