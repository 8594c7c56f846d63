#pragma once

#include <functional>
#include <map>

#include "cortex/scoring.hpp"
#include "cortex/types.hpp"

namespace cortex {

// Conditional reward model: mu(x) = E[nu | x]. Realized as an expectation, not
// a sample; environments own the sampling process.
struct NeuromodulatorModel {
    std::function<double(const StateVector&)> conditional_mean;

    double operator()(const StateVector& x) const {
        if (!conditional_mean) throw ConfigError("neuromodulator model has no conditional");
        return conditional_mean(x);
    }

    // Enumerable table over (value, probability) pairs per state key.
    static NeuromodulatorModel from_table(
        std::map<std::vector<uint8_t>, std::vector<std::pair<double, double>>> table);
};

// U1: constant 1; spike for whatever is frequent.
double u_frequency(const StateVector& x);

// U2 at horizon 1: 1 iff the neuron spiked on the previous tic.
double u_invariance(const StateVector& x_prev, const WeightVector& w, double theta);

// U2 extended over multiple steps with discount gamma:
//   sum_k gamma^k * activate(w, history[k], theta), history[0] = t-1.
double u_invariance_discounted(const std::vector<StateVector>& history, const WeightVector& w,
                               double theta, double gamma);

// U3: expected neuromodulator given the state.
double u_neuromodulator(const NeuromodulatorModel& model, const StateVector& x);

// U4: feedback current <w_fb, x>. The feedback mask must not overlap the
// feedforward mask; upstream and downstream populations are disjoint.
double u_feedback(const WeightVector& w_fb, const StateVector& x);
double u_feedback_checked(const WeightVector& w_fb, const WeightVector& w_ff,
                          const StateVector& x);

}  // namespace cortex
