#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "cortex/scoring.hpp"
#include "cortex/types.hpp"

namespace cortex {

// Raised when an exhaustive check would be intractable.
struct TractabilityError : ConfigError {
    using ConfigError::ConfigError;
};

// One (state, probability, utility) triple of the ground-truth distribution.
struct Outcome {
    StateVector x;
    double p;
    double mu;
};

// Explicit joint distribution over spike patterns and utilities.
struct DiscreteDistribution {
    std::vector<Outcome> outcomes;

    void validate() const;  // p >= 0, sum to 1 within 1e-12, distinct states
    size_t dim() const { return outcomes.empty() ? 0 : outcomes.front().x.size(); }
};

// Search space for the brute-force argmax oracle. Each refinement re-grids a
// one-step window around the incumbent with the same step count, shrinking
// the step tenfold per round at the default 21 steps.
struct WeightGrid {
    double lo = -2.0;
    double hi = 2.0;
    int steps = 21;
    int refinements = 2;

    double initial_step() const { return (hi - lo) / (steps - 1); }
};

// Probability-weighted score over all outcomes. selective=false drops the
// spike gate (the warmup scoring rules T_bullet).
double expected_score(const DiscreteDistribution& P, const std::vector<double>& w,
                      const ScoringConfig& cfg, bool selective);

std::vector<double> expected_gradient(const DiscreteDistribution& P, const std::vector<double>& w,
                                      const ScoringConfig& cfg, bool selective);

// E[mu(x) * x] and its spike-gated variant E[mu(x) * x * 1_w].
std::vector<double> mean_utility_state(const DiscreteDistribution& P);
std::vector<double> gated_mean_utility_state(const DiscreteDistribution& P,
                                             const std::vector<double>& w,
                                             const ScoringConfig& cfg);

// Predicted optimum of the selectivity-free rules: G(E[mu * x]).
std::vector<double> gamma_T(const DiscreteDistribution& P, const ScoringConfig& cfg);

// Predicted optimum of the full selective rules: the spike set of w_star plus
// the G-mapped gated expectation.
struct GammaS {
    std::vector<size_t> spike_outcomes;  // indices into P.outcomes
    std::vector<double> g_component;
};
GammaS gamma_S(const DiscreteDistribution& P, const ScoringConfig& cfg,
               const std::vector<double>& w_star);

// Exhaustive grid argmax of expected_score. Ties break toward the
// lexicographically smallest weight vector. Guards: dim <= 4, outcomes <= 16.
std::vector<double> brute_force_argmax(const DiscreteDistribution& P, const ScoringConfig& cfg,
                                       const WeightGrid& grid, bool selective);

struct PropernessReport {
    std::vector<double> predicted;
    std::vector<double> brute_force;
    double score_gap = 0.0;        // max(0, E[S(bf)] - E[S(predicted)])
    double weight_distance = 0.0;  // inf-norm
    bool verdict = false;
};

inline constexpr double kPropernessTolerance = 1e-6;

PropernessReport check_properness(const DiscreteDistribution& P, const ScoringConfig& cfg,
                                  const WeightGrid& grid, bool selective);

// || w - G(E[mu x 1_w]) ||_inf
double fixed_point_residual(const std::vector<double>& w_tilde, const DiscreteDistribution& P,
                            const ScoringConfig& cfg);

struct AscentOptions {
    size_t max_iters = 100000;
    double lr = 0.0;       // 0 = pick from eta
    bool decay = true;     // harmonic step decay; false = fixed step
    double tol = 1e-3;     // stop when residual falls below tol/3
};

struct AscentResult {
    std::vector<double> w;
    size_t iters = 0;
    double residual = 0.0;
    int tail_flips = 0;       // spike-set changes over the last 20% of iterations
    bool oscillating = false; // non-converged with a flipping spike set
};

// Deterministic ascent on the exact expected score.
AscentResult ascend_expected_score(const DiscreteDistribution& P, const ScoringConfig& cfg,
                                   std::vector<double> w0, const AscentOptions& opt);

inline std::vector<double> default_epsilon_grid() {
    return {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
}

struct Assumption1Check {
    size_t synapse = 0;
    double delta = 0.0;          // E[mu 1_i 1_w] - dA/dw_i
    bool vacuous = false;        // delta == 0
    bool holds = false;
    double witness_epsilon = 0;  // step at which the expected score increased
};

// Searches the epsilon grid for a step along +eps*delta*e_i that strictly
// increases the expected score; failure means every step runs into a hidden
// drop behind the spike gate.
Assumption1Check check_assumption1(const DiscreteDistribution& P, const ScoringConfig& cfg,
                                   const std::vector<double>& w, size_t synapse,
                                   const std::vector<double>& eps_grid);
std::vector<Assumption1Check> check_assumption1_all(const DiscreteDistribution& P,
                                                    const ScoringConfig& cfg,
                                                    const std::vector<double>& w,
                                                    const std::vector<double>& eps_grid);

// --- usefulness -----------------------------------------------------------

// Downstream view of one neuron at one tic.
struct DownstreamSnapshot {
    std::vector<double> w_down;   // w_jk for each downstream neuron k
    std::vector<uint8_t> spikes;  // 1_k this tic
    uint8_t spiked = 0;           // 1_j this tic
};

// Sum of downstream co-spiking synaptic weights.
double usefulness(const DownstreamSnapshot& snap);

// Running means over a run, one slot per downstream neuron.
struct UsefulnessAccumulator {
    std::vector<double> sum_mu_cospike;       // sum of mu_k * 1_jk
    std::vector<double> sum_current_cospike;  // sum of <w_ff_j, x> * 1_jk
    size_t samples = 0;

    explicit UsefulnessAccumulator(size_t downstream = 0)
        : sum_mu_cospike(downstream, 0.0), sum_current_cospike(downstream, 0.0) {}

    void add(uint8_t spike_j, double ff_current, const std::vector<uint8_t>& spikes_k,
             const std::vector<double>& mu_k);
    double mean_mu(size_t k) const;
    double mean_current(size_t k) const;
};

// Corollary failure term: sum_k 1_jk [ G(E[mu_k 1_jk]) - G(E[<w_ff,x> 1_jk]) ]
// with current spikes supplying the gate.
double usefulness_gap(const ScoringConfig& cfg, const UsefulnessAccumulator& acc, uint8_t spike_j,
                      const std::vector<uint8_t>& spikes_k);

// --- random instances and suites -------------------------------------------

DiscreteDistribution random_instance(std::mt19937_64& rng, int dim, int max_outcomes,
                                     bool nonneg_mu);

struct AdversarialInstance {
    DiscreteDistribution P;
    ScoringConfig cfg;
    size_t trap_outcome = 0;  // the hidden, very negative outcome
};

// L2 instance with a high-probability, very negative outcome hidden just
// above the threshold of the rewarded one. Gradient ascent bounces across the
// kink instead of converging.
AdversarialInstance make_adversarial_instance(std::mt19937_64& rng);

struct CheckRecord {
    uint64_t seed = 0;
    std::string suite;
    std::string regularizer;
    bool verdict = false;
    double score_gap = 0.0;
    double weight_distance = 0.0;
    double extra = 0.0;
    std::string note;
};

struct SuiteSummary {
    std::string name;
    int total = 0;
    int passed = 0;
    double worst_gap = 0.0;
    double worst_distance = 0.0;
    std::vector<CheckRecord> records;

    bool all_passed() const { return passed == total; }
};

SuiteSummary properness_suite_selfree(Regularizer reg, int count, uint64_t master_seed);
SuiteSummary properness_suite_selective(int count, uint64_t master_seed);
SuiteSummary adversarial_suite(int count, uint64_t master_seed);
SuiteSummary fixed_point_suite(int instances, int starts_per_instance, uint64_t master_seed);
SuiteSummary gradient_check_suite(int count, uint64_t master_seed);

void write_report_jsonl(const std::vector<SuiteSummary>& suites, const std::string& path);

}  // namespace cortex
