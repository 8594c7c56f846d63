#pragma once

#include <functional>

#include "cortex/types.hpp"

namespace cortex {

// Which terms of the online update are applied.
//   FullGradient: gradient of the full score, i.e. the reward term is gated
//                 by the output spike but the regularizer penalty always acts.
//   PureCospike:  classic cospike rule, weights move only when pre and post
//                 spike together and no penalty is applied.
enum class UpdateRule { FullGradient, PureCospike };

double dot(const WeightVector& w, const StateVector& x);

// Threshold output: 1 iff <w,x> - theta > 0 (strict; ties do not spike).
int activate(const WeightVector& w, const StateVector& x, double theta);

// utility * margin * selectivity
double reward(const StateVector& x, const WeightVector& w, double mu, double theta);

// Resource cost of the weight bank, summed over the active mask.
double regularizer_cost(const ScoringConfig& cfg, const WeightVector& w);

// reward - regularizer_cost
double score(const StateVector& x, const WeightVector& w, double mu, const ScoringConfig& cfg);

// Per-synapse decomposition of score(); sums exactly to score(). The theta
// payment is split evenly across active synapses so the decomposition is
// additive.
std::vector<double> synapse_scores(const StateVector& x, const WeightVector& w, double mu,
                                   const ScoringConfig& cfg);

// d(score)/dw_i over active synapses (zero elsewhere), taking the gradient of
// the non-spiking branch at the kink. No step size, no clipping.
std::vector<double> score_gradient(const ScoringConfig& cfg, const WeightVector& w,
                                   const StateVector& x, double mu);

// One online ascent step of length lr. L1 results are clipped to [0,1], LH
// results are floored at kWeightFloor; clipping is silent.
WeightVector grad_update(const ScoringConfig& cfg, const WeightVector& w, const StateVector& x,
                         double mu, double lr, UpdateRule rule = UpdateRule::FullGradient);

// Link between gated expected utilities and optimal weights:
//   L2: eta*v   LH: exp(eta*v - 1)   L1: 1[eta*v > 1]
std::vector<double> g_map(const ScoringConfig& cfg, const std::vector<double>& v);

// Penalty term of the update rule, d(A)/dw_i at w_i.
double penalty_derivative(const ScoringConfig& cfg, double wi);

using ConvexFn = std::function<double(const std::vector<double>&)>;
using GradientFn = std::function<std::vector<double>(const std::vector<double>&)>;
using ReportMap = std::function<std::vector<double>(const StateVector&)>;

// D_F(a,b) = F(a) - F(b) - <gradF(b), a-b>; >= 0 for convex F.
double bregman(const ConvexFn& F, const GradientFn& gradF, const std::vector<double>& a,
               const std::vector<double>& b);

// S_F(x;w) = -D_F(rho(x), w) - F(rho(x)). Proper for P -> E_P[rho(x)] when F
// is convex.
double proper_score_from_convex(const ConvexFn& F, const GradientFn& gradF, const ReportMap& rho,
                                const StateVector& x, const std::vector<double>& w);

}  // namespace cortex
