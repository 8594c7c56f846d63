#include "cortex/scoring.hpp"

#include <algorithm>
#include <cmath>

namespace cortex {

double dot(const WeightVector& w, const StateVector& x) {
    if (w.size() != x.size())
        throw DimensionError("weight/state length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
        if (x.bits[i]) s += w.weights[i];
    return s;
}

int activate(const WeightVector& w, const StateVector& x, double theta) {
    return dot(w, x) - theta > 0.0 ? 1 : 0;
}

double reward(const StateVector& x, const WeightVector& w, double mu, double theta) {
    double margin = dot(w, x) - theta;
    return margin > 0.0 ? mu * margin : 0.0;
}

namespace {

double synapse_cost(const ScoringConfig& cfg, double wi) {
    switch (cfg.regularizer) {
        case Regularizer::L2:
            return wi * wi / (2.0 * cfg.eta);
        case Regularizer::LH: {
            if (wi < 0.0) throw DomainError("LH weight must be nonnegative");
            double v = std::max(wi, kWeightFloor);
            return wi * std::log(v) / cfg.eta;
        }
        case Regularizer::L1:
            if (wi < 0.0 || wi > 1.0) throw DomainError("L1 weight must lie in [0,1]");
            return wi / cfg.eta;
    }
    return 0.0;
}

}  // namespace

double regularizer_cost(const ScoringConfig& cfg, const WeightVector& w) {
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i)
        if (w.mask[i]) s += synapse_cost(cfg, w.weights[i]);
    return s;
}

double score(const StateVector& x, const WeightVector& w, double mu, const ScoringConfig& cfg) {
    return reward(x, w, mu, cfg.theta) - regularizer_cost(cfg, w);
}

std::vector<double> synapse_scores(const StateVector& x, const WeightVector& w, double mu,
                                   const ScoringConfig& cfg) {
    if (w.size() != x.size())
        throw DimensionError("weight/state length mismatch");
    int spike = activate(w, x, cfg.theta);
    size_t k = w.active_count();
    double theta_share = k > 0 ? cfg.theta / static_cast<double>(k) : 0.0;
    std::vector<double> out(w.size(), 0.0);
    for (size_t i = 0; i < w.size(); ++i) {
        if (!w.mask[i]) continue;
        double pay = spike ? mu * (w.weights[i] * x.bits[i] - theta_share) : 0.0;
        out[i] = pay - synapse_cost(cfg, w.weights[i]);
    }
    return out;
}

double penalty_derivative(const ScoringConfig& cfg, double wi) {
    switch (cfg.regularizer) {
        case Regularizer::L2:
            return wi / cfg.eta;
        case Regularizer::LH:
            return (std::log(std::max(wi, kWeightFloor)) + 1.0) / cfg.eta;
        case Regularizer::L1:
            return 1.0 / cfg.eta;
    }
    return 0.0;
}

std::vector<double> score_gradient(const ScoringConfig& cfg, const WeightVector& w,
                                   const StateVector& x, double mu) {
    int spike = activate(w, x, cfg.theta);
    std::vector<double> g(w.size(), 0.0);
    for (size_t i = 0; i < w.size(); ++i) {
        if (!w.mask[i]) continue;
        g[i] = mu * x.bits[i] * spike - penalty_derivative(cfg, w.weights[i]);
    }
    return g;
}

WeightVector grad_update(const ScoringConfig& cfg, const WeightVector& w, const StateVector& x,
                         double mu, double lr, UpdateRule rule) {
    int spike = activate(w, x, cfg.theta);
    WeightVector out = w;
    for (size_t i = 0; i < w.size(); ++i) {
        if (!w.mask[i]) continue;
        double delta;
        if (rule == UpdateRule::PureCospike) {
            delta = lr * mu * x.bits[i] * spike;
        } else {
            delta = lr * (mu * x.bits[i] * spike - penalty_derivative(cfg, w.weights[i]));
        }
        double wi = w.weights[i] + delta;
        if (cfg.regularizer == Regularizer::L1)
            wi = std::clamp(wi, 0.0, 1.0);
        else if (cfg.regularizer == Regularizer::LH)
            wi = std::max(wi, kWeightFloor);
        out.weights[i] = wi;
    }
    return out;
}

std::vector<double> g_map(const ScoringConfig& cfg, const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        double ev = cfg.eta * v[i];
        switch (cfg.regularizer) {
            case Regularizer::L2: out[i] = ev; break;
            case Regularizer::LH: out[i] = std::exp(ev - 1.0); break;
            case Regularizer::L1: out[i] = ev > 1.0 ? 1.0 : 0.0; break;
        }
    }
    return out;
}

double bregman(const ConvexFn& F, const GradientFn& gradF, const std::vector<double>& a,
               const std::vector<double>& b) {
    if (a.size() != b.size())
        throw DimensionError("bregman arguments must have equal length");
    std::vector<double> gb = gradF(b);
    if (gb.size() != b.size())
        throw DimensionError("gradient dimension mismatch");
    double inner = 0.0;
    for (size_t i = 0; i < a.size(); ++i) inner += gb[i] * (a[i] - b[i]);
    return F(a) - F(b) - inner;
}

double proper_score_from_convex(const ConvexFn& F, const GradientFn& gradF, const ReportMap& rho,
                                const StateVector& x, const std::vector<double>& w) {
    std::vector<double> r = rho(x);
    return -bregman(F, gradF, r, w) - F(r);
}

}  // namespace cortex
