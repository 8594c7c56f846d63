#include "cortex/properness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace cortex {

namespace {

uint64_t mix_seed(uint64_t master, uint64_t index) {
    uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double dot_dense(const std::vector<double>& w, const StateVector& x) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
        if (x.bits[i]) s += w[i];
    return s;
}

double cost_dense(const ScoringConfig& cfg, const std::vector<double>& w) {
    double s = 0.0;
    for (double wi : w) {
        switch (cfg.regularizer) {
            case Regularizer::L2:
                s += wi * wi / (2.0 * cfg.eta);
                break;
            case Regularizer::LH:
                if (wi < 0.0) throw DomainError("LH weight must be nonnegative");
                s += wi * std::log(std::max(wi, kWeightFloor)) / cfg.eta;
                break;
            case Regularizer::L1:
                if (wi < -1e-12 || wi > 1.0 + 1e-12)
                    throw DomainError("L1 weight must lie in [0,1]");
                s += std::abs(wi) / cfg.eta;
                break;
        }
    }
    return s;
}

void project_domain(const ScoringConfig& cfg, std::vector<double>& w) {
    for (double& wi : w) {
        if (cfg.regularizer == Regularizer::L1)
            wi = std::clamp(wi, 0.0, 1.0);
        else if (cfg.regularizer == Regularizer::LH)
            wi = std::max(wi, kWeightFloor);
    }
}

uint32_t spike_mask(const DiscreteDistribution& P, const std::vector<double>& w, double theta) {
    uint32_t m = 0;
    for (size_t o = 0; o < P.outcomes.size(); ++o)
        if (dot_dense(w, P.outcomes[o].x) - theta > 0.0) m |= 1u << o;
    return m;
}

double g_scalar(const ScoringConfig& cfg, double v) {
    double ev = cfg.eta * v;
    switch (cfg.regularizer) {
        case Regularizer::L2: return ev;
        case Regularizer::LH: return std::exp(ev - 1.0);
        case Regularizer::L1: return ev > 1.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

}  // namespace

void DiscreteDistribution::validate() const {
    double sum = 0.0;
    for (const Outcome& o : outcomes) {
        if (o.p < 0.0) throw DomainError("outcome probability must be nonnegative");
        if (!std::isfinite(o.mu)) throw DomainError("utility must be finite");
        if (o.x.size() != dim()) throw DimensionError("outcome states must share a dimension");
        sum += o.p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw DomainError("outcome probabilities must sum to 1");
    for (size_t a = 0; a < outcomes.size(); ++a)
        for (size_t b = a + 1; b < outcomes.size(); ++b)
            if (outcomes[a].x.bits == outcomes[b].x.bits)
                throw DomainError("outcome states must be distinct");
}

double expected_score(const DiscreteDistribution& P, const std::vector<double>& w,
                      const ScoringConfig& cfg, bool selective) {
    if (!P.outcomes.empty() && w.size() != P.dim())
        throw DimensionError("weight dimension must match outcome dimension");
    double cost = cost_dense(cfg, w);
    double s = 0.0;
    for (const Outcome& o : P.outcomes) {
        double margin = dot_dense(w, o.x) - cfg.theta;
        double pay;
        if (selective)
            pay = margin > 0.0 ? o.mu * margin : 0.0;
        else
            pay = o.mu * margin;
        s += o.p * pay;
    }
    return s - cost;
}

std::vector<double> expected_gradient(const DiscreteDistribution& P, const std::vector<double>& w,
                                      const ScoringConfig& cfg, bool selective) {
    std::vector<double> g(w.size(), 0.0);
    for (const Outcome& o : P.outcomes) {
        bool gate = !selective || dot_dense(w, o.x) - cfg.theta > 0.0;
        if (!gate) continue;
        for (size_t i = 0; i < w.size(); ++i)
            if (o.x.bits[i]) g[i] += o.p * o.mu;
    }
    for (size_t i = 0; i < w.size(); ++i) g[i] -= penalty_derivative(cfg, w[i]);
    return g;
}

std::vector<double> mean_utility_state(const DiscreteDistribution& P) {
    std::vector<double> v(P.dim(), 0.0);
    for (const Outcome& o : P.outcomes)
        for (size_t i = 0; i < v.size(); ++i)
            if (o.x.bits[i]) v[i] += o.p * o.mu;
    return v;
}

std::vector<double> gated_mean_utility_state(const DiscreteDistribution& P,
                                             const std::vector<double>& w,
                                             const ScoringConfig& cfg) {
    std::vector<double> v(P.dim(), 0.0);
    for (const Outcome& o : P.outcomes) {
        if (dot_dense(w, o.x) - cfg.theta <= 0.0) continue;
        for (size_t i = 0; i < v.size(); ++i)
            if (o.x.bits[i]) v[i] += o.p * o.mu;
    }
    return v;
}

std::vector<double> gamma_T(const DiscreteDistribution& P, const ScoringConfig& cfg) {
    return g_map(cfg, mean_utility_state(P));
}

GammaS gamma_S(const DiscreteDistribution& P, const ScoringConfig& cfg,
               const std::vector<double>& w_star) {
    GammaS out;
    for (size_t o = 0; o < P.outcomes.size(); ++o)
        if (dot_dense(w_star, P.outcomes[o].x) - cfg.theta > 0.0) out.spike_outcomes.push_back(o);
    out.g_component = g_map(cfg, gated_mean_utility_state(P, w_star, cfg));
    return out;
}

std::vector<double> brute_force_argmax(const DiscreteDistribution& P, const ScoringConfig& cfg,
                                       const WeightGrid& grid, bool selective) {
    size_t dim = P.dim();
    if (dim > 4) throw TractabilityError("brute force limited to dimension <= 4");
    if (P.outcomes.size() > 16) throw TractabilityError("brute force limited to <= 16 outcomes");
    if (grid.steps < 2) throw ConfigError("grid needs at least 2 steps per axis");

    std::vector<double> lo(dim, grid.lo), hi(dim, grid.hi);
    std::vector<double> best(dim, grid.lo);
    double best_score = -std::numeric_limits<double>::infinity();

    for (int round = 0; round <= grid.refinements; ++round) {
        std::vector<double> step(dim);
        for (size_t i = 0; i < dim; ++i) step[i] = (hi[i] - lo[i]) / (grid.steps - 1);

        std::vector<int> idx(dim, 0);
        std::vector<double> w(dim);
        bool done = dim == 0;
        best_score = -std::numeric_limits<double>::infinity();
        while (!done) {
            for (size_t i = 0; i < dim; ++i) w[i] = lo[i] + idx[i] * step[i];
            double s = expected_score(P, w, cfg, selective);
            if (s > best_score) {
                best_score = s;
                best = w;
            }
            // odometer, last coordinate fastest: lexicographic visiting order
            size_t i = dim;
            while (i > 0) {
                --i;
                if (++idx[i] < grid.steps) break;
                idx[i] = 0;
                if (i == 0) done = true;
            }
        }
        if (round < grid.refinements) {
            for (size_t i = 0; i < dim; ++i) {
                lo[i] = std::max(grid.lo, best[i] - step[i]);
                hi[i] = std::min(grid.hi, best[i] + step[i]);
            }
        }
    }
    return best;
}

PropernessReport check_properness(const DiscreteDistribution& P, const ScoringConfig& cfg,
                                  const WeightGrid& grid, bool selective) {
    PropernessReport rep;
    rep.brute_force = brute_force_argmax(P, cfg, grid, selective);
    rep.predicted = selective ? gamma_S(P, cfg, rep.brute_force).g_component : gamma_T(P, cfg);

    double s_bf = expected_score(P, rep.brute_force, cfg, selective);
    std::vector<double> pred = rep.predicted;
    project_domain(cfg, pred);  // grid rounding can leave L1 predictions epsilon outside
    double s_pred = expected_score(P, pred, cfg, selective);
    rep.score_gap = std::max(0.0, s_bf - s_pred);
    rep.weight_distance = 0.0;
    for (size_t i = 0; i < pred.size(); ++i)
        rep.weight_distance = std::max(rep.weight_distance,
                                       std::abs(rep.predicted[i] - rep.brute_force[i]));
    rep.verdict = rep.score_gap <= kPropernessTolerance;
    return rep;
}

double fixed_point_residual(const std::vector<double>& w_tilde, const DiscreteDistribution& P,
                            const ScoringConfig& cfg) {
    std::vector<double> target = g_map(cfg, gated_mean_utility_state(P, w_tilde, cfg));
    double r = 0.0;
    for (size_t i = 0; i < w_tilde.size(); ++i)
        r = std::max(r, std::abs(w_tilde[i] - target[i]));
    return r;
}

AscentResult ascend_expected_score(const DiscreteDistribution& P, const ScoringConfig& cfg,
                                   std::vector<double> w0, const AscentOptions& opt) {
    AscentResult res;
    std::vector<double> w = std::move(w0);
    project_domain(cfg, w);
    double lr0 = opt.lr > 0.0 ? opt.lr : 0.3 * cfg.eta;
    size_t tail_start = opt.max_iters - opt.max_iters / 5;
    uint32_t prev_mask = spike_mask(P, w, cfg.theta);
    res.iters = opt.max_iters;

    for (size_t t = 0; t < opt.max_iters; ++t) {
        double lr = opt.decay ? lr0 / (1.0 + t / 2000.0) : lr0;
        std::vector<double> g = expected_gradient(P, w, cfg, true);
        for (size_t i = 0; i < w.size(); ++i) w[i] += lr * g[i];
        project_domain(cfg, w);

        uint32_t mask = spike_mask(P, w, cfg.theta);
        if (t >= tail_start && mask != prev_mask) ++res.tail_flips;
        prev_mask = mask;

        if (opt.decay && t % 50 == 49 &&
            fixed_point_residual(w, P, cfg) < opt.tol / 3.0) {
            res.iters = t + 1;
            break;
        }
    }
    res.w = std::move(w);
    res.residual = fixed_point_residual(res.w, P, cfg);
    res.oscillating = res.residual > opt.tol && res.tail_flips >= 4;
    return res;
}

Assumption1Check check_assumption1(const DiscreteDistribution& P, const ScoringConfig& cfg,
                                   const std::vector<double>& w, size_t synapse,
                                   const std::vector<double>& eps_grid) {
    Assumption1Check chk;
    chk.synapse = synapse;

    double gated = 0.0;
    for (const Outcome& o : P.outcomes)
        if (o.x.bits[synapse] && dot_dense(w, o.x) - cfg.theta > 0.0) gated += o.p * o.mu;
    chk.delta = gated - penalty_derivative(cfg, w[synapse]);

    if (std::abs(chk.delta) <= 1e-6) {
        chk.vacuous = true;
        chk.holds = true;
        return chk;
    }

    double base = expected_score(P, w, cfg, true);
    bool moved = false;
    for (double eps : eps_grid) {
        std::vector<double> wp = w;
        wp[synapse] += eps * chk.delta;
        project_domain(cfg, wp);
        if (wp[synapse] == w[synapse]) continue;  // clamped against the domain boundary
        moved = true;
        if (expected_score(P, wp, cfg, true) > base) {
            chk.holds = true;
            chk.witness_epsilon = eps;
            return chk;
        }
    }
    if (!moved) {
        // every step left the feasible domain: nothing to ascend
        chk.vacuous = true;
        chk.holds = true;
    }
    return chk;
}

std::vector<Assumption1Check> check_assumption1_all(const DiscreteDistribution& P,
                                                    const ScoringConfig& cfg,
                                                    const std::vector<double>& w,
                                                    const std::vector<double>& eps_grid) {
    std::vector<Assumption1Check> out;
    for (size_t i = 0; i < w.size(); ++i)
        out.push_back(check_assumption1(P, cfg, w, i, eps_grid));
    return out;
}

double usefulness(const DownstreamSnapshot& snap) {
    if (snap.w_down.size() != snap.spikes.size())
        throw DimensionError("downstream weights/spikes length mismatch");
    if (!snap.spiked) return 0.0;
    double u = 0.0;
    for (size_t k = 0; k < snap.w_down.size(); ++k)
        if (snap.spikes[k]) u += snap.w_down[k];
    return u;
}

void UsefulnessAccumulator::add(uint8_t spike_j, double ff_current,
                                const std::vector<uint8_t>& spikes_k,
                                const std::vector<double>& mu_k) {
    if (spikes_k.size() != sum_mu_cospike.size() || mu_k.size() != sum_mu_cospike.size())
        throw DimensionError("accumulator dimension mismatch");
    ++samples;
    if (!spike_j) return;
    for (size_t k = 0; k < spikes_k.size(); ++k) {
        if (!spikes_k[k]) continue;
        sum_mu_cospike[k] += mu_k[k];
        sum_current_cospike[k] += ff_current;
    }
}

double UsefulnessAccumulator::mean_mu(size_t k) const {
    return samples ? sum_mu_cospike[k] / samples : 0.0;
}

double UsefulnessAccumulator::mean_current(size_t k) const {
    return samples ? sum_current_cospike[k] / samples : 0.0;
}

double usefulness_gap(const ScoringConfig& cfg, const UsefulnessAccumulator& acc, uint8_t spike_j,
                      const std::vector<uint8_t>& spikes_k) {
    if (spikes_k.size() != acc.sum_mu_cospike.size())
        throw DimensionError("gap dimension mismatch");
    if (!spike_j) return 0.0;
    double gap = 0.0;
    for (size_t k = 0; k < spikes_k.size(); ++k) {
        if (!spikes_k[k]) continue;
        gap += g_scalar(cfg, acc.mean_mu(k)) - g_scalar(cfg, acc.mean_current(k));
    }
    return gap;
}

DiscreteDistribution random_instance(std::mt19937_64& rng, int dim, int max_outcomes,
                                     bool nonneg_mu) {
    int n_states = 1 << dim;
    std::vector<int> states(n_states);
    std::iota(states.begin(), states.end(), 0);
    std::shuffle(states.begin(), states.end(), rng);

    int lo_count = 2;
    int hi_count = std::min(max_outcomes, n_states);
    std::uniform_int_distribution<int> count_dist(lo_count, hi_count);
    int count = count_dist(rng);

    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> mu_dist(nonneg_mu ? 0.0 : -1.0, 1.0);

    DiscreteDistribution P;
    std::vector<double> masses(count);
    double total = 0.0;
    for (double& m : masses) {
        m = expo(rng) + 1e-6;
        total += m;
    }
    for (int c = 0; c < count; ++c) {
        Outcome o;
        std::vector<uint8_t> bits(dim);
        for (int i = 0; i < dim; ++i) bits[i] = (states[c] >> i) & 1;
        o.x = StateVector(std::move(bits));
        o.p = masses[c] / total;
        o.mu = mu_dist(rng);
        P.outcomes.push_back(std::move(o));
    }
    P.validate();
    return P;
}

AdversarialInstance make_adversarial_instance(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int attempt = 0; attempt < 256; ++attempt) {
        double theta = 0.25 + 0.25 * u01(rng);
        double eta = 0.8 + 0.4 * u01(rng);
        double p_a = 0.5 + 0.15 * u01(rng);
        double mu_a = 0.8 + 0.4 * u01(rng);
        double mu_b = -(2.0 + 2.0 * u01(rng));
        double p_b = 1.0 - p_a;

        // rewarded fixed point sits above threshold; the hidden outcome's
        // mass overwhelms the gain from crossing the kink
        if (eta * p_a * mu_a <= theta + 0.05) continue;
        if (p_b * std::abs(mu_b) <= p_a * mu_a - theta / eta + 0.1) continue;

        AdversarialInstance inst;
        inst.cfg = ScoringConfig(Regularizer::L2, eta, theta);
        inst.P.outcomes.push_back({StateVector{1, 0}, p_a, mu_a});
        inst.P.outcomes.push_back({StateVector{1, 1}, p_b, mu_b});
        inst.trap_outcome = 1;
        inst.P.validate();
        return inst;
    }
    throw ConfigError("failed to draw an adversarial instance");
}

namespace {

WeightGrid grid_for(Regularizer reg) {
    WeightGrid g;
    g.refinements = 3;
    switch (reg) {
        case Regularizer::L2: g.lo = -2.0; g.hi = 2.0; break;
        case Regularizer::LH: g.lo = 0.0;  g.hi = 2.0; break;
        case Regularizer::L1: g.lo = 0.0;  g.hi = 1.0; break;
    }
    return g;
}

ScoringConfig random_config(std::mt19937_64& rng, Regularizer reg) {
    std::uniform_real_distribution<double> eta_dist(0.5, 1.5);
    std::uniform_real_distribution<double> theta_dist(0.2, 0.9);
    return ScoringConfig(reg, eta_dist(rng), theta_dist(rng));
}

void finish(SuiteSummary& s, CheckRecord rec) {
    ++s.total;
    if (rec.verdict) ++s.passed;
    s.worst_gap = std::max(s.worst_gap, rec.score_gap);
    s.worst_distance = std::max(s.worst_distance, rec.weight_distance);
    s.records.push_back(std::move(rec));
}

}  // namespace

SuiteSummary properness_suite_selfree(Regularizer reg, int count, uint64_t master_seed) {
    SuiteSummary suite;
    suite.name = std::string("properness_selfree_") + to_string(reg);
    for (int i = 0; i < count; ++i) {
        uint64_t seed = mix_seed(master_seed, i);
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> dim_dist(1, 3);
        int dim = dim_dist(rng);
        DiscreteDistribution P = random_instance(rng, dim, 8, false);
        ScoringConfig cfg = random_config(rng, reg);
        PropernessReport rep = check_properness(P, cfg, grid_for(reg), false);

        CheckRecord rec;
        rec.seed = seed;
        rec.suite = suite.name;
        rec.regularizer = to_string(reg);
        rec.score_gap = rep.score_gap;
        rec.weight_distance = rep.weight_distance;
        rec.verdict = rep.verdict && rep.weight_distance <= 1e-3;
        finish(suite, std::move(rec));
    }
    return suite;
}

SuiteSummary properness_suite_selective(int count, uint64_t master_seed) {
    SuiteSummary suite;
    suite.name = "properness_selective";
    const Regularizer regs[] = {Regularizer::L2, Regularizer::LH, Regularizer::L1};
    for (int i = 0; i < count; ++i) {
        uint64_t seed = mix_seed(master_seed ^ 0x5e1ec71fULL, i);
        std::mt19937_64 rng(seed);
        Regularizer reg = regs[i % 3];
        std::uniform_int_distribution<int> dim_dist(1, 3);
        int dim = dim_dist(rng);
        DiscreteDistribution P = random_instance(rng, dim, 8, true);  // mu >= 0
        ScoringConfig cfg = random_config(rng, reg);
        PropernessReport rep = check_properness(P, cfg, grid_for(reg), true);

        bool assumption_ok = true;
        for (const Assumption1Check& chk :
             check_assumption1_all(P, cfg, rep.brute_force, default_epsilon_grid()))
            assumption_ok = assumption_ok && chk.holds;

        CheckRecord rec;
        rec.seed = seed;
        rec.suite = suite.name;
        rec.regularizer = to_string(reg);
        rec.score_gap = rep.score_gap;
        rec.weight_distance = rep.weight_distance;
        rec.verdict = rep.verdict && rep.weight_distance <= 1e-3 && assumption_ok;
        if (!assumption_ok) rec.note = "assumption1 failed on a mu>=0 instance";
        finish(suite, std::move(rec));
    }
    return suite;
}

SuiteSummary adversarial_suite(int count, uint64_t master_seed) {
    SuiteSummary suite;
    suite.name = "adversarial";
    for (int i = 0; i < count; ++i) {
        uint64_t seed = mix_seed(master_seed ^ 0xad3e5a1ULL, i);
        std::mt19937_64 rng(seed);
        AdversarialInstance inst = make_adversarial_instance(rng);

        AscentOptions opt;
        opt.max_iters = 30000;
        opt.decay = false;
        opt.lr = 0.02 * inst.cfg.eta;
        std::uniform_real_distribution<double> w0_dist(0.0, 1.0);
        std::vector<double> w0 = {inst.cfg.theta + w0_dist(rng), -0.2 * w0_dist(rng)};
        AscentResult asc = ascend_expected_score(inst.P, inst.cfg, w0, opt);

        // project the wandering weight onto the kink of the trap outcome and
        // interrogate the assumption exactly where the gradient jumps
        const StateVector& xt = inst.P.outcomes[inst.trap_outcome].x;
        std::vector<double> w_edge = asc.w;
        double margin = dot_dense(w_edge, xt) - inst.cfg.theta;
        size_t adj = 0;
        for (size_t c = 0; c < xt.size(); ++c)
            if (xt.bits[c]) adj = c;  // last active coordinate
        w_edge[adj] -= margin;

        Assumption1Check chk =
            check_assumption1(inst.P, inst.cfg, w_edge, adj, default_epsilon_grid());

        CheckRecord rec;
        rec.seed = seed;
        rec.suite = suite.name;
        rec.regularizer = to_string(inst.cfg.regularizer);
        rec.extra = asc.residual;
        rec.verdict = asc.oscillating && !chk.holds;
        rec.note = asc.oscillating ? "oscillating" : "converged";
        if (chk.holds) rec.note += "; assumption unexpectedly held";
        finish(suite, std::move(rec));
    }
    return suite;
}

SuiteSummary fixed_point_suite(int instances, int starts_per_instance, uint64_t master_seed) {
    SuiteSummary suite;
    suite.name = "fixed_point";
    const Regularizer regs[] = {Regularizer::L2, Regularizer::LH};
    for (Regularizer reg : regs) {
        for (int i = 0; i < instances; ++i) {
            uint64_t seed = mix_seed(master_seed ^ 0xf1cedULL, i * 2 + (reg == Regularizer::LH));
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<int> dim_dist(1, 3);
            int dim = dim_dist(rng);
            DiscreteDistribution P = random_instance(rng, dim, 8, true);
            ScoringConfig cfg = random_config(rng, reg);

            double worst = 0.0;
            bool ok = true;
            std::uniform_real_distribution<double> start_dist(
                reg == Regularizer::LH ? 0.05 : -1.0, reg == Regularizer::LH ? 1.5 : 1.0);
            for (int s = 0; s < starts_per_instance; ++s) {
                std::vector<double> w0(dim);
                for (double& v : w0) v = start_dist(rng);
                AscentOptions opt;
                opt.tol = 1e-3;
                AscentResult asc = ascend_expected_score(P, cfg, w0, opt);
                worst = std::max(worst, asc.residual);
                ok = ok && asc.residual <= 1e-3;
            }

            CheckRecord rec;
            rec.seed = seed;
            rec.suite = suite.name;
            rec.regularizer = to_string(reg);
            rec.extra = worst;
            rec.verdict = ok;
            finish(suite, std::move(rec));
        }
    }
    return suite;
}

SuiteSummary gradient_check_suite(int count, uint64_t master_seed) {
    SuiteSummary suite;
    suite.name = "gradient_check";
    const Regularizer regs[] = {Regularizer::L2, Regularizer::LH, Regularizer::L1};
    const double h = 1e-6;
    for (int i = 0; i < count; ++i) {
        uint64_t seed = mix_seed(master_seed ^ 0x96adULL, i);
        std::mt19937_64 rng(seed);
        Regularizer reg = regs[i % 3];
        std::uniform_real_distribution<double> eta_dist(0.5, 2.0);
        std::uniform_real_distribution<double> theta_dist(0.1, 1.0);
        ScoringConfig cfg(reg, eta_dist(rng), theta_dist(rng));
        std::uniform_int_distribution<int> dim_dist(1, 5);
        std::uniform_real_distribution<double> mu_mag(0.2, 1.5);
        std::bernoulli_distribution coin(0.5);

        int dim = dim_dist(rng);
        double worst = 0.0;
        int checked = 0;
        for (int tries = 0; tries < 64; ++tries) {
            std::vector<uint8_t> bits(dim);
            for (auto& b : bits) b = coin(rng) ? 1 : 0;
            StateVector x(bits);
            std::vector<double> wv(dim);
            std::uniform_real_distribution<double> w_dist(
                reg == Regularizer::L2 ? -1.0 : 0.05, reg == Regularizer::L1 ? 0.95 : 1.5);
            for (double& v : wv) v = w_dist(rng);
            double mu = (coin(rng) ? 1 : -1) * mu_mag(rng);

            WeightVector w = WeightVector::dense(wv);
            if (std::abs(dot(w, x) - cfg.theta) <= 1e-3) continue;  // too close to the kink

            std::vector<double> g = score_gradient(cfg, w, x, mu);
            for (int c = 0; c < dim; ++c) {
                if (std::abs(g[c]) < 1e-3) continue;
                WeightVector wp = w, wm = w;
                wp.weights[c] += h;
                wm.weights[c] -= h;
                double fd = (score(x, wp, mu, cfg) - score(x, wm, mu, cfg)) / (2.0 * h);
                worst = std::max(worst, std::abs(fd - g[c]) / std::abs(g[c]));
                ++checked;
            }
            if (checked > 0) break;
        }

        CheckRecord rec;
        rec.seed = seed;
        rec.suite = suite.name;
        rec.regularizer = to_string(reg);
        rec.extra = worst;
        rec.verdict = checked > 0 && worst <= 1e-5;
        finish(suite, std::move(rec));
    }
    return suite;
}

void write_report_jsonl(const std::vector<SuiteSummary>& suites, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open report file: " + path);
    for (const SuiteSummary& s : suites) {
        for (const CheckRecord& r : s.records) {
            nlohmann::json j{{"type", "check"},
                             {"suite", r.suite},
                             {"seed", r.seed},
                             {"regularizer", r.regularizer},
                             {"verdict", r.verdict},
                             {"score_gap", r.score_gap},
                             {"weight_distance", r.weight_distance},
                             {"extra", r.extra}};
            if (!r.note.empty()) j["note"] = r.note;
            out << j.dump() << "\n";
        }
        nlohmann::json j{{"type", "summary"},
                         {"suite", s.name},
                         {"total", s.total},
                         {"passed", s.passed},
                         {"worst_gap", s.worst_gap},
                         {"worst_distance", s.worst_distance}};
        out << j.dump() << "\n";
    }
}

}  // namespace cortex
