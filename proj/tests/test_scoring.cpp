#include <cmath>
#include <random>

#include "doctest.h"

#include "cortex/scoring.hpp"

using namespace cortex;

namespace {

WeightVector wv(std::vector<double> w) { return WeightVector::dense(std::move(w)); }

}  // namespace

TEST_CASE("activation thresholds strictly") {
    CHECK(activate(wv({1, 1}), StateVector{1, 0}, 0.5) == 1);
    CHECK(activate(wv({1, 1}), StateVector{0, 0}, 0.5) == 0);
    // boundary: dot == theta does not spike
    CHECK(activate(wv({0.5}), StateVector{1}, 0.5) == 0);
    CHECK_THROWS_AS(activate(wv({1.0}), StateVector{1, 0}, 0.5), DimensionError);
}

TEST_CASE("reward = utility * margin * selectivity") {
    CHECK(reward(StateVector{0, 0}, wv({1, 1}), 5.0, 0.5) == 0.0);
    CHECK(reward(StateVector{1, 1}, wv({1, 1}), 2.0, 0.5) == doctest::Approx(3.0));
    CHECK(reward(StateVector{1}, wv({1}), -1.0, 0.5) == doctest::Approx(-0.5));
}

TEST_CASE("selectivity gate zeroes reward whenever the neuron is silent") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> wd(-1, 1), mud(-2, 2), td(0, 2);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + trial % 5;
        std::vector<double> w(n);
        std::vector<uint8_t> x(n);
        for (int i = 0; i < n; ++i) {
            w[i] = wd(rng);
            x[i] = coin(rng);
        }
        double theta = td(rng), mu = mud(rng);
        WeightVector W = wv(w);
        StateVector X(x);
        if (activate(W, X, theta) == 0) CHECK(reward(X, W, mu, theta) == 0.0);
    }
}

TEST_CASE("regularizer costs") {
    CHECK(regularizer_cost(ScoringConfig(Regularizer::L2, 1, 0), wv({3, 4})) ==
          doctest::Approx(12.5));
    CHECK(regularizer_cost(ScoringConfig(Regularizer::LH, 1, 0), wv({1, 1})) ==
          doctest::Approx(0.0));
    CHECK(regularizer_cost(ScoringConfig(Regularizer::L1, 2, 0), wv({0.5, 0.5})) ==
          doctest::Approx(0.5));
    CHECK_THROWS_AS(regularizer_cost(ScoringConfig(Regularizer::L1, 1, 0), wv({-0.1})),
                    DomainError);
    CHECK_THROWS_AS(regularizer_cost(ScoringConfig(Regularizer::LH, 1, 0), wv({-0.1})),
                    DomainError);
    // masked-out entries do not contribute
    WeightVector masked({0.0, 4.0}, {0, 1});
    CHECK(regularizer_cost(ScoringConfig(Regularizer::L2, 1, 0), masked) == doctest::Approx(8.0));
}

TEST_CASE("score composes reward and cost") {
    ScoringConfig l1(Regularizer::L1, 1.0, 0.5);
    CHECK(score(StateVector{0, 0}, wv({0, 0}), 1.0, l1) == 0.0);
    ScoringConfig l2(Regularizer::L2, 1.0, 0.5);
    CHECK(score(StateVector{1, 1}, wv({1, 1}), 2.0, l2) == doctest::Approx(2.0));
}

TEST_CASE("per-synapse scores sum exactly to the score") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> wd(0.01, 0.99), mud(-2, 2), td(0, 1.5);
    std::bernoulli_distribution coin(0.5);
    const Regularizer regs[] = {Regularizer::L2, Regularizer::LH, Regularizer::L1};
    for (int trial = 0; trial < 300; ++trial) {
        int n = 1 + trial % 6;
        std::vector<double> w(n);
        std::vector<uint8_t> x(n), mask(n);
        bool any = false;
        for (int i = 0; i < n; ++i) {
            w[i] = wd(rng);
            x[i] = coin(rng);
            mask[i] = coin(rng);
            any = any || mask[i];
        }
        if (!any) mask[0] = 1;
        WeightVector W(w, mask);
        StateVector X(x);
        ScoringConfig cfg(regs[trial % 3], 0.5 + wd(rng), td(rng));
        double mu = mud(rng);
        std::vector<double> parts = synapse_scores(X, W, mu, cfg);
        double total = 0.0;
        for (size_t i = 0; i < parts.size(); ++i) {
            total += parts[i];
            if (!mask[i]) CHECK(parts[i] == 0.0);
        }
        CHECK(total == doctest::Approx(score(X, W, mu, cfg)).epsilon(1e-12));
    }
}

TEST_CASE("grad_update spec cases") {
    // silent neuron, L2: pure decay
    ScoringConfig l2(Regularizer::L2, 2.0, 10.0);
    WeightVector w = wv({0.4, 0.8});
    StateVector x{1, 1};
    WeightVector out = grad_update(l2, w, x, 1.0, 0.1);
    CHECK(out.weights[0] == doctest::Approx(0.4 - 0.1 * 0.4 / 2.0));
    CHECK(out.weights[1] == doctest::Approx(0.8 - 0.1 * 0.8 / 2.0));

    // spiking L1 case: delta = lr*(mu - 1/eta)
    ScoringConfig l1(Regularizer::L1, 2.0, 0.1);
    out = grad_update(l1, wv({0.5}), StateVector{1}, 1.0, 0.1);
    CHECK(out.weights[0] == doctest::Approx(0.55));

    // pure cospike rule: no penalty, gated entirely by the cospike
    out = grad_update(l2, w, x, 1.0, 0.1, UpdateRule::PureCospike);
    CHECK(out.weights[0] == doctest::Approx(0.4));  // silent -> frozen
}

TEST_CASE("grad_update preserves regularizer domains over long runs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mud(-2, 2);
    std::bernoulli_distribution coin(0.5);
    ScoringConfig l1(Regularizer::L1, 1.0, 0.5);
    ScoringConfig lh(Regularizer::LH, 1.0, 0.5);
    WeightVector w1 = wv({0.5, 0.5, 0.5});
    WeightVector wh = wv({0.5, 0.5, 0.5});
    for (int t = 0; t < 2000; ++t) {
        std::vector<uint8_t> bits(3);
        for (auto& b : bits) b = coin(rng);
        StateVector x(bits);
        double mu = mud(rng);
        w1 = grad_update(l1, w1, x, mu, 0.2);
        wh = grad_update(lh, wh, x, mu, 0.2);
        for (double v : w1.weights) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        for (double v : wh.weights) CHECK(v >= kWeightFloor);
    }
}

TEST_CASE("gradient matches central finite differences away from the kink") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> mud(0.2, 1.5), td(0.1, 1.0), ed(0.5, 2.0);
    std::bernoulli_distribution coin(0.5);
    const Regularizer regs[] = {Regularizer::L2, Regularizer::LH, Regularizer::L1};
    const double h = 1e-6;
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        Regularizer reg = regs[trial % 3];
        int n = 1 + trial % 4;
        std::uniform_real_distribution<double> wd(reg == Regularizer::L2 ? -1.0 : 0.05,
                                                  reg == Regularizer::L1 ? 0.95 : 1.5);
        std::vector<double> w(n);
        std::vector<uint8_t> x(n);
        for (int i = 0; i < n; ++i) {
            w[i] = wd(rng);
            x[i] = coin(rng);
        }
        ScoringConfig cfg(reg, ed(rng), td(rng));
        double mu = (coin(rng) ? 1 : -1) * mud(rng);
        WeightVector W = wv(w);
        StateVector X(x);
        if (std::abs(dot(W, X) - cfg.theta) <= 1e-3) continue;
        std::vector<double> g = score_gradient(cfg, W, X, mu);
        for (int i = 0; i < n; ++i) {
            if (std::abs(g[i]) < 1e-3) continue;
            WeightVector wp = W, wm = W;
            wp.weights[i] += h;
            wm.weights[i] -= h;
            double fd = (score(X, wp, mu, cfg) - score(X, wm, mu, cfg)) / (2 * h);
            CHECK(std::abs(fd - g[i]) / std::abs(g[i]) <= 1e-5);
            ++checked;
        }
    }
    CHECK(checked > 300);
}

TEST_CASE("g_map spec cases") {
    CHECK(g_map(ScoringConfig(Regularizer::L2, 1, 0), {0.3})[0] == doctest::Approx(0.3));
    CHECK(g_map(ScoringConfig(Regularizer::LH, 1, 0), {1.0})[0] == doctest::Approx(1.0));
    std::vector<double> g1 = g_map(ScoringConfig(Regularizer::L1, 2, 0), {0.6, 0.4});
    CHECK(g1[0] == 1.0);
    CHECK(g1[1] == 0.0);
    // tie case eta*v == 1 maps to 0
    CHECK(g_map(ScoringConfig(Regularizer::L1, 2, 0), {0.5})[0] == 0.0);
}

TEST_CASE("bregman divergence") {
    ConvexFn F = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x * x;
        return 0.5 * s;
    };
    GradientFn gF = [](const std::vector<double>& v) { return v; };
    CHECK(bregman(F, gF, {1, 2}, {1, 2}) == doctest::Approx(0.0));
    CHECK(bregman(F, gF, {1, 0}, {0, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(bregman(F, gF, {1}, {1, 2}), DimensionError);

    // random convex quadratics stay nonnegative
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> d(-2, 2), q(0.1, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + trial % 4;
        std::vector<double> diag(n);
        for (double& v : diag) v = q(rng);
        ConvexFn Fq = [diag](const std::vector<double>& v) {
            double s = 0;
            for (size_t i = 0; i < v.size(); ++i) s += 0.5 * diag[i] * v[i] * v[i];
            return s;
        };
        GradientFn gFq = [diag](const std::vector<double>& v) {
            std::vector<double> g(v.size());
            for (size_t i = 0; i < v.size(); ++i) g[i] = diag[i] * v[i];
            return g;
        };
        std::vector<double> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = d(rng);
            b[i] = d(rng);
        }
        CHECK(bregman(Fq, gFq, a, b) >= -1e-12);
    }
}

TEST_CASE("proper score from convex function") {
    ConvexFn F = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x * x;
        return 0.5 * s;
    };
    GradientFn gF = [](const std::vector<double>& v) { return v; };
    double mu = 0.7;
    ReportMap rho = [mu](const StateVector& x) {
        std::vector<double> r(x.size());
        for (size_t i = 0; i < x.size(); ++i) r[i] = mu * x.bits[i];
        return r;
    };

    // w = rho(x) leaves only -F(rho(x))
    StateVector x{1, 0};
    std::vector<double> w = rho(x);
    CHECK(proper_score_from_convex(F, gF, rho, x, w) == doctest::Approx(-F(w)));

    // equals <mu x, w> - ||w||^2/2 up to a w-independent constant
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> d(-1, 1);
    for (const StateVector& xs : {StateVector{1, 0}, StateVector{0, 1}, StateVector{1, 1}}) {
        double offset = 0.0;
        bool first = true;
        for (int trial = 0; trial < 25; ++trial) {
            std::vector<double> wt = {d(rng), d(rng)};
            double direct = 0.0;
            for (size_t i = 0; i < wt.size(); ++i) direct += mu * xs.bits[i] * wt[i];
            double norm = 0.0;
            for (double v : wt) norm += v * v;
            direct -= 0.5 * norm;
            double via_bregman = proper_score_from_convex(F, gF, rho, xs, wt);
            if (first) {
                offset = via_bregman - direct;
                first = false;
            } else {
                CHECK(via_bregman - direct == doctest::Approx(offset).epsilon(1e-10));
            }
        }
    }
}
