#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"

#include "cortex/properness.hpp"

using namespace cortex;

namespace {

DiscreteDistribution point_mass(StateVector x, double mu) {
    DiscreteDistribution P;
    P.outcomes.push_back({std::move(x), 1.0, mu});
    return P;
}

}  // namespace

TEST_CASE("distribution validation") {
    DiscreteDistribution P;
    P.outcomes.push_back({StateVector{1, 0}, 0.6, 1.0});
    P.outcomes.push_back({StateVector{0, 1}, 0.4, -1.0});
    CHECK_NOTHROW(P.validate());

    DiscreteDistribution bad = P;
    bad.outcomes[0].p = 0.7;
    CHECK_THROWS_AS(bad.validate(), DomainError);

    DiscreteDistribution dup = P;
    dup.outcomes[1].x = StateVector{1, 0};
    CHECK_THROWS_AS(dup.validate(), DomainError);
}

TEST_CASE("expected score spec cases") {
    ScoringConfig l2(Regularizer::L2, 1.0, 0.5);
    // point mass equals the plain score
    DiscreteDistribution P = point_mass(StateVector{1, 1}, 2.0);
    CHECK(expected_score(P, {1.0, 1.0}, l2, true) == doctest::Approx(2.0));

    // w = 0 under L1: no spike, no cost
    ScoringConfig l1(Regularizer::L1, 1.0, 0.5);
    CHECK(expected_score(P, {0.0, 0.0}, l1, true) == 0.0);

    // uniform over two one-hot states
    DiscreteDistribution U;
    U.outcomes.push_back({StateVector{1, 0}, 0.5, 1.0});
    U.outcomes.push_back({StateVector{0, 1}, 0.5, 1.0});
    CHECK(expected_score(U, {1.0, 1.0}, l2, true) == doctest::Approx(-0.5));
}

TEST_CASE("expected score is linear in probabilities") {
    std::mt19937_64 rng(31);
    DiscreteDistribution A = random_instance(rng, 3, 8, false);
    DiscreteDistribution B = random_instance(rng, 3, 8, false);
    ScoringConfig cfg(Regularizer::L2, 1.0, 0.4);
    std::vector<double> w = {0.3, -0.2, 0.7};

    // mix over a shared outcome list (utilities tied to states)
    for (double lam : {0.25, 0.5, 0.75}) {
        DiscreteDistribution M;
        for (const Outcome& o : A.outcomes) M.outcomes.push_back({o.x, o.p * lam, o.mu});
        for (const Outcome& o : B.outcomes) {
            bool merged = false;
            for (Outcome& m : M.outcomes)
                if (m.x.bits == o.x.bits && m.mu == o.mu) {
                    m.p += o.p * (1 - lam);
                    merged = true;
                    break;
                }
            if (!merged) M.outcomes.push_back({o.x, o.p * (1 - lam), o.mu});
        }
        double reward_mix = expected_score(M, w, cfg, true);
        double expect = lam * expected_score(A, w, cfg, true) +
                        (1 - lam) * expected_score(B, w, cfg, true);
        CHECK(reward_mix == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("gamma_T spec cases") {
    DiscreteDistribution P = point_mass(StateVector{1, 0}, 0.0);
    ScoringConfig l2(Regularizer::L2, 1.0, 0.5);
    ScoringConfig lh(Regularizer::LH, 1.0, 0.5);
    ScoringConfig l1(Regularizer::L1, 1.0, 0.5);
    CHECK(gamma_T(P, l2) == std::vector<double>{0.0, 0.0});
    std::vector<double> gh = gamma_T(P, lh);
    CHECK(gh[0] == doctest::Approx(std::exp(-1.0)));
    CHECK(gh[1] == doctest::Approx(std::exp(-1.0)));
    CHECK(gamma_T(P, l1) == std::vector<double>{0.0, 0.0});

    DiscreteDistribution Q = point_mass(StateVector{1, 0}, 1.0);
    std::vector<double> g2 = gamma_T(Q, l2);
    CHECK(g2[0] == doctest::Approx(1.0));
    CHECK(g2[1] == doctest::Approx(0.0));
}

TEST_CASE("brute force guards and basics") {
    std::mt19937_64 rng(37);
    DiscreteDistribution big = random_instance(rng, 5, 8, false);
    WeightGrid grid;
    CHECK_THROWS_AS(brute_force_argmax(big, ScoringConfig(), grid, false), TractabilityError);

    // zero utility: L2/L1 optimum at the origin
    DiscreteDistribution P;
    P.outcomes.push_back({StateVector{1, 0}, 0.5, 0.0});
    P.outcomes.push_back({StateVector{0, 1}, 0.5, 0.0});
    WeightGrid g2{-2, 2, 21, 2};
    std::vector<double> w = brute_force_argmax(P, ScoringConfig(Regularizer::L2, 1, 0.5), g2, false);
    CHECK(std::abs(w[0]) <= 1e-9);
    CHECK(std::abs(w[1]) <= 1e-9);
    WeightGrid g1{0, 1, 21, 2};
    w = brute_force_argmax(P, ScoringConfig(Regularizer::L1, 1, 0.5), g1, false);
    CHECK(w == std::vector<double>{0.0, 0.0});
}

TEST_CASE("selectivity-free properness holds for all three regularizers") {
    for (Regularizer reg : {Regularizer::L2, Regularizer::LH, Regularizer::L1}) {
        SuiteSummary s = properness_suite_selfree(reg, 10, 123);
        CHECK(s.passed == s.total);
        CHECK(s.worst_gap <= kPropernessTolerance);
        CHECK(s.worst_distance <= 1e-3);
    }
}

TEST_CASE("L1 brute force lands on the unit hypercube corners") {
    for (int i = 0; i < 10; ++i) {
        std::mt19937_64 rng(400 + i);
        DiscreteDistribution P = random_instance(rng, 3, 8, false);
        ScoringConfig cfg(Regularizer::L1, 1.2, 0.4);
        WeightGrid grid{0, 1, 21, 3};
        std::vector<double> w = brute_force_argmax(P, cfg, grid, false);
        for (double v : w) CHECK(std::min(v, 1.0 - v) <= 1e-3);
    }
}

TEST_CASE("gamma_S spec cases") {
    ScoringConfig l2(Regularizer::L2, 1.0, 0.5);
    DiscreteDistribution P = point_mass(StateVector{1, 1}, 1.0);

    GammaS empty = gamma_S(P, l2, {0.0, 0.0});
    CHECK(empty.spike_outcomes.empty());
    CHECK(empty.g_component == std::vector<double>{0.0, 0.0});

    // spiking point mass: gated expectation equals the ungated one
    GammaS full = gamma_S(P, l2, {1.0, 1.0});
    CHECK(full.spike_outcomes.size() == 1);
    CHECK(full.g_component == gamma_T(P, l2));
}

TEST_CASE("selective optimum is a fixed point of the gated G map") {
    // mu >= 0 instances; high-resolution oracle pins w* to 1e-6
    for (int i = 0; i < 6; ++i) {
        std::mt19937_64 rng(900 + i);
        DiscreteDistribution P = random_instance(rng, 2, 4, true);
        ScoringConfig cfg(Regularizer::L2, 1.0, 0.5);
        WeightGrid grid{-2, 2, 21, 5};
        std::vector<double> w_bf = brute_force_argmax(P, cfg, grid, true);
        GammaS gs = gamma_S(P, cfg, w_bf);
        for (size_t c = 0; c < w_bf.size(); ++c)
            CHECK(std::abs(gs.g_component[c] - w_bf[c]) <= 1e-6);
    }
}

TEST_CASE("fixed point residual spec cases") {
    ScoringConfig l2(Regularizer::L2, 1.0, 0.5);
    std::mt19937_64 rng(41);
    DiscreteDistribution P = random_instance(rng, 2, 4, true);

    // silent neuron is a fixed point when utilities are nonnegative
    CHECK(fixed_point_residual({0.0, 0.0}, P, l2) == doctest::Approx(0.0));

    AscentOptions opt;
    AscentResult asc = ascend_expected_score(P, l2, {0.4, 0.4}, opt);
    CHECK(asc.residual <= 1e-3);

    // perturbing a converged point leaves a visible residual
    std::vector<double> w = asc.w;
    w[0] += 0.1;
    CHECK(fixed_point_residual(w, P, l2) > 1e-3);
}

TEST_CASE("fixed point suite converges for L2 and LH") {
    SuiteSummary s = fixed_point_suite(3, 5, 321);
    CHECK(s.passed == s.total);
}

TEST_CASE("assumption 1 holds under nonnegative utilities") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 20; ++i) {
        DiscreteDistribution P = random_instance(rng, 3, 8, true);
        ScoringConfig cfg(Regularizer::L2, 1.0, 0.4);
        std::uniform_real_distribution<double> wd(-0.5, 1.0);
        std::vector<double> w = {wd(rng), wd(rng), wd(rng)};
        for (const Assumption1Check& chk : check_assumption1_all(P, cfg, w, default_epsilon_grid()))
            CHECK(chk.holds);
    }
}

TEST_CASE("assumption 1 is vacuous at zero delta") {
    // a weight with exactly zero gradient: no utility mass, no penalty at 0
    DiscreteDistribution P = point_mass(StateVector{1, 0}, 0.0);
    ScoringConfig cfg(Regularizer::L2, 1.0, 0.5);
    Assumption1Check chk = check_assumption1(P, cfg, {0.0, 0.0}, 1, default_epsilon_grid());
    CHECK(chk.vacuous);
    CHECK(chk.holds);
}

TEST_CASE("adversarial instances oscillate and fail the assumption") {
    SuiteSummary s = adversarial_suite(10, 777);
    CHECK(s.passed == s.total);
    for (const CheckRecord& r : s.records) CHECK(r.extra > 1e-3);  // residual stays up
}

TEST_CASE("selective suite passes with assumption pre-screening") {
    SuiteSummary s = properness_suite_selective(12, 555);
    CHECK(s.passed == s.total);
}

TEST_CASE("gradient check suite") {
    SuiteSummary s = gradient_check_suite(60, 99);
    CHECK(s.passed == s.total);
}

TEST_CASE("usefulness spec cases") {
    DownstreamSnapshot snap;
    snap.w_down = {0.7, 0.2};
    snap.spikes = {1, 0};
    snap.spiked = 0;
    CHECK(usefulness(snap) == 0.0);  // silent neuron

    snap.spiked = 1;
    CHECK(usefulness(snap) == doctest::Approx(0.7));

    snap.spikes = {0, 0};
    CHECK(usefulness(snap) == 0.0);  // no downstream cospikes
}

TEST_CASE("usefulness gap spec cases") {
    ScoringConfig l2(Regularizer::L2, 1.0, 0.5);
    UsefulnessAccumulator acc(2);

    // feedforward current exactly equals downstream utility on all cospikes
    for (int t = 0; t < 50; ++t)
        acc.add(1, 0.8, {1, 1}, {0.8, 0.8});
    CHECK(usefulness_gap(l2, acc, 1, {1, 1}) == doctest::Approx(0.0));

    // no cospikes observed -> 0
    UsefulnessAccumulator empty(2);
    for (int t = 0; t < 50; ++t) empty.add(1, 0.8, {0, 0}, {0.5, 0.5});
    CHECK(usefulness_gap(l2, empty, 1, {1, 1}) == doctest::Approx(0.0));

    // L2 gap is monotone in the argument difference
    UsefulnessAccumulator lo(1), hi(1);
    for (int t = 0; t < 50; ++t) {
        lo.add(1, 0.5, {1}, {0.6});
        hi.add(1, 0.2, {1}, {0.9});
    }
    CHECK(usefulness_gap(l2, hi, 1, {1}) > usefulness_gap(l2, lo, 1, {1}));
}

TEST_CASE("report file is valid json lines") {
    SuiteSummary s = gradient_check_suite(6, 1);
    std::string path = "properness_report_test.jsonl";
    write_report_jsonl({s}, path);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        CHECK(line.front() == '{');
        ++lines;
    }
    CHECK(lines == 7);  // 6 checks + 1 summary
    std::remove(path.c_str());
}
