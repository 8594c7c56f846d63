#include "doctest.h"

#include "cortex/utilities.hpp"

using namespace cortex;

TEST_CASE("frequency utility is constant 1") {
    CHECK(u_frequency(StateVector{0, 0, 0}) == 1.0);
    CHECK(u_frequency(StateVector{1, 1, 1}) == 1.0);
    CHECK(u_frequency(StateVector{1, 0}) == 1.0);
}

TEST_CASE("invariance utility follows the previous spike") {
    WeightVector w = WeightVector::dense({1.0, 1.0});
    CHECK(u_invariance(StateVector{0, 0}, w, 0.5) == 0.0);
    CHECK(u_invariance(StateVector{1, 0}, w, 0.5) == 1.0);

    // two-step discounted: spikes at t-1 and t-2, gamma 0.5 -> 1.5
    std::vector<StateVector> history = {StateVector{1, 0}, StateVector{0, 1}};
    CHECK(u_invariance_discounted(history, w, 0.5, 0.5) == doctest::Approx(1.5));
}

TEST_CASE("neuromodulator utility is the conditional mean") {
    NeuromodulatorModel constant;
    constant.conditional_mean = [](const StateVector&) { return 1.0; };
    CHECK(u_neuromodulator(constant, StateVector{1}) == 1.0);

    auto table = NeuromodulatorModel::from_table(
        {{{1, 0}, {{+1.0, 0.5}, {-1.0, 0.5}}}, {{0, 1}, {{+1.0, 0.9}, {-1.0, 0.1}}}});
    CHECK(u_neuromodulator(table, StateVector{1, 0}) == doctest::Approx(0.0));
    CHECK(u_neuromodulator(table, StateVector{0, 1}) == doctest::Approx(0.8));
    CHECK_THROWS_AS(u_neuromodulator(table, StateVector{1, 1}), ConfigError);
}

TEST_CASE("feedback utility is the feedback current") {
    WeightVector zero = WeightVector::dense({0.0, 0.0});
    CHECK(u_feedback(zero, StateVector{1, 1}) == 0.0);
    WeightVector w = WeightVector::dense({0.5, 0.5});
    CHECK(u_feedback(w, StateVector{1, 1}) == doctest::Approx(1.0));

    // linear in the spike pattern over disjoint supports
    WeightVector bank = WeightVector::dense({0.3, 0.7, 0.1});
    double parts = u_feedback(bank, StateVector{1, 0, 0}) + u_feedback(bank, StateVector{0, 1, 1});
    CHECK(u_feedback(bank, StateVector{1, 1, 1}) == doctest::Approx(parts));
}

TEST_CASE("feedback and feedforward populations must be disjoint") {
    WeightVector ff({0.5, 0.0, 0.0}, {1, 0, 0});
    WeightVector fb({0.0, 0.2, 0.4}, {0, 1, 1});
    CHECK(u_feedback_checked(fb, ff, StateVector{0, 1, 1}) == doctest::Approx(0.6));
    WeightVector overlap({0.1, 0.2, 0.0}, {1, 1, 0});
    CHECK_THROWS_AS(u_feedback_checked(overlap, ff, StateVector{1, 1, 0}), ConfigError);
}

TEST_CASE("enumerable neuromodulator equals exact summation") {
    // oracle: the mean computed by explicit summation over the table
    std::vector<std::pair<double, double>> dist = {{2.0, 0.25}, {-1.0, 0.5}, {4.0, 0.25}};
    double exact = 0.0;
    for (auto [v, p] : dist) exact += v * p;
    auto model = NeuromodulatorModel::from_table({{{1}, dist}});
    CHECK(u_neuromodulator(model, StateVector{1}) == doctest::Approx(exact));
}
