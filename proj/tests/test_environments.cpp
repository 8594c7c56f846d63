#include <cmath>
#include <set>

#include "doctest.h"

#include "cortex/environments.hpp"
#include "cortex/experiment.hpp"

using namespace cortex;

TEST_CASE("actuator bank engages above the window threshold") {
    ActuatorBank bank(2, 10, 5, 10);
    std::vector<uint8_t> quiet(20, 0);
    std::vector<uint8_t> loud(20, 0);
    for (int n = 0; n < 10; ++n) loud[n] = 1;  // area 0 fully active

    for (int t = 0; t < 5; ++t) bank.push(quiet);
    CHECK(bank.engaged() == std::vector<uint8_t>{0, 0});

    bank.push(loud);  // 10 spikes in window: not > 10
    CHECK(bank.engaged() == std::vector<uint8_t>{0, 0});
    bank.push(loud);  // 20 now
    CHECK(bank.engaged() == std::vector<uint8_t>{1, 0});

    // window slides: after 5 quiet tics the engagement is gone
    for (int t = 0; t < 5; ++t) bank.push(quiet);
    CHECK(bank.engaged() == std::vector<uint8_t>{0, 0});
}

TEST_CASE("tracker drives exactly the target footprint") {
    TrackerWorld::Config cfg;
    TrackerWorld world(cfg, 3);
    for (int t = 0; t < 200; ++t) {
        std::vector<uint8_t> s = world.sensor();
        int on = 0;
        for (uint8_t b : s) on += b;
        if (world.episode_active())
            CHECK(on == cfg.block * cfg.block);
        else
            CHECK(on == 0);
        world.advance();
    }
}

TEST_CASE("tracker trajectory is deterministic per seed and covers the edge") {
    TrackerWorld::Config cfg;
    TrackerWorld a(cfg, 17), b(cfg, 17);
    for (int t = 0; t < 500; ++t) {
        CHECK(a.sensor() == b.sensor());
        CHECK(a.case_id() == b.case_id());
        a.advance();
        b.advance();
    }
}

TEST_CASE("tracker rewards the matching area and punishes engaged others") {
    TrackerWorld::Config cfg;
    TrackerWorld world(cfg, 3);
    while (!world.episode_active()) world.advance();
    int correct = world.case_id();
    std::vector<uint8_t> engaged(8, 0);
    engaged[correct] = 1;
    engaged[(correct + 3) % 8] = 1;
    std::vector<double> mu = world.score_engagements(engaged);
    CHECK(mu[correct] == 1.0);
    CHECK(mu[(correct + 3) % 8] == -1.0);
    int zeros = 0;
    for (double v : mu) zeros += v == 0.0;
    CHECK(zeros == 6);

    // the matching area is reinforced even when it did not engage itself
    std::vector<uint8_t> wrong_only(8, 0);
    wrong_only[(correct + 3) % 8] = 1;
    mu = world.score_engagements(wrong_only);
    CHECK(mu[correct] == 1.0);
    CHECK(mu[(correct + 3) % 8] == -1.0);

    // no engagement: no neuromodulatory event anywhere
    std::vector<double> none = world.score_engagements(std::vector<uint8_t>(8, 0));
    for (double v : none) CHECK(v == 0.0);
}

TEST_CASE("foveator geometry pays for strict approach") {
    FoveatorWorld::Config cfg;
    FoveatorWorld world(cfg, 5);
    double d0 = world.distance();
    CHECK(d0 == doctest::Approx(cfg.object_radius));

    // find the compass area pointing at the object and engage it
    int best = 0;
    double best_after = 1e9;
    for (int a = 0; a < 8; ++a) {
        auto [dx, dy] = FoveatorWorld::compass_step(a);
        FoveatorWorld probe(cfg, 5);
        std::vector<uint8_t> engaged(8, 0);
        engaged[a] = 1;
        std::vector<double> mu = probe.score_and_move(engaged);
        if (probe.distance() < best_after) {
            best_after = probe.distance();
            best = a;
        }
        CHECK(mu[a] == (probe.distance() < d0 - 1e-12 ? 1.0 : -1.0));
        (void)dx;
        (void)dy;
    }
    CHECK(best_after < d0);

    // opposite direction moves away and is punished
    FoveatorWorld away(cfg, 5);
    std::vector<uint8_t> engaged(8, 0);
    engaged[(best + 4) % 8] = 1;
    std::vector<double> mu = away.score_and_move(engaged);
    CHECK(mu[(best + 4) % 8] == -1.0);
}

TEST_CASE("foveator scores every engaged area by the joint move") {
    FoveatorWorld::Config cfg;
    FoveatorWorld world(cfg, 5);
    std::vector<uint8_t> engaged(8, 1);  // all engaged: moves cancel out
    std::vector<double> mu = world.score_and_move(engaged);
    for (double v : mu) CHECK(v == -1.0);  // net zero move is not a strict approach
}

TEST_CASE("foveator renders the object relative to the fovea") {
    FoveatorWorld::Config cfg;
    FoveatorWorld world(cfg, 11);
    std::vector<uint8_t> s = world.sensor();
    int on = 0;
    for (uint8_t b : s) on += b;
    CHECK(on == cfg.block * cfg.block);  // object starts on-retina
}

TEST_CASE("path average matrix spec cases") {
    Topology t;
    t.layers.push_back({"S", 4, false, Learning::None});
    t.layers.push_back({"V", 2, false, Learning::Feedback});
    t.layers.push_back({"M", 2, false, Learning::Reward});
    ProjectionSpec sv;
    sv.name = "S_V";
    sv.src = "S";
    sv.dst = "V";
    sv.plastic = true;
    sv.init_lo = sv.init_hi = 0.0;
    t.projections.push_back(sv);
    ProjectionSpec vm;
    vm.name = "V_M";
    vm.src = "V";
    vm.dst = "M";
    vm.plastic = true;
    vm.init_lo = vm.init_hi = 0.0;
    t.projections.push_back(vm);
    ProjectionSpec mv;
    mv.name = "M_V";
    mv.src = "M";
    mv.dst = "V";
    mv.bank = Bank::Feedback;
    mv.plastic = true;
    mv.init_lo = mv.init_hi = 0.0;
    t.projections.push_back(mv);

    SleepConfig sleep;
    sleep.enabled = false;
    Network net(t, DynamicsConfig{}, sleep, 1);

    // all zero weights: zero matrix
    Matrix zero = path_average_matrix(net, "S", "V", "M", 0, 2, false);
    for (double v : zero.data) CHECK(v == 0.0);

    // single path s0 -> v0 -> m0 with weights 0.5 and 0.8
    net.set_weight("S_V", 0, 0, 0.5);
    net.set_weight("V_M", 0, 0, 0.8);
    Matrix ff = path_average_matrix(net, "S", "V", "M", 0, 1, false);
    // paths counted over the full mask: 2 via neurons x 1 area neuron
    CHECK(ff.data[0] == doctest::Approx(0.5 * 0.8 / 2.0));

    // linearity: doubling the sensor-side weights doubles the matrix
    net.set_weight("S_V", 0, 0, 1.0);
    Matrix ff2 = path_average_matrix(net, "S", "V", "M", 0, 1, false);
    CHECK(ff2.data[0] == doctest::Approx(2.0 * ff.data[0]));

    // feedback path pairs the sensor weight with the m->v weight
    net.set_weight("M_V", 0, 0, 0.4);
    Matrix fb = path_average_matrix(net, "S", "V", "M", 0, 1, true);
    CHECK(fb.data[0] == doctest::Approx(1.0 * 0.4 / 2.0));

    CHECK_THROWS_AS(path_average_matrix(net, "S", "X", "M", 0, 1, false), ConfigError);
}

TEST_CASE("reward events equal engagements across a short run") {
    nlohmann::json cfg = default_experiment_config("tracker");
    cfg["duration"] = 400;
    cfg["usefulness"]["enabled"] = false;
    RunResult r = run_experiment(cfg, 1);
    CHECK(r.metrics.tics == 400);
    int64_t per_area_total = 0;
    for (int64_t e : r.metrics.per_area_events) per_area_total += e;
    CHECK(per_area_total == r.metrics.events);
    CHECK(r.metrics.correct <= r.metrics.events);
}
