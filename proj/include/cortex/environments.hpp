#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "cortex/types.hpp"

namespace cortex {

// Motor areas engage when their spike count over a sliding window exceeds the
// threshold; engagement is evaluated every tic.
struct ActuatorBank {
    int areas = 8;
    int per_area = 10;
    int window = 5;
    int threshold = 10;

    ActuatorBank() = default;
    ActuatorBank(int areas_, int per_area_, int window_, int threshold_);

    void push(const std::vector<uint8_t>& motor_spikes);
    std::vector<uint8_t> engaged() const;  // 1 per area with window count > threshold
    void reset();

    std::deque<std::vector<int>> history_;  // per tic: per-area counts
    std::vector<int> window_sum_;
};

struct Metrics {
    int64_t tics = 0;
    int64_t events = 0;    // engagement events with a reward outcome
    int64_t correct = 0;   // events rewarded +1
    std::vector<int64_t> per_area_events;
    std::vector<int64_t> per_area_correct;

    double percent_correct() const {
        return events > 0 ? 100.0 * double(correct) / double(events) : 0.0;
    }
    double correct_per_1000() const {
        return tics > 0 ? 1000.0 * double(correct) / double(tics) : 0.0;
    }
};

// A 2x2 target sweeping one of the four edges in one of two directions.
// The sensor pattern is exactly the target's footprint.
class TrackerWorld {
public:
    struct Config {
        int grid = 20;
        int block = 2;      // target footprint edge length
        int episode_gap = 20;
    };

    TrackerWorld(Config cfg, uint64_t seed);

    std::vector<uint8_t> sensor() const;
    bool episode_active() const { return gap_left_ == 0; }
    int case_id() const { return edge_ * 2 + dir_; }  // 8 (edge, direction) cases
    int cases() const { return 8; }

    // Per-area rewards for the engaged set: +1 for the matching area, -1 for
    // any other engaged area. Outside an episode there is no outcome to judge
    // and no neuromodulatory event.
    std::vector<double> score_engagements(const std::vector<uint8_t>& engaged) const;

    void advance();

private:
    void start_episode();

    Config cfg_;
    std::mt19937_64 rng_;
    int edge_ = 0, dir_ = 0;
    int pos_ = 0;
    int gap_left_ = 0;
};

// A static 2x2 object on the retina; engaged actuators move the fovea one
// unit step in compass directions.
class FoveatorWorld {
public:
    struct Config {
        int grid = 20;
        int block = 2;
        int episode_gap = 20;
        double object_radius = 8.5;  // spawn distance from the fovea center
        double capture_radius = 1.0;
        int episode_limit = 80;  // tics before an episode is abandoned
    };

    FoveatorWorld(Config cfg, uint64_t seed);

    std::vector<uint8_t> sensor() const;
    bool episode_active() const { return gap_left_ == 0; }
    double distance() const;

    // Applies the vector sum of the engaged compass moves, then rewards every
    // engaged area +1 if the object ended strictly closer and -1 otherwise.
    std::vector<double> score_and_move(const std::vector<uint8_t>& engaged);

    void advance();  // episode bookkeeping (call once per tic after score_and_move)

    static std::pair<double, double> compass_step(int area);

private:
    void start_episode();

    Config cfg_;
    std::mt19937_64 rng_;
    double fovea_x_ = 0.0, fovea_y_ = 0.0;
    double object_x_ = 0.0, object_y_ = 0.0;
    int gap_left_ = 0;
    int episode_tics_ = 0;
};

}  // namespace cortex
