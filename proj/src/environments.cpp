#include "cortex/environments.hpp"

#include <cmath>

namespace cortex {

ActuatorBank::ActuatorBank(int areas_, int per_area_, int window_, int threshold_)
    : areas(areas_), per_area(per_area_), window(window_), threshold(threshold_) {
    if (areas < 1 || per_area < 1 || window < 1) throw ConfigError("bad actuator bank shape");
    window_sum_.assign(areas, 0);
}

void ActuatorBank::push(const std::vector<uint8_t>& motor_spikes) {
    if (motor_spikes.size() != static_cast<size_t>(areas * per_area))
        throw DimensionError("motor spike vector size mismatch");
    std::vector<int> counts(areas, 0);
    for (int a = 0; a < areas; ++a)
        for (int n = 0; n < per_area; ++n) counts[a] += motor_spikes[a * per_area + n];
    for (int a = 0; a < areas; ++a) window_sum_[a] += counts[a];
    history_.push_back(std::move(counts));
    if (static_cast<int>(history_.size()) > window) {
        for (int a = 0; a < areas; ++a) window_sum_[a] -= history_.front()[a];
        history_.pop_front();
    }
}

std::vector<uint8_t> ActuatorBank::engaged() const {
    std::vector<uint8_t> e(areas, 0);
    for (int a = 0; a < areas; ++a) e[a] = window_sum_[a] > threshold ? 1 : 0;
    return e;
}

void ActuatorBank::reset() {
    history_.clear();
    window_sum_.assign(areas, 0);
}

// --- tracker ----------------------------------------------------------------

TrackerWorld::TrackerWorld(Config cfg, uint64_t seed) : cfg_(cfg), rng_(seed) {
    if (cfg_.block < 1 || cfg_.block >= cfg_.grid) throw ConfigError("bad target size");
    start_episode();
}

void TrackerWorld::start_episode() {
    std::uniform_int_distribution<int> edge_dist(0, 3);
    std::uniform_int_distribution<int> dir_dist(0, 1);
    edge_ = edge_dist(rng_);
    dir_ = dir_dist(rng_);
    pos_ = dir_ == 0 ? 0 : cfg_.grid - cfg_.block;
    gap_left_ = 0;
}

std::vector<uint8_t> TrackerWorld::sensor() const {
    std::vector<uint8_t> s(size_t(cfg_.grid) * cfg_.grid, 0);
    if (gap_left_ > 0) return s;
    for (int a = 0; a < cfg_.block; ++a) {
        for (int b = 0; b < cfg_.block; ++b) {
            int row, col;
            switch (edge_) {
                case 0: row = a; col = pos_ + b; break;                    // top
                case 1: row = cfg_.grid - cfg_.block + a; col = pos_ + b; break;  // bottom
                case 2: row = pos_ + b; col = a; break;                    // left
                default: row = pos_ + b; col = cfg_.grid - cfg_.block + a; break; // right
            }
            s[size_t(row) * cfg_.grid + col] = 1;
        }
    }
    return s;
}

std::vector<double> TrackerWorld::score_engagements(const std::vector<uint8_t>& engaged) const {
    std::vector<double> mu(engaged.size(), 0.0);
    if (gap_left_ > 0) return mu;
    bool any = false;
    for (uint8_t e : engaged) any = any || e;
    if (!any) return mu;  // no action, no neuromodulatory event
    // the matching area is reinforced on every engagement event, engaged or
    // not; engaged non-matching areas are punished
    for (size_t a = 0; a < engaged.size(); ++a)
        if (engaged[a]) mu[a] = -1.0;
    mu[case_id()] = 1.0;
    return mu;
}

void TrackerWorld::advance() {
    if (gap_left_ > 0) {
        if (--gap_left_ == 0) start_episode();
        return;
    }
    int last = cfg_.grid - cfg_.block;
    pos_ += dir_ == 0 ? 1 : -1;
    if (pos_ < 0 || pos_ > last) gap_left_ = cfg_.episode_gap;
}

// --- foveator ----------------------------------------------------------------

FoveatorWorld::FoveatorWorld(Config cfg, uint64_t seed) : cfg_(cfg), rng_(seed) {
    start_episode();
}

void FoveatorWorld::start_episode() {
    std::uniform_real_distribution<double> angle_dist(0.0, 2.0 * M_PI);
    double a = angle_dist(rng_);
    fovea_x_ = 0.0;
    fovea_y_ = 0.0;
    object_x_ = cfg_.object_radius * std::cos(a);
    object_y_ = cfg_.object_radius * std::sin(a);
    gap_left_ = 0;
    episode_tics_ = 0;
}

double FoveatorWorld::distance() const {
    double dx = object_x_ - fovea_x_;
    double dy = object_y_ - fovea_y_;
    return std::sqrt(dx * dx + dy * dy);
}

std::vector<uint8_t> FoveatorWorld::sensor() const {
    std::vector<uint8_t> s(size_t(cfg_.grid) * cfg_.grid, 0);
    if (gap_left_ > 0) return s;
    int cx = static_cast<int>(std::llround(object_x_ - fovea_x_)) + cfg_.grid / 2 - 1;
    int cy = static_cast<int>(std::llround(object_y_ - fovea_y_)) + cfg_.grid / 2 - 1;
    for (int a = 0; a < cfg_.block; ++a)
        for (int b = 0; b < cfg_.block; ++b) {
            int col = cx + a, row = cy + b;
            if (col < 0 || col >= cfg_.grid || row < 0 || row >= cfg_.grid) continue;
            s[size_t(row) * cfg_.grid + col] = 1;
        }
    return s;
}

std::pair<double, double> FoveatorWorld::compass_step(int area) {
    // 0=N, then counterclockwise: NW, W, SW, S, SE, E, NE
    static const double s = std::sqrt(0.5);
    switch (area & 7) {
        case 0: return {0.0, 1.0};
        case 1: return {-s, s};
        case 2: return {-1.0, 0.0};
        case 3: return {-s, -s};
        case 4: return {0.0, -1.0};
        case 5: return {s, -s};
        case 6: return {1.0, 0.0};
        default: return {s, s};
    }
}

std::vector<double> FoveatorWorld::score_and_move(const std::vector<uint8_t>& engaged) {
    std::vector<double> mu(engaged.size(), 0.0);
    if (gap_left_ > 0) return mu;
    double before = distance();
    double mx = 0.0, my = 0.0;
    bool any = false;
    for (size_t a = 0; a < engaged.size(); ++a) {
        if (!engaged[a]) continue;
        auto [dx, dy] = compass_step(static_cast<int>(a));
        mx += dx;
        my += dy;
        any = true;
    }
    if (!any) return mu;
    fovea_x_ += mx;
    fovea_y_ += my;
    double after = distance();
    double outcome = after < before - 1e-12 ? 1.0 : -1.0;
    for (size_t a = 0; a < engaged.size(); ++a)
        if (engaged[a]) mu[a] = outcome;
    return mu;
}

void FoveatorWorld::advance() {
    if (gap_left_ > 0) {
        if (--gap_left_ == 0) start_episode();
        return;
    }
    ++episode_tics_;
    if (distance() <= cfg_.capture_radius || episode_tics_ >= cfg_.episode_limit)
        gap_left_ = cfg_.episode_gap;
}

}  // namespace cortex
