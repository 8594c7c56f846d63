#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace cortex {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary spike pattern of one tic. Entries are exactly 0 or 1.
struct StateVector {
    std::vector<uint8_t> bits;

    StateVector() = default;
    explicit StateVector(std::vector<uint8_t> b) : bits(std::move(b)) {
        for (uint8_t v : bits)
            if (v > 1) throw DomainError("StateVector entries must be 0 or 1");
    }
    StateVector(std::initializer_list<int> init) {
        bits.reserve(init.size());
        for (int v : init) {
            if (v != 0 && v != 1) throw DomainError("StateVector entries must be 0 or 1");
            bits.push_back(static_cast<uint8_t>(v));
        }
    }

    size_t size() const { return bits.size(); }
    uint8_t operator[](size_t i) const { return bits[i]; }
};

// Synaptic weight bank of one neuron. Entries outside the mask are clamped
// to zero: those synapses do not physically exist.
struct WeightVector {
    std::vector<double> weights;
    std::vector<uint8_t> mask;  // 1 = synapse exists

    WeightVector() = default;
    WeightVector(std::vector<double> w, std::vector<uint8_t> m)
        : weights(std::move(w)), mask(std::move(m)) {
        if (weights.size() != mask.size())
            throw DimensionError("weights and mask must have equal length");
        for (size_t i = 0; i < weights.size(); ++i)
            if (!mask[i]) weights[i] = 0.0;
    }

    // All synapses present.
    static WeightVector dense(std::vector<double> w) {
        std::vector<uint8_t> m(w.size(), 1);
        return WeightVector(std::move(w), std::move(m));
    }

    size_t size() const { return weights.size(); }
    size_t active_count() const {
        size_t n = 0;
        for (uint8_t m : mask) n += m;
        return n;
    }
};

enum class Regularizer { L2, LH, L1 };

inline const char* to_string(Regularizer r) {
    switch (r) {
        case Regularizer::L2: return "l2";
        case Regularizer::LH: return "lh";
        case Regularizer::L1: return "l1";
    }
    return "?";
}

inline Regularizer regularizer_from_string(const std::string& s) {
    if (s == "l2" || s == "L2") return Regularizer::L2;
    if (s == "lh" || s == "LH") return Regularizer::LH;
    if (s == "l1" || s == "L1") return Regularizer::L1;
    throw ConfigError("unknown regularizer: " + s);
}

struct ScoringConfig {
    Regularizer regularizer = Regularizer::L2;
    double eta = 1.0;    // regularization strength, > 0
    double theta = 0.5;  // spike threshold

    ScoringConfig() = default;
    ScoringConfig(Regularizer r, double eta_, double theta_)
        : regularizer(r), eta(eta_), theta(theta_) {
        if (eta <= 0.0) throw DomainError("eta must be positive");
    }
};

// Numerical floor for weights entering log() under the LH regularizer.
inline constexpr double kWeightFloor = 1e-12;

}  // namespace cortex
