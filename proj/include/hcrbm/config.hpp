#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcrbm/common.hpp"

namespace hcrbm {

enum class PenaltyMode { raw, abs, squared };
enum class Variant { rbm, hrbm, mnl, corrmnl, cascade_hard, cascade_soft, hhrbm };

inline std::string to_string(PenaltyMode m) {
    switch (m) {
        case PenaltyMode::raw: return "raw";
        case PenaltyMode::abs: return "abs";
        case PenaltyMode::squared: return "squared";
    }
    return "?";
}

inline PenaltyMode penalty_mode_from_name(const std::string& s) {
    if (s == "raw") return PenaltyMode::raw;
    if (s == "abs") return PenaltyMode::abs;
    if (s == "squared") return PenaltyMode::squared;
    throw std::invalid_argument("unknown penalty mode '" + s + "' (expected raw, abs or squared)");
}

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::rbm: return "rbm";
        case Variant::hrbm: return "hrbm";
        case Variant::mnl: return "mnl";
        case Variant::corrmnl: return "corrmnl";
        case Variant::cascade_hard: return "cascade-hard";
        case Variant::cascade_soft: return "cascade-soft";
        case Variant::hhrbm: return "hhrbm";
    }
    return "?";
}

inline Variant variant_from_name(const std::string& s) {
    if (s == "rbm") return Variant::rbm;
    if (s == "hrbm") return Variant::hrbm;
    if (s == "mnl") return Variant::mnl;
    if (s == "corrmnl") return Variant::corrmnl;
    if (s == "cascade-hard") return Variant::cascade_hard;
    if (s == "cascade-soft") return Variant::cascade_soft;
    if (s == "hhrbm") return Variant::hhrbm;
    throw std::invalid_argument("unknown variant '" + s + "'");
}

/// whether a variant consumes the label taxonomy
inline bool variant_uses_tree(Variant v) {
    return v != Variant::rbm && v != Variant::mnl;
}

struct TrainConfig {
    Variant variant = Variant::hrbm;
    std::vector<int> hidden{100};  // per-level widths for hhrbm; .front() otherwise
    double lr = 0.1;
    double C = 0.0;
    PenaltyMode penalty = PenaltyMode::abs;
    bool paper_partial_grad = false;
    int epochs = 100;
    int batch_size = 100;
    std::uint64_t seed = 1;

    void validate() const {
        require(!hidden.empty(), "hidden unit count missing");
        for (int n : hidden) require(n >= 1, "hidden unit count must be >= 1");
        require(lr > 0.0, "learning rate must be positive");
        require(C >= 0.0, "penalty weight C must be nonnegative");
        require(epochs >= 1, "epochs must be >= 1");
        require(batch_size >= 1, "batch size must be >= 1");
    }
};

}  // namespace hcrbm
