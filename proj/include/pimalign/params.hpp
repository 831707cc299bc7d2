#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "error.hpp"

namespace pimalign {

enum class Algorithm { NW, SWG, GenASM, WFA, WFAAdaptive };
enum class Placement { Scratchpad, Tiered };

inline constexpr std::array<Algorithm, 5> kAllAlgorithms = {Algorithm::NW, Algorithm::SWG, Algorithm::GenASM,
                                                            Algorithm::WFA, Algorithm::WFAAdaptive};
inline constexpr std::array<Placement, 2> kAllPlacements = {Placement::Scratchpad, Placement::Tiered};

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::NW: return "nw";
        case Algorithm::SWG: return "swg";
        case Algorithm::GenASM: return "genasm";
        case Algorithm::WFA: return "wfa";
        case Algorithm::WFAAdaptive: return "wfa-adaptive";
    }
    return "?";
}

inline std::string_view to_string(Placement p) { return p == Placement::Scratchpad ? "scratchpad" : "tiered"; }

inline Algorithm parse_algorithm(std::string_view s) {
    for (auto a : kAllAlgorithms)
        if (to_string(a) == s) return a;
    throw PimError(ErrorCode::InvalidArgument, "unknown algorithm '" + std::string(s) + "'");
}

inline Placement parse_placement(std::string_view s) {
    for (auto p : kAllPlacements)
        if (to_string(p) == s) return p;
    throw PimError(ErrorCode::InvalidArgument, "unknown placement '" + std::string(s) + "'");
}

struct LinearPenalties {
    int match = 0;
    int mismatch = 3;
    int indel = 4;

    void validate() const {
        if (match != 0) throw PimError(ErrorCode::InvalidArgument, "match cost must be 0");
        if (mismatch <= 0 || indel <= 0)
            throw PimError(ErrorCode::InvalidArgument, "mismatch and indel costs must be positive");
    }
};

struct AffinePenalties {
    int match = 0;
    int mismatch = 3;
    int gap_open = 4;
    int gap_extend = 1;

    void validate() const {
        if (match != 0) throw PimError(ErrorCode::InvalidArgument, "match cost must be 0");
        if (mismatch <= 0 || gap_extend <= 0 || gap_open < 0)
            throw PimError(ErrorCode::InvalidArgument,
                           "need mismatch > 0, gap_extend > 0, gap_open >= 0");
    }
};

struct AdaptiveParams {
    int min_wavefront_length = 10;
    int max_distance_threshold = 50;
    bool enabled = true;

    void validate() const {
        if (enabled && (min_wavefront_length <= 0 || max_distance_threshold <= 0))
            throw PimError(ErrorCode::InvalidArgument, "adaptive parameters must be positive");
    }
};

/// Everything a kernel invocation may need, for whichever algorithm runs.
struct AlignParams {
    Algorithm algorithm = Algorithm::WFA;
    Placement placement = Placement::Scratchpad;
    LinearPenalties linear;
    AffinePenalties affine;
    AdaptiveParams adaptive;
    int genasm_k = 0;

    void validate() const {
        switch (algorithm) {
            case Algorithm::NW: linear.validate(); break;
            case Algorithm::SWG:
            case Algorithm::WFA: affine.validate(); break;
            case Algorithm::WFAAdaptive:
                affine.validate();
                adaptive.validate();
                break;
            case Algorithm::GenASM:
                if (genasm_k < 0) throw PimError(ErrorCode::InvalidArgument, "k must be non-negative");
                break;
        }
    }
};

}  // namespace pimalign
