#pragma once

#include <optional>
#include <string>

#include "config.hpp"
#include "kernels/common.hpp"
#include "kernels/genasm.hpp"
#include "kernels/nw.hpp"
#include "kernels/swg.hpp"
#include "kernels/wfa.hpp"
#include "params.hpp"

namespace pimalign {

/// Runs the selected kernel on a pair already resident in WRAM and returns the
/// result record block.
inline WramBlock run_kernel(ThreadContext& ctx, const kernel::WramPair& wp, const AlignParams& params) {
    const bool tiered = params.placement == Placement::Tiered;
    switch (params.algorithm) {
        case Algorithm::NW:
            return tiered ? kernel::nw_tiered(ctx, wp, params.linear) : kernel::nw_scratchpad(ctx, wp, params.linear);
        case Algorithm::SWG:
            return tiered ? kernel::swg_tiered(ctx, wp, params.affine) : kernel::swg_scratchpad(ctx, wp, params.affine);
        case Algorithm::GenASM: {
            const auto k = static_cast<std::uint32_t>(params.genasm_k);
            return tiered ? kernel::genasm_tiered(ctx, wp, k) : kernel::genasm_scratchpad(ctx, wp, k);
        }
        case Algorithm::WFA:
            return tiered ? kernel::wfa_tiered(ctx, wp, params.affine) : kernel::wfa_scratchpad(ctx, wp, params.affine);
        case Algorithm::WFAAdaptive: {
            const AdaptiveParams* ap = &params.adaptive;
            return tiered ? kernel::wfa_tiered(ctx, wp, params.affine, ap)
                          : kernel::wfa_scratchpad(ctx, wp, params.affine, ap);
        }
    }
    throw PimError(ErrorCode::InvalidArgument, "unknown algorithm");
}

enum class PairStatus { Aligned, Filtered, Error };

struct PairOutcome {
    PairStatus status = PairStatus::Aligned;
    ErrorCode error = ErrorCode::InvalidArgument;  // meaningful when status == Error
    std::string message;
    Alignment alignment;
};

/// Aligns one pair in a fresh single-thread context owning a whole DPU.
inline PairOutcome align_pair(const SequencePair& pair, const AlignParams& params, const PimConfig& cfg = {}) {
    params.validate();
    PairOutcome out;
    ThreadContext ctx(cfg, ThreadLayout::single_thread(cfg));
    try {
        const auto wp = kernel::load_pair(ctx, pair);
        const auto before = ctx.counters();
        const WramBlock result = run_kernel(ctx, wp, params);
        const auto decoded = kernel::decode_result_record(ctx.arena().bytes(result));
        out.alignment.cost = ctx.counters() - before;
        if (decoded.status == kernel::ResultStatus::Filtered) {
            out.status = PairStatus::Filtered;
        } else {
            out.alignment.score = decoded.score;
            out.alignment.cigar = decoded.cigar;
        }
    } catch (const PimError& e) {
        out.status = PairStatus::Error;
        out.error = e.code();
        out.message = e.what();
    }
    return out;
}

namespace detail {
inline Alignment expect_aligned(PairOutcome r) {
    if (r.status == PairStatus::Error) throw PimError(r.error, r.message);
    return std::move(r.alignment);
}
}  // namespace detail

inline Alignment nw_align(const SequencePair& pair, const LinearPenalties& pen = {},
                          Placement placement = Placement::Scratchpad, const PimConfig& cfg = {}) {
    AlignParams p;
    p.algorithm = Algorithm::NW;
    p.placement = placement;
    p.linear = pen;
    return detail::expect_aligned(align_pair(pair, p, cfg));
}

inline Alignment swg_align(const SequencePair& pair, const AffinePenalties& pen = {},
                           Placement placement = Placement::Scratchpad, const PimConfig& cfg = {}) {
    AlignParams p;
    p.algorithm = Algorithm::SWG;
    p.placement = placement;
    p.affine = pen;
    return detail::expect_aligned(align_pair(pair, p, cfg));
}

/// Returns nullopt when the pair is filtered (edit distance above k).
inline std::optional<Alignment> genasm_align(const SequencePair& pair, int k,
                                             Placement placement = Placement::Scratchpad,
                                             const PimConfig& cfg = {}) {
    AlignParams p;
    p.algorithm = Algorithm::GenASM;
    p.placement = placement;
    p.genasm_k = k;
    auto r = align_pair(pair, p, cfg);
    if (r.status == PairStatus::Filtered) return std::nullopt;
    return detail::expect_aligned(std::move(r));
}

inline Alignment wfa_align(const SequencePair& pair, const AffinePenalties& pen = {},
                           Placement placement = Placement::Scratchpad, const PimConfig& cfg = {}) {
    AlignParams p;
    p.algorithm = Algorithm::WFA;
    p.placement = placement;
    p.affine = pen;
    return detail::expect_aligned(align_pair(pair, p, cfg));
}

inline Alignment wfa_adaptive_align(const SequencePair& pair, const AffinePenalties& pen = {},
                                    const AdaptiveParams& adaptive = {},
                                    Placement placement = Placement::Scratchpad, const PimConfig& cfg = {}) {
    AlignParams p;
    p.algorithm = Algorithm::WFAAdaptive;
    p.placement = placement;
    p.affine = pen;
    p.adaptive = adaptive;
    return detail::expect_aligned(align_pair(pair, p, cfg));
}

/// Penalties under which a GenASM CIGAR's cost equals its reported score.
inline LinearPenalties unit_edit_penalties() { return {0, 1, 1}; }

}  // namespace pimalign
