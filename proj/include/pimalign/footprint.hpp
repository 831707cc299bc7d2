#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "kernels/common.hpp"
#include "kernels/genasm.hpp"
#include "kernels/nw.hpp"
#include "kernels/wfa.hpp"
#include "params.hpp"

namespace pimalign {

/// Per-thread working set of one alignment, as allocated by the kernels.
struct Footprint {
    std::uint64_t wram = 0;        // arena bytes, including pair and result buffers
    std::uint64_t mram = 0;        // intermediate bytes in the thread's MRAM slice
    std::uint64_t table_term = 0;  // the dominant intermediate structure alone
};

inline std::uint64_t wfa_max_errors(std::uint64_t m, std::uint64_t n, double error_rate) {
    return static_cast<std::uint64_t>(std::ceil(error_rate * static_cast<double>(std::max(m, n)) - 1e-9));
}

/// Largest score an alignment with `errors` edits can have.
inline std::uint64_t wfa_max_score(std::uint64_t errors, const AffinePenalties& pen) {
    return errors * static_cast<std::uint64_t>(std::max(pen.mismatch, pen.gap_open + pen.gap_extend));
}

/// Diagonals a wavefront of score s may span before pruning.
inline std::uint64_t wfa_width_bound(std::uint64_t s, std::uint64_t m, std::uint64_t n, const AffinePenalties& pen) {
    const std::uint64_t o = pen.gap_open, e = pen.gap_extend;
    const std::uint64_t w = s < o + e ? 1 : 2 * ((s - o) / e) + 1;
    return std::min(w, m + n + 1);
}

/// Width assumed for pruned wavefronts. Pruning has no hard width guarantee;
/// this is a planning estimate, and a wider wavefront at run time surfaces as
/// BudgetExceeded for that pair.
inline std::uint64_t wfa_adaptive_band(const AdaptiveParams& ap) {
    return static_cast<std::uint64_t>(ap.min_wavefront_length) + 2ull * ap.max_distance_threshold + 2;
}

namespace detail {

inline std::uint64_t a8(std::uint64_t v) { return align_up(v, 8); }

inline Footprint nw_footprint(Placement p, std::uint64_t m, std::uint64_t n, std::uint64_t io) {
    Footprint f;
    if (p == Placement::Scratchpad) {
        f.table_term = m * n * 2;
        f.wram = io + a8(f.table_term);
    } else {
        f.table_term = (m + 1) * kernel::padded_row_cells(n) * 3;
        f.mram = a8((m + 1) * kernel::padded_row_cells(n) * 2) + a8((m + 1) * kernel::padded_row_cells(n));
        f.wram = io + 2 * kernel::kRowChunkCells * 2 + kernel::kRowChunkCells + 8;
    }
    return f;
}

inline Footprint swg_footprint(Placement p, std::uint64_t m, std::uint64_t n, std::uint64_t io) {
    Footprint f;
    if (p == Placement::Scratchpad) {
        f.table_term = 3 * m * n * 2;
        f.wram = io + 3 * a8(m * n * 2);
    } else {
        f.table_term = (m + 1) * kernel::padded_row_cells(n) * 7;
        f.mram = a8((m + 1) * kernel::padded_row_cells(n) * 6) + a8((m + 1) * kernel::padded_row_cells(n));
        f.wram = io + 2 * kernel::kRowChunkCells * 6 + kernel::kRowChunkCells + 8;
    }
    return f;
}

inline Footprint genasm_footprint(Placement p, std::uint64_t m, std::uint64_t n, std::uint64_t k,
                                  std::uint64_t pair) {
    const std::uint64_t vec = std::uint64_t{kernel::bitvector_words(static_cast<std::uint32_t>(m))} * 8;
    const std::uint64_t row = (k + 1) * vec;
    const std::uint64_t io = pair + kernel::result_record_bytes(std::min(m + n, 2 * k + 1));
    Footprint f;
    f.table_term = (n + 1) * row;
    if (p == Placement::Scratchpad) {
        f.wram = io + kernel::kMaskCount * vec + f.table_term + 4 * vec;
    } else {
        f.mram = kernel::kMaskCount * vec + f.table_term;
        f.wram = io + 2 * row + vec + 4 * vec + 8;
    }
    return f;
}

inline Footprint wfa_footprint(Placement p, std::uint64_t m, std::uint64_t n, double error_rate,
                               const AffinePenalties& pen, const AdaptiveParams* ap, std::uint64_t pair) {
    const std::uint64_t s_max = wfa_max_score(wfa_max_errors(m, n, error_rate), pen);
    const std::uint64_t min_edit = static_cast<std::uint64_t>(std::min(pen.mismatch, pen.gap_open + pen.gap_extend));
    const std::uint64_t runs = std::min(m + n, 2 * (s_max / min_edit) + 1);
    const std::uint64_t directory =
        (s_max / kernel::wf::kDirectoryChunk + 1) * kernel::wf::kDirectoryChunk * 4;
    auto width = [&](std::uint64_t s) {
        std::uint64_t w = wfa_width_bound(s, m, n, pen);
        if (ap && ap->enabled) w = std::min(w, wfa_adaptive_band(*ap));
        return align_up(w, 2);
    };
    std::uint64_t records = 0;
    for (std::uint64_t s = 0; s <= s_max; ++s) records += kernel::wf::record_bytes(static_cast<std::uint32_t>(width(s)));
    const std::uint64_t widest = width(s_max);

    Footprint f;
    f.table_term = records;
    const std::uint64_t io = pair + kernel::result_record_bytes(runs);
    if (p == Placement::Scratchpad) {
        f.wram = io + directory + records;
    } else {
        f.mram = records;
        f.wram = io + directory + 4 * widest * 4 + kernel::wf::record_bytes(static_cast<std::uint32_t>(widest)) + 8;
    }
    return f;
}

}  // namespace detail

/// Closed-form per-thread upper bound for aligning an m x n pair.
///
/// `error_rate` bounds the WFA score; GenASM uses `params.genasm_k`.
inline Footprint footprint(const AlignParams& params, std::uint64_t m, std::uint64_t n, double error_rate) {
    const std::uint64_t pair = kernel::pair_record_bytes(m, n);
    const std::uint64_t io = pair + kernel::result_record_bytes(kernel::max_runs_any(m, n));
    switch (params.algorithm) {
        case Algorithm::NW: return detail::nw_footprint(params.placement, m, n, io);
        case Algorithm::SWG: return detail::swg_footprint(params.placement, m, n, io);
        case Algorithm::GenASM:
            return detail::genasm_footprint(params.placement, m, n, static_cast<std::uint64_t>(params.genasm_k), pair);
        case Algorithm::WFA:
            return detail::wfa_footprint(params.placement, m, n, error_rate, params.affine, nullptr, pair);
        case Algorithm::WFAAdaptive:
            return detail::wfa_footprint(params.placement, m, n, error_rate, params.affine, &params.adaptive, pair);
    }
    return {};
}

}  // namespace pimalign
