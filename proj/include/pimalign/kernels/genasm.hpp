#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>

#include "common.hpp"

namespace pimalign::kernel {

// Bitap with traceback, anchored at both ends (global edit distance).
//
// Bits are active when zero. Bit p of status vector R_j[d] is active iff the
// pattern prefix of length p+1 aligns to the first j text characters with at
// most d edits. The empty prefix is active iff j <= d; it is what gets shifted
// into bit 0. For text character c:
//
//   match = (R_j[d]   << 1) | mask[c]
//   subst =  R_j[d-1] << 1
//   del   =  R_{j+1}[d-1] << 1
//   ins   =  R_j[d-1]
//   R_{j+1}[d] = match & subst & del & ins          (d > 0)
//
// Every status row R_0 .. R_n is retained for traceback.

inline std::uint32_t bitvector_words(std::uint32_t m) { return (m + 63) / 64; }

inline constexpr std::uint32_t kMaskCount = 5;  // A, C, G, T, and an all-inactive mask for N

inline std::uint32_t mask_index(char c) {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        default: return 4;
    }
}

namespace bitap {

inline void shift_in(std::span<const std::uint64_t> in, std::span<std::uint64_t> out, bool inject_active) {
    std::uint64_t carry = inject_active ? 0 : 1;
    for (std::size_t w = 0; w < in.size(); ++w) {
        const std::uint64_t v = in[w];
        out[w] = (v << 1) | carry;
        carry = v >> 63;
    }
}

inline bool active(std::span<const std::uint64_t> v, std::uint32_t p) { return ((v[p / 64] >> (p % 64)) & 1) == 0; }

inline void build_mask(std::string_view pattern, char base, std::span<std::uint64_t> out) {
    std::fill(out.begin(), out.end(), ~std::uint64_t{0});
    if (mask_index(base) == 4) return;
    for (std::uint32_t p = 0; p < pattern.size(); ++p)
        if (bases_match(pattern[p], base)) out[p / 64] &= ~(std::uint64_t{1} << (p % 64));
}

inline void initial_row(std::span<std::uint64_t> row, std::uint32_t words, std::uint32_t k) {
    for (std::uint32_t d = 0; d <= k; ++d) {
        auto v = row.subspan(std::size_t{d} * words, words);
        for (std::uint32_t w = 0; w < words; ++w) {
            const std::uint32_t lo = w * 64;
            if (d >= lo + 64) v[w] = 0;
            else if (d <= lo) v[w] = ~std::uint64_t{0};
            else v[w] = ~std::uint64_t{0} << (d - lo);
        }
    }
}

/// Four intermediate vectors for one (j, d) step, resident in WRAM.
struct Intermediates {
    std::span<std::uint64_t> match, subst, del, ins;
};

/// Computes row j+1 from row j for text character `c`.
inline void step(std::span<const std::uint64_t> prev, std::span<std::uint64_t> cur,
                 std::span<const std::uint64_t> mask, const Intermediates& tmp, std::uint32_t words,
                 std::uint32_t k, std::uint32_t j) {
    for (std::uint32_t d = 0; d <= k; ++d) {
        auto out = cur.subspan(std::size_t{d} * words, words);
        shift_in(prev.subspan(std::size_t{d} * words, words), tmp.match, j <= d);
        for (std::uint32_t w = 0; w < words; ++w) tmp.match[w] |= mask[w];
        if (d == 0) {
            std::copy(tmp.match.begin(), tmp.match.end(), out.begin());
            continue;
        }
        auto prev_lower = prev.subspan(std::size_t{d - 1} * words, words);
        shift_in(prev_lower, tmp.subst, j <= d - 1);
        shift_in(cur.subspan(std::size_t{d - 1} * words, words), tmp.del, j + 1 <= d - 1);
        std::copy(prev_lower.begin(), prev_lower.end(), tmp.ins.begin());
        for (std::uint32_t w = 0; w < words; ++w) out[w] = tmp.match[w] & tmp.subst[w] & tmp.del[w] & tmp.ins[w];
    }
}

}  // namespace bitap

/// Traceback over stored status rows; `is_active(j, d, p)` answers bit queries
/// (p may be -1 for the empty prefix).
template <class ActiveFn>
inline WramBlock genasm_traceback(ThreadContext& ctx, std::string_view pattern, std::string_view text,
                                  std::uint32_t distance, ActiveFn&& is_active) {
    const auto m = static_cast<std::uint32_t>(pattern.size());
    const auto n = static_cast<std::uint32_t>(text.size());
    ResultWriter out(ctx, std::min<std::uint64_t>(max_runs_any(m, n), 2ull * distance + 1));
    std::int64_t p = static_cast<std::int64_t>(m) - 1;
    std::uint32_t j = n, d = distance;
    while (p >= 0) {
        const auto pp = static_cast<std::uint32_t>(p);
        if (j > 0 && bases_match(pattern[pp], text[j - 1]) && is_active(j - 1, d, p - 1)) {
            out.emit(Op::Match);
            --j;
            --p;
        } else if (j > 0 && d > 0 && is_active(j - 1, d - 1, p - 1)) {
            out.emit(Op::Mismatch);
            --j;
            --p;
            --d;
        } else if (d > 0 && is_active(j, d - 1, p - 1)) {
            out.emit(Op::Deletion);
            --p;
            --d;
        } else if (j > 0 && d > 0 && is_active(j - 1, d - 1, p)) {
            out.emit(Op::Insertion);
            --j;
            --d;
        } else {
            throw PimError(ErrorCode::InvalidArgument, "GenASM traceback lost its path");
        }
    }
    out.emit(Op::Insertion, j);
    return out.finish(static_cast<std::int32_t>(distance));
}

/// Writes a FILTERED result record (no CIGAR).
inline WramBlock filtered_record(ThreadContext& ctx) {
    WramBlock b = wram_alloc(ctx, kResultHeaderBytes, "result buffer");
    auto h = ctx.arena().view<std::uint32_t>(b);
    h[0] = 0;
    h[1] = pack_status(ResultStatus::Filtered, 0);
    ctx.touch(2);
    return b;
}

inline void check_threshold(std::uint32_t m, std::uint32_t k) {
    if (k >= m)
        throw PimError(ErrorCode::InvalidArgument,
                       "GenASM threshold k=" + std::to_string(k) + " must be below pattern length " + std::to_string(m));
}

inline WramBlock genasm_scratchpad(ThreadContext& ctx, const WramPair& wp, std::uint32_t k) {
    const std::uint32_t m = wp.m, n = wp.n;
    check_threshold(m, k);
    const auto pattern = wp.pattern(ctx);
    const auto text = wp.text(ctx);
    const std::uint32_t words = bitvector_words(m);
    const std::uint64_t vec_bytes = std::uint64_t{words} * 8;
    const std::uint64_t row_words = std::uint64_t{k + 1} * words;

    auto masks = ctx.arena().view<std::uint64_t>(wram_alloc(ctx, kMaskCount * vec_bytes, "GenASM pattern masks"));
    auto history =
        ctx.arena().view<std::uint64_t>(wram_alloc(ctx, (n + 1) * row_words * 8, "GenASM status bit-vectors"));
    const WramBlock tmp_block = wram_alloc(ctx, 4 * vec_bytes, "GenASM intermediate bit-vectors");
    auto tmp_all = ctx.arena().view<std::uint64_t>(tmp_block);
    bitap::Intermediates tmp{tmp_all.subspan(0, words), tmp_all.subspan(words, words),
                             tmp_all.subspan(2 * words, words), tmp_all.subspan(3 * words, words)};

    constexpr char kBases[kMaskCount] = {'A', 'C', 'G', 'T', 'N'};
    for (std::uint32_t c = 0; c < kMaskCount; ++c)
        bitap::build_mask(pattern, kBases[c], masks.subspan(std::size_t{c} * words, words));
    ctx.touch(std::uint64_t{kMaskCount} * words + m);

    auto row = [&](std::uint32_t j) { return history.subspan(j * row_words, row_words); };
    bitap::initial_row(row(0), words, k);
    ctx.touch(row_words);
    for (std::uint32_t j = 0; j < n; ++j) {
        auto mask = masks.subspan(std::size_t{mask_index(text[j])} * words, words);
        bitap::step(row(j), row(j + 1), mask, tmp, words, k, j);
        ctx.touch(std::uint64_t{k + 1} * words * 8);
    }

    std::optional<std::uint32_t> distance;
    for (std::uint32_t d = 0; d <= k && !distance; ++d)
        if (bitap::active(row(n).subspan(std::size_t{d} * words, words), m - 1)) distance = d;
    ctx.touch(k + 1);
    if (!distance) return filtered_record(ctx);

    auto is_active = [&](std::uint32_t j, std::uint32_t d, std::int64_t p) {
        ctx.touch(1);
        if (p < 0) return j <= d;
        return bitap::active(row(j).subspan(std::size_t{d} * words, words), static_cast<std::uint32_t>(p));
    };
    return genasm_traceback(ctx, pattern, text, *distance, is_active);
}

// Tiered variant: masks and the status rows live in MRAM. WRAM holds the
// previous and current status rows, one staged mask, and the four
// intermediate vectors.
inline WramBlock genasm_tiered(ThreadContext& ctx, const WramPair& wp, std::uint32_t k) {
    const std::uint32_t m = wp.m, n = wp.n;
    check_threshold(m, k);
    const auto pattern = wp.pattern(ctx);
    const auto text = wp.text(ctx);
    const std::uint32_t words = bitvector_words(m);
    const std::uint64_t vec_bytes = std::uint64_t{words} * 8;
    const std::uint64_t row_words = std::uint64_t{k + 1} * words;
    const std::uint64_t row_bytes = row_words * 8;

    const MramRegion masks = mram_alloc(ctx, kMaskCount * vec_bytes, "GenASM pattern masks");
    const MramRegion history = mram_alloc(ctx, (n + 1) * row_bytes, "GenASM status bit-vectors");

    WramBlock prev_block = wram_alloc(ctx, row_bytes, "GenASM status staging");
    WramBlock cur_block = wram_alloc(ctx, row_bytes, "GenASM status staging");
    const WramBlock mask_block = wram_alloc(ctx, vec_bytes, "GenASM mask staging");
    const WramBlock tmp_block = wram_alloc(ctx, 4 * vec_bytes, "GenASM intermediate bit-vectors");
    auto tmp_all = ctx.arena().view<std::uint64_t>(tmp_block);
    bitap::Intermediates tmp{tmp_all.subspan(0, words), tmp_all.subspan(words, words),
                             tmp_all.subspan(2 * words, words), tmp_all.subspan(3 * words, words)};
    auto mask = ctx.arena().view<std::uint64_t>(mask_block);

    constexpr char kBases[kMaskCount] = {'A', 'C', 'G', 'T', 'N'};
    for (std::uint32_t c = 0; c < kMaskCount; ++c) {
        bitap::build_mask(pattern, kBases[c], mask);
        ctx.touch(words + m / kMaskCount);
        ctx.dma_write_chunked(mask_block, masks.sub(c * vec_bytes, vec_bytes));
    }

    auto row_region = [&](std::uint32_t j) { return history.sub(j * row_bytes, row_bytes); };
    bitap::initial_row(ctx.arena().view<std::uint64_t>(prev_block), words, k);
    ctx.touch(row_words);
    ctx.dma_write_chunked(prev_block, row_region(0));
    for (std::uint32_t j = 0; j < n; ++j) {
        ctx.dma_read_chunked(masks.sub(mask_index(text[j]) * vec_bytes, vec_bytes), mask_block);
        bitap::step(ctx.arena().view<std::uint64_t>(prev_block), ctx.arena().view<std::uint64_t>(cur_block), mask,
                    tmp, words, k, j);
        ctx.touch(std::uint64_t{k + 1} * words * 8);
        ctx.dma_write_chunked(cur_block, row_region(j + 1));
        std::swap(prev_block, cur_block);
    }

    std::optional<std::uint32_t> distance;
    auto last = ctx.arena().view<std::uint64_t>(prev_block);
    for (std::uint32_t d = 0; d <= k && !distance; ++d)
        if (bitap::active(last.subspan(std::size_t{d} * words, words), m - 1)) distance = d;
    ctx.touch(k + 1);
    if (!distance) return filtered_record(ctx);

    MramWordCache cache(ctx);
    auto is_active = [&](std::uint32_t j, std::uint32_t d, std::int64_t p) {
        if (p < 0) return j <= d;
        const auto bit = static_cast<std::uint32_t>(p);
        const std::uint64_t word_offset = history.offset + j * row_bytes + (std::uint64_t{d} * words + bit / 64) * 8;
        const auto word = cache.load<std::uint64_t>(word_offset);
        return ((word >> (bit % 64)) & 1) == 0;
    };
    return genasm_traceback(ctx, pattern, text, *distance, is_active);
}

}  // namespace pimalign::kernel
