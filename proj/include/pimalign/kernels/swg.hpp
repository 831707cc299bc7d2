#pragma once

#include <algorithm>
#include <cstdint>

#include "../params.hpp"
#include "common.hpp"
#include "nw.hpp"

namespace pimalign::kernel {

// Gotoh recurrences, minimising cost:
//   I(i,j) = min(H(i,j-1) + o + e, I(i,j-1) + e)      gap consuming text
//   D(i,j) = min(H(i-1,j) + o + e, D(i-1,j) + e)      gap consuming pattern
//   H(i,j) = min(H(i-1,j-1) + a|x, D(i,j), I(i,j))
// H is the "M" table of the three-table formulation. Ties go diagonal, then
// D, then I; gaps prefer extending over reopening.

inline constexpr std::int32_t kInf = 1 << 28;

struct SwgDir {
    static constexpr std::uint8_t kHMask = 3;
    static constexpr std::uint8_t kDExtend = 4;
    static constexpr std::uint8_t kIExtend = 8;
};

inline WramBlock swg_scratchpad(ThreadContext& ctx, const WramPair& wp, const AffinePenalties& pen) {
    const std::uint32_t m = wp.m, n = wp.n;
    const auto pattern = wp.pattern(ctx);
    const auto text = wp.text(ctx);
    const std::int32_t x = pen.mismatch, o = pen.gap_open, e = pen.gap_extend;
    check_cell(o + static_cast<std::int32_t>(std::max(m, n)) * e);

    const std::uint64_t cells = std::uint64_t{m} * n;
    auto H = ctx.arena().view<std::int16_t>(wram_alloc(ctx, cells * 2, "SWG M table"));
    auto I = ctx.arena().view<std::int16_t>(wram_alloc(ctx, cells * 2, "SWG I table"));
    auto D = ctx.arena().view<std::int16_t>(wram_alloc(ctx, cells * 2, "SWG D table"));
    auto at = [n](std::uint32_t i, std::uint32_t j) { return std::size_t{i - 1} * n + (j - 1); };

    auto h_cell = [&](std::uint32_t i, std::uint32_t j) -> std::int32_t {
        if (i == 0 && j == 0) return 0;
        if (i == 0) return o + static_cast<std::int32_t>(j) * e;
        if (j == 0) return o + static_cast<std::int32_t>(i) * e;
        return H[at(i, j)];
    };
    auto i_cell = [&](std::uint32_t i, std::uint32_t j) -> std::int32_t {
        if (j == 0) return kInf;
        if (i == 0) return o + static_cast<std::int32_t>(j) * e;
        return I[at(i, j)];
    };
    auto d_cell = [&](std::uint32_t i, std::uint32_t j) -> std::int32_t {
        if (i == 0) return kInf;
        if (j == 0) return o + static_cast<std::int32_t>(i) * e;
        return D[at(i, j)];
    };

    for (std::uint32_t i = 1; i <= m; ++i) {
        const char a = pattern[i - 1];
        for (std::uint32_t j = 1; j <= n; ++j) {
            const std::int32_t ins = std::min(h_cell(i, j - 1) + o + e, i_cell(i, j - 1) + e);
            const std::int32_t del = std::min(h_cell(i - 1, j) + o + e, d_cell(i - 1, j) + e);
            const std::int32_t best =
                std::min({h_cell(i - 1, j - 1) + (bases_match(a, text[j - 1]) ? 0 : x), del, ins});
            check_cell(ins);
            check_cell(del);
            check_cell(best);
            const auto k = at(i, j);
            I[k] = static_cast<std::int16_t>(ins);
            D[k] = static_cast<std::int16_t>(del);
            H[k] = static_cast<std::int16_t>(best);
        }
        ctx.touch(std::uint64_t{10} * n);
    }
    const std::int32_t score = H[at(m, n)];

    enum class State { H, D, I };
    ResultWriter out(ctx, max_runs_any(m, n));
    State state = State::H;
    std::uint32_t i = m, j = n;
    while (i > 0 && j > 0) {
        ctx.touch(3);
        if (state == State::H) {
            const bool same = bases_match(pattern[i - 1], text[j - 1]);
            const std::int32_t h = h_cell(i, j);
            if (h == h_cell(i - 1, j - 1) + (same ? 0 : x)) {
                out.emit(same ? Op::Match : Op::Mismatch);
                --i;
                --j;
            } else if (h == d_cell(i, j)) {
                state = State::D;
            } else {
                state = State::I;
            }
        } else if (state == State::D) {
            out.emit(Op::Deletion);
            if (d_cell(i, j) != d_cell(i - 1, j) + e) state = State::H;
            --i;
        } else {
            out.emit(Op::Insertion);
            if (i_cell(i, j) != i_cell(i, j - 1) + e) state = State::H;
            --j;
        }
    }
    out.emit(Op::Deletion, i);
    out.emit(Op::Insertion, j);
    return out.finish(score);
}

// Tiered variant: the three tables are stored as one table of {H, I, D}
// triples so a single DMA moves all three values of a cell range.
inline WramBlock swg_tiered(ThreadContext& ctx, const WramPair& wp, const AffinePenalties& pen) {
    const std::uint32_t m = wp.m, n = wp.n;
    const auto pattern = wp.pattern(ctx);
    const auto text = wp.text(ctx);
    const std::int32_t x = pen.mismatch, o = pen.gap_open, e = pen.gap_extend;
    check_cell(o + static_cast<std::int32_t>(std::max(m, n)) * e);

    constexpr std::uint32_t kCellBytes = 3 * sizeof(std::int16_t);
    const std::uint64_t row_cells = padded_row_cells(n);
    const MramRegion table = mram_alloc(ctx, (m + 1) * row_cells * kCellBytes, "SWG interleaved table");
    const MramRegion dirs = mram_alloc(ctx, (m + 1) * row_cells, "SWG direction rows");

    const WramBlock prev_block = wram_alloc(ctx, kRowChunkCells * kCellBytes, "SWG row staging");
    const WramBlock cur_block = wram_alloc(ctx, kRowChunkCells * kCellBytes, "SWG row staging");
    const WramBlock dir_block = wram_alloc(ctx, kRowChunkCells, "SWG direction staging");
    auto prev = ctx.arena().view<std::int16_t>(prev_block);
    auto cur = ctx.arena().view<std::int16_t>(cur_block);
    auto dir = ctx.arena().view<std::uint8_t>(dir_block);

    auto load = [](std::int16_t v) -> std::int32_t { return v == kCellMax ? kInf : v; };
    auto store = [](std::int32_t v) -> std::int16_t {
        return static_cast<std::int16_t>(v >= kInf ? kCellMax : v);
    };
    auto table_chunk = [&](std::uint64_t row, std::uint64_t j0, std::uint64_t len) {
        return table.sub((row * row_cells + j0) * kCellBytes, len * kCellBytes);
    };
    auto dir_chunk = [&](std::uint64_t row, std::uint64_t j0, std::uint64_t len) {
        return dirs.sub(row * row_cells + j0, len);
    };

    for (std::uint64_t j0 = 0; j0 < row_cells; j0 += kRowChunkCells) {
        const auto len = static_cast<std::uint32_t>(std::min<std::uint64_t>(kRowChunkCells, row_cells - j0));
        for (std::uint32_t c = 0; c < len; ++c) {
            const std::uint64_t j = j0 + c;
            const std::int32_t gap = j == 0 ? 0 : o + static_cast<std::int32_t>(j) * e;
            cur[3 * c + 0] = store(j <= n ? gap : 0);
            cur[3 * c + 1] = store(j == 0 ? kInf : gap);
            cur[3 * c + 2] = store(kInf);
            dir[c] = 2;
        }
        ctx.touch(4 * len);
        ctx.dma_write(cur_block.sub(0, len * kCellBytes), table_chunk(0, j0, len));
        ctx.dma_write(dir_block.sub(0, len), dir_chunk(0, j0, len));
    }

    std::int32_t score = o + static_cast<std::int32_t>(n) * e;
    for (std::uint32_t i = 1; i <= m; ++i) {
        const char a = pattern[i - 1];
        std::int32_t diag_h = 0;
        std::int32_t left_h = 0, left_i = kInf;
        for (std::uint64_t j0 = 0; j0 < row_cells; j0 += kRowChunkCells) {
            const auto len = static_cast<std::uint32_t>(std::min<std::uint64_t>(kRowChunkCells, row_cells - j0));
            ctx.dma_read(table_chunk(i - 1, j0, len), prev_block.sub(0, len * kCellBytes));
            for (std::uint32_t c = 0; c < len; ++c) {
                const std::uint64_t j = j0 + c;
                if (j > n) {
                    cur[3 * c] = cur[3 * c + 1] = cur[3 * c + 2] = 0;
                    dir[c] = 0;
                    continue;
                }
                const std::int32_t up_h = load(prev[3 * c + 0]);
                const std::int32_t up_d = load(prev[3 * c + 2]);
                std::int32_t h, ins, del;
                std::uint8_t from = 0;
                if (j == 0) {
                    del = o + static_cast<std::int32_t>(i) * e;
                    h = del;
                    ins = kInf;
                    from = 1 | (i > 1 ? SwgDir::kDExtend : 0);
                } else {
                    const std::int32_t ins_open = left_h + o + e, ins_ext = left_i + e;
                    const std::int32_t del_open = up_h + o + e, del_ext = up_d + e;
                    ins = std::min(ins_open, ins_ext);
                    del = std::min(del_open, del_ext);
                    const std::int32_t via_diag = diag_h + (bases_match(a, text[j - 1]) ? 0 : x);
                    h = std::min({via_diag, del, ins});
                    from = h == via_diag ? 0 : h == del ? 1 : 2;
                    if (del_ext <= del_open) from |= SwgDir::kDExtend;
                    if (ins_ext <= ins_open) from |= SwgDir::kIExtend;
                    check_cell(ins);
                    check_cell(del);
                    check_cell(h);
                }
                cur[3 * c + 0] = store(h);
                cur[3 * c + 1] = store(ins);
                cur[3 * c + 2] = store(del);
                dir[c] = from;
                diag_h = up_h;
                left_h = h;
                left_i = ins;
                if (i == m && j == n) score = h;
            }
            ctx.touch(std::uint64_t{12} * len);
            ctx.dma_write(cur_block.sub(0, len * kCellBytes), table_chunk(i, j0, len));
            ctx.dma_write(dir_block.sub(0, len), dir_chunk(i, j0, len));
        }
    }

    enum class State { H, D, I };
    ResultWriter out(ctx, max_runs_any(m, n));
    MramWordCache cache(ctx);
    State state = State::H;
    std::uint32_t i = m, j = n;
    while (i > 0 && j > 0) {
        const auto from = cache.load<std::uint8_t>(dirs.offset + std::uint64_t{i} * row_cells + j);
        if (state == State::H) {
            const auto src = from & SwgDir::kHMask;
            if (src == 0) {
                out.emit(bases_match(pattern[i - 1], text[j - 1]) ? Op::Match : Op::Mismatch);
                --i;
                --j;
            } else {
                state = src == 1 ? State::D : State::I;
            }
        } else if (state == State::D) {
            out.emit(Op::Deletion);
            if (!(from & SwgDir::kDExtend)) state = State::H;
            --i;
        } else {
            out.emit(Op::Insertion);
            if (!(from & SwgDir::kIExtend)) state = State::H;
            --j;
        }
    }
    out.emit(Op::Deletion, i);
    out.emit(Op::Insertion, j);
    return out.finish(score);
}

}  // namespace pimalign::kernel
