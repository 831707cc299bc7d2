#pragma once

#include <algorithm>
#include <cstdint>

#include "../params.hpp"
#include "common.hpp"

namespace pimalign::kernel {

/// Columns of a DP row staged in WRAM at a time by the tiered kernels.
inline constexpr std::uint32_t kRowChunkCells = 256;

/// Cells per padded DP row in MRAM (rows start on an 8-byte boundary for both
/// the int16 score rows and the one-byte direction rows).
inline std::uint64_t padded_row_cells(std::uint64_t n) { return align_up(n + 1, 8); }

enum : std::uint8_t { kFromDiag = 0, kFromUp = 1, kFromLeft = 2 };

// Linear-gap global alignment with the whole m x n table in WRAM. Row 0 and
// column 0 are implicit (j*e and i*e), so the table holds exactly m*n cells.
inline WramBlock nw_scratchpad(ThreadContext& ctx, const WramPair& wp, const LinearPenalties& pen) {
    const std::uint32_t m = wp.m, n = wp.n;
    const auto pattern = wp.pattern(ctx);
    const auto text = wp.text(ctx);
    const std::int32_t e = pen.indel, x = pen.mismatch;
    check_cell(static_cast<std::int32_t>(std::max(m, n)) * e);

    auto table = ctx.arena().view<std::int16_t>(
        wram_alloc(ctx, std::uint64_t{m} * n * sizeof(std::int16_t), "NW DP table"));
    auto cell = [&](std::uint32_t i, std::uint32_t j) -> std::int32_t {
        if (i == 0) return static_cast<std::int32_t>(j) * e;
        if (j == 0) return static_cast<std::int32_t>(i) * e;
        return table[std::size_t{i - 1} * n + (j - 1)];
    };

    for (std::uint32_t i = 1; i <= m; ++i) {
        std::int32_t left = static_cast<std::int32_t>(i) * e;
        std::int32_t diag = static_cast<std::int32_t>(i - 1) * e;
        const char a = pattern[i - 1];
        std::int16_t* row = &table[std::size_t{i - 1} * n];
        const std::int16_t* above = i > 1 ? &table[std::size_t{i - 2} * n] : nullptr;
        for (std::uint32_t j = 1; j <= n; ++j) {
            const std::int32_t up = above ? above[j - 1] : static_cast<std::int32_t>(j) * e;
            const std::int32_t v =
                std::min({diag + (bases_match(a, text[j - 1]) ? 0 : x), up + e, left + e});
            check_cell(v);
            row[j - 1] = static_cast<std::int16_t>(v);
            diag = up;
            left = v;
        }
        ctx.touch(std::uint64_t{4} * n);
    }
    const std::int32_t score = table[std::size_t{m} * n - 1];

    ResultWriter out(ctx, max_runs_any(m, n));
    std::uint32_t i = m, j = n;
    while (i > 0 && j > 0) {
        const std::int32_t v = cell(i, j);
        const bool same = bases_match(pattern[i - 1], text[j - 1]);
        ctx.touch(3);
        if (v == cell(i - 1, j - 1) + (same ? 0 : x)) {
            out.emit(same ? Op::Match : Op::Mismatch);
            --i;
            --j;
        } else if (v == cell(i - 1, j) + e) {
            out.emit(Op::Deletion);
            --i;
        } else {
            out.emit(Op::Insertion);
            --j;
        }
    }
    out.emit(Op::Deletion, i);
    out.emit(Op::Insertion, j);
    return out.finish(score);
}

// Linear-gap global alignment with score rows and per-cell direction bytes in
// MRAM. WRAM only holds a chunk of the previous row, a chunk of the current
// row and the matching direction bytes.
inline WramBlock nw_tiered(ThreadContext& ctx, const WramPair& wp, const LinearPenalties& pen) {
    const std::uint32_t m = wp.m, n = wp.n;
    const auto pattern = wp.pattern(ctx);
    const auto text = wp.text(ctx);
    const std::int32_t e = pen.indel, x = pen.mismatch;
    check_cell(static_cast<std::int32_t>(std::max(m, n)) * e);

    const std::uint64_t row_cells = padded_row_cells(n);
    const MramRegion scores = mram_alloc(ctx, (m + 1) * row_cells * sizeof(std::int16_t), "NW score rows");
    const MramRegion dirs = mram_alloc(ctx, (m + 1) * row_cells, "NW direction rows");

    const WramBlock prev_block = wram_alloc(ctx, kRowChunkCells * sizeof(std::int16_t), "NW row staging");
    const WramBlock cur_block = wram_alloc(ctx, kRowChunkCells * sizeof(std::int16_t), "NW row staging");
    const WramBlock dir_block = wram_alloc(ctx, kRowChunkCells, "NW direction staging");
    auto prev = ctx.arena().view<std::int16_t>(prev_block);
    auto cur = ctx.arena().view<std::int16_t>(cur_block);
    auto dir = ctx.arena().view<std::uint8_t>(dir_block);

    auto score_chunk = [&](std::uint64_t row, std::uint64_t j0, std::uint64_t len) {
        return scores.sub((row * row_cells + j0) * sizeof(std::int16_t), len * sizeof(std::int16_t));
    };
    auto dir_chunk = [&](std::uint64_t row, std::uint64_t j0, std::uint64_t len) {
        return dirs.sub(row * row_cells + j0, len);
    };

    for (std::uint64_t j0 = 0; j0 < row_cells; j0 += kRowChunkCells) {
        const auto len = static_cast<std::uint32_t>(std::min<std::uint64_t>(kRowChunkCells, row_cells - j0));
        for (std::uint32_t c = 0; c < len; ++c) {
            const std::uint64_t j = j0 + c;
            cur[c] = j <= n ? static_cast<std::int16_t>(static_cast<std::int32_t>(j) * e) : 0;
            dir[c] = kFromLeft;
        }
        ctx.touch(2 * len);
        ctx.dma_write(cur_block.sub(0, len * 2), score_chunk(0, j0, len));
        ctx.dma_write(dir_block.sub(0, len), dir_chunk(0, j0, len));
    }

    std::int32_t score = static_cast<std::int32_t>(n) * e;
    for (std::uint32_t i = 1; i <= m; ++i) {
        const char a = pattern[i - 1];
        std::int32_t diag = 0;
        std::int32_t left = 0;
        for (std::uint64_t j0 = 0; j0 < row_cells; j0 += kRowChunkCells) {
            const auto len = static_cast<std::uint32_t>(std::min<std::uint64_t>(kRowChunkCells, row_cells - j0));
            ctx.dma_read(score_chunk(i - 1, j0, len), prev_block.sub(0, len * 2));
            for (std::uint32_t c = 0; c < len; ++c) {
                const std::uint64_t j = j0 + c;
                if (j > n) {
                    cur[c] = 0;
                    dir[c] = kFromLeft;
                    continue;
                }
                const std::int32_t up = prev[c];
                std::int32_t v;
                std::uint8_t from;
                if (j == 0) {
                    v = static_cast<std::int32_t>(i) * e;
                    from = kFromUp;
                } else {
                    const std::int32_t via_diag = diag + (bases_match(a, text[j - 1]) ? 0 : x);
                    const std::int32_t via_up = up + e;
                    const std::int32_t via_left = left + e;
                    v = std::min({via_diag, via_up, via_left});
                    from = v == via_diag ? kFromDiag : v == via_up ? kFromUp : kFromLeft;
                }
                check_cell(v);
                cur[c] = static_cast<std::int16_t>(v);
                dir[c] = from;
                diag = up;
                left = v;
                if (i == m && j == n) score = v;
            }
            ctx.touch(std::uint64_t{6} * len);
            ctx.dma_write(cur_block.sub(0, len * 2), score_chunk(i, j0, len));
            ctx.dma_write(dir_block.sub(0, len), dir_chunk(i, j0, len));
        }
    }

    ResultWriter out(ctx, max_runs_any(m, n));
    MramWordCache cache(ctx);
    std::uint32_t i = m, j = n;
    while (i > 0 && j > 0) {
        const auto from = cache.load<std::uint8_t>(dirs.offset + std::uint64_t{i} * row_cells + j);
        if (from == kFromDiag) {
            out.emit(bases_match(pattern[i - 1], text[j - 1]) ? Op::Match : Op::Mismatch);
            --i;
            --j;
        } else if (from == kFromUp) {
            out.emit(Op::Deletion);
            --i;
        } else {
            out.emit(Op::Insertion);
            --j;
        }
    }
    out.emit(Op::Deletion, i);
    out.emit(Op::Insertion, j);
    return out.finish(score);
}

}  // namespace pimalign::kernel
