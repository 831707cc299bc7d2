#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <string_view>

#include "../machine.hpp"
#include "../sequence.hpp"

namespace pimalign {

struct Alignment {
    std::int32_t score = 0;
    Cigar cigar;
    CostCounters cost;
};

namespace kernel {

inline constexpr std::uint32_t kPairHeaderBytes = 8;
inline constexpr std::uint32_t kResultHeaderBytes = 8;
inline constexpr std::uint32_t kRunBytes = 4;
inline constexpr std::int32_t kCellMax = std::numeric_limits<std::int16_t>::max();

/// Pair record layout, shared by MRAM and WRAM: {m, n} header, then the
/// pattern and text, each padded to 8 bytes.
inline std::uint64_t pair_record_bytes(std::uint64_t m, std::uint64_t n) {
    return kPairHeaderBytes + align_up(m, 8) + align_up(n, 8);
}

/// Result record: {score, status|runs} header, then one word per CIGAR run.
inline std::uint64_t result_record_bytes(std::uint64_t max_runs) {
    return kResultHeaderBytes + align_up(max_runs * kRunBytes, 8);
}

/// Worst-case number of CIGAR runs for any global alignment of m against n.
inline std::uint64_t max_runs_any(std::uint64_t m, std::uint64_t n) { return m + n; }

/// Kernel-side allocation: running out of arena is a budget problem of the
/// chosen placement, not a machine fault.
inline WramBlock wram_alloc(ThreadContext& ctx, std::uint64_t size, const char* what) {
    try {
        return ctx.arena().alloc(size);
    } catch (const PimError& e) {
        if (e.code() != ErrorCode::CapacityExceeded) throw;
        throw PimError(ErrorCode::BudgetExceeded, std::string(what) + " does not fit the WRAM budget (" + e.what() + ")");
    }
}

inline MramRegion mram_alloc(ThreadContext& ctx, std::uint64_t size, const char* what) {
    try {
        return ctx.mram_alloc(size);
    } catch (const PimError& e) {
        if (e.code() != ErrorCode::CapacityExceeded) throw;
        throw PimError(ErrorCode::BudgetExceeded, std::string(what) + " does not fit the MRAM slice (" + e.what() + ")");
    }
}

/// A sequence pair resident in WRAM.
struct WramPair {
    WramBlock block;
    std::uint32_t m = 0;
    std::uint32_t n = 0;

    std::string_view pattern(const ThreadContext& ctx) const {
        return {reinterpret_cast<const char*>(ctx.arena().bytes(block)) + kPairHeaderBytes, m};
    }
    std::string_view text(const ThreadContext& ctx) const {
        return {reinterpret_cast<const char*>(ctx.arena().bytes(block)) + kPairHeaderBytes + align_up(m, 8), n};
    }
};

inline void encode_pair_record(const SequencePair& pair, std::byte* out) {
    const auto m = static_cast<std::uint32_t>(pair.pattern.size());
    const auto n = static_cast<std::uint32_t>(pair.text.size());
    std::memset(out, 0, pair_record_bytes(m, n));
    std::memcpy(out, &m, 4);
    std::memcpy(out + 4, &n, 4);
    std::memcpy(out + kPairHeaderBytes, pair.pattern.data(), m);
    std::memcpy(out + kPairHeaderBytes + align_up(m, 8), pair.text.data(), n);
}

/// Places a pair in WRAM directly (used when a kernel runs outside a dispatched job).
inline WramPair load_pair(ThreadContext& ctx, const SequencePair& pair) {
    if (pair.pattern.empty() || pair.text.empty())
        throw PimError(ErrorCode::InvalidArgument, "sequences must be non-empty");
    WramPair p;
    p.m = static_cast<std::uint32_t>(pair.pattern.size());
    p.n = static_cast<std::uint32_t>(pair.text.size());
    p.block = wram_alloc(ctx, pair_record_bytes(p.m, p.n), "sequence pair");
    encode_pair_record(pair, ctx.arena().bytes(p.block));
    return p;
}

enum class ResultStatus : std::uint32_t { Ok = 0, Filtered = 1, Error = 2 };

inline std::uint32_t pack_status(ResultStatus status, std::uint32_t runs) {
    return (static_cast<std::uint32_t>(status) << 28) | (runs & 0x0FFFFFFFu);
}

/// Collects traceback operations, which arrive end-to-start, as run-length
/// words in a WRAM result block.
class ResultWriter {
public:
    ResultWriter(ThreadContext& ctx, std::uint64_t max_runs)
        : ctx_(&ctx),
          max_runs_(max_runs),
          block_(wram_alloc(ctx, result_record_bytes(max_runs), "result buffer")) {}

    void emit(Op op, std::uint32_t count = 1) {
        if (count == 0) return;
        if (have_run_ && op == run_op_) {
            run_len_ += count;
            return;
        }
        flush();
        have_run_ = true;
        run_op_ = op;
        run_len_ = count;
    }

    /// Closes the record; runs are put back into start-to-end order.
    WramBlock finish(std::int32_t score) {
        flush();
        auto words = runs();
        std::reverse(words.begin(), words.begin() + runs_);
        ctx_->touch(runs_);
        auto header = ctx_->arena().view<std::uint32_t>(block_.sub(0, kResultHeaderBytes));
        std::memcpy(&header[0], &score, 4);
        header[1] = pack_status(ResultStatus::Ok, runs_);
        ctx_->touch(2);
        return block_;
    }

    WramBlock block() const { return block_; }

private:
    std::span<std::uint32_t> runs() {
        return ctx_->arena().view<std::uint32_t>(block_.sub(kResultHeaderBytes, block_.size - kResultHeaderBytes));
    }

    void flush() {
        if (!have_run_) return;
        if (runs_ >= max_runs_)
            throw PimError(ErrorCode::OutOfBounds, "CIGAR needs more runs than the result buffer holds");
        runs()[runs_++] = (run_len_ << 2) | static_cast<std::uint32_t>(run_op_);
        ctx_->touch(1);
        have_run_ = false;
    }

    ThreadContext* ctx_;
    std::uint64_t max_runs_;
    WramBlock block_;
    std::uint32_t runs_ = 0;
    bool have_run_ = false;
    Op run_op_ = Op::Match;
    std::uint32_t run_len_ = 0;
};

struct DecodedResult {
    ResultStatus status = ResultStatus::Ok;
    std::int32_t score = 0;
    Cigar cigar;
};

inline DecodedResult decode_result_record(const std::byte* data) {
    DecodedResult r;
    std::uint32_t word = 0;
    std::memcpy(&r.score, data, 4);
    std::memcpy(&word, data + 4, 4);
    r.status = static_cast<ResultStatus>(word >> 28);
    const std::uint32_t runs = word & 0x0FFFFFFFu;
    for (std::uint32_t i = 0; i < runs; ++i) {
        std::uint32_t w = 0;
        std::memcpy(&w, data + kResultHeaderBytes + i * kRunBytes, 4);
        r.cigar.push(static_cast<Op>(w & 3u), w >> 2);
    }
    return r;
}

inline std::uint64_t result_record_used_bytes(const std::byte* data) {
    std::uint32_t word = 0;
    std::memcpy(&word, data + 4, 4);
    return result_record_bytes(word & 0x0FFFFFFFu);
}

inline void check_cell(std::int32_t value) {
    if (value > kCellMax - 1)
        throw PimError(ErrorCode::ScoreOverflow, "DP cell value " + std::to_string(value) + " exceeds int16 range");
}

/// Cached 8-byte DMA reads for traceback's scattered single-element loads.
class MramWordCache {
public:
    explicit MramWordCache(ThreadContext& ctx)
        : ctx_(&ctx), buffer_(wram_alloc(ctx, 8, "traceback word cache")) {}

    template <class T>
    T load(std::uint64_t mram_offset) {
        const std::uint64_t base = align_down(mram_offset, 8);
        if (!valid_ || base != cached_) {
            ctx_->dma_read({base, 8}, buffer_);
            cached_ = base;
            valid_ = true;
        }
        T value;
        std::memcpy(&value, ctx_->arena().bytes(buffer_) + (mram_offset - base), sizeof(T));
        ctx_->touch(1);
        return value;
    }

    void invalidate() { valid_ = false; }

private:
    ThreadContext* ctx_;
    WramBlock buffer_;
    std::uint64_t cached_ = 0;
    bool valid_ = false;
};

}  // namespace kernel
}  // namespace pimalign
