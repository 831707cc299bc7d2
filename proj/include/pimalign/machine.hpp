#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"

namespace pimalign {

constexpr std::uint64_t align_up(std::uint64_t value, std::uint64_t alignment) {
    return (value + alignment - 1) / alignment * alignment;
}

constexpr std::uint64_t align_down(std::uint64_t value, std::uint64_t alignment) {
    return value / alignment * alignment;
}

struct CostCounters {
    std::uint64_t wram_accesses = 0;
    std::uint64_t mram_read_bytes = 0;
    std::uint64_t mram_write_bytes = 0;
    std::uint64_t dma_transfers = 0;
    double estimated_cycles = 0;

    std::uint64_t mram_bytes_moved() const { return mram_read_bytes + mram_write_bytes; }

    CostCounters& operator+=(const CostCounters& o) {
        wram_accesses += o.wram_accesses;
        mram_read_bytes += o.mram_read_bytes;
        mram_write_bytes += o.mram_write_bytes;
        dma_transfers += o.dma_transfers;
        estimated_cycles += o.estimated_cycles;
        return *this;
    }

    friend CostCounters operator-(CostCounters a, const CostCounters& b) {
        a.wram_accesses -= b.wram_accesses;
        a.mram_read_bytes -= b.mram_read_bytes;
        a.mram_write_bytes -= b.mram_write_bytes;
        a.dma_transfers -= b.dma_transfers;
        a.estimated_cycles -= b.estimated_cycles;
        return a;
    }

    bool operator==(const CostCounters&) const = default;
};

/// Cycle estimate implied by the counter totals alone.
inline double cycles_from_totals(const CostCounters& c, const PimConfig& cfg) {
    return static_cast<double>(c.wram_accesses) * cfg.wram_access_cycles +
           static_cast<double>(c.dma_transfers) * cfg.dma_fixed_cycles +
           static_cast<double>(c.mram_bytes_moved()) * cfg.dma_per_byte_cycles;
}

/// A block inside a thread's WRAM arena (offset relative to the arena base).
struct WramBlock {
    std::uint32_t offset = 0;
    std::uint32_t size = 0;

    WramBlock sub(std::uint32_t off, std::uint32_t len) const {
        if (off + len > size) throw PimError(ErrorCode::OutOfBounds, "WRAM sub-block out of range");
        return {offset + off, len};
    }
};

/// Per-thread bump allocator over a private slice of the scratchpad.
///
/// Blocks are handed out front to back; there is no individual free.
/// `reset` reclaims everything, `rewind` returns to an earlier mark.
class WramArena {
public:
    struct Mark {
        std::uint64_t watermark;
    };

    WramArena(std::uint32_t thread_id, std::uint64_t capacity, std::uint32_t alignment)
        : thread_id_(thread_id),
          capacity_(align_down(capacity, alignment)),
          alignment_(alignment),
          storage_(capacity_ / sizeof(std::uint64_t) + 1, 0) {
        if (alignment == 0 || (alignment & (alignment - 1)) != 0 || alignment > sizeof(std::uint64_t) * 64)
            throw PimError(ErrorCode::InvalidArgument, "arena alignment must be a power of two");
    }

    WramBlock alloc(std::uint64_t size) {
        if (size == 0) throw PimError(ErrorCode::InvalidArgument, "arena_alloc of zero bytes");
        const std::uint64_t start = align_up(watermark_, alignment_);
        const std::uint64_t rounded = align_up(size, alignment_);
        if (start + rounded > capacity_) {
            throw PimError(ErrorCode::CapacityExceeded,
                           "thread " + std::to_string(thread_id_) + " WRAM arena: need " +
                               std::to_string(start + rounded) + " of " + std::to_string(capacity_) + " bytes");
        }
        watermark_ = start + rounded;
        peak_ = std::max(peak_, watermark_);
        return {static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(rounded)};
    }

    void reset() { watermark_ = 0; }
    Mark mark() const { return {watermark_}; }
    void rewind(Mark m) {
        if (m.watermark > watermark_) throw PimError(ErrorCode::InvalidArgument, "rewind past watermark");
        watermark_ = m.watermark;
    }

    std::uint32_t thread_id() const { return thread_id_; }
    std::uint64_t capacity() const { return capacity_; }
    std::uint64_t watermark() const { return watermark_; }
    std::uint64_t peak() const { return peak_; }
    std::uint32_t alignment() const { return alignment_; }

    std::byte* bytes(WramBlock b) { return reinterpret_cast<std::byte*>(storage_.data()) + b.offset; }
    const std::byte* bytes(WramBlock b) const {
        return reinterpret_cast<const std::byte*>(storage_.data()) + b.offset;
    }

    template <class T>
    std::span<T> view(WramBlock b) {
        return {reinterpret_cast<T*>(bytes(b)), b.size / sizeof(T)};
    }
    template <class T>
    std::span<const T> view(WramBlock b) const {
        return {reinterpret_cast<const T*>(bytes(b)), b.size / sizeof(T)};
    }

private:
    std::uint32_t thread_id_;
    std::uint64_t capacity_;
    std::uint32_t alignment_;
    std::uint64_t watermark_ = 0;
    std::uint64_t peak_ = 0;
    std::vector<std::uint64_t> storage_;
};

/// Byte range inside one DPU's MRAM bank.
struct MramRegion {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;

    std::uint64_t end() const { return offset + length; }
    MramRegion sub(std::uint64_t off, std::uint64_t len) const {
        if (off + len > length) throw PimError(ErrorCode::OutOfBounds, "MRAM sub-region out of range");
        return {offset + off, len};
    }
    bool contains(const MramRegion& r) const { return r.offset >= offset && r.end() <= end(); }
    bool operator==(const MramRegion&) const = default;
};

enum class TransferDir { Read, Write };

struct TransferRecord {
    TransferDir dir;
    std::uint64_t mram_offset;
    std::uint32_t wram_offset;
    std::uint32_t size;
};

struct MachineAudit {
    std::uint64_t dma_violations = 0;
    std::uint64_t arena_violations = 0;
};

/// Where a simulated DPU thread lives: its WRAM budget and MRAM window.
struct ThreadLayout {
    std::uint32_t dpu = 0;
    std::uint32_t thread = 0;
    std::uint64_t wram_budget = 0;
    MramRegion window;   // everything this thread may touch in the bank
    MramRegion scratch;  // intermediate data structures, inside window

    /// One thread owning a whole DPU: all usable WRAM, the whole bank.
    static ThreadLayout single_thread(const PimConfig& cfg) {
        ThreadLayout l;
        l.wram_budget = cfg.usable_wram();
        l.window = {0, cfg.mram_bytes};
        l.scratch = l.window;
        return l;
    }
};

/// Execution context of one simulated DPU thread.
///
/// Owns the thread's arena, its slice of the bank, and its counters. Nothing
/// here is shared, so contexts may be driven from different host threads.
class ThreadContext {
public:
    ThreadContext(const PimConfig& cfg, ThreadLayout layout)
        : cfg_(&cfg),
          layout_(layout),
          arena_(layout.thread, layout.wram_budget, cfg.dma_alignment),
          scratch_top_(layout.scratch.offset) {
        if (layout.window.end() > cfg.mram_bytes || !layout.window.contains(layout.scratch))
            throw PimError(ErrorCode::OutOfBounds, "thread MRAM window outside the bank");
    }

    const PimConfig& config() const { return *cfg_; }
    const ThreadLayout& layout() const { return layout_; }
    WramArena& arena() { return arena_; }
    const WramArena& arena() const { return arena_; }
    const CostCounters& counters() const { return counters_; }
    const MachineAudit& audit() const { return audit_; }

    void enable_trace(bool on) { tracing_ = on; }
    const std::vector<TransferRecord>& trace() const { return trace_; }

    /// Accounts `accesses` scalar loads/stores to the scratchpad.
    void touch(std::uint64_t accesses) {
        counters_.wram_accesses += accesses;
        counters_.estimated_cycles += static_cast<double>(accesses) * cfg_->wram_access_cycles;
    }

    void dma_read(MramRegion src, WramBlock dst) {
        check_transfer(src, dst);
        std::memcpy(arena_.bytes(dst), mram_ptr(src), src.length);
        record(TransferDir::Read, src, dst);
    }

    void dma_write(WramBlock src, MramRegion dst) {
        check_transfer(dst, src);
        std::memcpy(mram_ptr(dst), arena_.bytes(src), dst.length);
        record(TransferDir::Write, dst, src);
    }

    /// Splits a read into transfers of at most dma_max_transfer bytes.
    void dma_read_chunked(MramRegion src, WramBlock dst) {
        const std::uint64_t step = cfg_->dma_max_transfer;
        for (std::uint64_t done = 0; done < src.length; done += step) {
            const auto len = std::min<std::uint64_t>(step, src.length - done);
            dma_read(src.sub(done, len), dst.sub(static_cast<std::uint32_t>(done), static_cast<std::uint32_t>(len)));
        }
    }

    void dma_write_chunked(WramBlock src, MramRegion dst) {
        const std::uint64_t step = cfg_->dma_max_transfer;
        for (std::uint64_t done = 0; done < dst.length; done += step) {
            const auto len = std::min<std::uint64_t>(step, dst.length - done);
            dma_write(src.sub(static_cast<std::uint32_t>(done), static_cast<std::uint32_t>(len)), dst.sub(done, len));
        }
    }

    /// Bump allocation of intermediate storage in the thread's MRAM slice.
    MramRegion mram_alloc(std::uint64_t size) {
        if (size == 0) throw PimError(ErrorCode::InvalidArgument, "mram_alloc of zero bytes");
        const std::uint64_t rounded = align_up(size, cfg_->dma_alignment);
        if (scratch_top_ + rounded > layout_.scratch.end()) {
            throw PimError(ErrorCode::CapacityExceeded,
                           "thread MRAM slice: need " + std::to_string(scratch_top_ + rounded - layout_.scratch.offset) +
                               " of " + std::to_string(layout_.scratch.length) + " bytes");
        }
        MramRegion r{scratch_top_, rounded};
        scratch_top_ += rounded;
        scratch_peak_ = std::max(scratch_peak_, scratch_top_ - layout_.scratch.offset);
        return r;
    }
    void mram_reset() { scratch_top_ = layout_.scratch.offset; }
    std::uint64_t mram_scratch_peak() const { return scratch_peak_; }

    /// Host-side access to this thread's part of the bank (scatter/gather).
    void host_write(std::uint64_t offset, std::span<const std::byte> data) {
        MramRegion r{offset, data.size()};
        if (!layout_.window.contains(r)) throw PimError(ErrorCode::OutOfBounds, "host write outside thread window");
        if (!data.empty()) std::memcpy(mram_ptr(r), data.data(), data.size());
    }
    void host_read(std::uint64_t offset, std::span<std::byte> out) {
        MramRegion r{offset, out.size()};
        if (!layout_.window.contains(r)) throw PimError(ErrorCode::OutOfBounds, "host read outside thread window");
        if (!out.empty()) std::memcpy(out.data(), mram_ptr(r), out.size());
    }

    /// Verifies the always-on machine invariants; returns false on any breach.
    bool invariants_hold() const {
        if (audit_.dma_violations != 0 || audit_.arena_violations != 0) return false;
        if (arena_.peak() > arena_.capacity()) return false;
        return true;
    }

private:
    void violation(ErrorCode code, const std::string& msg) {
        ++audit_.dma_violations;
        throw PimError(code, msg);
    }

    void check_transfer(MramRegion mram, WramBlock wram) {
        const std::uint64_t a = cfg_->dma_alignment;
        if (mram.length == 0) violation(ErrorCode::MisalignedTransfer, "zero-length DMA");
        if (mram.offset % a != 0 || mram.length % a != 0 || wram.offset % a != 0)
            violation(ErrorCode::MisalignedTransfer,
                      "DMA of " + std::to_string(mram.length) + " bytes at " + std::to_string(mram.offset));
        if (mram.length > cfg_->dma_max_transfer)
            violation(ErrorCode::OversizeTransfer, "DMA of " + std::to_string(mram.length) + " bytes exceeds " +
                                                       std::to_string(cfg_->dma_max_transfer));
        if (mram.end() > cfg_->mram_bytes || !layout_.window.contains(mram))
            violation(ErrorCode::OutOfBounds, "DMA outside thread MRAM window");
        if (wram.size < mram.length || wram.offset + mram.length > arena_.capacity())
            violation(ErrorCode::OutOfBounds, "DMA WRAM side smaller than transfer");
    }

    void record(TransferDir dir, MramRegion mram, WramBlock wram) {
        counters_.dma_transfers += 1;
        if (dir == TransferDir::Read) counters_.mram_read_bytes += mram.length;
        else counters_.mram_write_bytes += mram.length;
        counters_.estimated_cycles +=
            cfg_->dma_fixed_cycles + cfg_->dma_per_byte_cycles * static_cast<double>(mram.length);
        if (tracing_)
            trace_.push_back({dir, mram.offset, wram.offset, static_cast<std::uint32_t>(mram.length)});
    }

    // MRAM contents are materialized lazily, relative to the window base.
    std::byte* mram_ptr(MramRegion r) {
        const std::uint64_t rel_end = r.end() - layout_.window.offset;
        if (mram_.size() < rel_end) {
            const std::uint64_t grown = std::min<std::uint64_t>(mram_.size() * 3 / 2, layout_.window.length);
            mram_.resize(std::max(rel_end, grown), std::byte{0});
        }
        return mram_.data() + (r.offset - layout_.window.offset);
    }

    const PimConfig* cfg_;
    ThreadLayout layout_;
    WramArena arena_;
    std::vector<std::byte> mram_;
    std::uint64_t scratch_top_;
    std::uint64_t scratch_peak_ = 0;
    CostCounters counters_;
    MachineAudit audit_;
    bool tracing_ = false;
    std::vector<TransferRecord> trace_;
};

struct ThreadCost {
    std::uint32_t dpu = 0;
    std::uint32_t thread = 0;
    std::uint64_t pairs = 0;
    std::uint64_t peak_wram = 0;
    std::uint64_t peak_mram_scratch = 0;
    CostCounters counters;
};

struct DpuCost {
    std::uint32_t dpu = 0;
    CostCounters total;
    double max_thread_cycles = 0;
};

struct CostReport {
    std::vector<ThreadCost> threads;
    std::vector<DpuCost> dpus;
    CostCounters total;
    double makespan_cycles = 0;
    std::uint64_t max_peak_wram = 0;
};

/// Aggregates per-thread counters. Threads of one DPU are assumed to hide each
/// other's latency, so a DPU finishes with its slowest thread and the run with
/// its slowest DPU.
inline CostReport cost_report(std::span<const ThreadCost> threads) {
    CostReport r;
    r.threads.assign(threads.begin(), threads.end());
    std::sort(r.threads.begin(), r.threads.end(), [](const ThreadCost& a, const ThreadCost& b) {
        return a.dpu != b.dpu ? a.dpu < b.dpu : a.thread < b.thread;
    });
    for (const auto& t : r.threads) {
        if (r.dpus.empty() || r.dpus.back().dpu != t.dpu) r.dpus.push_back({t.dpu, {}, 0});
        auto& d = r.dpus.back();
        d.total += t.counters;
        d.max_thread_cycles = std::max(d.max_thread_cycles, t.counters.estimated_cycles);
        r.total += t.counters;
        r.max_peak_wram = std::max(r.max_peak_wram, t.peak_wram);
    }
    for (const auto& d : r.dpus) r.makespan_cycles = std::max(r.makespan_cycles, d.max_thread_cycles);
    return r;
}

}  // namespace pimalign
