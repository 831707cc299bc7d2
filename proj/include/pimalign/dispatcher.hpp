#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <cstdint>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "align.hpp"
#include "config.hpp"
#include "footprint.hpp"
#include "machine.hpp"
#include "seqio.hpp"

namespace pimalign {

/// What the planner needs to know about a dataset.
struct DatasetSummary {
    std::uint64_t count = 0;
    std::uint64_t max_m = 0;
    std::uint64_t max_n = 0;
    double error_rate = 0.10;  // bound used for WFA footprints

    static DatasetSummary of(const std::vector<SequencePair>& pairs, double error_rate = 0.10) {
        DatasetSummary s;
        s.count = pairs.size();
        s.error_rate = error_rate;
        for (const auto& p : pairs) {
            s.max_m = std::max<std::uint64_t>(s.max_m, p.pattern.size());
            s.max_n = std::max<std::uint64_t>(s.max_n, p.text.size());
        }
        return s;
    }
};

/// One simulated DPU thread and the pairs it processes.
struct ThreadAssignment {
    ThreadLayout layout;
    MramRegion input;    // pair records, scattered by the host
    MramRegion results;  // one fixed-size result slot per pair
    std::vector<std::uint64_t> pairs;
};

struct LaunchPlan {
    AlignParams params;
    DatasetSummary dataset;
    Footprint footprint;
    std::uint32_t threads_per_dpu = 0;
    std::uint32_t dpus_used = 0;
    std::uint64_t per_thread_wram_budget = 0;
    std::uint64_t pair_slot_bytes = 0;
    std::uint64_t result_slot_bytes = 0;
    std::uint64_t per_thread_mram_slice = 0;  // input + results + scratch, per thread
    std::uint32_t wram_limited_threads = 0;   // before the MRAM check
    std::vector<ThreadAssignment> threads;    // only threads that received pairs
};

namespace detail {

inline std::uint64_t pairs_on_busiest_thread(std::uint64_t count, std::uint64_t dpus, std::uint64_t threads) {
    const std::uint64_t slots = dpus * threads;
    return (count + slots - 1) / slots;
}

}  // namespace detail

/// Picks the thread count from the per-thread footprint and assigns pairs
/// round-robin: pair i goes to DPU i mod D, thread (i / D) mod T.
inline LaunchPlan plan(const DatasetSummary& ds, const AlignParams& params, const PimConfig& cfg) {
    cfg.validate();
    params.validate();
    if (ds.count == 0) throw PimError(ErrorCode::InvalidArgument, "cannot plan an empty dataset");

    LaunchPlan lp;
    lp.params = params;
    lp.dataset = ds;
    lp.footprint = footprint(params, ds.max_m, ds.max_n, ds.error_rate);
    const std::uint64_t usable = cfg.usable_wram();
    const std::uint64_t by_wram = lp.footprint.wram == 0 ? cfg.threads_per_dpu_max : usable / lp.footprint.wram;

    auto unalignable = [&](const std::string& why) {
        std::ostringstream s;
        s << to_string(params.algorithm) << '/' << to_string(params.placement) << " at " << ds.max_m << 'x'
          << ds.max_n << ": " << why << " (footprint: " << lp.footprint.wram << " B WRAM, " << lp.footprint.mram
          << " B MRAM; usable WRAM " << usable << " B, MRAM " << cfg.mram_bytes << " B)";
        if (params.placement == Placement::Scratchpad) s << "; try --placement tiered or shorter reads";
        else s << "; reduce read length";
        throw PimError(ErrorCode::Unalignable, s.str());
    };
    lp.pair_slot_bytes = kernel::pair_record_bytes(ds.max_m, ds.max_n);
    lp.result_slot_bytes = kernel::result_record_bytes(kernel::max_runs_any(ds.max_m, ds.max_n));
    if (by_wram == 0) unalignable("WRAM budget exceeded even with one thread");
    if (align_up(lp.footprint.mram + lp.pair_slot_bytes + lp.result_slot_bytes, cfg.dma_alignment) > cfg.mram_bytes)
        unalignable("MRAM capacity exceeded even with one thread and one pair");

    lp.wram_limited_threads = static_cast<std::uint32_t>(std::min<std::uint64_t>(cfg.threads_per_dpu_max, by_wram));
    lp.dpus_used = static_cast<std::uint32_t>(std::min<std::uint64_t>(cfg.num_dpus, ds.count));

    std::uint32_t t = lp.wram_limited_threads;
    for (; t >= 1; --t) {
        const std::uint64_t per = detail::pairs_on_busiest_thread(ds.count, lp.dpus_used, t);
        const std::uint64_t slice =
            align_up(per * (lp.pair_slot_bytes + lp.result_slot_bytes) + lp.footprint.mram, cfg.dma_alignment);
        if (slice * t <= cfg.mram_bytes) {
            lp.per_thread_mram_slice = slice;
            break;
        }
    }
    if (t == 0) {
        const std::uint64_t per_pair = lp.pair_slot_bytes + lp.result_slot_bytes;
        const std::uint64_t fit = cfg.mram_bytes > lp.footprint.mram ? (cfg.mram_bytes - lp.footprint.mram) / per_pair : 0;
        throw PimError(ErrorCode::DatasetTooLarge,
                       "dataset does not fit the MRAM banks; split it into batches of at most " +
                           std::to_string(fit * lp.dpus_used) + " pairs");
    }
    lp.threads_per_dpu = t;
    lp.per_thread_wram_budget = align_down(usable / t, cfg.dma_alignment);

    const std::uint64_t per = detail::pairs_on_busiest_thread(ds.count, lp.dpus_used, t);
    const std::uint64_t slots = std::min<std::uint64_t>(std::uint64_t{lp.dpus_used} * t, ds.count);
    lp.threads.resize(slots);
    for (std::uint64_t slot = 0; slot < slots; ++slot) {
        auto& a = lp.threads[slot];
        a.layout.dpu = static_cast<std::uint32_t>(slot % lp.dpus_used);
        a.layout.thread = static_cast<std::uint32_t>(slot / lp.dpus_used);
        a.layout.wram_budget = lp.per_thread_wram_budget;
        a.layout.window = {std::uint64_t{a.layout.thread} * lp.per_thread_mram_slice, lp.per_thread_mram_slice};
        a.input = a.layout.window.sub(0, per * lp.pair_slot_bytes);
        a.results = a.layout.window.sub(per * lp.pair_slot_bytes, per * lp.result_slot_bytes);
        const std::uint64_t io = per * (lp.pair_slot_bytes + lp.result_slot_bytes);
        a.layout.scratch = a.layout.window.sub(io, lp.per_thread_mram_slice - io);
    }
    // Slot s = (thread, dpu) in thread-major order, matching pair i's (i / D mod T, i mod D).
    for (std::uint64_t i = 0; i < ds.count; ++i) {
        const std::uint64_t slot = i % (std::uint64_t{lp.dpus_used} * t);
        lp.threads[slot].pairs.push_back(i);
    }
    return lp;
}

struct RunOptions {
    unsigned host_threads = 1;
    bool verify_trace = true;  // cross-check counters against the DMA trace
};

struct RunAudit {
    std::uint64_t dma_violations = 0;
    std::uint64_t arena_violations = 0;  // arena peak above its budget
    std::uint64_t trace_mismatches = 0;  // counters disagreeing with the trace sums
    std::uint64_t window_violations = 0; // scratch use beyond the thread's slice

    bool clean() const { return !dma_violations && !arena_violations && !trace_mismatches && !window_violations; }
};

struct RunResult {
    LaunchPlan plan;
    std::vector<PairOutcome> outcomes;  // input order
    CostReport cost;
    std::uint64_t transfer_in_bytes = 0;
    std::uint64_t transfer_out_bytes = 0;
    RunAudit audit;

    std::vector<seqio::ResultRecord> records(bool with_counters = false) const {
        std::vector<seqio::ResultRecord> out;
        out.reserve(outcomes.size());
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            const auto& o = outcomes[i];
            seqio::ResultRecord r;
            r.index = i;
            r.status = o.status;
            r.error = o.error;
            r.score = o.alignment.score;
            r.cigar = o.alignment.cigar;
            if (with_counters) r.counters = o.alignment.cost;
            out.push_back(std::move(r));
        }
        return out;
    }

    bool all_ok() const {
        return std::all_of(outcomes.begin(), outcomes.end(),
                           [](const PairOutcome& o) { return o.status != PairStatus::Error; });
    }
};

namespace detail {

struct ThreadOutput {
    ThreadCost cost;
    RunAudit audit;
    std::uint64_t in_bytes = 0;
    std::uint64_t out_bytes = 0;
};

/// Writes an error result record in place of the kernel's.
inline WramBlock error_record(ThreadContext& ctx, ErrorCode code) {
    const WramBlock b = kernel::wram_alloc(ctx, kernel::kResultHeaderBytes, "result buffer");
    auto h = ctx.arena().view<std::int32_t>(b);
    h[0] = static_cast<std::int32_t>(code);
    h[1] = static_cast<std::int32_t>(kernel::pack_status(kernel::ResultStatus::Error, 0));
    ctx.touch(2);
    return b;
}

inline ThreadOutput run_thread(const LaunchPlan& lp, const ThreadAssignment& a, const std::vector<SequencePair>& pairs,
                               const PimConfig& cfg, bool verify_trace, std::vector<PairOutcome>& outcomes,
                               std::vector<std::string>& messages) {
    ThreadOutput out;
    ThreadContext ctx(cfg, a.layout);
    ctx.enable_trace(verify_trace);

    // Host scatter.
    std::vector<std::byte> buf;
    for (std::size_t slot = 0; slot < a.pairs.size(); ++slot) {
        const auto& p = pairs[a.pairs[slot]];
        const std::uint64_t bytes = kernel::pair_record_bytes(p.pattern.size(), p.text.size());
        buf.assign(bytes, std::byte{0});
        kernel::encode_pair_record(p, buf.data());
        ctx.host_write(a.input.offset + slot * lp.pair_slot_bytes, buf);
        out.in_bytes += bytes;
    }

    // DPU side: fetch, align, write back, pair by pair.
    std::vector<std::uint64_t> result_bytes(a.pairs.size());
    std::vector<CostCounters> pair_cost(a.pairs.size());
    for (std::size_t slot = 0; slot < a.pairs.size(); ++slot) {
        const auto& p = pairs[a.pairs[slot]];
        const auto before = ctx.counters();
        ctx.arena().reset();
        ctx.mram_reset();
        WramBlock result;
        try {
            kernel::WramPair wp;
            wp.m = static_cast<std::uint32_t>(p.pattern.size());
            wp.n = static_cast<std::uint32_t>(p.text.size());
            if (wp.m == 0 || wp.n == 0) throw PimError(ErrorCode::InvalidArgument, "empty sequence");
            const std::uint64_t bytes = kernel::pair_record_bytes(wp.m, wp.n);
            wp.block = kernel::wram_alloc(ctx, bytes, "sequence pair");
            ctx.dma_read_chunked(a.input.sub(slot * lp.pair_slot_bytes, bytes), wp.block);
            result = run_kernel(ctx, wp, lp.params);
        } catch (const PimError& e) {
            messages[a.pairs[slot]] = e.what();
            ctx.arena().reset();
            result = error_record(ctx, e.code());
        }
        const std::uint64_t used = kernel::result_record_used_bytes(ctx.arena().bytes(result));
        ctx.dma_write_chunked(result.sub(0, static_cast<std::uint32_t>(used)),
                              a.results.sub(slot * lp.result_slot_bytes, used));
        result_bytes[slot] = used;
        pair_cost[slot] = ctx.counters() - before;
    }

    // Host gather.
    for (std::size_t slot = 0; slot < a.pairs.size(); ++slot) {
        buf.assign(result_bytes[slot], std::byte{0});
        ctx.host_read(a.results.offset + slot * lp.result_slot_bytes, buf);
        out.out_bytes += buf.size();
        const auto decoded = kernel::decode_result_record(buf.data());
        PairOutcome& o = outcomes[a.pairs[slot]];
        o.alignment.cost = pair_cost[slot];
        switch (decoded.status) {
            case kernel::ResultStatus::Ok:
                o.status = PairStatus::Aligned;
                o.alignment.score = decoded.score;
                o.alignment.cigar = decoded.cigar;
                break;
            case kernel::ResultStatus::Filtered: o.status = PairStatus::Filtered; break;
            case kernel::ResultStatus::Error:
                o.status = PairStatus::Error;
                o.error = static_cast<ErrorCode>(decoded.score);
                o.message = messages[a.pairs[slot]];
                break;
        }
    }

    out.cost.dpu = a.layout.dpu;
    out.cost.thread = a.layout.thread;
    out.cost.pairs = a.pairs.size();
    out.cost.peak_wram = ctx.arena().peak();
    out.cost.peak_mram_scratch = ctx.mram_scratch_peak();
    out.cost.counters = ctx.counters();
    out.audit.dma_violations = ctx.audit().dma_violations;
    out.audit.arena_violations = ctx.audit().arena_violations + (ctx.arena().peak() > lp.per_thread_wram_budget ? 1 : 0);
    out.audit.window_violations = ctx.mram_scratch_peak() > a.layout.scratch.length ? 1 : 0;
    if (verify_trace) {
        CostCounters replay;
        for (const auto& t : ctx.trace()) {
            replay.dma_transfers += 1;
            (t.dir == TransferDir::Read ? replay.mram_read_bytes : replay.mram_write_bytes) += t.size;
            if (t.size == 0 || t.size % cfg.dma_alignment != 0 || t.size > cfg.dma_max_transfer ||
                t.mram_offset % cfg.dma_alignment != 0 || t.wram_offset % cfg.dma_alignment != 0 ||
                !a.layout.window.contains({t.mram_offset, t.size}))
                ++out.audit.dma_violations;
        }
        replay.wram_accesses = ctx.counters().wram_accesses;
        replay.estimated_cycles = cycles_from_totals(replay, cfg);
        const auto& c = ctx.counters();
        if (replay.dma_transfers != c.dma_transfers || replay.mram_read_bytes != c.mram_read_bytes ||
            replay.mram_write_bytes != c.mram_write_bytes || std::abs(replay.estimated_cycles - c.estimated_cycles) > 1e-6 * (1 + c.estimated_cycles))
            ++out.audit.trace_mismatches;
    }
    return out;
}

}  // namespace detail

/// Executes a plan. Each simulated thread runs in its own context; the host
/// pool only changes how many run at once, never the results.
inline RunResult run(const LaunchPlan& lp, const std::vector<SequencePair>& pairs, const PimConfig& cfg,
                     const RunOptions& opts = {}) {
    RunResult rr;
    rr.plan = lp;
    if (pairs.empty()) return rr;
    if (pairs.size() != lp.dataset.count)
        throw PimError(ErrorCode::InvalidArgument, "plan was made for " + std::to_string(lp.dataset.count) +
                                                       " pairs, got " + std::to_string(pairs.size()));
    if (lp.threads_per_dpu > cfg.threads_per_dpu_max || lp.dpus_used > cfg.num_dpus ||
        lp.per_thread_mram_slice * lp.threads_per_dpu > cfg.mram_bytes)
        throw PimError(ErrorCode::ConfigError, "plan does not match the machine configuration");
    for (const auto& p : pairs)
        if (p.pattern.size() > lp.dataset.max_m || p.text.size() > lp.dataset.max_n)
            throw PimError(ErrorCode::InvalidArgument, "pair longer than the planned maximum");

    rr.outcomes.resize(pairs.size());
    std::vector<std::string> messages(pairs.size());
    std::vector<detail::ThreadOutput> outputs(lp.threads.size());
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t i = next++; i < lp.threads.size(); i = next++) {
            try {
                outputs[i] = detail::run_thread(lp, lp.threads[i], pairs, cfg, opts.verify_trace, rr.outcomes, messages);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(opts.host_threads, static_cast<unsigned>(lp.threads.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<ThreadCost> costs;
    costs.reserve(outputs.size());
    for (const auto& o : outputs) {
        costs.push_back(o.cost);
        rr.transfer_in_bytes += o.in_bytes;
        rr.transfer_out_bytes += o.out_bytes;
        rr.audit.dma_violations += o.audit.dma_violations;
        rr.audit.arena_violations += o.audit.arena_violations;
        rr.audit.trace_mismatches += o.audit.trace_mismatches;
        rr.audit.window_violations += o.audit.window_violations;
    }
    rr.cost = cost_report(costs);
    return rr;
}

/// Convenience: summary, plan and run in one call.
inline RunResult align_all(const std::vector<SequencePair>& pairs, const AlignParams& params, const PimConfig& cfg,
                           double error_rate = 0.10, const RunOptions& opts = {}) {
    if (pairs.empty()) {
        RunResult rr;
        rr.plan.params = params;
        return rr;
    }
    return run(plan(DatasetSummary::of(pairs, error_rate), params, cfg), pairs, cfg, opts);
}

// Reports

inline std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

inline void write_plan_text(std::ostream& out, const LaunchPlan& lp, const PimConfig& cfg) {
    out << "algorithm            " << to_string(lp.params.algorithm) << '\n'
        << "placement            " << to_string(lp.params.placement) << '\n'
        << "pairs                " << lp.dataset.count << '\n'
        << "max pattern length   " << lp.dataset.max_m << '\n'
        << "max text length      " << lp.dataset.max_n << '\n'
        << "error bound          " << fixed(lp.dataset.error_rate, 4) << '\n'
        << "footprint WRAM       " << lp.footprint.wram << " B per thread\n"
        << "footprint MRAM       " << lp.footprint.mram << " B per thread\n"
        << "table term           " << lp.footprint.table_term << " B\n"
        << "usable WRAM          " << cfg.usable_wram() << " B (" << cfg.wram_bytes << " - " << cfg.wram_reserve_bytes
        << " reserve)\n"
        << "threads/DPU (WRAM)   " << lp.wram_limited_threads << '\n'
        << "threads/DPU          " << lp.threads_per_dpu << '\n'
        << "DPUs used            " << lp.dpus_used << " of " << cfg.num_dpus << '\n'
        << "WRAM budget          " << lp.per_thread_wram_budget << " B per thread\n"
        << "MRAM slice           " << lp.per_thread_mram_slice << " B per thread (pair slots " << lp.pair_slot_bytes
        << " B, result slots " << lp.result_slot_bytes << " B, scratch " << lp.footprint.mram << " B)\n";
}

inline const char* plan_csv_header() {
    return "algorithm,placement,pairs,max_m,max_n,error_bound,footprint_wram,footprint_mram,table_term,"
           "threads_per_dpu,dpus_used,wram_budget,mram_slice";
}

inline std::string plan_csv_row(const LaunchPlan& lp) {
    std::ostringstream s;
    s << to_string(lp.params.algorithm) << ',' << to_string(lp.params.placement) << ',' << lp.dataset.count << ','
      << lp.dataset.max_m << ',' << lp.dataset.max_n << ',' << fixed(lp.dataset.error_rate, 4) << ','
      << lp.footprint.wram << ',' << lp.footprint.mram << ',' << lp.footprint.table_term << ',' << lp.threads_per_dpu
      << ',' << lp.dpus_used << ',' << lp.per_thread_wram_budget << ',' << lp.per_thread_mram_slice;
    return s.str();
}

/// Alignments per second implied by the model's makespan and clock; an
/// estimate, not a measurement.
inline double model_alignments_per_second(const RunResult& rr, const PimConfig& cfg) {
    if (rr.cost.makespan_cycles <= 0) return 0;
    return static_cast<double>(rr.outcomes.size()) / (rr.cost.makespan_cycles / cfg.dpu_frequency_hz);
}

inline void write_cost_text(std::ostream& out, const RunResult& rr, const PimConfig& cfg) {
    std::uint64_t aligned = 0, filtered = 0, errors = 0;
    for (const auto& o : rr.outcomes) {
        if (o.status == PairStatus::Aligned) ++aligned;
        else if (o.status == PairStatus::Filtered) ++filtered;
        else ++errors;
    }
    const auto& t = rr.cost.total;
    out << "pairs                " << rr.outcomes.size() << " (aligned " << aligned << ", filtered " << filtered
        << ", errors " << errors << ")\n"
        << "threads/DPU          " << rr.plan.threads_per_dpu << '\n'
        << "peak WRAM per thread " << rr.cost.max_peak_wram << " B\n"
        << "MRAM bytes read      " << t.mram_read_bytes << '\n'
        << "MRAM bytes written   " << t.mram_write_bytes << '\n'
        << "DMA transfers        " << t.dma_transfers << '\n'
        << "WRAM accesses        " << t.wram_accesses << '\n'
        << "host -> MRAM bytes   " << rr.transfer_in_bytes << '\n'
        << "MRAM -> host bytes   " << rr.transfer_out_bytes << '\n'
        << "makespan             " << fixed(rr.cost.makespan_cycles, 1) << " cycles (model estimate)\n"
        << "alignments/second    " << fixed(model_alignments_per_second(rr, cfg), 1) << " (model estimate at "
        << fixed(cfg.dpu_frequency_hz / 1e6, 1) << " MHz)\n"
        << "machine audit        " << (rr.audit.clean() ? "clean" : "VIOLATIONS") << '\n'
        << "note: a DPU's threads are modelled as hiding each other's latency, so makespan is the slowest thread\n";
}

inline const char* cost_csv_header() {
    return "dpu,thread,pairs,peak_wram,peak_mram_scratch,wram_accesses,mram_read_bytes,mram_write_bytes,"
           "dma_transfers,estimated_cycles";
}

inline void write_cost_csv(std::ostream& out, const RunResult& rr) {
    out << cost_csv_header() << '\n';
    for (const auto& t : rr.cost.threads) {
        out << t.dpu << ',' << t.thread << ',' << t.pairs << ',' << t.peak_wram << ',' << t.peak_mram_scratch << ','
            << t.counters.wram_accesses << ',' << t.counters.mram_read_bytes << ',' << t.counters.mram_write_bytes << ','
            << t.counters.dma_transfers << ',' << fixed(t.counters.estimated_cycles, 1) << '\n';
    }
    const auto& c = rr.cost.total;
    out << "total,,," << rr.cost.max_peak_wram << ",," << c.wram_accesses << ',' << c.mram_read_bytes << ','
        << c.mram_write_bytes << ',' << c.dma_transfers << ',' << fixed(rr.cost.makespan_cycles, 1) << '\n';
}

}  // namespace pimalign
