#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "pimalign/config.hpp"
#include "pimalign/machine.hpp"

using namespace pimalign;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const PimError& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a PimError";
    return ErrorCode::IoError;
}

ThreadContext whole_dpu(const PimConfig& cfg) { return ThreadContext(cfg, ThreadLayout::single_thread(cfg)); }

}  // namespace

TEST(Arena, AllocRoundsToAlignment) {
    WramArena a(0, 65536, 8);
    const auto b = a.alloc(1);
    EXPECT_EQ(b.offset, 0u);
    EXPECT_EQ(b.size, 8u);
    EXPECT_EQ(a.watermark(), 8u);
}

TEST(Arena, OneNwTableFitsTwoDoNot) {
    WramArena a(0, 65536, 8);
    EXPECT_NO_THROW(a.alloc(61250));
    EXPECT_EQ(code_of([&] { a.alloc(61250); }), ErrorCode::CapacityExceeded);
}

TEST(Arena, ExactFitBoundary) {
    WramArena a(0, 65536, 8);
    EXPECT_NO_THROW(a.alloc(65536));
    EXPECT_EQ(code_of([&] { a.alloc(1); }), ErrorCode::CapacityExceeded);
}

TEST(Arena, ZeroSizeRejected) {
    WramArena a(0, 1024, 8);
    EXPECT_EQ(code_of([&] { a.alloc(0); }), ErrorCode::InvalidArgument);
}

TEST(Arena, ResetKeepsPeak) {
    WramArena a(0, 65536, 8);
    a.alloc(4096);
    a.reset();
    EXPECT_EQ(a.watermark(), 0u);
    EXPECT_GE(a.peak(), 4096u);
}

TEST(Arena, ResetOnFreshArenaIsIdempotent) {
    WramArena a(0, 65536, 8);
    a.reset();
    a.reset();
    EXPECT_EQ(a.watermark(), 0u);
    EXPECT_EQ(a.peak(), 0u);
}

TEST(Arena, ReuseAfterReset) {
    WramArena a(0, 65536, 8);
    EXPECT_EQ(a.alloc(100).offset, 0u);
    a.reset();
    EXPECT_EQ(a.alloc(100).offset, 0u);
}

TEST(Arena, BlocksAlignedAndDisjoint) {
    WramArena a(0, 65536, 8);
    std::uint64_t prev_end = 0;
    for (std::uint64_t size : {3, 17, 8, 1, 250, 64}) {
        const auto b = a.alloc(size);
        EXPECT_EQ(b.offset % 8, 0u);
        EXPECT_GE(b.offset, prev_end);
        prev_end = b.offset + b.size;
    }
}

TEST(Arena, RewindToMark) {
    WramArena a(0, 1024, 8);
    a.alloc(16);
    const auto m = a.mark();
    a.alloc(512);
    a.rewind(m);
    EXPECT_EQ(a.watermark(), 16u);
    EXPECT_EQ(a.peak(), 528u);
}

TEST(Dma, ReadCostFormula) {
    PimConfig cfg;
    auto ctx = whole_dpu(cfg);
    const auto blk = ctx.arena().alloc(8);
    ctx.dma_read({0, 8}, blk);
    EXPECT_EQ(ctx.counters().dma_transfers, 1u);
    EXPECT_EQ(ctx.counters().mram_read_bytes, 8u);
    EXPECT_DOUBLE_EQ(ctx.counters().estimated_cycles, 81.0);
}

TEST(Dma, OversizeRead) {
    PimConfig cfg;
    auto ctx = whole_dpu(cfg);
    const auto blk = ctx.arena().alloc(4096);
    EXPECT_EQ(code_of([&] { ctx.dma_read({0, 2056}, blk); }), ErrorCode::OversizeTransfer);
    EXPECT_EQ(ctx.counters().dma_transfers, 0u);
}

TEST(Dma, MisalignedSizeAndOffset) {
    PimConfig cfg;
    auto ctx = whole_dpu(cfg);
    const auto blk = ctx.arena().alloc(64);
    EXPECT_EQ(code_of([&] { ctx.dma_read({0, 12}, blk); }), ErrorCode::MisalignedTransfer);
    EXPECT_EQ(code_of([&] { ctx.dma_read({4, 8}, blk); }), ErrorCode::MisalignedTransfer);
    EXPECT_EQ(ctx.audit().dma_violations, 2u);
}

TEST(Dma, WriteCostFormula) {
    PimConfig cfg;
    auto ctx = whole_dpu(cfg);
    const auto blk = ctx.arena().alloc(64);
    ctx.dma_write(blk, {0, 64});
    EXPECT_EQ(ctx.counters().dma_transfers, 1u);
    EXPECT_EQ(ctx.counters().mram_write_bytes, 64u);
    EXPECT_DOUBLE_EQ(ctx.counters().estimated_cycles, 77.0 + 32.0);
}

TEST(Dma, WritePastBankEnd) {
    PimConfig cfg;
    auto ctx = whole_dpu(cfg);
    const auto blk = ctx.arena().alloc(64);
    EXPECT_EQ(code_of([&] { ctx.dma_write(blk, {cfg.mram_bytes - 8, 64}); }), ErrorCode::OutOfBounds);
}

TEST(Dma, WritesAreAdditive) {
    PimConfig cfg;
    auto ctx = whole_dpu(cfg);
    const auto blk = ctx.arena().alloc(8);
    ctx.dma_write(blk, {0, 8});
    ctx.dma_write(blk, {8, 8});
    EXPECT_EQ(ctx.counters().dma_transfers, 2u);
    EXPECT_EQ(ctx.counters().mram_write_bytes, 16u);
}

TEST(Dma, RoundTripCopiesBytes) {
    PimConfig cfg;
    auto ctx = whole_dpu(cfg);
    const auto src = ctx.arena().alloc(16);
    const auto dst = ctx.arena().alloc(16);
    auto s = ctx.arena().view<std::uint64_t>(src);
    s[0] = 0x0123456789abcdefull;
    s[1] = 42;
    ctx.dma_write(src, {1024, 16});
    ctx.dma_read({1024, 16}, dst);
    auto d = ctx.arena().view<std::uint64_t>(dst);
    EXPECT_EQ(d[0], s[0]);
    EXPECT_EQ(d[1], 42u);
}

TEST(Dma, WindowIsEnforced) {
    PimConfig cfg;
    ThreadLayout l;
    l.wram_budget = 1024;
    l.window = {4096, 4096};
    l.scratch = l.window;
    ThreadContext ctx(cfg, l);
    const auto blk = ctx.arena().alloc(8);
    EXPECT_EQ(code_of([&] { ctx.dma_read({0, 8}, blk); }), ErrorCode::OutOfBounds);
    EXPECT_NO_THROW(ctx.dma_read({4096, 8}, blk));
}

TEST(Dma, ChunkedSplitsAtMaxTransfer) {
    PimConfig cfg;
    auto ctx = whole_dpu(cfg);
    const auto blk = ctx.arena().alloc(5000);
    ctx.dma_write_chunked(blk, {0, 5000});
    EXPECT_EQ(ctx.counters().dma_transfers, 3u);
    EXPECT_EQ(ctx.counters().mram_write_bytes, 5000u);
}

TEST(Dma, CountersMatchTrace) {
    PimConfig cfg;
    auto ctx = whole_dpu(cfg);
    ctx.enable_trace(true);
    const auto blk = ctx.arena().alloc(256);
    ctx.dma_write(blk, {0, 256});
    ctx.dma_read({0, 64}, blk);
    ctx.touch(10);
    std::uint64_t sum = 0;
    for (const auto& t : ctx.trace()) sum += t.size;
    EXPECT_EQ(sum, ctx.counters().mram_bytes_moved());
    EXPECT_EQ(ctx.trace().size(), ctx.counters().dma_transfers);
    EXPECT_DOUBLE_EQ(cycles_from_totals(ctx.counters(), cfg), ctx.counters().estimated_cycles);
}

TEST(Dma, ReplayIsDeterministic) {
    PimConfig cfg;
    auto once = [&] {
        auto ctx = whole_dpu(cfg);
        const auto blk = ctx.arena().alloc(128);
        for (int i = 0; i < 5; ++i) ctx.dma_write(blk, {static_cast<std::uint64_t>(i) * 128, 128});
        ctx.touch(77);
        return ctx.counters();
    };
    EXPECT_EQ(once(), once());
}

TEST(MramAlloc, BumpsWithinScratch) {
    PimConfig cfg;
    ThreadLayout l;
    l.wram_budget = 1024;
    l.window = {0, 1024};
    l.scratch = {512, 512};
    ThreadContext ctx(cfg, l);
    EXPECT_EQ(ctx.mram_alloc(10).offset, 512u);
    EXPECT_EQ(ctx.mram_alloc(8).offset, 528u);
    EXPECT_EQ(code_of([&] { ctx.mram_alloc(1024); }), ErrorCode::CapacityExceeded);
    ctx.mram_reset();
    EXPECT_EQ(ctx.mram_alloc(8).offset, 512u);
}

TEST(CostReport, SingleThread) {
    ThreadCost t;
    t.counters.estimated_cycles = 1000;
    const std::array<ThreadCost, 1> ts{t};
    EXPECT_DOUBLE_EQ(cost_report(ts).makespan_cycles, 1000);
}

TEST(CostReport, MaxOverDpus) {
    ThreadCost a, b, c;
    a.dpu = 0;
    a.counters.estimated_cycles = 1000;
    b.dpu = 1;
    b.counters.estimated_cycles = 1500;
    c.dpu = 1;
    c.thread = 1;
    c.counters.estimated_cycles = 700;
    const std::array<ThreadCost, 3> ts{a, b, c};
    const auto r = cost_report(ts);
    EXPECT_DOUBLE_EQ(r.makespan_cycles, 1500);
    ASSERT_EQ(r.dpus.size(), 2u);
    EXPECT_DOUBLE_EQ(r.dpus[1].total.estimated_cycles, 2200);
}

TEST(CostReport, EmptyRun) {
    const auto r = cost_report({});
    EXPECT_DOUBLE_EQ(r.makespan_cycles, 0);
    EXPECT_EQ(r.total, CostCounters{});
}

TEST(Config, DefaultsAreValid) {
    PimConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.usable_wram(), 65536u - 2048u);
}

TEST(Config, RejectsBadGeometry) {
    PimConfig cfg;
    cfg.threads_per_dpu_max = 25;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::ConfigError);
    cfg = {};
    cfg.dma_alignment = 12;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::ConfigError);
    cfg = {};
    cfg.dma_max_transfer = 2044;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::ConfigError);
}

TEST(Config, KeyValueText) {
    PimConfig cfg;
    cfg.load_text("# machine\nnum_dpus = 64\nwram_bytes=32768  # half\ndma_per_byte_cycles=0.25\n");
    EXPECT_EQ(cfg.num_dpus, 64u);
    EXPECT_EQ(cfg.wram_bytes, 32768u);
    EXPECT_DOUBLE_EQ(cfg.dma_per_byte_cycles, 0.25);
}

TEST(Config, JsonText) {
    PimConfig cfg;
    cfg.load_text(R"({"num_dpus": 8, "dpu_frequency_hz": 350e6})");
    EXPECT_EQ(cfg.num_dpus, 8u);
    EXPECT_DOUBLE_EQ(cfg.dpu_frequency_hz, 350e6);
}

TEST(Config, UnknownKeyAndBadValue) {
    PimConfig cfg;
    EXPECT_EQ(code_of([&] { cfg.load_text("num_dpu=3\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] { cfg.set("num_dpus", "-3"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] { cfg.set("num_dpus", "3x"); }), ErrorCode::ConfigError);
}

TEST(Config, FromFile) {
    const std::string path = ::testing::TempDir() + "machine.cfg";
    {
        std::ofstream out(path);
        out << "threads_per_dpu_max=16\n";
    }
    EXPECT_EQ(PimConfig::from_file(path).threads_per_dpu_max, 16u);
    std::remove(path.c_str());
    EXPECT_EQ(code_of([&] { PimConfig::from_file(path); }), ErrorCode::IoError);
}
