#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <limits>
#include <vector>

#include "../params.hpp"
#include "common.hpp"

namespace pimalign::kernel {

// Gap-affine wavefront alignment. Offsets are text positions h along diagonal
// k = h - v (v = pattern position). For score s:
//   I_s[k] = max(M_{s-o-e}[k-1], I_{s-e}[k-1]) + 1
//   D_s[k] = max(M_{s-o-e}[k+1], D_{s-e}[k+1])
//   M_s[k] = max(M_{s-x}[k] + 1, I_s[k], D_s[k]), then extended along matches.
// Alignment ends when M_s[n-m] reaches n.

namespace wf {

inline constexpr std::int32_t kNull = std::numeric_limits<std::int32_t>::min() / 4;
inline constexpr std::uint32_t kNoWavefront = 0xFFFFFFFFu;
inline constexpr std::uint32_t kDirectoryChunk = 64;
inline constexpr std::uint32_t kHeaderBytes = 16;

enum Component : std::uint32_t { M = 0, I = 1, D = 2 };
inline constexpr std::uint32_t kPresentM = 1, kPresentI = 2, kPresentD = 4;

/// Wavefront record: header {lo, hi, base_lo, width<<3 | present} followed by
/// the M, I and D offset arrays, each `width` (even) int32 entries from base_lo.
struct Header {
    std::int32_t lo = 0;
    std::int32_t hi = -1;
    std::int32_t base_lo = 0;
    std::uint32_t width = 0;
    std::uint32_t present = 0;

    bool has(Component c) const { return (present >> c) & 1u; }
    std::uint32_t packed() const { return (width << 3) | present; }
    static Header unpack(const std::int32_t* raw) {
        Header h;
        h.lo = raw[0];
        h.hi = raw[1];
        h.base_lo = raw[2];
        const auto p = static_cast<std::uint32_t>(raw[3]);
        h.width = p >> 3;
        h.present = p & 7u;
        return h;
    }
};

inline std::uint32_t padded_width(std::int64_t lo, std::int64_t hi) {
    return static_cast<std::uint32_t>(align_up(static_cast<std::uint64_t>(hi - lo + 1), 2));
}

inline std::uint64_t record_bytes(std::uint32_t width) { return kHeaderBytes + 3ull * width * 4; }

/// Read-only view of one component over [lo, hi].
struct ComponentView {
    std::int32_t lo = 0;
    std::int32_t hi = -1;
    std::int32_t base_lo = 0;
    const std::int32_t* data = nullptr;

    std::int32_t operator[](std::int64_t k) const {
        if (!data || k < lo || k > hi) return kNull;
        return data[k - base_lo];
    }
    bool present() const { return data != nullptr; }
};

/// Score-indexed table of record addresses, kept in WRAM in fixed chunks.
class Directory {
public:
    explicit Directory(ThreadContext& ctx) : ctx_(&ctx) {}

    std::uint32_t get(std::int64_t s) {
        if (s < 0) return kNoWavefront;
        const auto chunk = static_cast<std::size_t>(s / kDirectoryChunk);
        if (chunk >= chunks_.size()) return kNoWavefront;
        ctx_->touch(1);
        return ctx_->arena().view<std::uint32_t>(chunks_[chunk])[s % kDirectoryChunk];
    }

    void set(std::int64_t s, std::uint32_t address) {
        const auto chunk = static_cast<std::size_t>(s / kDirectoryChunk);
        while (chunks_.size() <= chunk) {
            const WramBlock b = wram_alloc(*ctx_, kDirectoryChunk * 4, "wavefront address table");
            auto v = ctx_->arena().view<std::uint32_t>(b);
            std::fill(v.begin(), v.end(), kNoWavefront);
            ctx_->touch(kDirectoryChunk);
            chunks_.push_back(b);
        }
        ctx_->arena().view<std::uint32_t>(chunks_[chunk])[s % kDirectoryChunk] = address;
        ctx_->touch(1);
    }

private:
    ThreadContext* ctx_;
    std::vector<WramBlock> chunks_;
};

/// All wavefronts in WRAM.
class ScratchpadStore {
public:
    explicit ScratchpadStore(ThreadContext& ctx) : ctx_(&ctx), dir_(ctx) {}

    struct Step {};
    Step begin_step() { return {}; }
    void end_step(Step) {}

    Header header(std::int64_t s) {
        const auto addr = dir_.get(s);
        if (addr == kNoWavefront) return {};
        ctx_->touch(4);
        return Header::unpack(raw(addr));
    }

    ComponentView component(std::int64_t s, Component c, Step) {
        const auto addr = dir_.get(s);
        if (addr == kNoWavefront) return {};
        const Header h = Header::unpack(raw(addr));
        if (!h.has(c)) return {};
        return {h.lo, h.hi, h.base_lo, raw(addr) + kHeaderBytes / 4 + c * h.width};
    }

    /// Storage for the wavefront being computed; `data` has 3 * width entries.
    std::int32_t* create(std::int64_t, std::int32_t lo, std::int32_t hi, Step) {
        const std::uint32_t width = padded_width(lo, hi);
        pending_ = wram_alloc(*ctx_, record_bytes(width), "wavefront components");
        return raw(pending_.offset) + kHeaderBytes / 4;
    }

    void commit(std::int64_t s, const Header& h) {
        write_header(raw(pending_.offset), h);
        ctx_->touch(4);
        dir_.set(s, pending_.offset);
    }

    std::int32_t offset_at(std::int64_t s, Component c, std::int64_t k) {
        const auto addr = dir_.get(s);
        if (addr == kNoWavefront) return kNull;
        const Header h = Header::unpack(raw(addr));
        ctx_->touch(2);
        if (!h.has(c) || k < h.lo || k > h.hi) return kNull;
        return raw(addr)[kHeaderBytes / 4 + c * h.width + (k - h.base_lo)];
    }

private:
    static void write_header(std::int32_t* out, const Header& h) {
        out[0] = h.lo;
        out[1] = h.hi;
        out[2] = h.base_lo;
        out[3] = static_cast<std::int32_t>(h.packed());
    }
    std::int32_t* raw(std::uint32_t addr) {
        return reinterpret_cast<std::int32_t*>(ctx_->arena().bytes(WramBlock{addr, 0}));
    }

    ThreadContext* ctx_;
    Directory dir_;
    WramBlock pending_;
};

/// Wavefront records in MRAM; WRAM keeps the address table plus whatever a
/// single step needs, released when the step ends.
class TieredStore {
public:
    explicit TieredStore(ThreadContext& ctx) : ctx_(&ctx), dir_(ctx), cache_(ctx) {}

    struct Step {
        WramArena::Mark mark;
    };
    Step begin_step() { return {ctx_->arena().mark()}; }
    void end_step(Step st) { ctx_->arena().rewind(st.mark); }

    Header header(std::int64_t s) {
        const auto addr = dir_.get(s);
        if (addr == kNoWavefront) return {};
        return load_header(addr);
    }

    ComponentView component(std::int64_t s, Component c, Step) {
        const auto addr = dir_.get(s);
        if (addr == kNoWavefront) return {};
        const Header h = load_header(addr);
        if (!h.has(c)) return {};
        const std::uint64_t bytes = std::uint64_t{h.width} * 4;
        const WramBlock buf = wram_alloc(*ctx_, bytes, "wavefront staging");
        ctx_->dma_read_chunked({scratch_base() + addr + kHeaderBytes + c * bytes, bytes}, buf);
        return {h.lo, h.hi, h.base_lo, ctx_->arena().view<std::int32_t>(buf).data()};
    }

    std::int32_t* create(std::int64_t, std::int32_t lo, std::int32_t hi, Step) {
        const std::uint32_t width = padded_width(lo, hi);
        pending_ = wram_alloc(*ctx_, record_bytes(width), "wavefront staging");
        return ctx_->arena().view<std::int32_t>(pending_).data() + kHeaderBytes / 4;
    }

    void commit(std::int64_t s, const Header& h) {
        auto raw = ctx_->arena().view<std::int32_t>(pending_);
        raw[0] = h.lo;
        raw[1] = h.hi;
        raw[2] = h.base_lo;
        raw[3] = static_cast<std::int32_t>(h.packed());
        ctx_->touch(4);
        const MramRegion dst = mram_alloc(*ctx_, pending_.size, "wavefront components");
        ctx_->dma_write_chunked(pending_, dst);
        const std::uint64_t rel = dst.offset - scratch_base();
        if (rel >= kNoWavefront) throw PimError(ErrorCode::BudgetExceeded, "wavefront address beyond 32 bits");
        pending_address_ = static_cast<std::uint32_t>(rel);
        pending_score_ = s;
    }

    /// Called after the step's WRAM is released, so directory chunks are
    /// never allocated inside a step.
    void publish() {
        if (pending_score_ >= 0) dir_.set(pending_score_, pending_address_);
        pending_score_ = -1;
    }

    std::int32_t offset_at(std::int64_t s, Component c, std::int64_t k) {
        const auto addr = dir_.get(s);
        if (addr == kNoWavefront) return kNull;
        const Header h = load_header(addr);
        if (!h.has(c) || k < h.lo || k > h.hi) return kNull;
        const std::uint64_t at =
            scratch_base() + addr + kHeaderBytes + (std::uint64_t{c} * h.width + static_cast<std::uint64_t>(k - h.base_lo)) * 4;
        return cache_.load<std::int32_t>(at);
    }

private:
    std::uint64_t scratch_base() const { return ctx_->layout().scratch.offset; }

    Header load_header(std::uint32_t addr) {
        if (addr == header_addr_) return header_;
        const std::uint64_t base = scratch_base() + addr;
        std::int32_t raw[4];
        const auto lohi = cache_.load<std::uint64_t>(base);
        const auto rest = cache_.load<std::uint64_t>(base + 8);
        std::memcpy(&raw[0], &lohi, 8);
        std::memcpy(&raw[2], &rest, 8);
        header_ = Header::unpack(raw);
        header_addr_ = addr;
        return header_;
    }

    ThreadContext* ctx_;
    Directory dir_;
    MramWordCache cache_;
    WramBlock pending_;
    std::uint32_t pending_address_ = 0;
    std::int64_t pending_score_ = -1;
    std::uint32_t header_addr_ = kNoWavefront;
    Header header_;
};

inline bool valid(std::int32_t h) { return h >= 0; }

/// Largest score any global alignment of m against n can need.
inline std::int64_t worst_score(std::uint32_t m, std::uint32_t n, const AffinePenalties& pen) {
    const std::int64_t common = std::min(m, n);
    const std::int64_t gap = std::int64_t{std::max(m, n)} - common;
    const std::int64_t all_gaps = 2ll * pen.gap_open + (std::int64_t{m} + n) * pen.gap_extend;
    const std::int64_t diag = common * pen.mismatch + (gap ? pen.gap_open + gap * pen.gap_extend : 0);
    return std::max(all_gaps, diag);
}

template <class Store>
inline WramBlock run(ThreadContext& ctx, const WramPair& wp, const AffinePenalties& pen,
                     const AdaptiveParams* adaptive, Store& store) {
    const std::uint32_t m = wp.m, n = wp.n;
    const auto pattern = wp.pattern(ctx);
    const auto text = wp.text(ctx);
    const std::int32_t x = pen.mismatch, o = pen.gap_open, e = pen.gap_extend;
    const std::int32_t k_end = static_cast<std::int32_t>(n) - static_cast<std::int32_t>(m);
    const std::int64_t score_limit = 4 * worst_score(m, n, pen) + 16;

    auto extend = [&](std::int32_t* mcomp, std::int32_t base_lo, std::int32_t lo, std::int32_t hi) {
        std::uint64_t work = 0;
        for (std::int32_t k = lo; k <= hi; ++k) {
            std::int32_t h = mcomp[k - base_lo];
            if (!valid(h)) continue;
            std::int64_t v = std::int64_t{h} - k;
            while (v < m && h < static_cast<std::int32_t>(n) && bases_match(pattern[v], text[h])) {
                ++h;
                ++v;
                work += 2;
            }
            mcomp[k - base_lo] = h;
            work += 2;
        }
        ctx.touch(work);
    };

    // Returns the trimmed range; pruning only looks at M, whose offsets
    // dominate I and D on every diagonal.
    auto prune = [&](const std::int32_t* mcomp, std::int32_t base_lo, std::int32_t& lo, std::int32_t& hi) {
        if (!adaptive || !adaptive->enabled) return;
        if (hi - lo + 1 <= adaptive->min_wavefront_length) return;
        std::int64_t best = std::numeric_limits<std::int64_t>::min();
        for (std::int32_t k = lo; k <= hi; ++k) {
            const std::int32_t h = mcomp[k - base_lo];
            if (valid(h)) best = std::max<std::int64_t>(best, 2ll * h - k);
        }
        ctx.touch(static_cast<std::uint64_t>(hi - lo + 1));
        auto behind = [&](std::int32_t k) {
            const std::int32_t h = mcomp[k - base_lo];
            return !valid(h) || best - (2ll * h - k) > adaptive->max_distance_threshold;
        };
        while (lo < hi && behind(lo)) ++lo;
        while (hi > lo && behind(hi)) --hi;
    };

    std::int64_t final_score = -1;
    {
        auto step = store.begin_step();
        std::int32_t* comps = store.create(0, 0, 0, step);
        const std::uint32_t width = padded_width(0, 0);
        std::fill(comps, comps + 3 * width, kNull);
        comps[M * width] = 0;
        extend(comps, 0, 0, 0);
        if (k_end == 0 && comps[M * width] >= static_cast<std::int32_t>(n)) final_score = 0;
        store.commit(0, Header{0, 0, 0, width, kPresentM});
        store.end_step(step);
        if constexpr (requires { store.publish(); }) store.publish();
    }

    for (std::int64_t s = 1; final_score < 0; ++s) {
        if (s > score_limit) throw PimError(ErrorCode::InvalidArgument, "wavefront score did not converge");
        const Header hx = store.header(s - x);
        const Header ho = store.header(s - o - e);
        const Header he = store.header(s - e);
        const bool has_mx = hx.has(M), has_mo = ho.has(M), has_ie = he.has(I), has_de = he.has(D);
        if (!has_mx && !has_mo && !has_ie && !has_de) continue;

        std::int64_t lo = std::numeric_limits<std::int64_t>::max();
        std::int64_t hi = std::numeric_limits<std::int64_t>::min();
        auto widen = [&](std::int64_t l, std::int64_t h) {
            lo = std::min(lo, l);
            hi = std::max(hi, h);
        };
        if (has_mx) widen(hx.lo, hx.hi);
        if (has_mo) widen(std::int64_t{ho.lo} - 1, std::int64_t{ho.hi} + 1);
        if (has_ie) widen(std::int64_t{he.lo} + 1, std::int64_t{he.hi} + 1);
        if (has_de) widen(std::int64_t{he.lo} - 1, std::int64_t{he.hi} - 1);
        lo = std::max<std::int64_t>(lo, -static_cast<std::int64_t>(m));
        hi = std::min<std::int64_t>(hi, n);
        if (lo > hi) continue;

        auto step = store.begin_step();
        std::int32_t* comps = nullptr;
        Header out;
        try {
            const ComponentView mx = has_mx ? store.component(s - x, M, step) : ComponentView{};
            const ComponentView mo = has_mo ? store.component(s - o - e, M, step) : ComponentView{};
            const ComponentView ie = has_ie ? store.component(s - e, I, step) : ComponentView{};
            const ComponentView de = has_de ? store.component(s - e, D, step) : ComponentView{};

            const auto lo32 = static_cast<std::int32_t>(lo), hi32 = static_cast<std::int32_t>(hi);
            const std::uint32_t width = padded_width(lo32, hi32);
            comps = store.create(s, lo32, hi32, step);
            std::int32_t* mout = comps + M * width;
            std::int32_t* iout = comps + I * width;
            std::int32_t* dout = comps + D * width;
            const bool has_i = has_mo || has_ie, has_d = has_mo || has_de;
            for (std::int32_t k = lo32; k <= hi32; ++k) {
                std::int32_t ins = has_i ? std::max(mo[k - 1], ie[k - 1]) + 1 : kNull;
                if (!valid(ins) || ins > static_cast<std::int32_t>(n)) ins = kNull;
                std::int32_t del = has_d ? std::max(mo[k + 1], de[k + 1]) : kNull;
                if (!valid(del) || std::int64_t{del} - k > m) del = kNull;
                std::int32_t mis = mx[k];
                if (valid(mis)) {
                    ++mis;
                    if (mis > static_cast<std::int32_t>(n) || std::int64_t{mis} - k > m) mis = kNull;
                } else {
                    mis = kNull;
                }
                const std::int32_t best = std::max({mis, ins, del});
                const auto idx = k - lo32;
                mout[idx] = valid(best) ? best : kNull;
                iout[idx] = ins;
                dout[idx] = del;
            }
            for (auto idx = static_cast<std::uint32_t>(hi32 - lo32 + 1); idx < width; ++idx)
                mout[idx] = iout[idx] = dout[idx] = kNull;
            ctx.touch(std::uint64_t{10} * width);

            extend(mout, lo32, lo32, hi32);
            const bool done = k_end >= lo32 && k_end <= hi32 && mout[k_end - lo32] >= static_cast<std::int32_t>(n);
            std::int32_t keep_lo = lo32, keep_hi = hi32;
            if (!done) prune(mout, lo32, keep_lo, keep_hi);
            out = Header{keep_lo, keep_hi, lo32, width,
                         kPresentM | (has_i ? kPresentI : 0u) | (has_d ? kPresentD : 0u)};
            store.commit(s, out);
            if (done) final_score = s;
        } catch (const PimError& err) {
            if (err.code() != ErrorCode::BudgetExceeded) throw;
            throw PimError(ErrorCode::BudgetExceeded,
                           "wavefront memory exhausted at score " + std::to_string(s) + " (" + err.what() + ")");
        }
        store.end_step(step);
        if constexpr (requires { store.publish(); }) store.publish();
    }

    // Traceback.
    const std::int64_t score = final_score;
    const std::int64_t min_edit = std::min<std::int64_t>(x, o + e);
    ResultWriter out(ctx, std::min<std::uint64_t>(max_runs_any(m, n), 2 * static_cast<std::uint64_t>(score / min_edit) + 1));
    enum class State { M, I, D };
    State state = State::M;
    std::int64_t cur = score;
    std::int64_t k = k_end;
    std::int32_t h = static_cast<std::int32_t>(n);
    while (true) {
        if (state == State::M) {
            if (cur == 0) {
                out.emit(Op::Match, static_cast<std::uint32_t>(h));
                break;
            }
            std::int32_t mis = store.offset_at(cur - x, M, k);
            if (valid(mis)) {
                ++mis;
                if (mis > static_cast<std::int32_t>(n) || std::int64_t{mis} - k > m) mis = kNull;
            } else {
                mis = kNull;
            }
            const std::int32_t ins = store.offset_at(cur, I, k);
            const std::int32_t del = store.offset_at(cur, D, k);
            const std::int32_t h0 = std::max({mis, ins, del});
            if (!valid(h0) || h0 > h) throw PimError(ErrorCode::InvalidArgument, "wavefront traceback lost its path");
            out.emit(Op::Match, static_cast<std::uint32_t>(h - h0));
            h = h0;
            if (mis == h0) {
                out.emit(Op::Mismatch);
                cur -= x;
                --h;
            } else if (del == h0) {
                state = State::D;
            } else {
                state = State::I;
            }
        } else if (state == State::D) {
            out.emit(Op::Deletion);
            if (store.offset_at(cur - e, D, k + 1) == h) {
                cur -= e;
            } else {
                cur -= o + e;
                state = State::M;
            }
            ++k;
        } else {
            out.emit(Op::Insertion);
            if (store.offset_at(cur - e, I, k - 1) == h - 1) {
                cur -= e;
            } else {
                cur -= o + e;
                state = State::M;
            }
            --k;
            --h;
        }
        if (cur < 0) throw PimError(ErrorCode::InvalidArgument, "wavefront traceback went below score 0");
    }
    return out.finish(static_cast<std::int32_t>(score));
}

}  // namespace wf

inline WramBlock wfa_scratchpad(ThreadContext& ctx, const WramPair& wp, const AffinePenalties& pen,
                                const AdaptiveParams* adaptive = nullptr) {
    wf::ScratchpadStore store(ctx);
    return wf::run(ctx, wp, pen, adaptive, store);
}

inline WramBlock wfa_tiered(ThreadContext& ctx, const WramPair& wp, const AffinePenalties& pen,
                            const AdaptiveParams* adaptive = nullptr) {
    wf::TieredStore store(ctx);
    return wf::run(ctx, wp, pen, adaptive, store);
}

}  // namespace pimalign::kernel
