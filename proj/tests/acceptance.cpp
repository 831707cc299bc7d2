// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "pimalign/dispatcher.hpp"
#include "pimalign/oracle.hpp"
#include "pimalign/seqio.hpp"

using namespace pimalign;

namespace {

// Pinned parameters and tolerances.
constexpr std::uint64_t kSweepPairs = 10000;
constexpr std::uint64_t kSweepMinLen = 10;
constexpr std::uint64_t kSweepMaxLen = 300;
constexpr double kSweepErrors[] = {0.0, 0.01, 0.02, 0.05, 0.10};
constexpr double kSweepSeconds = 300.0;
constexpr std::uint64_t kTransparencyPairs = 1000;
constexpr std::uint64_t kTransparencyMaxLen = 90;  // fits every scratchpad variant
constexpr std::uint64_t kNwScratchTable = 61250;
constexpr std::uint64_t kSwgScratchMin = 95, kSwgScratchMax = 110;
constexpr std::uint64_t kNwTieredMin = 2700, kNwTieredMax = 6000;
constexpr std::uint64_t kSwgTieredMin = 1700, kSwgTieredMax = 3800;
constexpr std::uint64_t kGenasmPairs = 5000;
constexpr std::uint64_t kGenasmLen = 150;
constexpr int kGenasmK = 8;
constexpr std::uint64_t kAdaptivePairs = 10000;
constexpr std::uint64_t kAdaptiveLen = 150;
constexpr double kAdaptiveError = 0.02;
constexpr double kErrorBound = 0.10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail << std::endl;
}

AlignParams params_for(Algorithm a, Placement p, int k = 0) {
    AlignParams ap;
    ap.algorithm = a;
    ap.placement = p;
    ap.genasm_k = k;
    return ap;
}

/// Largest L for which an L x L pair can be planned, by bisection on [1, hi].
std::uint64_t max_plannable_length(const AlignParams& ap, const PimConfig& cfg, std::uint64_t hi) {
    auto fits = [&](std::uint64_t len) {
        try {
            plan({1, len, len, kErrorBound}, ap, cfg);
            return true;
        } catch (const PimError& e) {
            if (e.code() != ErrorCode::Unalignable) throw;
            return false;
        }
    };
    std::uint64_t lo = 0;
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo + 1) / 2;
        if (fits(mid)) lo = mid;
        else hi = mid - 1;
    }
    return lo;
}

/// Longest square pair whose footprint fits one thread's share of the machine.
std::uint64_t max_fitting_length(const AlignParams& ap, const PimConfig& cfg, std::uint64_t hi) {
    std::uint64_t len = hi;
    while (len > 0) {
        const auto f = footprint(ap, len, len, kErrorBound);
        if (f.wram <= cfg.usable_wram() && f.mram <= cfg.mram_bytes) break;
        --len;
    }
    return len;
}

std::vector<SequencePair> sweep_pairs() {
    std::vector<SequencePair> pairs;
    pairs.reserve(kSweepPairs);
    std::mt19937_64 rng(20240501);
    for (std::uint64_t i = 0; i < kSweepPairs; ++i) {
        const double err = kSweepErrors[i % std::size(kSweepErrors)];
        const std::uint64_t len = kSweepMinLen + seqio::draw(rng, kSweepMaxLen - kSweepMinLen + 1);
        pairs.push_back(seqio::generate(1, len, err, 1000003 * i + 17)[0]);
    }
    return pairs;
}

std::uint64_t longest(const SequencePair& p) { return std::max(p.pattern.size(), p.text.size()); }

struct SweepTotals {
    RunAudit audit;
    std::uint64_t runs = 0;
    std::uint64_t alignments = 0;
    std::uint64_t score_mismatches = 0;
    std::uint64_t pair_errors = 0;
    std::uint64_t replay_failures = 0;
    std::map<std::string, std::uint64_t> per_variant;

    void absorb(const RunAudit& a) {
        audit.dma_violations += a.dma_violations;
        audit.arena_violations += a.arena_violations;
        audit.trace_mismatches += a.trace_mismatches;
        audit.window_violations += a.window_violations;
        ++runs;
    }
};

bool replays(const SequencePair& p, const Alignment& a, Algorithm algo, const AlignParams& ap) {
    oracle::Replay r;
    switch (algo) {
        case Algorithm::NW: r = oracle::replay_cigar(p, a.cigar, ap.linear); break;
        case Algorithm::GenASM: r = oracle::replay_cigar(p, a.cigar, unit_edit_penalties()); break;
        default: r = oracle::replay_cigar(p, a.cigar, ap.affine); break;
    }
    return r.text == p.text && r.cost == a.score;
}

// Runs one algorithm/placement over `idx` of `pairs`, checking the exact
// algorithms against `expected` and every alignment by replay.
void sweep_run(SweepTotals& tot, const std::vector<SequencePair>& pairs, const std::vector<std::size_t>& idx,
               const AlignParams& ap, const std::vector<std::int64_t>* expected, const PimConfig& cfg) {
    if (idx.empty()) return;
    std::vector<SequencePair> subset;
    subset.reserve(idx.size());
    for (auto i : idx) subset.push_back(pairs[i]);
    const auto rr = align_all(subset, ap, cfg, kErrorBound);
    tot.absorb(rr.audit);
    tot.per_variant[std::string(to_string(ap.algorithm)) + "/" + std::string(to_string(ap.placement))] += subset.size();
    for (std::size_t j = 0; j < subset.size(); ++j) {
        const auto& o = rr.outcomes[j];
        if (o.status != PairStatus::Aligned) {
            ++tot.pair_errors;
            continue;
        }
        ++tot.alignments;
        if (expected && o.alignment.score != (*expected)[idx[j]]) ++tot.score_mismatches;
        if (!replays(subset[j], o.alignment, ap.algorithm, ap)) ++tot.replay_failures;
    }
}

SweepTotals criteria_1_2_7(const PimConfig& cfg) {
    const auto t0 = Clock::now();
    const auto pairs = sweep_pairs();
    std::vector<std::int64_t> nw_ref(pairs.size()), swg_ref(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        nw_ref[i] = oracle::ref_nw(pairs[i]);
        swg_ref[i] = oracle::ref_swg(pairs[i]);
    }

    SweepTotals tot;
    std::vector<std::size_t> all(pairs.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto fitting = [&](const AlignParams& ap, const std::vector<std::size_t>& from) {
        const auto cap = max_fitting_length(ap, cfg, kSweepMaxLen + kSweepMaxLen / 5);
        std::vector<std::size_t> out;
        for (auto i : from)
            if (longest(pairs[i]) <= cap) out.push_back(i);
        return out;
    };

    for (auto pl : {Placement::Tiered, Placement::Scratchpad}) {
        const auto nw = params_for(Algorithm::NW, pl), swg = params_for(Algorithm::SWG, pl);
        const auto wfa = params_for(Algorithm::WFA, pl), ad = params_for(Algorithm::WFAAdaptive, pl);
        sweep_run(tot, pairs, fitting(nw, all), nw, &nw_ref, cfg);
        sweep_run(tot, pairs, fitting(swg, all), swg, &swg_ref, cfg);
        sweep_run(tot, pairs, fitting(wfa, all), wfa, &swg_ref, cfg);
        sweep_run(tot, pairs, fitting(ad, all), ad, nullptr, cfg);
        // GenASM needs k below the pattern length; short and long reads get their own k.
        std::vector<std::size_t> short_reads, long_reads;
        for (auto i : all) (pairs[i].pattern.size() <= 40 ? short_reads : long_reads).push_back(i);
        const auto g_short = params_for(Algorithm::GenASM, pl, 9), g_long = params_for(Algorithm::GenASM, pl, 40);
        sweep_run(tot, pairs, fitting(g_short, short_reads), g_short, nullptr, cfg);
        sweep_run(tot, pairs, fitting(g_long, long_reads), g_long, nullptr, cfg);
    }
    const double secs = seconds_since(t0);

    std::ostringstream d1;
    d1 << pairs.size() << " pairs, lengths " << kSweepMinLen << "-" << kSweepMaxLen
       << ", errors {0,1,2,5,10}%; score mismatches " << tot.score_mismatches << ", pair errors " << tot.pair_errors
       << "; runs:";
    for (const auto& [k, v] : tot.per_variant) d1 << ' ' << k << '=' << v;
    d1 << "; " << fixed(secs, 1) << " s (limit " << kSweepSeconds << " s)";
    const bool all_exact_present = tot.per_variant["nw/tiered"] == pairs.size() &&
                                   tot.per_variant["swg/tiered"] == pairs.size() &&
                                   tot.per_variant["wfa/tiered"] == pairs.size();
    report(1, all_exact_present && tot.score_mismatches == 0 && tot.pair_errors == 0 && secs < kSweepSeconds,
           d1.str());

    report(2, tot.replay_failures == 0 && tot.alignments > 0,
           std::to_string(tot.alignments) + " alignments from all five algorithms replayed; " +
               std::to_string(tot.replay_failures) + " failures");
    return tot;
}

void criterion_3(const PimConfig& cfg) {
    std::mt19937_64 rng(33);
    std::vector<SequencePair> pairs;
    for (std::uint64_t i = 0; i < kTransparencyPairs; ++i) {
        const std::uint64_t len = 20 + seqio::draw(rng, kTransparencyMaxLen - 20 + 1);
        const double err = kSweepErrors[i % std::size(kSweepErrors)];
        auto p = seqio::generate(1, len, err, 7000 + i)[0];
        if (longest(p) > kTransparencyMaxLen) p.text.resize(kTransparencyMaxLen);
        pairs.push_back(std::move(p));
    }
    std::uint64_t output_diffs = 0, not_more_mram = 0, compared = 0;
    std::ostringstream d;
    for (auto a : kAllAlgorithms) {
        const int k = a == Algorithm::GenASM ? 8 : 0;
        const auto s = align_all(pairs, params_for(a, Placement::Scratchpad, k), cfg, kErrorBound);
        const auto t = align_all(pairs, params_for(a, Placement::Tiered, k), cfg, kErrorBound);
        const auto rs = s.records(), rt = t.records();
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            ++compared;
            if (!(rs[i] == rt[i]) || rs[i].status == PairStatus::Error) ++output_diffs;
            if (t.outcomes[i].alignment.cost.mram_bytes_moved() <= s.outcomes[i].alignment.cost.mram_bytes_moved())
                ++not_more_mram;
        }
        d << ' ' << to_string(a) << " mram " << s.cost.total.mram_bytes_moved() << "->"
          << t.cost.total.mram_bytes_moved();
    }
    report(3, output_diffs == 0 && not_more_mram == 0,
           std::to_string(compared) + " pair comparisons; output differences " + std::to_string(output_diffs) +
               "; pairs where tiered did not move more MRAM bytes " + std::to_string(not_more_mram) + ";" + d.str());
}

void criterion_4(const PimConfig& cfg) {
    const auto nw_s = params_for(Algorithm::NW, Placement::Scratchpad);
    const auto nw_t = params_for(Algorithm::NW, Placement::Tiered);
    const auto table = footprint(nw_s, 175, 175, kErrorBound).table_term;
    const auto t175 = plan({1000, 175, 175, kErrorBound}, nw_s, cfg).threads_per_dpu;
    const auto t50_tiered = plan({100000, 50, 50, kErrorBound}, nw_t, cfg).threads_per_dpu;
    const auto t50_scratch = plan({100000, 50, 50, kErrorBound}, nw_s, cfg).threads_per_dpu;
    const auto swg_s = max_plannable_length(params_for(Algorithm::SWG, Placement::Scratchpad), cfg, 1000);
    const auto nw_tl = max_plannable_length(nw_t, cfg, 20000);
    const auto swg_tl = max_plannable_length(params_for(Algorithm::SWG, Placement::Tiered), cfg, 20000);
    const auto nw_sl = max_plannable_length(nw_s, cfg, 1000);
    const bool pass = table == kNwScratchTable && t175 == 1 && t50_tiered == 24 && swg_s >= kSwgScratchMin &&
                      swg_s <= kSwgScratchMax && nw_tl >= kNwTieredMin && nw_tl <= kNwTieredMax &&
                      swg_tl >= kSwgTieredMin && swg_tl <= kSwgTieredMax;
    std::ostringstream d;
    d << "NW scratchpad 175x175 table " << table << " B (want " << kNwScratchTable << "), threads " << t175
      << "; NW 50bp tiered threads " << t50_tiered << " (scratchpad " << t50_scratch << ")"
      << "; max plannable length: NW scratchpad " << nw_sl << ", SWG scratchpad " << swg_s << " in [" << kSwgScratchMin
      << "," << kSwgScratchMax << "], NW tiered " << nw_tl << " in [" << kNwTieredMin << "," << kNwTieredMax
      << "], SWG tiered " << swg_tl << " in [" << kSwgTieredMin << "," << kSwgTieredMax << "]";
    report(4, pass, d.str());
}

void criterion_5(const PimConfig& cfg) {
    // error rates straddle the threshold: 0, 3, 7, 12 and 15 edits at 150bp
    constexpr double rates[] = {0.0, 0.02, 0.05, 0.08, 0.10};
    std::vector<SequencePair> pairs;
    for (std::uint64_t i = 0; i < kGenasmPairs; ++i)
        pairs.push_back(seqio::generate(1, kGenasmLen, rates[i % std::size(rates)], 50000 + i)[0]);
    std::vector<std::int64_t> ed(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) ed[i] = oracle::ref_edit_distance(pairs[i]);

    std::uint64_t violations = 0, within = 0, above = 0, runs = 0;
    for (auto pl : kAllPlacements) {
        const auto ap = params_for(Algorithm::GenASM, pl, kGenasmK);
        RunResult rr;
        try {
            rr = align_all(pairs, ap, cfg, kErrorBound);
        } catch (const PimError& e) {
            if (e.code() != ErrorCode::Unalignable) throw;
            continue;
        }
        ++runs;
        if (!rr.audit.clean()) ++violations;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto& o = rr.outcomes[i];
            if (ed[i] <= kGenasmK) {
                ++within;
                if (o.status != PairStatus::Aligned ||
                    static_cast<std::int64_t>(o.alignment.cigar.edit_count()) != ed[i] || o.alignment.score != ed[i] ||
                    !replays(pairs[i], o.alignment, Algorithm::GenASM, ap))
                    ++violations;
            } else {
                ++above;
                if (o.status != PairStatus::Filtered) ++violations;
            }
        }
    }
    report(5, violations == 0 && within > 0 && above > 0 && runs > 0,
           std::to_string(kGenasmPairs) + " pairs at " + std::to_string(kGenasmLen) + "bp, k=" +
               std::to_string(kGenasmK) + " over " + std::to_string(runs) + " placement(s): " +
               std::to_string(within) + " within k, " + std::to_string(above) + " above; violations " +
               std::to_string(violations));
}

void criterion_6(const PimConfig& cfg) {
    std::vector<SequencePair> mixed, two_pct;
    for (std::uint64_t i = 0; i < kAdaptivePairs; ++i) {
        mixed.push_back(seqio::generate(1, kAdaptiveLen, kSweepErrors[i % std::size(kSweepErrors)], 90000 + i)[0]);
        two_pct.push_back(seqio::generate(1, kAdaptiveLen, kAdaptiveError, 190000 + i)[0]);
    }
    auto ad_off = params_for(Algorithm::WFAAdaptive, Placement::Tiered);
    ad_off.adaptive.enabled = false;
    const auto exact = params_for(Algorithm::WFA, Placement::Tiered);
    const auto ad = params_for(Algorithm::WFAAdaptive, Placement::Tiered);

    const auto e_mixed = align_all(mixed, exact, cfg, kErrorBound).records();
    const auto off_mixed = align_all(mixed, ad_off, cfg, kErrorBound).records();
    std::uint64_t not_identical = 0;
    for (std::size_t i = 0; i < mixed.size(); ++i)
        if (!(e_mixed[i] == off_mixed[i]) || e_mixed[i].status != PairStatus::Aligned) ++not_identical;

    std::uint64_t below = 0, differ = 0, bad = 0;
    auto compare = [&](const std::vector<seqio::ResultRecord>& ex, const std::vector<seqio::ResultRecord>& pr,
                       std::uint64_t* mismatch) {
        for (std::size_t i = 0; i < ex.size(); ++i) {
            if (ex[i].status != PairStatus::Aligned || pr[i].status != PairStatus::Aligned) {
                ++bad;
                continue;
            }
            if (pr[i].score < ex[i].score) ++below;
            if (mismatch && pr[i].score != ex[i].score) ++*mismatch;
        }
    };
    compare(e_mixed, align_all(mixed, ad, cfg, kErrorBound).records(), nullptr);
    const auto e_two = align_all(two_pct, exact, cfg, kErrorBound).records();
    compare(e_two, align_all(two_pct, ad, cfg, kErrorBound).records(), &differ);

    const double fraction = static_cast<double>(differ) / static_cast<double>(two_pct.size());
    report(6, not_identical == 0 && below == 0 && bad == 0,
           "pruning disabled: " + std::to_string(not_identical) + " of " + std::to_string(mixed.size()) +
               " pairs differ from exact; defaults (10, 50): " + std::to_string(below) + " of " +
               std::to_string(mixed.size() + two_pct.size()) + " pairs scored below exact, " + std::to_string(bad) +
               " not aligned");
    std::cout << "INFO criterion 6: adaptive mismatch fraction at " << kAdaptiveLen << "bp/"
              << fixed(kAdaptiveError * 100, 0) << "% error = " << differ << "/" << two_pct.size() << " = "
              << fixed(fraction, 6) << std::endl;
}

void criterion_7(const SweepTotals& tot) {
    const auto& a = tot.audit;
    report(7, a.clean() && tot.runs > 0,
           std::to_string(tot.runs) + " runs audited: arena overruns " + std::to_string(a.arena_violations) +
               ", DMA rule violations " + std::to_string(a.dma_violations) + ", counter/trace mismatches " +
               std::to_string(a.trace_mismatches) + ", window violations " + std::to_string(a.window_violations));
}

std::string run_artifacts(Algorithm a, Placement p, std::uint64_t seed, unsigned host_threads) {
    PimConfig cfg;
    cfg.num_dpus = 8;
    const auto pairs = seqio::generate(300, 80, 0.03, seed);
    const auto ap = params_for(a, p, a == Algorithm::GenASM ? 6 : 0);
    const auto rr = align_all(pairs, ap, cfg, kErrorBound, RunOptions{host_threads, true});
    std::ostringstream s;
    seqio::format_pairs(s, pairs);
    seqio::format_results(s, rr.records(true));
    write_plan_text(s, rr.plan, cfg);
    s << plan_csv_row(rr.plan) << '\n';
    write_cost_text(s, rr, cfg);
    write_cost_csv(s, rr);
    return s.str();
}

void criterion_8() {
    std::uint64_t differing = 0, checked = 0;
    for (auto a : kAllAlgorithms)
        for (auto p : kAllPlacements) {
            const auto first = run_artifacts(a, p, 8, 1);
            ++checked;
            if (first != run_artifacts(a, p, 8, 1) || first != run_artifacts(a, p, 8, 3)) ++differing;
        }
    report(8, differing == 0,
           std::to_string(checked) + " configurations run three times (1 and 3 host threads); " +
               std::to_string(differing) + " produced differing bytes");
}

}  // namespace

int main() {
    const PimConfig cfg;
    const auto t0 = Clock::now();
    try {
        const auto sweep = criteria_1_2_7(cfg);
        criterion_3(cfg);
        criterion_4(cfg);
        criterion_5(cfg);
        criterion_6(cfg);
        criterion_7(sweep);
        criterion_8();
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
        return 100;
    }
    std::cout << "acceptance finished in " << fixed(seconds_since(t0), 1) << " s, " << failures << " failed"
              << std::endl;
    return failures;
}
