#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pimalign/dispatcher.hpp"
#include "pimalign/oracle.hpp"
#include "pimalign/seqio.hpp"

using namespace pimalign;

namespace {

enum Exit { kOk = 0, kPairErrors = 1, kUsage = 2, kUnalignable = 3, kFailure = 4 };

struct MachineOptions {
    std::string config_path;
    std::map<std::string, std::string> overrides;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Machine configuration file (key=value or JSON)")
            ->check(CLI::ExistingFile);
        for (const auto& key : PimConfig::keys())
            cmd->add_option("--" + key, overrides[key], "Override machine parameter " + key)->group("Machine");
    }

    PimConfig load() const {
        PimConfig cfg = config_path.empty() ? PimConfig{} : PimConfig::from_file(config_path);
        for (const auto& [key, value] : overrides)
            if (!value.empty()) cfg.set(key, value);
        cfg.validate();
        return cfg;
    }
};

struct ScoringOptions {
    int match = 0;
    int mismatch = 3;
    int indel = 4;
    int gap_open = 4;
    int gap_extend = 1;
    int k = 8;
    int adaptive_min_len = 10;
    int adaptive_max_dist = 50;
    bool adaptive_off = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--match", match, "Match cost (must be 0)")->group("Scoring");
        cmd->add_option("--mismatch", mismatch, "Mismatch cost")->group("Scoring");
        cmd->add_option("--indel", indel, "Linear gap cost per base (nw)")->group("Scoring");
        cmd->add_option("--gap-open", gap_open, "Affine gap open cost (swg, wfa)")->group("Scoring");
        cmd->add_option("--gap-extend", gap_extend, "Affine gap extend cost (swg, wfa)")->group("Scoring");
        cmd->add_option("--k", k, "GenASM edit distance threshold")->group("Scoring");
        cmd->add_option("--adaptive-min-len", adaptive_min_len, "WFA-adaptive minimum wavefront length")
            ->group("Scoring");
        cmd->add_option("--adaptive-max-dist", adaptive_max_dist, "WFA-adaptive maximum distance threshold")
            ->group("Scoring");
        cmd->add_flag("--adaptive-off", adaptive_off, "Disable WFA-adaptive pruning")->group("Scoring");
    }

    AlignParams params(Algorithm a, Placement p) const {
        AlignParams ap;
        ap.algorithm = a;
        ap.placement = p;
        ap.linear = {match, mismatch, indel};
        ap.affine = {match, mismatch, gap_open, gap_extend};
        ap.adaptive = {adaptive_min_len, adaptive_max_dist, !adaptive_off};
        ap.genasm_k = k;
        ap.validate();
        return ap;
    }
};

// Placement and machine layout live in the reports, so results files compare
// equal across placements.
std::vector<std::pair<std::string, std::string>> run_metadata(const RunResult& rr) {
    const auto& p = rr.plan.params;
    std::vector<std::pair<std::string, std::string>> meta = {
        {"algorithm", std::string(to_string(p.algorithm))},
        {"pairs", std::to_string(rr.outcomes.size())},
    };
    switch (p.algorithm) {
        case Algorithm::NW:
            meta.push_back({"penalties", std::to_string(p.linear.match) + "," + std::to_string(p.linear.mismatch) + "," +
                                             std::to_string(p.linear.indel)});
            break;
        case Algorithm::GenASM: meta.push_back({"k", std::to_string(p.genasm_k)}); break;
        default:
            meta.push_back({"penalties", std::to_string(p.affine.match) + "," + std::to_string(p.affine.mismatch) + "," +
                                             std::to_string(p.affine.gap_open) + "," +
                                             std::to_string(p.affine.gap_extend)});
            if (p.algorithm == Algorithm::WFAAdaptive)
                meta.push_back({"adaptive", p.adaptive.enabled ? std::to_string(p.adaptive.min_wavefront_length) + "," +
                                                                     std::to_string(p.adaptive.max_distance_threshold)
                                                               : "off"});
    }
    return meta;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PimError(ErrorCode::IoError, "cannot write " + path);
    out << content;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pairwise sequence alignment on a simulated processing-in-memory machine"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic pair file");
    std::uint64_t gen_count = 1000, gen_length = 100, gen_seed = 1;
    double gen_error = 0.01;
    std::string gen_out;
    gen->add_option("--count", gen_count, "Number of pairs")->check(CLI::NonNegativeNumber);
    gen->add_option("--length", gen_length, "Pattern length")->check(CLI::PositiveNumber);
    gen->add_option("--error", gen_error, "Fraction of the length applied as edits")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--out", gen_out, "Output pair file ('-' for stdout)")->required();

    // align
    auto* align = app.add_subcommand("align", "Align every pair of a pair file");
    std::string in_path, out_path, report_prefix, algo = "wfa", placement = "scratchpad";
    double error_bound = 0.10;
    std::uint64_t len_cap = 0;
    unsigned host_threads = 1;
    bool allow_n = false, with_counters = false;
    MachineOptions align_machine;
    ScoringOptions align_scoring;
    align->add_option("--in", in_path, "Input pair file")->required()->check(CLI::ExistingFile);
    align->add_option("--out", out_path, "Results file ('-' for stdout)")->required();
    align->add_option("--algo", algo, "nw | swg | genasm | wfa | wfa-adaptive")
        ->check(CLI::IsMember({"nw", "swg", "genasm", "wfa", "wfa-adaptive"}));
    align->add_option("--placement", placement, "scratchpad | tiered")->check(CLI::IsMember({"scratchpad", "tiered"}));
    align->add_option("--error-bound", error_bound, "Error rate assumed when sizing WFA wavefronts")
        ->check(CLI::Range(0.0, 1.0));
    align->add_option("--len-cap", len_cap, "Plan for reads up to this length; longer pairs are rejected");
    align->add_option("--report", report_prefix,
                      "Write PREFIX.plan.txt, PREFIX.plan.csv, PREFIX.cost.txt and PREFIX.cost.csv");
    align->add_option("--host-threads", host_threads, "Host worker threads")->check(CLI::PositiveNumber);
    align->add_flag("--allow-n", allow_n, "Map non-ACGT characters to N (mismatches everything)");
    align->add_flag("--counters", with_counters, "Append per-pair cost counters to the results");
    align_machine.add_to(align);
    align_scoring.add_to(align);

    // bench
    auto* bench = app.add_subcommand("bench", "Sweep algorithms, placements, lengths and error rates");
    std::string bench_algos = "nw,swg,genasm,wfa,wfa-adaptive", bench_placements = "scratchpad,tiered";
    std::string bench_lengths = "100", bench_errors = "0.02", bench_out = "-";
    std::uint64_t bench_count = 100, bench_seed = 1;
    unsigned bench_host_threads = 1;
    MachineOptions bench_machine;
    ScoringOptions bench_scoring;
    bench->add_option("--algos", bench_algos, "Comma-separated algorithms");
    bench->add_option("--placements", bench_placements, "Comma-separated placements");
    bench->add_option("--lengths", bench_lengths, "Comma-separated read lengths");
    bench->add_option("--errors", bench_errors, "Comma-separated error rates");
    bench->add_option("--count", bench_count, "Pairs per sweep point")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "Random seed");
    bench->add_option("--out", bench_out, "CSV output ('-' for stdout)");
    bench->add_option("--host-threads", bench_host_threads, "Host worker threads")->check(CLI::PositiveNumber);
    bench_machine.add_to(bench);
    bench_scoring.add_to(bench);

    // oracle (debugging aid, not listed in help)
    auto* orc = app.add_subcommand("oracle", "");
    orc->group("");
    std::string orc_pattern, orc_text, orc_cigar;
    ScoringOptions orc_scoring;
    orc->add_option("--pattern", orc_pattern)->required();
    orc->add_option("--text", orc_text)->required();
    orc->add_option("--cigar", orc_cigar, "Replay this CIGAR and report its costs");
    orc_scoring.add_to(orc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) {
            auto pairs = seqio::generate(gen_count, gen_length, gen_error, gen_seed);
            if (gen_out == "-") seqio::format_pairs(std::cout, pairs);
            else seqio::write_pairs(gen_out, pairs);
            return kOk;
        }

        if (*orc) {
            const AlignParams ap = orc_scoring.params(Algorithm::WFA, Placement::Scratchpad);
            std::cout << "nw\t" << oracle::ref_nw(orc_pattern, orc_text, ap.linear) << '\n'
                      << "swg\t" << oracle::ref_swg(orc_pattern, orc_text, ap.affine) << '\n'
                      << "edit\t" << oracle::ref_edit_distance(orc_pattern, orc_text) << '\n';
            if (!orc_cigar.empty()) {
                const Cigar c = Cigar::parse(orc_cigar);
                const auto lin = oracle::replay_cigar(orc_pattern, orc_text, c, ap.linear);
                const auto aff = oracle::replay_cigar(orc_pattern, orc_text, c, ap.affine);
                std::cout << "replay\t" << lin.text << '\n'
                          << "replay_matches_text\t" << (lin.text == orc_text ? "yes" : "no") << '\n'
                          << "cost_linear\t" << lin.cost << '\n'
                          << "cost_affine\t" << aff.cost << '\n';
            }
            return kOk;
        }

        if (*align) {
            const PimConfig cfg = align_machine.load();
            const AlignParams ap = align_scoring.params(parse_algorithm(algo), parse_placement(placement));
            const auto pairs = seqio::read_pairs(in_path, allow_n ? AlphabetPolicy::MapToN : AlphabetPolicy::Strict);
            auto ds = DatasetSummary::of(pairs, error_bound);
            if (len_cap > 0) {
                if (ds.max_m > len_cap || ds.max_n > len_cap)
                    throw PimError(ErrorCode::InvalidArgument,
                                   "input has pairs longer than --len-cap " + std::to_string(len_cap));
                ds.max_m = ds.max_n = len_cap;
            }
            RunResult rr;
            if (pairs.empty()) {
                rr.plan.params = ap;
            } else {
                rr = run(plan(ds, ap, cfg), pairs, cfg, RunOptions{host_threads, true});
            }
            const auto records = rr.records(with_counters);
            if (out_path == "-") seqio::format_results(std::cout, records, run_metadata(rr));
            else seqio::write_results(out_path, records, run_metadata(rr));

            std::ostringstream plan_txt, cost_txt, cost_csv;
            if (!pairs.empty()) write_plan_text(plan_txt, rr.plan, cfg);
            write_cost_text(cost_txt, rr, cfg);
            write_cost_csv(cost_csv, rr);
            if (!report_prefix.empty()) {
                write_file(report_prefix + ".plan.txt", plan_txt.str());
                write_file(report_prefix + ".plan.csv",
                           std::string(plan_csv_header()) + "\n" + (pairs.empty() ? "" : plan_csv_row(rr.plan) + "\n"));
                write_file(report_prefix + ".cost.txt", cost_txt.str());
                write_file(report_prefix + ".cost.csv", cost_csv.str());
            }
            if (out_path != "-") std::cout << plan_txt.str() << cost_txt.str();
            for (std::size_t i = 0; i < rr.outcomes.size(); ++i)
                if (rr.outcomes[i].status == PairStatus::Error)
                    std::cerr << "pair " << i << ": " << rr.outcomes[i].message << '\n';
            if (!rr.audit.clean()) {
                std::cerr << "machine model invariant violated\n";
                return kFailure;
            }
            return rr.all_ok() ? kOk : kPairErrors;
        }

        if (*bench) {
            const PimConfig cfg = bench_machine.load();
            std::ostringstream csv;
            csv << "algorithm,placement,length,error,pairs,status,threads_per_dpu,footprint_wram,footprint_mram,"
                   "makespan_cycles,mram_bytes_moved,dma_transfers,aligned,filtered,errors\n";
            for (const auto& len_s : split_list(bench_lengths)) {
                const std::uint64_t len = std::stoull(len_s);
                for (const auto& err_s : split_list(bench_errors)) {
                    const double err = std::stod(err_s);
                    const auto pairs = seqio::generate(bench_count, len, err, bench_seed);
                    for (const auto& a_s : split_list(bench_algos)) {
                        for (const auto& p_s : split_list(bench_placements)) {
                            const AlignParams ap = bench_scoring.params(parse_algorithm(a_s), parse_placement(p_s));
                            csv << a_s << ',' << p_s << ',' << len << ',' << err_s << ',' << pairs.size() << ',';
                            try {
                                const auto rr = run(plan(DatasetSummary::of(pairs, std::max(err, 0.01)), ap, cfg),
                                                    pairs, cfg, RunOptions{bench_host_threads, false});
                                std::uint64_t ok = 0, filtered = 0, errors = 0;
                                for (const auto& o : rr.outcomes) {
                                    if (o.status == PairStatus::Aligned) ++ok;
                                    else if (o.status == PairStatus::Filtered) ++filtered;
                                    else ++errors;
                                }
                                csv << "OK," << rr.plan.threads_per_dpu << ',' << rr.plan.footprint.wram << ','
                                    << rr.plan.footprint.mram << ',' << fixed(rr.cost.makespan_cycles, 1) << ','
                                    << rr.cost.total.mram_bytes_moved() << ',' << rr.cost.total.dma_transfers << ','
                                    << ok << ',' << filtered << ',' << errors << '\n';
                            } catch (const PimError& e) {
                                if (e.code() != ErrorCode::Unalignable && e.code() != ErrorCode::DatasetTooLarge &&
                                    e.code() != ErrorCode::InvalidArgument)
                                    throw;
                                csv << (e.code() == ErrorCode::Unalignable ? std::string("UNALIGNABLE")
                                                                           : "SKIPPED:" + std::string(to_string(e.code())))
                                    << ",0,,,,,,,,\n";
                            }
                        }
                    }
                }
            }
            if (bench_out == "-") std::cout << csv.str();
            else write_file(bench_out, csv.str());
            return kOk;
        }
    } catch (const PimError& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (e.code() == ErrorCode::Unalignable) return kUnalignable;
        if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::ConfigError ||
            e.code() == ErrorCode::ParseError || e.code() == ErrorCode::AlphabetError)
            return kUsage;
        return kFailure;
    }
    return kOk;
}
