#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "align.hpp"
#include "error.hpp"
#include "machine.hpp"
#include "sequence.hpp"

namespace pimalign::seqio {

// Pair files: one record per two lines, ">pattern" then "<text".

inline std::vector<SequencePair> parse_pairs(std::istream& in, AlphabetPolicy policy = AlphabetPolicy::Strict,
                                             const std::string& source = "input") {
    std::vector<SequencePair> pairs;
    std::string line;
    std::size_t line_no = 0;
    bool want_pattern = true;
    auto fail = [&](const std::string& what) {
        throw PimError(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char tag = line[0];
        std::string seq = line.substr(1);
        if (seq.empty()) fail("empty sequence");
        const std::string where = source + ":" + std::to_string(line_no);
        if (want_pattern) {
            if (tag != '>') fail(tag == '<' ? "text line without a preceding pattern line" : "expected '>' line");
            apply_alphabet_policy(seq, policy, where);
            pairs.push_back({std::move(seq), {}});
        } else {
            if (tag != '<') fail(tag == '>' ? "pattern line without a following text line" : "expected '<' line");
            apply_alphabet_policy(seq, policy, where);
            pairs.back().text = std::move(seq);
        }
        want_pattern = !want_pattern;
    }
    if (!want_pattern) {
        ++line_no;
        fail("pattern line without a following text line");
    }
    return pairs;
}

inline std::vector<SequencePair> read_pairs(const std::string& path, AlphabetPolicy policy = AlphabetPolicy::Strict) {
    std::ifstream in(path);
    if (!in) throw PimError(ErrorCode::IoError, "cannot open " + path);
    return parse_pairs(in, policy, path);
}

inline void format_pairs(std::ostream& out, const std::vector<SequencePair>& pairs) {
    for (const auto& p : pairs) out << '>' << p.pattern << "\n<" << p.text << '\n';
}

inline void write_pairs(const std::string& path, const std::vector<SequencePair>& pairs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PimError(ErrorCode::IoError, "cannot write " + path);
    format_pairs(out, pairs);
    if (!out) throw PimError(ErrorCode::IoError, "write failed: " + path);
}

/// Deterministic uniform integer in [0, bound), independent of the standard
/// library's distribution implementations.
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % bound;
}

struct GenerateStats {
    std::uint64_t substitutions = 0;
    std::uint64_t insertions = 0;
    std::uint64_t deletions = 0;
};

/// Random pattern of length n; text is the pattern after floor(error_rate * n)
/// edits, each a substitution, insertion or deletion with equal probability at
/// a uniform position.
inline std::vector<SequencePair> generate(std::uint64_t count, std::uint64_t length, double error_rate,
                                          std::uint64_t seed, GenerateStats* stats = nullptr) {
    if (!(error_rate >= 0.0 && error_rate <= 1.0))
        throw PimError(ErrorCode::InvalidArgument, "error rate must be within [0, 1]");
    if (length == 0 && count > 0) throw PimError(ErrorCode::InvalidArgument, "length must be positive");
    static constexpr char kBases[] = {'A', 'C', 'G', 'T'};
    std::mt19937_64 rng(seed);
    const auto edits = static_cast<std::uint64_t>(std::floor(error_rate * static_cast<double>(length) + 1e-9));
    std::vector<SequencePair> pairs;
    pairs.reserve(count);
    for (std::uint64_t c = 0; c < count; ++c) {
        SequencePair p;
        p.pattern.resize(length);
        for (auto& ch : p.pattern) ch = kBases[draw(rng, 4)];
        p.text = p.pattern;
        for (std::uint64_t e = 0; e < edits; ++e) {
            auto kind = draw(rng, 3);
            if (kind == 2 && p.text.size() == 1) kind = 1;
            if (kind == 0) {
                const auto pos = draw(rng, p.text.size());
                const char old = p.text[pos];
                char repl;
                do {
                    repl = kBases[draw(rng, 4)];
                } while (repl == old);
                p.text[pos] = repl;
                if (stats) ++stats->substitutions;
            } else if (kind == 1) {
                const auto pos = draw(rng, p.text.size() + 1);
                p.text.insert(p.text.begin() + static_cast<std::ptrdiff_t>(pos), kBases[draw(rng, 4)]);
                if (stats) ++stats->insertions;
            } else {
                const auto pos = draw(rng, p.text.size());
                p.text.erase(p.text.begin() + static_cast<std::ptrdiff_t>(pos));
                if (stats) ++stats->deletions;
            }
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

// Result files: a '#' metadata header, then one tab-separated row per pair:
// index, status, score, CIGAR, and optionally the pair's cost counters.

struct ResultRecord {
    std::uint64_t index = 0;
    PairStatus status = PairStatus::Aligned;
    ErrorCode error = ErrorCode::InvalidArgument;
    std::int32_t score = 0;
    Cigar cigar;
    std::optional<CostCounters> counters;

    bool operator==(const ResultRecord& o) const {
        if (index != o.index || status != o.status || counters.has_value() != o.counters.has_value()) return false;
        if (counters && !(*counters == *o.counters)) return false;
        if (status == PairStatus::Error) return error == o.error;
        if (status == PairStatus::Filtered) return true;
        return score == o.score && cigar == o.cigar;
    }
};

inline std::string status_field(const ResultRecord& r) {
    switch (r.status) {
        case PairStatus::Aligned: return "OK";
        case PairStatus::Filtered: return "FILTERED";
        case PairStatus::Error: return "ERROR:" + std::string(to_string(r.error));
    }
    return "?";
}

inline std::string format_counters(const CostCounters& c) {
    std::ostringstream s;
    s << c.wram_accesses << '\t' << c.mram_read_bytes << '\t' << c.mram_write_bytes << '\t' << c.dma_transfers << '\t'
      << std::fixed << std::setprecision(1) << c.estimated_cycles;
    return s.str();
}

inline std::string format_result(const ResultRecord& r) {
    std::ostringstream s;
    s << r.index << '\t' << status_field(r) << '\t';
    if (r.status == PairStatus::Aligned) s << r.score << '\t' << r.cigar.to_string();
    else s << "-\t-";
    if (r.counters) s << '\t' << format_counters(*r.counters);
    return s.str();
}

inline void format_results(std::ostream& out, const std::vector<ResultRecord>& results,
                           const std::vector<std::pair<std::string, std::string>>& metadata = {}) {
    out << '#';
    for (const auto& [k, v] : metadata) out << ' ' << k << '=' << v;
    out << "\n";
    for (const auto& r : results) out << format_result(r) << '\n';
}

inline void write_results(const std::string& path, const std::vector<ResultRecord>& results,
                          const std::vector<std::pair<std::string, std::string>>& metadata = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PimError(ErrorCode::IoError, "cannot write " + path);
    format_results(out, results, metadata);
    if (!out) throw PimError(ErrorCode::IoError, "write failed: " + path);
}

inline std::vector<ResultRecord> parse_results(std::istream& in, const std::string& source = "results") {
    std::vector<ResultRecord> out;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw PimError(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, '\t');) f.push_back(cell);
        if (f.size() != 4 && f.size() != 9) fail("expected 4 or 9 fields");
        ResultRecord r;
        try {
            r.index = std::stoull(f[0]);
            if (f[1] == "OK") {
                r.status = PairStatus::Aligned;
                r.score = std::stoi(f[2]);
                r.cigar = Cigar::parse(f[3]);
            } else if (f[1] == "FILTERED") {
                r.status = PairStatus::Filtered;
            } else if (f[1].rfind("ERROR:", 0) == 0) {
                r.status = PairStatus::Error;
                if (!error_code_from_string(f[1].substr(6), r.error)) fail("unknown error code " + f[1]);
            } else {
                fail("unknown status " + f[1]);
            }
            if (f.size() == 9) {
                CostCounters c;
                c.wram_accesses = std::stoull(f[4]);
                c.mram_read_bytes = std::stoull(f[5]);
                c.mram_write_bytes = std::stoull(f[6]);
                c.dma_transfers = std::stoull(f[7]);
                c.estimated_cycles = std::stod(f[8]);
                r.counters = c;
            }
        } catch (const std::logic_error&) {
            fail("malformed number");
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<ResultRecord> read_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PimError(ErrorCode::IoError, "cannot open " + path);
    return parse_results(in, path);
}

}  // namespace pimalign::seqio
