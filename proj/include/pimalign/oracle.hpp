#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "params.hpp"
#include "sequence.hpp"

// Reference implementations for testing. Plain full-matrix dynamic programming
// with 64-bit cells; nothing here is shared with the kernels.
namespace pimalign::oracle {

inline bool same_base(char a, char b) { return a == b && a != 'N'; }

inline std::int64_t ref_nw(std::string_view pattern, std::string_view text, const LinearPenalties& pen = {}) {
    const std::size_t m = pattern.size(), n = text.size();
    std::vector<std::vector<std::int64_t>> d(m + 1, std::vector<std::int64_t>(n + 1, 0));
    for (std::size_t i = 0; i <= m; ++i) d[i][0] = static_cast<std::int64_t>(i) * pen.indel;
    for (std::size_t j = 0; j <= n; ++j) d[0][j] = static_cast<std::int64_t>(j) * pen.indel;
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            const std::int64_t sub = same_base(pattern[i - 1], text[j - 1]) ? pen.match : pen.mismatch;
            d[i][j] = std::min({d[i - 1][j - 1] + sub, d[i - 1][j] + pen.indel, d[i][j - 1] + pen.indel});
        }
    }
    return d[m][n];
}

inline std::int64_t ref_nw(const SequencePair& p, const LinearPenalties& pen = {}) {
    return ref_nw(p.pattern, p.text, pen);
}

/// Three-matrix Gotoh: M ends in a match/mismatch column, X in a gap in the
/// text (deletion), Y in a gap in the pattern (insertion). All transitions
/// between the three states are allowed.
inline std::int64_t ref_swg(std::string_view pattern, std::string_view text, const AffinePenalties& pen = {}) {
    const std::size_t m = pattern.size(), n = text.size();
    if (m == 0 && n == 0) return 0;
    const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    const std::int64_t o = pen.gap_open, e = pen.gap_extend;
    using Row = std::vector<std::int64_t>;
    std::vector<Row> M(m + 1, Row(n + 1, inf)), X(m + 1, Row(n + 1, inf)), Y(m + 1, Row(n + 1, inf));
    M[0][0] = 0;
    for (std::size_t i = 1; i <= m; ++i) X[i][0] = o + static_cast<std::int64_t>(i) * e;
    for (std::size_t j = 1; j <= n; ++j) Y[0][j] = o + static_cast<std::int64_t>(j) * e;
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            const std::int64_t sub = same_base(pattern[i - 1], text[j - 1]) ? pen.match : pen.mismatch;
            M[i][j] = std::min({M[i - 1][j - 1], X[i - 1][j - 1], Y[i - 1][j - 1]}) + sub;
            X[i][j] = std::min({M[i - 1][j] + o + e, X[i - 1][j] + e, Y[i - 1][j] + o + e});
            Y[i][j] = std::min({M[i][j - 1] + o + e, Y[i][j - 1] + e, X[i][j - 1] + o + e});
        }
    }
    return std::min({M[m][n], X[m][n], Y[m][n]});
}

inline std::int64_t ref_swg(const SequencePair& p, const AffinePenalties& pen = {}) {
    return ref_swg(p.pattern, p.text, pen);
}

inline std::int64_t ref_edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::int64_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<std::int64_t>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<std::int64_t>(i);
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j - 1] + (same_base(a[i - 1], b[j - 1]) ? 0 : 1), prev[j] + 1, cur[j - 1] + 1});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline std::int64_t ref_edit_distance(const SequencePair& p) { return ref_edit_distance(p.pattern, p.text); }

struct Replay {
    std::string text;
    std::int64_t cost = 0;
};

namespace detail {

struct Costs {
    std::int64_t mismatch, open, extend;
};

inline Replay replay(std::string_view pattern, std::string_view text, const Cigar& cigar, Costs c) {
    std::uint64_t m_used = 0, n_used = 0;
    for (const auto& r : cigar.runs()) {
        if (r.op != Op::Insertion) m_used += r.length;
        if (r.op != Op::Deletion) n_used += r.length;
    }
    if (m_used != pattern.size())
        throw PimError(ErrorCode::LengthMismatch, "CIGAR consumes " + std::to_string(m_used) + " pattern bases, pattern has " +
                                                     std::to_string(pattern.size()));
    if (n_used != text.size())
        throw PimError(ErrorCode::LengthMismatch,
                       "CIGAR consumes " + std::to_string(n_used) + " text bases, text has " + std::to_string(text.size()));

    Replay out;
    std::size_t i = 0, j = 0;
    for (const auto& r : cigar.runs()) {
        switch (r.op) {
            case Op::Match:
                for (std::uint32_t t = 0; t < r.length; ++t, ++i, ++j) {
                    if (!same_base(pattern[i], text[j])) out.cost = std::numeric_limits<std::int64_t>::max() / 4;
                    out.text += pattern[i];
                }
                break;
            case Op::Mismatch:
                for (std::uint32_t t = 0; t < r.length; ++t, ++i, ++j) {
                    out.text += text[j];
                    out.cost += c.mismatch;
                }
                break;
            case Op::Insertion:
                out.text.append(text.substr(j, r.length));
                j += r.length;
                out.cost += c.open + c.extend * r.length;
                break;
            case Op::Deletion:
                i += r.length;
                out.cost += c.open + c.extend * r.length;
                break;
        }
    }
    return out;
}

}  // namespace detail

/// Applies `cigar` to the pattern, drawing inserted and substituted bases from
/// `text`. An M over unequal bases makes the cost effectively infinite, and so
/// does an X over equal ones, so a wrong CIGAR can never replay cleanly.
inline Replay replay_cigar(std::string_view pattern, std::string_view text, const Cigar& cigar,
                           const AffinePenalties& pen) {
    Replay r = detail::replay(pattern, text, cigar, {pen.mismatch, pen.gap_open, pen.gap_extend});
    std::size_t i = 0, j = 0;
    for (const auto& run : cigar.runs()) {
        if (run.op == Op::Mismatch)
            for (std::uint32_t t = 0; t < run.length; ++t)
                if (same_base(pattern[i + t], text[j + t])) r.cost = std::numeric_limits<std::int64_t>::max() / 4;
        if (run.op != Op::Insertion) i += run.length;
        if (run.op != Op::Deletion) j += run.length;
    }
    return r;
}

inline Replay replay_cigar(std::string_view pattern, std::string_view text, const Cigar& cigar,
                           const LinearPenalties& pen) {
    AffinePenalties as_affine{pen.match, pen.mismatch, 0, pen.indel};
    return replay_cigar(pattern, text, cigar, as_affine);
}

template <class Pen>
inline Replay replay_cigar(const SequencePair& p, const Cigar& cigar, const Pen& pen) {
    return replay_cigar(p.pattern, p.text, cigar, pen);
}

/// Minimum affine cost over every alignment of two short strings, by explicit
/// enumeration of all edit scripts. Exponential; for lengths up to about 8.
inline std::int64_t enumerate_min_affine(std::string_view pattern, std::string_view text, const AffinePenalties& pen) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::vector<Op> ops;
    auto cost_of = [&](const std::vector<Op>& seq) {
        std::int64_t c = 0;
        std::size_t i = 0, j = 0;
        for (std::size_t t = 0; t < seq.size(); ++t) {
            const Op op = seq[t];
            const bool opens = t == 0 || seq[t - 1] != op;
            if (op == Op::Match || op == Op::Mismatch) {
                c += same_base(pattern[i], text[j]) ? pen.match : pen.mismatch;
                ++i;
                ++j;
            } else {
                c += pen.gap_extend + (opens ? pen.gap_open : 0);
                if (op == Op::Deletion) ++i;
                else ++j;
            }
        }
        return c;
    };
    auto walk = [&](auto&& self, std::size_t i, std::size_t j) -> void {
        if (i == pattern.size() && j == text.size()) {
            best = std::min(best, cost_of(ops));
            return;
        }
        if (i < pattern.size() && j < text.size()) {
            ops.push_back(Op::Match);
            self(self, i + 1, j + 1);
            ops.pop_back();
        }
        if (i < pattern.size()) {
            ops.push_back(Op::Deletion);
            self(self, i + 1, j);
            ops.pop_back();
        }
        if (j < text.size()) {
            ops.push_back(Op::Insertion);
            self(self, i, j + 1);
            ops.pop_back();
        }
    };
    walk(walk, 0, 0);
    return best;
}

}  // namespace pimalign::oracle
