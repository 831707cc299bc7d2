#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace pimalign {

struct SequencePair {
    std::string pattern;
    std::string text;

    bool operator==(const SequencePair&) const = default;
};

/// How characters outside {A,C,G,T} are treated at ingestion.
enum class AlphabetPolicy {
    Strict,    // reject
    MapToN,    // rewrite to 'N', which mismatches everything (itself included)
};

inline bool is_base(char c) { return c == 'A' || c == 'C' || c == 'G' || c == 'T'; }

inline bool bases_match(char a, char b) { return a == b && a != 'N'; }

/// Returns the index of the first offending character, or npos.
inline std::size_t find_non_base(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!is_base(s[i])) return i;
    return std::string_view::npos;
}

/// Lowercase bases (soft-masked input) are uppercased under either policy.
inline void apply_alphabet_policy(std::string& s, AlphabetPolicy policy, const std::string& where) {
    for (char& c : s)
        if (c == 'a' || c == 'c' || c == 'g' || c == 't') c = static_cast<char>(c - 'a' + 'A');
    if (auto bad = find_non_base(s); bad != std::string_view::npos) {
        if (policy == AlphabetPolicy::Strict) {
            throw PimError(ErrorCode::AlphabetError,
                           where + ": character '" + std::string(1, s[bad]) + "' at position " + std::to_string(bad));
        }
        for (char& c : s)
            if (!is_base(c)) c = 'N';
    }
}

// ---------------------------------------------------------------------------
// CIGAR: runs of M (match), X (mismatch), I (consumes text), D (consumes pattern)

enum class Op : std::uint8_t { Match = 0, Mismatch = 1, Insertion = 2, Deletion = 3 };

inline char op_char(Op op) {
    constexpr char chars[] = {'M', 'X', 'I', 'D'};
    return chars[static_cast<int>(op)];
}

inline bool op_from_char(char c, Op& out) {
    switch (c) {
        case 'M': out = Op::Match; return true;
        case 'X': out = Op::Mismatch; return true;
        case 'I': out = Op::Insertion; return true;
        case 'D': out = Op::Deletion; return true;
        default: return false;
    }
}

struct CigarRun {
    Op op;
    std::uint32_t length;

    bool operator==(const CigarRun&) const = default;
};

class Cigar {
public:
    Cigar() = default;

    void push(Op op, std::uint32_t length = 1) {
        if (length == 0) return;
        if (!runs_.empty() && runs_.back().op == op) runs_.back().length += length;
        else runs_.push_back({op, length});
    }

    const std::vector<CigarRun>& runs() const { return runs_; }
    bool empty() const { return runs_.empty(); }

    std::uint64_t pattern_length() const { return count(Op::Match) + count(Op::Mismatch) + count(Op::Deletion); }
    std::uint64_t text_length() const { return count(Op::Match) + count(Op::Mismatch) + count(Op::Insertion); }

    std::uint64_t count(Op op) const {
        std::uint64_t n = 0;
        for (const auto& r : runs_)
            if (r.op == op) n += r.length;
        return n;
    }

    /// Number of unit edits (X, I and D operations).
    std::uint64_t edit_count() const { return count(Op::Mismatch) + count(Op::Insertion) + count(Op::Deletion); }

    std::string to_string() const {
        std::string out;
        for (const auto& r : runs_) {
            out += std::to_string(r.length);
            out += op_char(r.op);
        }
        return out;
    }

    static Cigar parse(std::string_view text) {
        Cigar c;
        std::uint64_t len = 0;
        bool have_digits = false;
        for (char ch : text) {
            if (ch >= '0' && ch <= '9') {
                len = len * 10 + static_cast<std::uint64_t>(ch - '0');
                if (len > 0xFFFFFFFFull) throw PimError(ErrorCode::ParseError, "CIGAR run too long");
                have_digits = true;
                continue;
            }
            Op op;
            if (!op_from_char(ch, op) || !have_digits || len == 0)
                throw PimError(ErrorCode::ParseError, "malformed CIGAR '" + std::string(text) + "'");
            c.push(op, static_cast<std::uint32_t>(len));
            len = 0;
            have_digits = false;
        }
        if (have_digits) throw PimError(ErrorCode::ParseError, "CIGAR ends without an operation");
        return c;
    }

    bool operator==(const Cigar&) const = default;

private:
    std::vector<CigarRun> runs_;
};

}  // namespace pimalign
