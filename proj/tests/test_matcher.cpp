#include "rodtrack/matcher.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

namespace rodtrack {
namespace {

using Pairs = std::vector<std::pair<int, int>>;

AssignmentProblem problem(std::vector<int> sources, std::vector<int> targets, std::vector<ScoredCandidate> c) {
    return {std::move(sources), std::move(targets), std::move(c)};
}

// a(1,1)=0.9, a(2,1)=0.8, a(2,2)=0.5
AssignmentProblem conflict_2x2() { return problem({1, 2}, {1, 2}, {{1, 1, 0.9}, {2, 1, 0.8}, {2, 2, 0.5}}); }

TEST(SystemMatrix, SmallestInstance) {
    const auto s = build_system_matrix(problem({1}, {1}, {{1, 1, 0.5}}));
    EXPECT_EQ(s.Y, (Eigen::MatrixXi(2, 1) << 1, 1).finished());
    EXPECT_EQ(s.b, Eigen::VectorXi::Ones(2));
}

TEST(SystemMatrix, SharedTarget) {
    const auto s = build_system_matrix(problem({1, 2}, {1}, {{1, 1, 0.5}, {2, 1, 0.4}}));
    EXPECT_EQ(s.Y, (Eigen::MatrixXi(3, 2) << 1, 0, 0, 1, 1, 1).finished());
}

TEST(SystemMatrix, ColumnsSumToTwo) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto p = testing::random_problem(rng);
        const auto s = build_system_matrix(p);
        EXPECT_EQ(s.Y.rows(), p.m() + p.n());
        EXPECT_TRUE((s.Y.colwise().sum().array() == 2).all());
    }
}

TEST(ValidateProblem, RejectsMalformedInput) {
    EXPECT_THROW(validate_problem(problem({1}, {1}, {{1, 1, 0.5}, {1, 1, 0.4}})), DataError);
    EXPECT_THROW(validate_problem(problem({1}, {1}, {{1, 1, -0.1}})), DataError);
    EXPECT_THROW(validate_problem(problem({1}, {1}, {{1, 2, 0.3}})), DataError);
    EXPECT_NO_THROW(validate_problem(conflict_2x2()));
}

TEST(Algorithm1, ConflictGoesToHigherScore) {
    const auto r = match_algorithm1(conflict_2x2());
    EXPECT_EQ(r.matched_pairs, (Pairs{{1, 1}, {2, 2}}));
    EXPECT_EQ(r.conflicts, 1);
    EXPECT_DOUBLE_EQ(r.total_score(conflict_2x2()), 1.4);
}

TEST(Algorithm1, SingleCandidate) {
    const auto r = match_algorithm1(problem({1}, {1}, {{1, 1, 0.7}}));
    EXPECT_EQ(r.matched_pairs, (Pairs{{1, 1}}));
    EXPECT_EQ(r.x, (std::vector<std::uint8_t>{1}));
}

TEST(Algorithm1, LoserWithoutAlternativeStaysUnmatched) {
    const auto r = match_algorithm1(problem({1, 2}, {1}, {{1, 1, 0.4}, {2, 1, 0.6}}));
    EXPECT_EQ(r.matched_pairs, (Pairs{{2, 1}}));
    EXPECT_EQ(r.unmatched_sources, (std::vector<int>{1}));
    EXPECT_TRUE(r.unmatched_targets.empty());
}

TEST(Algorithm1, ZeroScoreIsNeverSelected) {
    const auto r = match_algorithm1(problem({1}, {1, 2}, {{1, 1, 0.0}, {1, 2, 0.0}}));
    EXPECT_TRUE(r.matched_pairs.empty());
    EXPECT_EQ(r.unmatched_targets, (std::vector<int>{1, 2}));
}

TEST(Algorithm1, TiesPreferSmallerTargetThenSmallerSource) {
    const auto a = match_algorithm1(problem({1}, {1, 2}, {{1, 2, 0.5}, {1, 1, 0.5}}));
    EXPECT_EQ(a.matched_pairs, (Pairs{{1, 1}}));
    const auto b = match_algorithm1(problem({1, 2}, {1}, {{2, 1, 0.5}, {1, 1, 0.5}}));
    EXPECT_EQ(b.matched_pairs, (Pairs{{1, 1}}));
}

TEST(Bruteforce, Examples) {
    const auto a = match_bruteforce(conflict_2x2());
    EXPECT_EQ(a.matched_pairs, match_algorithm1(conflict_2x2()).matched_pairs);
    EXPECT_DOUBLE_EQ(a.total_score(conflict_2x2()), 1.4);

    const auto p = problem({1, 2}, {1, 2}, {{1, 1, 0.9}, {1, 2, 0.85}, {2, 1, 0.89}});
    const auto b = match_bruteforce(p);
    EXPECT_EQ(b.matched_pairs, (Pairs{{1, 2}, {2, 1}}));
    EXPECT_NEAR(b.total_score(p), 1.74, 1e-12);
    // The conflict-resolution matcher does not reach this optimum: source 1
    // keeps target 1 and source 2 has nothing left to fall back to.
    EXPECT_EQ(match_algorithm1(p).matched_pairs, (Pairs{{1, 1}}));

    const auto empty = match_bruteforce(problem({1}, {1}, {}));
    EXPECT_TRUE(empty.matched_pairs.empty());
    EXPECT_EQ(empty.total_score(problem({1}, {1}, {})), 0.0);
}

TEST(Bruteforce, RejectsLargeProblems) {
    AssignmentProblem p;
    for (int i = 1; i <= 5; ++i) p.source_ids.push_back(i);
    for (int j = 1; j <= 5; ++j) p.target_ids.push_back(j);
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j) p.candidates.push_back({i, j, 0.1 * i + 0.01 * j});
    EXPECT_THROW(match_bruteforce(p), DataError);
}

TEST(Greedy, ConflictExample) {
    EXPECT_EQ(match_greedy_sorted(conflict_2x2()).matched_pairs, (Pairs{{1, 1}, {2, 2}}));
}

TEST(Greedy, EqualsAlgorithm1OnDistinctScores5x5) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    AssignmentProblem p;
    for (int i = 1; i <= 5; ++i) p.source_ids.push_back(i), p.target_ids.push_back(i);
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j) p.candidates.push_back({i, j, u(rng)});
    EXPECT_EQ(match_greedy_sorted(p).x, match_algorithm1(p).x);
}

// Properties over random problems: feasibility, termination bound, maximality,
// oracle equivalence (also under quantized ties), never better than the optimum.
TEST(MatcherProperties, RandomProblems) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const bool ties = trial % 2 == 1;
        const auto p = testing::random_problem(rng, 10, 4, ties);
        const auto a = match_algorithm1(p);
        ASSERT_TRUE(is_feasible(p, a.x));
        ASSERT_TRUE(testing::one_to_one(p, a.x));
        ASSERT_LE(a.conflicts, p.size());

        std::set<int> free_s(a.unmatched_sources.begin(), a.unmatched_sources.end());
        std::set<int> free_t(a.unmatched_targets.begin(), a.unmatched_targets.end());
        for (const auto& c : p.candidates)
            ASSERT_FALSE(c.score > 0 && free_s.count(c.source_id) && free_t.count(c.target_id));

        const auto g = match_greedy_sorted(p);
        ASSERT_EQ(g.x, a.x) << "trial " << trial;

        if (p.size() <= 12) {
            const auto b = match_bruteforce(p);
            ASSERT_TRUE(is_feasible(p, b.x));
            ASSERT_LE(a.total_score(p), b.total_score(p) + 1e-12);
        }
    }
}

TEST(Bruteforce, TiesGoToLexicographicallySmallestX) {
    // Two optima of total 1.0: {(1,1),(2,2)} -> x = 1,0,0,1 and {(1,2),(2,1)} -> x = 0,1,1,0.
    const auto p = problem({1, 2}, {1, 2}, {{1, 1, 0.5}, {1, 2, 0.5}, {2, 1, 0.5}, {2, 2, 0.5}});
    EXPECT_EQ(match_bruteforce(p).x, (std::vector<std::uint8_t>{0, 1, 1, 0}));
}

} // namespace
} // namespace rodtrack
