#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace rodtrack {

struct ScoredCandidate {
    int source_id = 0;
    int target_id = 0;
    double score = 0.0;
};

/// One frame pair: every instance of frame t (sources) and t+1 (targets), and
/// the scored candidate links between them. Candidates with score <= 0 can
/// never be selected.
struct AssignmentProblem {
    std::vector<int> source_ids;
    std::vector<int> target_ids;
    std::vector<ScoredCandidate> candidates;

    int m() const { return static_cast<int>(source_ids.size()); }
    int n() const { return static_cast<int>(target_ids.size()); }
    int size() const { return static_cast<int>(candidates.size()); }
};

struct MatchResult {
    /// Selection indicator over problem.candidates.
    std::vector<std::uint8_t> x;
    std::vector<std::pair<int, int>> matched_pairs; // (source, target), ascending source
    std::vector<int> unmatched_sources;
    std::vector<int> unmatched_targets;
    /// Conflict resolutions performed (each one removes a candidate).
    int conflicts = 0;
    /// Passes of the outer while-loop.
    int passes = 0;

    double total_score(const AssignmentProblem& problem) const;
};

/// Incidence matrix Y ((m + n) x N; source rows first, then target rows) and
/// the all-ones bound b of the one-to-one constraint Y x <= b.
struct SystemMatrix {
    Eigen::MatrixXi Y;
    Eigen::VectorXi b;
};

/// Throws DataError for duplicate (source, target) pairs, negative scores, or
/// ids not listed in source_ids / target_ids.
void validate_problem(const AssignmentProblem& problem);

SystemMatrix build_system_matrix(const AssignmentProblem& problem);

/// True iff Y x <= b holds componentwise.
bool is_feasible(const AssignmentProblem& problem, std::span<const std::uint8_t> x);

/// The frame-pair one-to-one matching: every free source proposes to its best
/// remaining candidate; a target claimed twice keeps the higher score and the
/// loser's candidate is removed. Repeats until no conflict occurs. Ties prefer
/// the smaller target id, then the smaller source id.
MatchResult match_algorithm1(const AssignmentProblem& problem);

/// Exhaustive maximiser of the total score (N <= 24). Ties go to the
/// lexicographically smallest x.
MatchResult match_bruteforce(const AssignmentProblem& problem);

/// Candidates taken in descending score order (ties: smaller target, then
/// smaller source), skipping any that conflict with earlier picks.
MatchResult match_greedy_sorted(const AssignmentProblem& problem);

inline constexpr int kBruteforceLimit = 24;

} // namespace rodtrack
