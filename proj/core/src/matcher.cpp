#include "rodtrack/matcher.hpp"

#include "rodtrack/model.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace rodtrack {

namespace {

constexpr double kTieEps = 1e-12;

int index_of(const std::vector<int>& sorted_ids, int id) {
    auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
    if (it == sorted_ids.end() || *it != id) return -1;
    return static_cast<int>(it - sorted_ids.begin());
}

std::vector<int> sorted_copy(std::vector<int> ids) {
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Fills pairs and the unmatched lists from x.
MatchResult finish(const AssignmentProblem& p, std::vector<std::uint8_t> x) {
    MatchResult r;
    r.x = std::move(x);
    std::set<int> used_s;
    std::set<int> used_t;
    for (int k = 0; k < p.size(); ++k) {
        if (!r.x[static_cast<std::size_t>(k)]) continue;
        const auto& c = p.candidates[static_cast<std::size_t>(k)];
        r.matched_pairs.emplace_back(c.source_id, c.target_id);
        used_s.insert(c.source_id);
        used_t.insert(c.target_id);
    }
    std::sort(r.matched_pairs.begin(), r.matched_pairs.end());
    for (int s : sorted_copy(p.source_ids))
        if (!used_s.count(s)) r.unmatched_sources.push_back(s);
    for (int t : sorted_copy(p.target_ids))
        if (!used_t.count(t)) r.unmatched_targets.push_back(t);
    return r;
}

} // namespace

double MatchResult::total_score(const AssignmentProblem& problem) const {
    double total = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
        if (x[k]) total += problem.candidates[k].score;
    return total;
}

void validate_problem(const AssignmentProblem& p) {
    const auto sources = sorted_copy(p.source_ids);
    const auto targets = sorted_copy(p.target_ids);
    if (std::adjacent_find(sources.begin(), sources.end()) != sources.end()) throw DataError("duplicate source id");
    if (std::adjacent_find(targets.begin(), targets.end()) != targets.end()) throw DataError("duplicate target id");
    std::set<std::pair<int, int>> seen;
    for (const auto& c : p.candidates) {
        std::ostringstream os;
        os << "candidate (" << c.source_id << ", " << c.target_id << "): ";
        if (index_of(sources, c.source_id) < 0) throw DataError(os.str() + "unknown source");
        if (index_of(targets, c.target_id) < 0) throw DataError(os.str() + "unknown target");
        if (!(c.score >= 0.0)) throw DataError(os.str() + "score must be >= 0");
        if (!seen.emplace(c.source_id, c.target_id).second) throw DataError(os.str() + "duplicate pair");
    }
}

SystemMatrix build_system_matrix(const AssignmentProblem& p) {
    validate_problem(p);
    const auto sources = sorted_copy(p.source_ids);
    const auto targets = sorted_copy(p.target_ids);
    SystemMatrix sys;
    sys.Y = Eigen::MatrixXi::Zero(p.m() + p.n(), p.size());
    sys.b = Eigen::VectorXi::Ones(p.m() + p.n());
    for (int k = 0; k < p.size(); ++k) {
        const auto& c = p.candidates[static_cast<std::size_t>(k)];
        sys.Y(index_of(sources, c.source_id), k) = 1;
        sys.Y(p.m() + index_of(targets, c.target_id), k) = 1;
    }
    return sys;
}

bool is_feasible(const AssignmentProblem& p, std::span<const std::uint8_t> x) {
    if (static_cast<int>(x.size()) != p.size()) return false;
    const auto sys = build_system_matrix(p);
    Eigen::VectorXi xv(p.size());
    for (int k = 0; k < p.size(); ++k) xv(k) = x[static_cast<std::size_t>(k)] ? 1 : 0;
    return ((sys.Y * xv).array() <= sys.b.array()).all();
}

MatchResult match_algorithm1(const AssignmentProblem& p) {
    validate_problem(p);
    const auto sources = sorted_copy(p.source_ids);
    const auto targets = sorted_copy(p.target_ids);
    const auto& cand = p.candidates;

    // Per-source candidate lists, best first; cursor skips removed entries.
    std::vector<std::vector<int>> options(sources.size());
    for (int k = 0; k < p.size(); ++k) {
        if (cand[static_cast<std::size_t>(k)].score > 0.0)
            options[static_cast<std::size_t>(index_of(sources, cand[static_cast<std::size_t>(k)].source_id))].push_back(k);
    }
    for (auto& list : options) {
        std::sort(list.begin(), list.end(), [&](int a, int b) {
            const auto& ca = cand[static_cast<std::size_t>(a)];
            const auto& cb = cand[static_cast<std::size_t>(b)];
            if (ca.score != cb.score) return ca.score > cb.score;
            return ca.target_id < cb.target_id;
        });
    }
    std::vector<std::size_t> cursor(sources.size(), 0);
    std::vector<std::uint8_t> removed(cand.size(), 0);
    std::vector<int> source_pick(sources.size(), -1); // D0
    std::vector<int> target_pick(targets.size(), -1); // D1

    auto beats = [&](int k, int incumbent) {
        const auto& a = cand[static_cast<std::size_t>(k)];
        const auto& b = cand[static_cast<std::size_t>(incumbent)];
        if (a.score != b.score) return a.score > b.score;
        return a.source_id < b.source_id;
    };

    MatchResult stats;
    bool conflict = true;
    while (conflict) {
        conflict = false;
        ++stats.passes;
        for (std::size_t i = 0; i < sources.size(); ++i) {
            if (source_pick[i] != -1) continue;
            auto& list = options[i];
            while (cursor[i] < list.size() && removed[static_cast<std::size_t>(list[cursor[i]])]) ++cursor[i];
            if (cursor[i] == list.size()) continue; // exhausted: stays unmatched
            const int k = list[cursor[i]];
            const auto tj = static_cast<std::size_t>(index_of(targets, cand[static_cast<std::size_t>(k)].target_id));
            const int incumbent = target_pick[tj];
            if (incumbent == -1) {
                target_pick[tj] = k;
                source_pick[i] = k;
                continue;
            }
            conflict = true;
            ++stats.conflicts;
            if (beats(k, incumbent)) {
                removed[static_cast<std::size_t>(incumbent)] = 1;
                source_pick[static_cast<std::size_t>(index_of(sources, cand[static_cast<std::size_t>(incumbent)].source_id))] = -1;
                target_pick[tj] = k;
                source_pick[i] = k;
            } else {
                removed[static_cast<std::size_t>(k)] = 1;
            }
        }
    }

    std::vector<std::uint8_t> x(cand.size(), 0);
    for (int k : source_pick)
        if (k != -1) x[static_cast<std::size_t>(k)] = 1;
    auto result = finish(p, std::move(x));
    result.conflicts = stats.conflicts;
    result.passes = stats.passes;
    return result;
}

MatchResult match_bruteforce(const AssignmentProblem& p) {
    validate_problem(p);
    if (p.size() > kBruteforceLimit) {
        std::ostringstream os;
        os << "match_bruteforce: " << p.size() << " candidates exceed the limit of " << kBruteforceLimit;
        throw DataError(os.str());
    }
    const auto sources = sorted_copy(p.source_ids);
    const auto targets = sorted_copy(p.target_ids);
    const auto n = static_cast<std::size_t>(p.size());
    std::vector<int> src(n);
    std::vector<int> tgt(n);
    std::vector<double> suffix(n + 1, 0.0); // sum of selectable scores from k on
    for (std::size_t k = 0; k < n; ++k) {
        src[k] = index_of(sources, p.candidates[k].source_id);
        tgt[k] = index_of(targets, p.candidates[k].target_id);
    }
    for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + std::max(0.0, p.candidates[k].score);

    std::vector<std::uint8_t> cur(n, 0);
    std::vector<std::uint8_t> best(n, 0);
    std::vector<std::uint8_t> used_s(sources.size(), 0);
    std::vector<std::uint8_t> used_t(targets.size(), 0);
    double best_total = 0.0;

    // x[k] = 0 is explored before x[k] = 1, so the first optimum found is the
    // lexicographically smallest; later solutions replace it only if strictly better.
    auto dfs = [&](auto&& self, std::size_t k, double total) -> void {
        if (total + suffix[k] <= best_total + kTieEps) return;
        if (k == n) {
            best_total = total;
            best = cur;
            return;
        }
        self(self, k + 1, total);
        const auto s = static_cast<std::size_t>(src[k]);
        const auto t = static_cast<std::size_t>(tgt[k]);
        if (p.candidates[k].score > 0.0 && !used_s[s] && !used_t[t]) {
            used_s[s] = used_t[t] = 1;
            cur[k] = 1;
            self(self, k + 1, total + p.candidates[k].score);
            cur[k] = 0;
            used_s[s] = used_t[t] = 0;
        }
    };
    dfs(dfs, 0, 0.0);
    return finish(p, std::move(best));
}

MatchResult match_greedy_sorted(const AssignmentProblem& p) {
    validate_problem(p);
    std::vector<std::size_t> order(p.candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = p.candidates[a];
        const auto& cb = p.candidates[b];
        if (ca.score != cb.score) return ca.score > cb.score;
        if (ca.target_id != cb.target_id) return ca.target_id < cb.target_id;
        return ca.source_id < cb.source_id;
    });
    std::set<int> used_s;
    std::set<int> used_t;
    std::vector<std::uint8_t> x(p.candidates.size(), 0);
    for (auto k : order) {
        const auto& c = p.candidates[k];
        if (!(c.score > 0.0) || used_s.count(c.source_id) || used_t.count(c.target_id)) continue;
        used_s.insert(c.source_id);
        used_t.insert(c.target_id);
        x[k] = 1;
    }
    return finish(p, std::move(x));
}

} // namespace rodtrack
