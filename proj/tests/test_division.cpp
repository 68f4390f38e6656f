#include "rodtrack/division.hpp"
#include "rodtrack/scorer.hpp"
#include "rodtrack/simulator.hpp"
#include "rodtrack/tracker.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

namespace rodtrack {
namespace {

using testing::grid_rod;

InstanceObservation rod(int frame, int id, const Vec3& c, const Vec3& dir, double length, double radius) {
    return InstanceObservation::from_points(frame, id, grid_rod(c, dir, length, radius));
}

/// Matching that follows the ground truth: every source links to its
/// continuation (identity-continuing daughter at a division).
std::vector<MatchResult> oracle_matches(const Sequence& seq, const GroundTruthLineage& gt) {
    const GroundTruthIndex index(seq, gt);
    std::vector<MatchResult> out;
    for (int t = 0; t + 1 < seq.frame_count(); ++t) {
        AssignmentProblem p;
        for (const auto& o : seq.frames[static_cast<std::size_t>(t)].instances) p.source_ids.push_back(o.instance_id);
        for (const auto& o : seq.frames[static_cast<std::size_t>(t + 1)].instances) p.target_ids.push_back(o.instance_id);
        for (int s : p.source_ids)
            if (int c = index.continuation(t, s)) p.candidates.push_back({s, c, 1.0});
        out.push_back(match_algorithm1(p));
    }
    return out;
}

std::vector<std::map<int, int>> propagate_ids(const Sequence& seq, const std::vector<MatchResult>& matches, int& next) {
    std::vector<std::map<int, int>> maps(seq.frames.size());
    for (const auto& o : seq.frames[0].instances) maps[0][o.instance_id] = next++;
    for (std::size_t t = 0; t < matches.size(); ++t) maps[t + 1] = assign_ids(matches[t], maps[t], next);
    return maps;
}

TEST(PrincipalFrame, LineAlongX) {
    std::vector<Vec3> pts;
    for (int k = -5; k <= 5; ++k) pts.emplace_back(-0.5 * k, 0, 0);
    const auto pf = principal_frame(pts);
    EXPECT_NEAR((pf.axes[0] - Vec3::UnitX()).norm(), 0.0, 1e-12);
    EXPECT_NEAR(pf.singular_values[1], 0.0, 1e-9);
    EXPECT_NEAR(pf.singular_values[2], 0.0, 1e-9);
    EXPECT_NEAR(pf.axes[1].dot(pf.axes[0]), 0.0, 1e-9);
}

TEST(PrincipalFrame, SampledRodAlongY) {
    CellAgent a;
    a.orientation = Vec3::UnitY();
    a.radius = 2;
    a.length = 16;
    std::mt19937_64 rng(8);
    const auto pts = sample_rod_points(a, 1500, rng);
    EXPECT_GT(std::abs(principal_frame(pts).axes[0].dot(Vec3::UnitY())), 0.99);
}

TEST(PrincipalFrame, OrthonormalDescendingAndMatchesPowerIteration) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto R = testing::random_rotation(rng);
        const auto pts = grid_rod(Vec3(3, -1, 7), R.col(0), 10, 2.5);
        const auto pf = principal_frame(pts);
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(pf.axes[static_cast<std::size_t>(i)].norm(), 1.0, 1e-9);
            for (int j = i + 1; j < 3; ++j)
                EXPECT_NEAR(pf.axes[static_cast<std::size_t>(i)].dot(pf.axes[static_cast<std::size_t>(j)]), 0.0, 1e-9);
        }
        EXPECT_GE(pf.singular_values[0], pf.singular_values[1]);
        EXPECT_GE(pf.singular_values[1], pf.singular_values[2]);
        EXPECT_GT(std::abs(pf.axes[0].dot(testing::power_iteration_axis(pts))), 1.0 - 1e-9);
        // Canonical sign: largest-magnitude component positive.
        for (const auto& v : pf.axes) {
            Eigen::Index k = 0;
            v.cwiseAbs().maxCoeff(&k);
            EXPECT_GT(v[k], 0.0);
        }
    }
}

TEST(PrincipalFrame, RotationEquivariance) {
    std::mt19937_64 rng(13);
    const auto base = grid_rod(Vec3(0, 0, 0), Vec3(1, 0.3, 0.1), 12, 2.0);
    // Non-symmetric cloud so the minor axes are well separated.
    std::vector<Vec3> pts;
    for (const auto& p : base) pts.push_back(Vec3(p.x(), 1.6 * p.y(), p.z()));
    const auto pf = principal_frame(pts);
    for (int trial = 0; trial < 20; ++trial) {
        const auto R = testing::random_rotation(rng);
        const Vec3 shift(5, -7, 2);
        std::vector<Vec3> moved;
        for (const auto& p : pts) moved.push_back(R * p + shift);
        const auto pm = principal_frame(moved);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(pm.axes[i].dot(R * pf.axes[i])), 1.0, 1e-9);
        EXPECT_TRUE(pm.singular_values.isApprox(pf.singular_values, 1e-9));
    }
}

TEST(PrincipalFrame, DegenerateInput) {
    EXPECT_THROW(principal_frame(std::vector<Vec3>{Vec3::Zero(), Vec3::UnitX()}), DegenerateGeometry);
    EXPECT_THROW(principal_frame(std::vector<Vec3>(5, Vec3(1, 2, 3))), DegenerateGeometry);
}

TEST(ProjectionValue, Examples) {
    const auto pf = principal_frame(grid_rod(Vec3::Zero(), Vec3::UnitX(), 10, 2));
    EXPECT_NEAR(projection_value(pf, grid_rod(Vec3(15, 0, 0), Vec3::UnitX(), 10, 2)), 0.0, 1e-9);

    const double d = 4.5;
    const std::vector<Vec3> lateral{pf.centroid + d * pf.axes[1] + pf.axes[0], pf.centroid + d * pf.axes[1] - pf.axes[0]};
    EXPECT_NEAR(projection_value(pf, lateral), d, 1e-9);

    std::vector<Vec3> doubled = lateral;
    doubled.insert(doubled.end(), lateral.begin(), lateral.end());
    EXPECT_DOUBLE_EQ(projection_value(pf, doubled), projection_value(pf, lateral));
}

TEST(ProjectionValue, InvariantUnderRigidMotion) {
    std::mt19937_64 rng(14);
    const auto x = grid_rod(Vec3(1, 2, 3), Vec3(1, 1, 0), 10, 2);
    const auto y = grid_rod(Vec3(9, 4, 6), Vec3(0, 1, 1), 10, 2);
    const double pv = projection_value(principal_frame(x), y);
    for (int trial = 0; trial < 10; ++trial) {
        const auto R = testing::random_rotation(rng);
        const Vec3 t(10 * trial, -3, 2);
        std::vector<Vec3> xr, yr;
        for (const auto& p : x) xr.push_back(R * p + t);
        for (const auto& p : y) yr.push_back(R * p + t);
        EXPECT_NEAR(projection_value(principal_frame(xr), yr), pv, 1e-9);
    }
}

TEST(FindSibling, CollinearBeatsLateralDistractor) {
    const auto x = rod(1, 5, Vec3::Zero(), Vec3::UnitX(), 10, 2);
    FrameObservations f{1, {x, rod(1, 2, Vec3(14.5, 0, 0), Vec3::UnitX(), 10, 2),
                            rod(1, 1, Vec3(0, 14.5, 0), Vec3::UnitX(), 10, 2)}};
    f.sort_by_id();
    EXPECT_EQ(find_sibling(x, f), 2);
}

TEST(FindSibling, EmptyNeighbourhoodAndSingleNeighbour) {
    const auto x = rod(1, 1, Vec3::Zero(), Vec3::UnitX(), 10, 2);
    FrameObservations far{1, {x, rod(1, 2, Vec3(80, 0, 0), Vec3::UnitY(), 10, 2)}};
    EXPECT_FALSE(find_sibling(x, far).has_value());
    FrameObservations one{1, {x, rod(1, 2, Vec3(3, 8, 0), Vec3::UnitY(), 10, 2)}};
    EXPECT_EQ(find_sibling(x, one), 2);
}

TEST(FindSibling, RandomSplitFixtures) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 30; ++trial) {
        const auto fx = testing::rod_split_fixture(rng, 1 + trial % 5);
        const auto* x = fx.frame.find(fx.x_id);
        EXPECT_EQ(find_sibling(*x, fx.frame), fx.sibling_id) << "trial " << trial;
        const auto pf = principal_frame(x->points);
        EXPECT_LT(projection_value(pf, fx.frame.find(fx.sibling_id)->points), 1e-6 * fx.rod_length);
    }
}

TEST(ConfirmDivision, Band) {
    EXPECT_TRUE(confirm_division(50, 100));
    EXPECT_FALSE(confirm_division(90, 100));
    EXPECT_TRUE(confirm_division(36, 100));
    EXPECT_FALSE(confirm_division(30, 100));
    EXPECT_THROW(confirm_division(0, 100), DataError);
    EXPECT_THROW(confirm_division(10, -1), DataError);
}

/// Frame 0: parents; frame 1: each parent split end to end into two halves.
/// The half keeping the parent's instance id is matched to it.
Sequence split_sequence(const std::vector<Vec3>& centres) {
    Sequence s;
    s.frames.push_back({0, {}});
    s.frames.push_back({1, {}});
    int next = 100;
    for (std::size_t k = 0; k < centres.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        s.frames[0].instances.push_back(rod(0, id, centres[k], Vec3::UnitX(), 24.5, 2.5));
        s.frames[1].instances.push_back(rod(1, id, centres[k] - Vec3(7.5, 0, 0), Vec3::UnitX(), 10, 2.5));
        s.frames[1].instances.push_back(rod(1, next++, centres[k] + Vec3(7.5, 0, 0), Vec3::UnitX(), 10, 2.5));
    }
    for (auto& f : s.frames) f.sort_by_id();
    return s;
}

MatchResult identity_match(const Sequence& s) {
    AssignmentProblem p;
    for (const auto& o : s.frames[0].instances) p.source_ids.push_back(o.instance_id);
    for (const auto& o : s.frames[1].instances) p.target_ids.push_back(o.instance_id);
    for (int id : p.source_ids) p.candidates.push_back({id, id, 1.0});
    return match_algorithm1(p);
}

TEST(DetectDivisions, TwoSimultaneousDivisionsDoNotInteract) {
    const auto s = split_sequence({Vec3(0, 0, 0), Vec3(0, 80, 0)});
    const auto m = identity_match(s);
    int next = 1;
    const auto maps = propagate_ids(s, {m}, next);
    const auto det = detect_divisions(s, {m}, maps, next);
    ASSERT_EQ(det.events.size(), 2u);
    const int p1 = maps[0].at(1), p2 = maps[0].at(2);
    const int sib1 = next, sib2 = next + 1; // fresh ids in detection order
    EXPECT_EQ(det.events[0], (DivisionEvent{p1, std::min(sib1, maps[1].at(100)), std::max(sib1, maps[1].at(100)), 1}));
    EXPECT_EQ(det.events[1], (DivisionEvent{p2, std::min(sib2, maps[1].at(101)), std::max(sib2, maps[1].at(101)), 1}));
    ASSERT_EQ(det.relabels.size(), 2u);
    EXPECT_EQ(det.relabels[0].old_track, p1);
    EXPECT_EQ(det.relabels[0].from_frame, 1);
    EXPECT_EQ(det.parents.at(sib1), p1);
    EXPECT_EQ(det.parents.at(maps[1].at(101)), p2);
}

TEST(DetectDivisions, BothDaughtersUnmatchedFallsBackToNearbyParent) {
    const auto s = split_sequence({Vec3(0, 0, 0)});
    AssignmentProblem p{{1}, {1, 100}, {}};
    const auto m = match_algorithm1(p);
    const auto found = detect_frame_divisions(s.frames[0], s.frames[1], m);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].parent_instance, 1);
    EXPECT_FALSE(found[0].sibling_was_matched);
}

TEST(DetectDivisions, NewcomerWithoutNeighbourIsNotADivision) {
    Sequence s;
    s.frames.push_back({0, {rod(0, 1, Vec3::Zero(), Vec3::UnitX(), 10, 2)}});
    s.frames.push_back({1, {rod(1, 1, Vec3(0.5, 0, 0), Vec3::UnitX(), 10, 2), rod(1, 2, Vec3(200, 0, 0), Vec3::UnitY(), 10, 2)}});
    const auto m = identity_match(s);
    int next = 1;
    const auto maps = propagate_ids(s, {m}, next);
    const auto det = detect_divisions(s, {m}, maps, next);
    EXPECT_TRUE(det.events.empty());
    EXPECT_TRUE(det.parents.empty());
}

TEST(DetectDivisions, ShrinkageIsNotADivision) {
    Sequence s;
    s.frames.push_back({0, {rod(0, 1, Vec3::Zero(), Vec3::UnitX(), 12, 2.5)}});
    s.frames.push_back({1, {rod(1, 1, Vec3::Zero(), Vec3::UnitX(), 11, 2.5), rod(1, 2, Vec3(14, 0, 0), Vec3::UnitX(), 6, 2.5)}});
    const auto m = identity_match(s);
    EXPECT_TRUE(detect_frame_divisions(s.frames[0], s.frames[1], m).empty());
}

TEST(DetectDivisions, CollinearCousinIsSkippedByTheVolumeTest) {
    // A chain along x: cousin 1 (unchanged), parent 2 splitting into 2 (kept,
    // slightly off-axis) and 3 (new). The cousin has the smaller PV for 3.
    Sequence s;
    s.frames.push_back({0, {rod(0, 1, Vec3(-15, 0, 0), Vec3::UnitX(), 10, 2.5),
                            rod(0, 2, Vec3(7.5, 0, 0), Vec3::UnitX(), 25, 2.5)}});
    s.frames.push_back({1, {rod(1, 1, Vec3(-15, 0, 0), Vec3::UnitX(), 10, 2.5),
                            rod(1, 2, Vec3(15, 0.2, 0), Vec3::UnitX(), 10, 2.5),
                            rod(1, 3, Vec3(0, 0, 0), Vec3::UnitX(), 10, 2.5)}});
    const auto& x = *s.frames[1].find(3);
    EXPECT_EQ(find_sibling(x, s.frames[1]), 1);
    EXPECT_EQ(rank_siblings(x, s.frames[1]), (std::vector<int>{1, 2}));

    const auto found = detect_frame_divisions(s.frames[0], s.frames[1], identity_match(s));
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].parent_instance, 2);
    EXPECT_EQ(found[0].sibling_instance, 2);
    EXPECT_EQ(found[0].unmatched_instance, 3);
}

TEST(DetectDivisions, SimulatedDivisionWithOracleMatching) {
    SimConfig c;
    c.frames = 13;
    c.division_jitter = false;
    const auto [seq, gt] = simulate(c);
    ASSERT_EQ(gt.division_events.size(), 1u);
    const auto matches = oracle_matches(seq, gt);
    int next = 1;
    const auto maps = propagate_ids(seq, matches, next);
    const auto det = detect_divisions(seq, matches, maps, next);
    ASSERT_EQ(det.events.size(), 1u);
    EXPECT_EQ(det.events[0].frame_of_daughters, gt.division_events[0].frame_of_daughters);
    EXPECT_EQ(det.events[0].parent_track, maps[0].at(gt.division_events[0].parent_track));
    for (const auto& [child, parent] : det.parents) EXPECT_NE(child, parent);
}

} // namespace
} // namespace rodtrack
