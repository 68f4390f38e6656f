#include "rodtrack/model.hpp"

#include <gtest/gtest.h>

namespace rodtrack {
namespace {

InstanceObservation box_instance(int frame, int id) {
    InstanceObservation o;
    o.frame_index = frame;
    o.instance_id = id;
    o.bbox_min = Vec3(0, 0, 0);
    o.bbox_extent = Vec3(2, 4, 6);
    o.centroid = Vec3(1, 2, 3);
    o.volume = 48;
    return o;
}

Sequence single(const InstanceObservation& o) {
    Sequence s;
    s.frames.push_back({0, {o}});
    return s;
}

TEST(ValidateSequence, ConsistentInstanceHasNoViolations) {
    EXPECT_TRUE(validate_sequence(single(box_instance(0, 1))).empty());
}

TEST(ValidateSequence, CentroidOutsideBoxIsReported) {
    auto o = box_instance(0, 7);
    o.centroid = Vec3(5, 2, 3);
    const auto v = validate_sequence(single(o));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("frame 0"), std::string::npos);
    EXPECT_NE(v[0].find("instance 7"), std::string::npos);
    EXPECT_NE(v[0].find("centroid"), std::string::npos);
}

TEST(ValidateSequence, VolumeMustEqualPointCount) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 10; ++i) pts.emplace_back(0.1 * i, 0.0, 0.0);
    auto o = InstanceObservation::from_points(0, 1, pts);
    ASSERT_EQ(o.volume, 10.0);
    o.volume = 9;
    const auto v = validate_sequence(single(o));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("volume mismatch"), std::string::npos);
}

TEST(ValidateSequence, FrameIndicesMustBeContiguousAndIdsUnique) {
    Sequence s;
    s.frames.push_back({0, {box_instance(0, 1), box_instance(0, 1)}});
    s.frames.push_back({2, {}});
    const auto v = validate_sequence(s);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NE(v[0].find("duplicate"), std::string::npos);
    EXPECT_NE(v[1].find("contiguous"), std::string::npos);
}

TEST(ValidateSequence, DeterministicOrder) {
    auto bad = box_instance(0, 3);
    bad.centroid = Vec3(-1, 0, 0);
    bad.volume = 0;
    const auto a = validate_sequence(single(bad));
    const auto b = validate_sequence(single(bad));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 2u);
}

TEST(FromPoints, ComputesCentroidBoxAndVolume) {
    const auto o = InstanceObservation::from_points(2, 4, {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(1, 3, 0)});
    EXPECT_EQ(o.centroid, Vec3(1, 1, 0));
    EXPECT_EQ(o.bbox_min, Vec3(0, 0, 0));
    EXPECT_EQ(o.bbox_extent, Vec3(2, 3, 0));
    EXPECT_EQ(o.volume, 3.0);
    EXPECT_THROW(InstanceObservation::from_points(0, 1, {}), DataError);
}

TEST(ValidateLineage, ParentMustEndJustBeforeChild) {
    GroundTruthLineage g;
    g.tracks.push_back({1, 0, 1, {Vec3::Zero(), Vec3::Zero()}, 0});
    g.tracks.push_back({2, 3, 3, {Vec3::Zero()}, 1});
    g.division_events.push_back({1, 2, 3, 3});
    const auto v = validate_lineage(g);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NE(v[0].find("parent does not end"), std::string::npos);
    EXPECT_NE(v[1].find("child 3"), std::string::npos);
}

} // namespace
} // namespace rodtrack
