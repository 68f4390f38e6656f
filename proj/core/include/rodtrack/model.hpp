#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace rodtrack {

using Vec3 = Eigen::Vector3d;

/// Raised for malformed inputs: bad files, inconsistent ids, dimension mismatches.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid configuration values or unknown configuration keys.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One segmented instance in one frame. Coordinates are in voxels.
///
/// `volume` is stored rather than derived so that feature-only inputs (no
/// point cloud) are representable. When `points` is nonempty the volume is
/// the point count.
struct InstanceObservation {
    int frame_index = 0;
    int instance_id = 0;
    Vec3 centroid = Vec3::Zero();
    Vec3 bbox_min = Vec3::Zero();
    Vec3 bbox_extent = Vec3::Zero();
    double volume = 0.0;
    std::vector<Vec3> points;

    /// Builds an observation whose centroid, bounding box and volume are
    /// computed from `points`. Requires a nonempty point list.
    static InstanceObservation from_points(int frame_index, int instance_id, std::vector<Vec3> points);
};

/// All instances of a single frame, kept sorted by ascending instance id.
struct FrameObservations {
    int frame_index = 0;
    std::vector<InstanceObservation> instances;

    const InstanceObservation* find(int instance_id) const;
    void sort_by_id();
};

struct Sequence {
    std::vector<FrameObservations> frames;
    double frame_interval = 10.0;

    int frame_count() const { return static_cast<int>(frames.size()); }
};

/// A trajectory {t_init, t_fin, per-frame centroids, parent}. parent_id 0 means
/// the track did not originate from a division.
struct Track {
    int track_id = 0;
    int t_init = 0;
    int t_fin = 0;
    std::vector<Vec3> centroids;
    int parent_id = 0;
};

/// A parent track terminating at frame_of_daughters - 1 with two daughter tracks
/// starting at frame_of_daughters.
struct DivisionEvent {
    int parent_track = 0;
    int daughter_a = 0;
    int daughter_b = 0;
    int frame_of_daughters = 0;

    friend bool operator==(const DivisionEvent&, const DivisionEvent&) = default;
};

/// Reference lineage. In ground-truth sequences every instance id equals the
/// id of the track it belongs to.
struct GroundTruthLineage {
    std::vector<Track> tracks;
    std::vector<DivisionEvent> division_events;
};

/// Checks every type invariant of the sequence and returns one human-readable
/// description per violation, in frame order then instance order. An empty
/// result means the sequence is valid.
std::vector<std::string> validate_sequence(const Sequence& seq);

/// Checks Track and lineage invariants (interval/centroid count, parent timing,
/// event/parent agreement).
std::vector<std::string> validate_lineage(const GroundTruthLineage& lineage);

} // namespace rodtrack
