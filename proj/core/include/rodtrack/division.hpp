#pragma once

#include "rodtrack/matcher.hpp"
#include "rodtrack/model.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace rodtrack {

/// Thrown when a point set is too small or collapses to a single point.
class DegenerateGeometry : public DataError {
public:
    using DataError::DataError;
};

/// Principal axes of a centred point cloud, ordered by descending singular
/// value. Each axis is flipped so its largest-magnitude component is positive.
struct PrincipalFrame {
    Vec3 centroid = Vec3::Zero();
    std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    Vec3 singular_values = Vec3::Zero();
};

/// Accepted range of vol_now / vol_prev for a daughter compared with its
/// predecessor.
struct VolumeBand {
    double lo = 0.35;
    double hi = 0.65;
};

/// Requires at least 3 points that are not all coincident. Collinear points
/// are accepted; v2 and v3 then span the plane orthogonal to the line.
PrincipalFrame principal_frame(std::span<const Vec3> points);

/// Norm of the neighbour's mean position, relative to the frame centroid,
/// projected onto the two minor axes.
double projection_value(const PrincipalFrame& frame, std::span<const Vec3> neighbor_points);
double projection_value(const PrincipalFrame& frame, const Vec3& neighbor_mean);

/// Extent of `points` along the major axis (max minus min projection).
double major_extent(const PrincipalFrame& frame, std::span<const Vec3> points);

/// Candidate sibling of `x` within `frame`: among instances (other than x)
/// having any point within x's major extent of x's centroid, the one with the
/// smallest projection value, ties to the smaller id. Instances without a
/// point cloud are tested by centroid.
std::optional<int> find_sibling(const InstanceObservation& x, const FrameObservations& frame);

/// Every member of find_sibling's neighbourhood, best first.
std::vector<int> rank_siblings(const InstanceObservation& x, const FrameObservations& frame);

/// True iff vol_now / vol_prev lies in [band.lo, band.hi]. Throws DataError
/// for non-positive volumes.
bool confirm_division(double vol_now, double vol_prev, VolumeBand band = {});

/// A division found between frames t and t+1, in instance ids.
struct FrameDivision {
    int parent_instance = 0;   // frame t
    int sibling_instance = 0;  // frame t+1; matched to the parent unless `sibling_was_matched` is false
    int unmatched_instance = 0; // frame t+1
    bool sibling_was_matched = true;
};

/// Examines every unmatched target of `match` (ascending id). Neighbours are
/// tried in rank_siblings order and the first one that passes the volume
/// test is taken: in a chain of end-to-end cells the previous generation's
/// sibling is as collinear as the current one. A parent is consumed by at
/// most one division and a sibling joins at most one pair.
std::vector<FrameDivision> detect_frame_divisions(const FrameObservations& frame_t, const FrameObservations& frame_t1,
                                                  const MatchResult& match, VolumeBand band = {});

/// Track relabel: from `from_frame` on, instances labelled `old_track` are
/// labelled `new_track`.
struct RelabelInstruction {
    int from_frame = 0;
    int old_track = 0;
    int new_track = 0;
};

struct DivisionDetection {
    std::vector<DivisionEvent> events;
    std::vector<RelabelInstruction> relabels;
    /// Parent of every daughter track, in final track ids.
    std::map<int, int> parents;
};

/// Sequence-wide division detection over finished matching. `matches[t]`
/// links frame t to t+1; `id_maps[t]` maps instance id to provisional track id
/// (propagated through matches, fresh ids for unmatched targets). Fresh ids
/// for relabelled siblings start at `next_track_id`.
DivisionDetection detect_divisions(const Sequence& seq, const std::vector<MatchResult>& matches,
                                   const std::vector<std::map<int, int>>& id_maps, int next_track_id,
                                   VolumeBand band = {});

} // namespace rodtrack
