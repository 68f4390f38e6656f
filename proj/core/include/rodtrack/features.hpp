#pragma once

#include "rodtrack/model.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace rodtrack {

/// [centroid x,y,z, bbox_min x,y,z, bbox_extent x,y,z]
using FeatureVector9 = std::array<double, 9>;

inline constexpr int kFeatureDim = 9;

/// Concatenated features of r past frames, the current frame, and a candidate
/// in the next frame: 9 * (r + 2) values.
struct SpatiotemporalFeature {
    std::vector<double> values;
    int r = 0;

    static constexpr std::size_t length_for(int r) { return static_cast<std::size_t>(kFeatureDim * (r + 2)); }
};

struct CandidateAssociation {
    int source_id = 0;
    int target_id = 0;
    /// Position of this candidate in the source's nearest-first list (0-based).
    int rank = 0;
    /// Distance from the source's projected location to the target centroid.
    double distance = 0.0;
    SpatiotemporalFeature feature;
    std::optional<double> score;
};

enum class Projection { constant_position, constant_velocity };

FeatureVector9 instance_feature(const InstanceObservation& obs);

/// `history` is ordered oldest first and ends at frame t. Missing past slots
/// are filled with copies of the earliest available feature.
SpatiotemporalFeature build_history(std::span<const FeatureVector9> history, const FeatureVector9& candidate, int r);

/// For every source in frame t, the min(n_candidates, n) instances of frame
/// t+1 nearest to its projected location. Output is sorted by (source_id,
/// rank); features are left empty. `prev_displacement` maps a source id to its
/// last frame-to-frame displacement and is consulted only for
/// Projection::constant_velocity.
std::vector<CandidateAssociation> generate_candidates(const FrameObservations& frame_t,
                                                      const FrameObservations& frame_t1, int n_candidates,
                                                      Projection projection = Projection::constant_position,
                                                      const std::map<int, Vec3>& prev_displacement = {});

/// Median over instances of the distance to the nearest other centroid in the
/// frame. Returns 1 when the frame has fewer than two instances.
double median_nn_spacing(const FrameObservations& frame);

} // namespace rodtrack
