#pragma once

#include "rodtrack/division.hpp"
#include "rodtrack/features.hpp"
#include "rodtrack/matcher.hpp"
#include "rodtrack/model.hpp"
#include "rodtrack/scorer.hpp"

#include <map>
#include <vector>

namespace rodtrack {

struct TrackerConfig {
    int r = 2;
    int n_candidates = 4;
    Projection projection = Projection::constant_position;
    /// Candidates scoring below this are dropped before matching.
    double tau_min = 0.0;
    VolumeBand division_band{};
    bool detect_divisions = true;
};

void validate_tracker_config(const TrackerConfig& cfg);

struct TrackingResult {
    std::vector<Track> tracks; // ascending track id
    /// Per frame: instance id -> track id.
    std::vector<std::map<int, int>> id_maps;
    std::vector<DivisionEvent> events;
    /// matches[t] links frame t to t+1.
    std::vector<MatchResult> matches;
};

/// Matched targets inherit their source's track id; unmatched targets receive
/// fresh ids in ascending instance order, advancing `next_fresh_id`.
std::map<int, int> assign_ids(const MatchResult& match, const std::map<int, int>& prev_ids, int& next_fresh_id);

/// Frame-by-frame association, online division relabelling and trajectory
/// assembly. Throws DataError when the model's input dimension does not match
/// 9 * (cfg.r + 2).
TrackingResult track_sequence(const Sequence& seq, const ScorerModel& model, const TrackerConfig& cfg);

/// Trajectories from per-frame id maps: first/last frame of every id, the
/// centroid per frame, parents from `parents` (default 0).
std::vector<Track> build_tracks(const Sequence& seq, const std::vector<std::map<int, int>>& id_maps,
                                const std::map<int, int>& parents);

} // namespace rodtrack
