#include "rodtrack/tracker.hpp"

#include <algorithm>
#include <sstream>

namespace rodtrack {

namespace {

using History = std::vector<FeatureVector9>;

void trim(History& h, int r) {
    const auto keep = static_cast<std::size_t>(r) + 1;
    if (h.size() > keep) h.erase(h.begin(), h.end() - static_cast<std::ptrdiff_t>(keep));
}

} // namespace

void validate_tracker_config(const TrackerConfig& cfg) {
    if (cfg.r < 0) throw ConfigError("r >= 0 required");
    if (cfg.n_candidates < 1) throw ConfigError("n_candidates >= 1 required");
    if (!(cfg.tau_min >= 0.0 && cfg.tau_min < 1.0)) throw ConfigError("tau_min must be in [0, 1)");
    if (!(cfg.division_band.lo > 0.0 && cfg.division_band.lo <= cfg.division_band.hi))
        throw ConfigError("division band must satisfy 0 < lo <= hi");
}

std::map<int, int> assign_ids(const MatchResult& match, const std::map<int, int>& prev_ids, int& next_fresh_id) {
    std::map<int, int> next;
    for (const auto& [s, t] : match.matched_pairs) next[t] = prev_ids.at(s);
    std::vector<int> fresh = match.unmatched_targets;
    std::sort(fresh.begin(), fresh.end());
    for (int t : fresh) next[t] = next_fresh_id++;
    return next;
}

std::vector<Track> build_tracks(const Sequence& seq, const std::vector<std::map<int, int>>& id_maps,
                                const std::map<int, int>& parents) {
    std::map<int, Track> by_id;
    for (std::size_t f = 0; f < id_maps.size(); ++f) {
        for (const auto& [instance, id] : id_maps[f]) {
            const auto* obs = seq.frames[f].find(instance);
            auto [it, inserted] = by_id.try_emplace(id);
            Track& tr = it->second;
            if (inserted) {
                tr.track_id = id;
                tr.t_init = static_cast<int>(f);
                auto p = parents.find(id);
                tr.parent_id = p == parents.end() ? 0 : p->second;
            }
            tr.t_fin = static_cast<int>(f);
            tr.centroids.push_back(obs->centroid);
        }
    }
    std::vector<Track> out;
    out.reserve(by_id.size());
    for (auto& [id, tr] : by_id) out.push_back(std::move(tr));
    return out;
}

TrackingResult track_sequence(const Sequence& seq, const ScorerModel& model, const TrackerConfig& cfg) {
    validate_tracker_config(cfg);
    const auto expected = static_cast<int>(SpatiotemporalFeature::length_for(cfg.r));
    if (model.kind == ScorerKind::neural && model.input_dim() != expected) {
        std::ostringstream os;
        os << "model dimension mismatch: tracker with r=" << cfg.r << " produces " << expected
           << "-dimensional features, model expects " << model.input_dim();
        throw DataError(os.str());
    }

    TrackingResult result;
    if (seq.frames.empty()) return result;

    int next_id = 1;
    std::map<int, int> ids;
    std::map<int, History> history; // by instance id of the current frame
    std::map<int, Vec3> displacement;
    for (const auto& obs : seq.frames.front().instances) {
        ids[obs.instance_id] = next_id++;
        history[obs.instance_id] = {instance_feature(obs)};
    }
    result.id_maps.push_back(ids);
    std::map<int, int> parents;

    for (std::size_t t = 0; t + 1 < seq.frames.size(); ++t) {
        const auto& ft = seq.frames[t];
        const auto& ft1 = seq.frames[t + 1];

        auto candidates = generate_candidates(ft, ft1, cfg.n_candidates, cfg.projection, displacement);
        for (auto& c : candidates)
            c.feature = build_history(history.at(c.source_id), instance_feature(*ft1.find(c.target_id)), cfg.r);
        score(model, candidates, median_nn_spacing(ft));

        AssignmentProblem problem;
        for (const auto& o : ft.instances) problem.source_ids.push_back(o.instance_id);
        for (const auto& o : ft1.instances) problem.target_ids.push_back(o.instance_id);
        for (const auto& c : candidates) {
            if (*c.score < cfg.tau_min) continue;
            problem.candidates.push_back({c.source_id, c.target_id, *c.score});
        }
        auto match = match_algorithm1(problem);
        auto next_ids = assign_ids(match, ids, next_id);

        if (cfg.detect_divisions) {
            for (const auto& d : detect_frame_divisions(ft, ft1, match, cfg.division_band)) {
                const int parent = ids.at(d.parent_instance);
                if (d.sibling_was_matched) next_ids[d.sibling_instance] = next_id++;
                parents[next_ids.at(d.sibling_instance)] = parent;
                parents[next_ids.at(d.unmatched_instance)] = parent;
                DivisionEvent ev;
                ev.parent_track = parent;
                ev.daughter_a = std::min(next_ids.at(d.sibling_instance), next_ids.at(d.unmatched_instance));
                ev.daughter_b = std::max(next_ids.at(d.sibling_instance), next_ids.at(d.unmatched_instance));
                ev.frame_of_daughters = static_cast<int>(t + 1);
                result.events.push_back(ev);
            }
        }

        // History follows matched predecessors, independent of relabelling.
        std::map<int, History> next_history;
        std::map<int, Vec3> next_displacement;
        for (const auto& o : ft1.instances) next_history[o.instance_id] = {};
        for (const auto& [s, tgt] : match.matched_pairs) {
            next_history[tgt] = history.at(s);
            next_displacement[tgt] = ft1.find(tgt)->centroid - ft.find(s)->centroid;
        }
        for (auto& [instance, h] : next_history) {
            h.push_back(instance_feature(*ft1.find(instance)));
            trim(h, cfg.r);
        }
        history = std::move(next_history);
        displacement = std::move(next_displacement);
        ids = std::move(next_ids);
        result.id_maps.push_back(ids);
        result.matches.push_back(std::move(match));
    }

    result.tracks = build_tracks(seq, result.id_maps, parents);
    return result;
}

} // namespace rodtrack
