#include "rodtrack/features.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace rodtrack {

FeatureVector9 instance_feature(const InstanceObservation& obs) {
    FeatureVector9 f{};
    for (int k = 0; k < 3; ++k) {
        f[k] = obs.centroid[k];
        f[3 + k] = obs.bbox_min[k];
        f[6 + k] = obs.bbox_extent[k];
    }
    return f;
}

SpatiotemporalFeature build_history(std::span<const FeatureVector9> history, const FeatureVector9& candidate, int r) {
    if (r < 0) throw ConfigError("history depth r must be >= 0");
    if (history.empty()) throw DataError("build_history: empty history");
    SpatiotemporalFeature out;
    out.r = r;
    out.values.reserve(SpatiotemporalFeature::length_for(r));
    const auto slots = static_cast<std::ptrdiff_t>(r) + 1;
    const auto available = static_cast<std::ptrdiff_t>(history.size());
    for (std::ptrdiff_t s = 0; s < slots; ++s) {
        // slot s holds frame t - (slots - 1 - s)
        const std::ptrdiff_t idx = std::max<std::ptrdiff_t>(0, available - slots + s);
        out.values.insert(out.values.end(), history[idx].begin(), history[idx].end());
    }
    out.values.insert(out.values.end(), candidate.begin(), candidate.end());
    return out;
}

std::vector<CandidateAssociation> generate_candidates(const FrameObservations& frame_t,
                                                      const FrameObservations& frame_t1, int n_candidates,
                                                      Projection projection,
                                                      const std::map<int, Vec3>& prev_displacement) {
    if (n_candidates < 1) throw ConfigError("n_candidates must be >= 1");
    std::vector<CandidateAssociation> out;
    if (frame_t1.instances.empty()) return out;

    std::vector<const InstanceObservation*> sources;
    for (const auto& s : frame_t.instances) sources.push_back(&s);
    std::sort(sources.begin(), sources.end(), [](auto* a, auto* b) { return a->instance_id < b->instance_id; });

    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(n_candidates), frame_t1.instances.size());
    std::vector<std::pair<double, int>> ranked;
    for (const auto* src : sources) {
        Vec3 projected = src->centroid;
        if (projection == Projection::constant_velocity) {
            if (auto it = prev_displacement.find(src->instance_id); it != prev_displacement.end())
                projected += it->second;
        }
        ranked.clear();
        for (const auto& tgt : frame_t1.instances)
            ranked.emplace_back((tgt.centroid - projected).norm(), tgt.instance_id);
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end());
        for (std::size_t k = 0; k < keep; ++k) {
            CandidateAssociation c;
            c.source_id = src->instance_id;
            c.target_id = ranked[k].second;
            c.rank = static_cast<int>(k);
            c.distance = ranked[k].first;
            out.push_back(std::move(c));
        }
    }
    return out;
}

double median_nn_spacing(const FrameObservations& frame) {
    const auto& inst = frame.instances;
    if (inst.size() < 2) return 1.0;
    std::vector<double> nn;
    nn.reserve(inst.size());
    for (std::size_t i = 0; i < inst.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < inst.size(); ++j) {
            if (i != j) best = std::min(best, (inst[i].centroid - inst[j].centroid).norm());
        }
        nn.push_back(best);
    }
    const auto mid = nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2);
    std::nth_element(nn.begin(), mid, nn.end());
    double med = *mid;
    if (nn.size() % 2 == 0) med = 0.5 * (med + *std::max_element(nn.begin(), mid));
    return med > 0.0 ? med : 1.0;
}

} // namespace rodtrack
