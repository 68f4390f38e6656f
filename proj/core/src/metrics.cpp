#include "rodtrack/metrics.hpp"

#include "rodtrack/tracker.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

namespace rodtrack {

std::size_t LineageGraph::track_links() const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [](const auto& e) { return e.second == EdgeKind::track_link; }));
}

std::size_t LineageGraph::parent_links() const { return edges.size() - track_links(); }

LineageGraph build_graph(const std::vector<Track>& tracks, const std::vector<std::map<int, int>>* id_maps) {
    // Instance lookup: (frame, track) -> instance.
    std::map<VertexKey, int> instance_of;
    if (id_maps) {
        for (std::size_t f = 0; f < id_maps->size(); ++f)
            for (const auto& [instance, track] : (*id_maps)[f]) instance_of[{static_cast<int>(f), track}] = instance;
    }
    LineageGraph g;
    std::map<int, const Track*> by_id;
    for (const auto& tr : tracks) {
        by_id[tr.track_id] = &tr;
        for (int f = tr.t_init; f <= tr.t_fin; ++f) {
            const VertexKey v{f, tr.track_id};
            int instance = tr.track_id;
            if (id_maps) {
                auto it = instance_of.find(v);
                if (it == instance_of.end()) throw DataError("build_graph: track occupancy missing from id maps");
                instance = it->second;
            }
            g.vertices[v] = instance;
            if (f > tr.t_init) g.edges[{{f - 1, tr.track_id}, v}] = EdgeKind::track_link;
        }
    }
    for (const auto& tr : tracks) {
        if (tr.parent_id == 0) continue;
        auto it = by_id.find(tr.parent_id);
        if (it == by_id.end()) continue;
        g.edges[{{it->second->t_fin, tr.parent_id}, {tr.t_init, tr.track_id}}] = EdgeKind::parent_link;
    }
    return g;
}

LineageGraph build_graph(const TrackingResult& result) { return build_graph(result.tracks, &result.id_maps); }

LineageGraph build_graph(const GroundTruthLineage& lineage) { return build_graph(lineage.tracks); }

std::map<VertexKey, VertexKey> instance_correspondence(const LineageGraph& computed, const LineageGraph& reference) {
    std::map<std::pair<int, int>, VertexKey> ref_by_instance;
    for (const auto& [v, instance] : reference.vertices) {
        if (!ref_by_instance.emplace(std::pair{v.first, instance}, v).second)
            throw DataError("reference graph has two vertices for one instance");
    }
    std::map<VertexKey, VertexKey> out;
    for (const auto& [v, instance] : computed.vertices) {
        auto it = ref_by_instance.find({v.first, instance});
        if (it == ref_by_instance.end()) {
            std::ostringstream os;
            os << "frame " << v.first << ", instance " << instance << " has no reference vertex";
            throw DataError(os.str());
        }
        out[v] = it->second;
    }
    return out;
}

AogmBreakdown aogm(const LineageGraph& computed, const LineageGraph& reference,
                   const std::map<VertexKey, VertexKey>& corr, AogmWeights weights) {
    if (corr.size() != computed.vertices.size() || computed.vertices.size() != reference.vertices.size())
        throw DataError("vertex correspondence is not a bijection");
    std::set<VertexKey> images;
    for (const auto& [from, to] : corr) {
        if (!computed.vertices.count(from) || !reference.vertices.count(to) || !images.insert(to).second)
            throw DataError("vertex correspondence is not a bijection");
    }
    std::map<EdgeKey, EdgeKind> mapped;
    for (const auto& [e, kind] : computed.edges) mapped[{corr.at(e.first), corr.at(e.second)}] = kind;

    AogmBreakdown out;
    out.weights = weights;
    for (const auto& [e, kind] : reference.edges) {
        auto it = mapped.find(e);
        if (it == mapped.end()) ++out.ed;
        else if (it->second != kind) ++out.ec;
    }
    for (const auto& [e, kind] : mapped)
        if (!reference.edges.count(e)) ++out.ea;
    out.aogm = weights.ed * out.ed + weights.ea * out.ea + weights.ec * out.ec;
    return out;
}

AogmBreakdown aogm(const LineageGraph& computed, const LineageGraph& reference, AogmWeights weights) {
    return aogm(computed, reference, instance_correspondence(computed, reference), weights);
}

double aogm_empty(const LineageGraph& reference, AogmWeights weights) {
    return weights.ed * static_cast<double>(reference.edges.size());
}

double tra(const AogmBreakdown& breakdown, double aogm0) {
    if (!(aogm0 > 0.0)) throw DataError("TRA is undefined for a reference without edges");
    return 1.0 - std::min(breakdown.aogm, aogm0) / aogm0;
}

double tra(const LineageGraph& computed, const LineageGraph& reference, AogmWeights weights) {
    return tra(aogm(computed, reference, weights), aogm_empty(reference, weights));
}

DivisionScore division_f1(std::span<const DivisionEvent> detected, std::span<const DivisionEvent> reference, int tol,
                          DivisionMatchMode mode, const std::map<int, int>& parent_map) {
    if (tol < 0) throw ConfigError("division tolerance must be >= 0");
    DivisionScore s;
    if (detected.empty() && reference.empty()) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    // (frame distance, reference frame, reference index, detected index)
    std::vector<std::tuple<int, int, std::size_t, std::size_t>> pairs;
    for (std::size_t d = 0; d < detected.size(); ++d) {
        for (std::size_t g = 0; g < reference.size(); ++g) {
            const int gap = std::abs(detected[d].frame_of_daughters - reference[g].frame_of_daughters);
            if (gap > tol) continue;
            if (mode == DivisionMatchMode::identity) {
                int parent = detected[d].parent_track;
                if (!parent_map.empty()) {
                    auto it = parent_map.find(parent);
                    parent = it == parent_map.end() ? -1 : it->second;
                }
                if (parent != reference[g].parent_track) continue;
            }
            pairs.emplace_back(gap, reference[g].frame_of_daughters, g, d);
        }
    }
    // Index tie-breaks are stabilised by event content so that list order does not matter.
    auto key = [](const DivisionEvent& e) {
        return std::tuple(e.frame_of_daughters, e.parent_track, e.daughter_a, e.daughter_b);
    };
    std::sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
        const auto ka = std::tuple(std::get<0>(a), std::get<1>(a), key(reference[std::get<2>(a)]), key(detected[std::get<3>(a)]));
        const auto kb = std::tuple(std::get<0>(b), std::get<1>(b), key(reference[std::get<2>(b)]), key(detected[std::get<3>(b)]));
        return ka < kb;
    });
    std::vector<std::uint8_t> used_d(detected.size(), 0);
    std::vector<std::uint8_t> used_g(reference.size(), 0);
    for (const auto& [gap, frame, g, d] : pairs) {
        if (used_d[d] || used_g[g]) continue;
        used_d[d] = used_g[g] = 1;
        ++s.tp;
    }
    s.fp = static_cast<int>(detected.size()) - s.tp;
    s.fn = static_cast<int>(reference.size()) - s.tp;
    if (s.tp == 0) return s;
    s.precision = static_cast<double>(s.tp) / (s.tp + s.fp);
    s.recall = static_cast<double>(s.tp) / (s.tp + s.fn);
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

std::map<int, int> track_correspondence(const LineageGraph& computed, const LineageGraph& reference) {
    std::map<std::pair<int, int>, int> ref_track; // (frame, instance) -> reference track
    for (const auto& [v, instance] : reference.vertices) ref_track[{v.first, instance}] = v.second;
    std::map<int, VertexKey> last; // computed track -> last vertex
    for (const auto& [v, instance] : computed.vertices) {
        auto [it, inserted] = last.try_emplace(v.second, v);
        if (!inserted && v.first > it->second.first) it->second = v;
    }
    std::map<int, int> out;
    for (const auto& [track, v] : last) {
        auto it = ref_track.find({v.first, computed.vertices.at(v)});
        if (it != ref_track.end()) out[track] = it->second;
    }
    return out;
}

std::vector<DivisionEvent> events_from_tracks(const std::vector<Track>& tracks) {
    std::map<int, std::vector<const Track*>> children;
    for (const auto& tr : tracks)
        if (tr.parent_id != 0) children[tr.parent_id].push_back(&tr);
    std::vector<DivisionEvent> out;
    for (auto& [parent, kids] : children) {
        std::sort(kids.begin(), kids.end(), [](auto* a, auto* b) { return a->track_id < b->track_id; });
        DivisionEvent ev;
        ev.parent_track = parent;
        ev.daughter_a = kids[0]->track_id;
        ev.daughter_b = kids.size() > 1 ? kids[1]->track_id : 0;
        ev.frame_of_daughters = kids[0]->t_init;
        out.push_back(ev);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.frame_of_daughters, a.parent_track) < std::tie(b.frame_of_daughters, b.parent_track);
    });
    return out;
}

std::string format_report(const EvaluationReport& r) {
    std::ostringstream os;
    os << std::setprecision(6);
    os << "Tracking accuracy\n";
    os << "  missing edges (ED):   " << r.aogm.ed << '\n';
    os << "  redundant edges (EA): " << r.aogm.ea << '\n';
    os << "  relabelled edges (EC): " << r.aogm.ec << '\n';
    os << "  AOGM " << r.aogm.aogm << " of " << r.aogm0 << ", TRA " << r.tra << '\n';
    os << "Division detection (tolerance +/-" << r.tolerance << " frames)\n";
    os << "  TP " << r.division.tp << ", FP " << r.division.fp << ", FN " << r.division.fn << '\n';
    os << "  precision " << r.division.precision << ", recall " << r.division.recall << ", F1 " << r.division.f1
       << '\n';
    os << "\n[metrics]\n";
    os << "TRA=" << r.tra << '\n';
    os << "ED=" << r.aogm.ed << '\n';
    os << "EA=" << r.aogm.ea << '\n';
    os << "EC=" << r.aogm.ec << '\n';
    os << "AOGM=" << r.aogm.aogm << '\n';
    os << "AOGM_0=" << r.aogm0 << '\n';
    os << "precision=" << r.division.precision << '\n';
    os << "recall=" << r.division.recall << '\n';
    os << "f1=" << r.division.f1 << '\n';
    return os.str();
}

} // namespace rodtrack
