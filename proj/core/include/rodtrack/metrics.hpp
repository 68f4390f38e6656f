#pragma once

#include "rodtrack/model.hpp"

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rodtrack {

struct TrackingResult;

/// (frame, track id)
using VertexKey = std::pair<int, int>;
using EdgeKey = std::pair<VertexKey, VertexKey>;

enum class EdgeKind { track_link, parent_link };

/// Acyclic oriented graph of a tracking result. Each vertex also records the
/// instance it stands for, which defines the correspondence between graphs
/// built on the same segmentation.
struct LineageGraph {
    std::map<VertexKey, int> vertices; // -> instance id
    std::map<EdgeKey, EdgeKind> edges;

    std::size_t track_links() const;
    std::size_t parent_links() const;
};

struct AogmWeights {
    double ed = 1.0;
    double ea = 1.0;
    double ec = 1.0;
};

struct AogmBreakdown {
    int ed = 0; // reference edges missing from the computed graph
    int ea = 0; // computed edges absent from the reference
    int ec = 0; // shared edges whose kind differs
    AogmWeights weights{};
    double aogm = 0.0;
};

/// `id_maps[f]` maps instance id -> track id in frame f. Without id maps the
/// instance id of every vertex is taken to be its track id.
LineageGraph build_graph(const std::vector<Track>& tracks, const std::vector<std::map<int, int>>* id_maps = nullptr);
LineageGraph build_graph(const TrackingResult& result);
LineageGraph build_graph(const GroundTruthLineage& lineage);

/// Computed vertex -> reference vertex, pairing vertices of the same frame
/// that stand for the same instance. Throws DataError unless this is a
/// bijection.
std::map<VertexKey, VertexKey> instance_correspondence(const LineageGraph& computed, const LineageGraph& reference);

/// Edge-level AOGM. Throws DataError if `correspondence` is not a bijection
/// between the vertex sets.
AogmBreakdown aogm(const LineageGraph& computed, const LineageGraph& reference,
                   const std::map<VertexKey, VertexKey>& correspondence, AogmWeights weights = {});
AogmBreakdown aogm(const LineageGraph& computed, const LineageGraph& reference, AogmWeights weights = {});

/// Cost of building the reference from nothing: w_ED times its edge count.
double aogm_empty(const LineageGraph& reference, AogmWeights weights = {});

/// 1 - min(AOGM, AOGM_0) / AOGM_0. Throws DataError when the reference has no edges.
double tra(const LineageGraph& computed, const LineageGraph& reference, AogmWeights weights = {});
double tra(const AogmBreakdown& breakdown, double aogm0);

enum class DivisionMatchMode { identity, time_only };

struct DivisionScore {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// One-to-one greedy matching of detected to reference division events within
/// `tol` frames, closest first (ties: earlier reference frame). In identity
/// mode the detected parent, mapped through `parent_map` when given, must
/// equal the reference parent. Two empty lists score 1.
DivisionScore division_f1(std::span<const DivisionEvent> detected, std::span<const DivisionEvent> reference, int tol = 1,
                          DivisionMatchMode mode = DivisionMatchMode::identity,
                          const std::map<int, int>& parent_map = {});

/// Computed track id -> reference track id at the computed track's last vertex.
std::map<int, int> track_correspondence(const LineageGraph& computed, const LineageGraph& reference);

/// Division events implied by the parent field of tracks (children grouped by
/// parent, ordered by ascending child id).
std::vector<DivisionEvent> events_from_tracks(const std::vector<Track>& tracks);

struct EvaluationReport {
    AogmBreakdown aogm;
    double aogm0 = 0.0;
    double tra = 0.0;
    DivisionScore division;
    int tolerance = 1;
};

/// Human-readable summary followed by a key=value block.
std::string format_report(const EvaluationReport& report);

} // namespace rodtrack
