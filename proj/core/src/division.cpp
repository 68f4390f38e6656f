#include "rodtrack/division.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace rodtrack {

namespace {

Vec3 mean_of(std::span<const Vec3> pts) {
    Vec3 sum = Vec3::Zero();
    for (const auto& p : pts) sum += p;
    return sum / static_cast<double>(pts.size());
}

Vec3 canonical_sign(Vec3 v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    return v[k] < 0.0 ? Vec3(-v) : v;
}

Vec3 position_of(const InstanceObservation& obs) {
    return obs.points.empty() ? obs.centroid : mean_of(obs.points);
}

double nearest_distance(const InstanceObservation& obs, const Vec3& from) {
    if (obs.points.empty()) return (obs.centroid - from).norm();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : obs.points) best = std::min(best, (p - from).squaredNorm());
    return std::sqrt(best);
}

} // namespace

PrincipalFrame principal_frame(std::span<const Vec3> points) {
    if (points.size() < 3) throw DegenerateGeometry("principal_frame: at least 3 points required");
    PrincipalFrame f;
    f.centroid = mean_of(points);
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (const auto& p : points) {
        const Vec3 d = p - f.centroid;
        scatter += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
    if (eig.info() != Eigen::Success) throw DegenerateGeometry("principal_frame: eigendecomposition failed");
    const Vec3 lambda = eig.eigenvalues(); // ascending
    const double scale = std::max(1.0, scatter.trace());
    if (lambda[2] <= 1e-14 * scale) throw DegenerateGeometry("principal_frame: points are coincident");
    for (int i = 0; i < 3; ++i) {
        f.axes[static_cast<std::size_t>(i)] = canonical_sign(eig.eigenvectors().col(2 - i).normalized());
        f.singular_values[i] = std::sqrt(std::max(0.0, lambda[2 - i]));
    }
    return f;
}

double projection_value(const PrincipalFrame& frame, const Vec3& neighbor_mean) {
    const Vec3 rel = neighbor_mean - frame.centroid;
    return std::hypot(rel.dot(frame.axes[1]), rel.dot(frame.axes[2]));
}

double projection_value(const PrincipalFrame& frame, std::span<const Vec3> neighbor_points) {
    if (neighbor_points.empty()) throw DataError("projection_value: empty neighbour");
    return projection_value(frame, mean_of(neighbor_points));
}

double major_extent(const PrincipalFrame& frame, std::span<const Vec3> points) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : points) {
        const double s = (p - frame.centroid).dot(frame.axes[0]);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return points.empty() ? 0.0 : hi - lo;
}

std::vector<int> rank_siblings(const InstanceObservation& x, const FrameObservations& frame) {
    if (x.points.empty()) throw DataError("find_sibling: instance has no points");
    const auto pf = principal_frame(x.points);
    const double radius = major_extent(pf, x.points);
    std::vector<std::pair<double, int>> ranked;
    for (const auto& other : frame.instances) {
        if (other.instance_id == x.instance_id) continue;
        if (nearest_distance(other, pf.centroid) > radius) continue;
        ranked.emplace_back(projection_value(pf, position_of(other)), other.instance_id);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<int> out;
    out.reserve(ranked.size());
    for (const auto& [pv, id] : ranked) out.push_back(id);
    return out;
}

std::optional<int> find_sibling(const InstanceObservation& x, const FrameObservations& frame) {
    const auto ranked = rank_siblings(x, frame);
    if (ranked.empty()) return std::nullopt;
    return ranked.front();
}

bool confirm_division(double vol_now, double vol_prev, VolumeBand band) {
    if (!(vol_now > 0.0) || !(vol_prev > 0.0)) throw DataError("confirm_division: volumes must be positive");
    const double ratio = vol_now / vol_prev;
    return ratio >= band.lo && ratio <= band.hi;
}

namespace {

std::optional<FrameDivision> try_pair(const FrameObservations& frame_t, const FrameObservations& frame_t1,
                                      const InstanceObservation& x, int sib, const std::map<int, int>& predecessor,
                                      const std::set<int>& unmatched_sources, const std::set<int>& used_parents,
                                      VolumeBand band) {
    const auto* sibling = frame_t1.find(sib);
    if (auto it = predecessor.find(sib); it != predecessor.end()) {
        const int parent = it->second;
        if (used_parents.count(parent)) return std::nullopt;
        if (!confirm_division(sibling->volume, frame_t.find(parent)->volume, band)) return std::nullopt;
        return FrameDivision{parent, sib, x.instance_id, true};
    }

    // Both daughters unmatched: look for a parent whose track ended at t,
    // nearest to the pair's midpoint.
    const Vec3 mid = 0.5 * (x.centroid + sibling->centroid);
    const double reach = (x.centroid - sibling->centroid).norm();
    const InstanceObservation* parent = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (int sid : unmatched_sources) {
        if (used_parents.count(sid)) continue;
        const auto* cand = frame_t.find(sid);
        const double d = (cand->centroid - mid).norm();
        if (d <= reach && d < best) {
            best = d;
            parent = cand;
        }
    }
    if (!parent) return std::nullopt;
    if (!confirm_division(sibling->volume, parent->volume, band) || !confirm_division(x.volume, parent->volume, band))
        return std::nullopt;
    return FrameDivision{parent->instance_id, sib, x.instance_id, false};
}

} // namespace

std::vector<FrameDivision> detect_frame_divisions(const FrameObservations& frame_t, const FrameObservations& frame_t1,
                                                  const MatchResult& match, VolumeBand band) {
    std::map<int, int> predecessor; // target -> source
    for (const auto& [s, t] : match.matched_pairs) predecessor[t] = s;
    const std::set<int> unmatched_sources(match.unmatched_sources.begin(), match.unmatched_sources.end());

    std::vector<FrameDivision> out;
    std::set<int> used_parents;
    std::set<int> used_daughters;
    for (int xid : match.unmatched_targets) {
        if (used_daughters.count(xid)) continue;
        const auto* x = frame_t1.find(xid);
        if (!x || x->points.size() < 3) continue;
        std::vector<int> ranked;
        try {
            ranked = rank_siblings(*x, frame_t1);
        } catch (const DegenerateGeometry&) {
            continue;
        }
        for (int sib : ranked) {
            if (used_daughters.count(sib)) continue;
            if (auto found = try_pair(frame_t, frame_t1, *x, sib, predecessor, unmatched_sources, used_parents, band)) {
                out.push_back(*found);
                used_parents.insert(found->parent_instance);
                used_daughters.insert(sib);
                used_daughters.insert(xid);
                break;
            }
        }
    }
    return out;
}

DivisionDetection detect_divisions(const Sequence& seq, const std::vector<MatchResult>& matches,
                                   const std::vector<std::map<int, int>>& id_maps, int next_track_id,
                                   VolumeBand band) {
    DivisionDetection out;
    std::map<int, int> alias; // provisional id -> current final id
    auto final_id = [&](int provisional) {
        auto it = alias.find(provisional);
        return it == alias.end() ? provisional : it->second;
    };
    for (std::size_t t = 0; t + 1 < seq.frames.size() && t < matches.size(); ++t) {
        const auto found = detect_frame_divisions(seq.frames[t], seq.frames[t + 1], matches[t], band);
        for (const auto& d : found) {
            const int parent = final_id(id_maps[t].at(d.parent_instance));
            const int unmatched = final_id(id_maps[t + 1].at(d.unmatched_instance));
            int sibling = final_id(id_maps[t + 1].at(d.sibling_instance));
            if (d.sibling_was_matched) {
                const int provisional = id_maps[t + 1].at(d.sibling_instance);
                sibling = next_track_id++;
                out.relabels.push_back({static_cast<int>(t + 1), provisional, sibling});
                alias[provisional] = sibling;
            }
            DivisionEvent ev;
            ev.parent_track = parent;
            ev.daughter_a = std::min(sibling, unmatched);
            ev.daughter_b = std::max(sibling, unmatched);
            ev.frame_of_daughters = static_cast<int>(t + 1);
            out.events.push_back(ev);
            out.parents[sibling] = parent;
            out.parents[unmatched] = parent;
        }
    }
    return out;
}

} // namespace rodtrack
