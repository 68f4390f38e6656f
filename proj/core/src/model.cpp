#include "rodtrack/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace rodtrack {

namespace {

// Files carry 6 significant digits, so containment is checked with a relative slack.
bool leq(double a, double b) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return a <= b + 1e-5 * scale;
}

bool inside_box(const Vec3& p, const Vec3& lo, const Vec3& extent) {
    for (int k = 0; k < 3; ++k) {
        if (!leq(lo[k], p[k]) || !leq(p[k], lo[k] + extent[k])) return false;
    }
    return true;
}

std::string where(int frame, int id) {
    std::ostringstream os;
    os << "frame " << frame << ", instance " << id << ": ";
    return os.str();
}

} // namespace

InstanceObservation InstanceObservation::from_points(int frame_index, int instance_id,
                                                     std::vector<Vec3> points) {
    if (points.empty()) throw DataError("from_points: empty point list");
    InstanceObservation obs;
    obs.frame_index = frame_index;
    obs.instance_id = instance_id;
    Vec3 lo = points.front();
    Vec3 hi = points.front();
    Vec3 sum = Vec3::Zero();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
        sum += p;
    }
    obs.centroid = sum / static_cast<double>(points.size());
    obs.bbox_min = lo;
    obs.bbox_extent = hi - lo;
    obs.volume = static_cast<double>(points.size());
    obs.points = std::move(points);
    return obs;
}

const InstanceObservation* FrameObservations::find(int instance_id) const {
    auto it = std::lower_bound(instances.begin(), instances.end(), instance_id,
                               [](const InstanceObservation& o, int id) { return o.instance_id < id; });
    if (it == instances.end() || it->instance_id != instance_id) return nullptr;
    return &*it;
}

void FrameObservations::sort_by_id() {
    std::stable_sort(instances.begin(), instances.end(),
                     [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
}

std::vector<std::string> validate_sequence(const Sequence& seq) {
    std::vector<std::string> out;
    if (!(seq.frame_interval > 0.0)) out.push_back("sequence: frame_interval must be positive");
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        const auto& frame = seq.frames[f];
        if (frame.frame_index != static_cast<int>(f)) {
            std::ostringstream os;
            os << "frame " << frame.frame_index << ": expected index " << f
               << " (indices must be contiguous from 0)";
            out.push_back(os.str());
        }
        std::set<int> seen;
        for (const auto& obs : frame.instances) {
            const std::string at = where(frame.frame_index, obs.instance_id);
            if (obs.instance_id <= 0) out.push_back(at + "instance id must be positive");
            if (!seen.insert(obs.instance_id).second) out.push_back(at + "duplicate instance id");
            if (obs.frame_index != frame.frame_index) out.push_back(at + "frame_index disagrees with its frame");
            if ((obs.bbox_extent.array() < 0.0).any()) out.push_back(at + "negative bbox extent");
            if (!(obs.volume > 0.0)) out.push_back(at + "volume must be positive");
            if (!inside_box(obs.centroid, obs.bbox_min, obs.bbox_extent))
                out.push_back(at + "centroid outside bounding box");
            if (!obs.points.empty()) {
                const auto outside = std::count_if(obs.points.begin(), obs.points.end(), [&](const Vec3& p) {
                    return !inside_box(p, obs.bbox_min, obs.bbox_extent);
                });
                if (outside > 0) {
                    std::ostringstream os;
                    os << at << outside << " point(s) outside bounding box";
                    out.push_back(os.str());
                }
                if (obs.volume != static_cast<double>(obs.points.size())) {
                    std::ostringstream os;
                    os << at << "volume mismatch: volume " << obs.volume << " but " << obs.points.size()
                       << " points";
                    out.push_back(os.str());
                }
            }
        }
    }
    return out;
}

std::vector<std::string> validate_lineage(const GroundTruthLineage& lineage) {
    std::vector<std::string> out;
    std::map<int, const Track*> by_id;
    for (const auto& tr : lineage.tracks) {
        std::ostringstream os;
        os << "track " << tr.track_id << ": ";
        if (tr.track_id <= 0) out.push_back(os.str() + "track id must be positive");
        if (!by_id.emplace(tr.track_id, &tr).second) out.push_back(os.str() + "duplicate track id");
        if (tr.t_init > tr.t_fin) out.push_back(os.str() + "t_init > t_fin");
        else if (static_cast<int>(tr.centroids.size()) != tr.t_fin - tr.t_init + 1)
            out.push_back(os.str() + "centroid count does not match interval");
        if (tr.parent_id == tr.track_id) out.push_back(os.str() + "track is its own parent");
    }
    for (const auto& tr : lineage.tracks) {
        if (tr.parent_id == 0) continue;
        auto it = by_id.find(tr.parent_id);
        std::ostringstream os;
        os << "track " << tr.track_id << ": ";
        if (it == by_id.end()) out.push_back(os.str() + "unknown parent");
        else if (it->second->t_fin != tr.t_init - 1) out.push_back(os.str() + "parent does not end just before child");
    }
    for (const auto& ev : lineage.division_events) {
        for (int child : {ev.daughter_a, ev.daughter_b}) {
            auto it = by_id.find(child);
            if (it == by_id.end() || it->second->parent_id != ev.parent_track) {
                std::ostringstream os;
                os << "division of " << ev.parent_track << ": child " << child << " does not name it as parent";
                out.push_back(os.str());
            }
        }
    }
    return out;
}

} // namespace rodtrack
