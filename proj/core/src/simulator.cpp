#include "rodtrack/simulator.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace rodtrack {

namespace {

constexpr double kMinSeparation = 0.9;
constexpr int kMaxPopulation = 10000;

double spherocylinder_volume(double length, double radius) {
    return std::numbers::pi * radius * radius * length + 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
}

Vec3 any_perpendicular(const Vec3& v) {
    const Vec3 trial = std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    return v.cross(trial).normalized();
}

// Rotates `dir` by an angle in [0, max_deg] about a random axis perpendicular to it.
Vec3 perturb_direction(const Vec3& dir, double max_deg, std::mt19937_64& rng) {
    if (max_deg <= 0.0) return dir;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double angle = unit(rng) * max_deg * std::numbers::pi / 180.0;
    const double spin = unit(rng) * 2.0 * std::numbers::pi;
    const Vec3 u = any_perpendicular(dir);
    const Vec3 w = dir.cross(u);
    const Vec3 axis = std::cos(spin) * u + std::sin(spin) * w;
    return (Eigen::AngleAxisd(angle, axis) * dir).normalized();
}

double jittered_threshold(const SimConfig& cfg, std::mt19937_64& rng) {
    if (!cfg.division_jitter) return cfg.division_length;
    std::uniform_int_distribution<int> shift(-1, 1);
    return cfg.division_length * std::exp(cfg.growth_rate * cfg.frame_interval_s * shift(rng));
}

struct TrackRecord {
    int t_init = 0;
    int parent = 0;
    std::vector<Vec3> centroids;
};

} // namespace

double CellAgent::geometric_volume() const { return spherocylinder_volume(length, radius); }

void validate_sim_config(const SimConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (c.seed_count < 1) fail("seed_count >= 1 required");
    if (c.frames < 2) fail("frames >= 2 required");
    if (!(c.frame_interval_s > 0.0)) fail("frame_interval_s must be positive");
    if (!(c.growth_rate > 0.0)) fail("growth_rate must be positive");
    if (!(c.cell_radius > 0.0)) fail("cell_radius must be positive");
    if (!(c.seed_length >= c.cell_radius)) fail("seed_length must be >= cell_radius");
    if (!(c.division_length > c.seed_length)) fail("division_length must exceed seed_length");
    if (!(c.division_noise_deg >= 0.0)) fail("division_noise_deg must be >= 0");
    if ((c.domain_extent.array() <= 0.0).any()) fail("domain_extent must be positive");
    if (!(c.seed_spread > 0.0 && c.seed_spread <= 1.0)) fail("seed_spread must be in (0, 1]");
    if (c.points_per_cell < 30) fail("points_per_cell >= 30 required");
    if (expected_final_population(c) > kMaxPopulation) {
        std::ostringstream os;
        os << "expected final population " << expected_final_population(c) << " exceeds " << kMaxPopulation;
        fail(os.str());
    }
}

double expected_final_population(const SimConfig& c) {
    return c.seed_count * std::exp(c.growth_rate * c.frame_interval_s * (c.frames - 1));
}

std::vector<Vec3> sample_rod_points(const CellAgent& agent, int n, std::mt19937_64& rng) {
    const double half = 0.5 * agent.length;
    const double r = agent.radius;
    const Vec3 u = any_perpendicular(agent.orientation);
    const Vec3 w = agent.orientation.cross(u);
    std::uniform_real_distribution<double> along(-half - r, half + r);
    std::uniform_real_distribution<double> across(-r, r);
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(std::max(n, 0)));
    while (static_cast<int>(pts.size()) < n) {
        const double s = along(rng);
        const double a = across(rng);
        const double b = across(rng);
        const double axial = std::max(0.0, std::abs(s) - half);
        if (axial * axial + a * a + b * b > r * r) continue;
        pts.push_back(agent.centroid + s * agent.orientation + a * u + b * w);
    }
    return pts;
}

double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1, Vec3* closest_p,
                        Vec3* closest_q) {
    const Vec3 d1 = p1 - p0;
    const Vec3 d2 = q1 - q0;
    const Vec3 r = p0 - q0;
    const double a = d1.squaredNorm();
    const double e = d2.squaredNorm();
    const double f = d2.dot(r);
    constexpr double eps = 1e-12;
    double s = 0.0;
    double t = 0.0;
    if (a <= eps && e <= eps) {
        // both degenerate
    } else if (a <= eps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= eps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = denom > eps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    const Vec3 cp = p0 + s * d1;
    const Vec3 cq = q0 + t * d2;
    if (closest_p) *closest_p = cp;
    if (closest_q) *closest_q = cq;
    return (cp - cq).norm();
}

int relax_overlaps(std::vector<CellAgent>& agents, int max_iterations) {
    int sweeps = 0;
    for (; sweeps < max_iterations; ++sweeps) {
        bool moved = false;
        for (std::size_t i = 0; i < agents.size(); ++i) {
            for (std::size_t j = i + 1; j < agents.size(); ++j) {
                auto& a = agents[i];
                auto& b = agents[j];
                const double contact = a.radius + b.radius;
                const double reach = 0.5 * (a.length + b.length) + contact;
                if ((a.centroid - b.centroid).squaredNorm() > reach * reach) continue;
                Vec3 pa;
                Vec3 pb;
                const double d = segment_distance(a.axis_begin(), a.axis_end(), b.axis_begin(), b.axis_end(), &pa, &pb);
                if (d >= kMinSeparation * contact) continue;
                Vec3 dir = pb - pa;
                if (dir.norm() < 1e-9) dir = b.centroid - a.centroid;
                if (dir.norm() < 1e-9) dir = any_perpendicular(a.orientation);
                dir.normalize();
                const double push = 0.5 * (contact - d);
                a.centroid -= push * dir;
                b.centroid += push * dir;
                moved = true;
            }
        }
        if (!moved) break;
    }
    return sweeps;
}

std::pair<Sequence, GroundTruthLineage> simulate(const SimConfig& cfg) {
    validate_sim_config(cfg);
    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double density = cfg.points_per_cell / spherocylinder_volume(cfg.seed_length, cfg.cell_radius);
    const double growth_factor = std::exp(cfg.growth_rate * cfg.frame_interval_s);
    constexpr double max_tilt_deg = 10.0;

    std::vector<CellAgent> agents;
    std::map<int, TrackRecord> records;
    GroundTruthLineage lineage;
    int next_track = 1;

    for (int s = 0; s < cfg.seed_count; ++s) {
        CellAgent a;
        const double lo = 0.5 - 0.5 * cfg.seed_spread;
        a.centroid = Vec3((lo + cfg.seed_spread * unit(rng)) * cfg.domain_extent.x(),
                          (lo + cfg.seed_spread * unit(rng)) * cfg.domain_extent.y(), 0.5 * cfg.domain_extent.z());
        const double heading = 2.0 * std::numbers::pi * unit(rng);
        const double tilt = (2.0 * unit(rng) - 1.0) * max_tilt_deg * std::numbers::pi / 180.0;
        a.orientation = Vec3(std::cos(heading) * std::cos(tilt), std::sin(heading) * std::cos(tilt), std::sin(tilt))
                            .normalized();
        a.length = cfg.seed_length;
        a.radius = cfg.cell_radius;
        a.track_id = next_track++;
        a.division_threshold = jittered_threshold(cfg, rng);
        agents.push_back(a);
        records[a.track_id] = TrackRecord{0, 0, {}};
    }
    relax_overlaps(agents);

    Sequence seq;
    seq.frame_interval = cfg.frame_interval_s;
    for (int f = 0; f < cfg.frames; ++f) {
        if (f > 0) {
            std::vector<CellAgent> next;
            next.reserve(agents.size() * 2);
            // A cell that reached its threshold splits instead of growing, so the
            // daughters' lengths sum to the parent's last observed length.
            for (auto& a : agents) {
                if (a.length < a.division_threshold) {
                    a.length *= growth_factor;
                    next.push_back(a);
                    continue;
                }
                DivisionEvent ev;
                ev.parent_track = a.track_id;
                ev.frame_of_daughters = f;
                for (int side : {+1, -1}) {
                    CellAgent d = a;
                    d.length = 0.5 * a.length;
                    d.centroid = a.centroid + side * 0.25 * a.length * a.orientation;
                    d.orientation = perturb_direction(a.orientation, cfg.division_noise_deg, rng);
                    d.track_id = next_track++;
                    d.parent_id = a.track_id;
                    d.division_threshold = jittered_threshold(cfg, rng);
                    records[d.track_id] = TrackRecord{f, a.track_id, {}};
                    (side > 0 ? ev.daughter_a : ev.daughter_b) = d.track_id;
                    next.push_back(d);
                }
                lineage.division_events.push_back(ev);
            }
            agents = std::move(next);
            relax_overlaps(agents);
            for (auto& a : agents) {
                for (int k = 0; k < 3; ++k)
                    a.centroid[k] = std::clamp(a.centroid[k], a.radius, cfg.domain_extent[k] - a.radius);
            }
        }

        FrameObservations frame;
        frame.frame_index = f;
        for (const auto& a : agents) {
            const int n = std::max(1, static_cast<int>(std::lround(density * a.geometric_volume())));
            auto obs = InstanceObservation::from_points(f, a.track_id, sample_rod_points(a, n, rng));
            records[a.track_id].centroids.push_back(obs.centroid);
            frame.instances.push_back(std::move(obs));
        }
        frame.sort_by_id();
        seq.frames.push_back(std::move(frame));
    }

    for (auto& [id, rec] : records) {
        Track t;
        t.track_id = id;
        t.t_init = rec.t_init;
        t.t_fin = rec.t_init + static_cast<int>(rec.centroids.size()) - 1;
        t.centroids = std::move(rec.centroids);
        t.parent_id = rec.parent;
        lineage.tracks.push_back(std::move(t));
    }
    return {std::move(seq), std::move(lineage)};
}

} // namespace rodtrack
