#pragma once

// Test-only fixtures and oracles. Nothing here calls into the code paths the
// oracles check.

#include "rodtrack/matcher.hpp"
#include "rodtrack/model.hpp"
#include "rodtrack/simulator.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace rodtrack::testing {

/// Random frame-pair problem: m, n in [1, max_side], up to `max_per_source`
/// distinct targets per source, i.i.d. uniform scores in (0, 1].
inline AssignmentProblem random_problem(std::mt19937_64& rng, int max_side = 10, int max_per_source = 4,
                                        bool quantized = false) {
    std::uniform_int_distribution<int> side(1, max_side);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    AssignmentProblem p;
    const int m = side(rng);
    const int n = side(rng);
    for (int i = 1; i <= m; ++i) p.source_ids.push_back(i);
    for (int j = 1; j <= n; ++j) p.target_ids.push_back(100 + j);
    std::vector<int> targets = p.target_ids;
    for (int s : p.source_ids) {
        std::shuffle(targets.begin(), targets.end(), rng);
        const int k = std::min<int>(n, std::uniform_int_distribution<int>(1, max_per_source)(rng));
        for (int c = 0; c < k; ++c) {
            double score = 1.0 - unit(rng); // (0, 1]
            if (quantized) score = std::ceil(score * 4.0) / 4.0;
            p.candidates.push_back({s, targets[static_cast<std::size_t>(c)], score});
        }
    }
    return p;
}

/// Exhaustive feasibility oracle independent of the system-matrix code path.
inline bool one_to_one(const AssignmentProblem& p, const std::vector<std::uint8_t>& x) {
    std::multiset<int> s;
    std::multiset<int> t;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!x[k]) continue;
        s.insert(p.candidates[k].source_id);
        t.insert(p.candidates[k].target_id);
    }
    for (int v : s)
        if (s.count(v) > 1) return false;
    for (int v : t)
        if (t.count(v) > 1) return false;
    return true;
}

/// Points evenly spread through a solid spherocylinder (deterministic grid),
/// axis along `dir` centred on `centre`.
inline std::vector<Vec3> grid_rod(const Vec3& centre, const Vec3& dir, double length, double radius, double step = 0.5) {
    const Vec3 d = dir.normalized();
    const Vec3 u = d.unitOrthogonal();
    const Vec3 w = d.cross(u);
    std::vector<Vec3> pts;
    const double half = 0.5 * length;
    for (double s = -half - radius; s <= half + radius + 1e-9; s += step) {
        for (double a = -radius; a <= radius + 1e-9; a += step) {
            for (double b = -radius; b <= radius + 1e-9; b += step) {
                const double axial = std::max(0.0, std::abs(s) - half);
                if (axial * axial + a * a + b * b > radius * radius) continue;
                pts.push_back(centre + s * d + a * u + b * w);
            }
        }
    }
    return pts;
}

/// Major axis by power iteration on the centred scatter matrix.
inline Vec3 power_iteration_axis(const std::vector<Vec3>& pts, int iterations = 500) {
    Vec3 mean = Vec3::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    for (const auto& p : pts) a += (p - mean) * (p - mean).transpose();
    Vec3 v(1.0, 0.7, 0.3);
    for (int i = 0; i < iterations; ++i) v = (a * v).normalized();
    return v;
}

/// An unmatched daughter X, its collinear sibling placed end to end along X's
/// axis, and 1-5 lateral distractor rods at a comparable centroid distance.
/// Grid sampling keeps each rod's point mean exactly on its axis.
struct SplitFixture {
    FrameObservations frame;
    int x_id = 0;
    int sibling_id = 0;
    double rod_length = 0.0; // parent tip to tip
};

inline SplitFixture rod_split_fixture(std::mt19937_64& rng, int distractors) {
    std::uniform_int_distribution<int> half_steps_len(16, 28); // axis length 8..14
    std::uniform_int_distribution<int> half_steps_rad(4, 6);   // radius 2..3
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);

    const double a = 0.5 * half_steps_len(rng);
    const double r = 0.5 * half_steps_rad(rng);
    const double gap = 0.5;
    const double s = a + 2.0 * r + gap;
    const Vec3 d = Vec3(g(rng), g(rng), g(rng)).normalized();
    const Vec3 c(100.0 * unit(rng), 100.0 * unit(rng), 100.0 * unit(rng));

    std::vector<int> ids(static_cast<std::size_t>(distractors + 2));
    std::iota(ids.begin(), ids.end(), 1);
    std::shuffle(ids.begin(), ids.end(), rng);

    SplitFixture fx;
    fx.x_id = ids[0];
    fx.sibling_id = ids[1];
    fx.rod_length = 2.0 * a + 4.0 * r + gap;
    fx.frame.frame_index = 1;
    fx.frame.instances.push_back(InstanceObservation::from_points(1, fx.x_id, grid_rod(c, d, a, r)));
    fx.frame.instances.push_back(InstanceObservation::from_points(1, fx.sibling_id, grid_rod(c + s * d, d, a, r)));
    for (int k = 0; k < distractors; ++k) {
        // Lateral direction, tilted at most 45 degrees towards the axis.
        Vec3 lateral = Vec3(g(rng), g(rng), g(rng));
        lateral = (lateral - lateral.dot(d) * d).normalized();
        const double phi = (unit(rng) - 0.5) * 0.5 * std::acos(-1.0);
        const Vec3 dir = std::cos(phi) * lateral + std::sin(phi) * d;
        const double dist = s * (0.8 + 0.2 * unit(rng));
        const Vec3 orient = Vec3(g(rng), g(rng), g(rng)).normalized();
        fx.frame.instances.push_back(InstanceObservation::from_points(
            1, ids[static_cast<std::size_t>(k + 2)], grid_rod(c + dist * dir, orient, a, r)));
    }
    fx.frame.sort_by_id();
    return fx;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    return q.normalized().toRotationMatrix();
}

} // namespace rodtrack::testing
