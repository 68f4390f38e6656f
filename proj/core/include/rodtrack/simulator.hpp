#pragma once

#include "rodtrack/model.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace rodtrack {

/// A rod-shaped cell modelled as a spherocylinder: an axis segment of
/// `length` centred on `centroid` along `orientation`, inflated by `radius`.
struct CellAgent {
    Vec3 centroid = Vec3::Zero();
    Vec3 orientation = Vec3::UnitX();
    double length = 1.0;
    double radius = 1.0;
    int track_id = 0;
    int parent_id = 0;
    /// Length at which this agent splits (division_length, possibly jittered).
    double division_threshold = 0.0;

    Vec3 axis_begin() const { return centroid - 0.5 * length * orientation; }
    Vec3 axis_end() const { return centroid + 0.5 * length * orientation; }
    double geometric_volume() const;
};

struct SimConfig {
    int seed_count = 1;
    int frames = 40;
    double frame_interval_s = 10.0;
    /// Exponential length growth rate, 1/s. The default doubles length every 10 frames.
    double growth_rate = 0.00693147180559945;
    double seed_length = 12.0;
    double cell_radius = 3.0;
    double division_length = 24.0;
    double division_noise_deg = 8.0;
    /// Draw a per-cell division delay of -1, 0 or +1 frames.
    bool division_jitter = true;
    Vec3 domain_extent = Vec3(450.0, 450.0, 150.0);
    /// Fraction of the x/y domain (centred) in which seeds are placed.
    double seed_spread = 0.5;
    /// Point count of a seed-sized cell; sets the sampling density for all cells.
    int points_per_cell = 300;
    std::uint64_t rng_seed = 1;
};

/// Throws ConfigError describing the first invalid field.
void validate_sim_config(const SimConfig& config);

/// Expected population after the last frame under pure exponential growth.
double expected_final_population(const SimConfig& config);

/// Runs the colony simulation. Instance ids in every frame equal the ground
/// truth track id of the cell. In each division event `daughter_a` is the
/// daughter designated to continue the parent's identity.
std::pair<Sequence, GroundTruthLineage> simulate(const SimConfig& config);

/// Draws `n` points uniformly inside the agent's spherocylinder.
std::vector<Vec3> sample_rod_points(const CellAgent& agent, int n, std::mt19937_64& rng);

/// Shortest distance between two segments [p0,p1] and [q0,q1]; optionally
/// returns the closest point on each.
double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1,
                        Vec3* closest_p = nullptr, Vec3* closest_q = nullptr);

/// Pairwise push-apart until every pair of axes is at least 0.9 (r_i + r_j)
/// apart or `max_iterations` sweeps have run. Returns the number of sweeps.
int relax_overlaps(std::vector<CellAgent>& agents, int max_iterations = 50);

} // namespace rodtrack
