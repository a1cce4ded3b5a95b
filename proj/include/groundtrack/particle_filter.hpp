#pragma once

#include "groundtrack/appearance.hpp"
#include "groundtrack/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace groundtrack {

/// Position and per-frame velocity of an object confined to the ground plane.
struct ObjectState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();

    bool operator==(const ObjectState&) const = default;
};

/// Orthonormal in-plane frame: world = origin + a·u + b·v.
struct PlaneBasis {
    Vec3 origin;
    Vec3 u;
    Vec3 v;

    explicit PlaneBasis(const GroundPlane& plane);
    Vec3 to_world(const Vec2& ab) const { return origin + ab.x() * u + ab.y() * v; }
    Vec2 to_plane(const Vec3& p) const { return {(p - origin).dot(u), (p - origin).dot(v)}; }
};

/// Convex polygon in plane coordinates (counter-clockwise or clockwise).
using PlanePolygon = std::vector<Vec2>;

struct ParticleSet {
    std::vector<ObjectState> states;
    std::vector<double> weights;
    GroundPlane plane;
    std::uint64_t rng_seed = 0;

    std::size_t size() const { return states.size(); }
    bool operator==(const ParticleSet& o) const {
        return states == o.states && weights == o.weights && rng_seed == o.rng_seed &&
               plane.normal == o.plane.normal && plane.offset == o.plane.offset;
    }
};

struct TransitionParams {
    double noise_sigma_pos = 0.0;
    double noise_sigma_vel = 0.0;
    double dt = 1.0;
};

/// Weighted particles plus a flag raised when every likelihood hit the floor.
struct WeightingResult {
    ParticleSet particles;
    bool degenerate = false;
};

inline constexpr double kLikelihoodFloor = 1e-6;

/// Projects `point` onto the plane and removes the normal component of `velocity`.
ObjectState confine_to_plane(const ObjectState& s, const GroundPlane& plane);

/// n i.i.d. uniform positions inside `region`, zero velocity, uniform weights.
ParticleSet init_uniform(const GroundPlane& plane, const PlanePolygon& region, std::size_t n,
                         std::uint64_t seed);

/// n particles around `center` with isotropic in-plane Gaussian spread `sigma`.
ParticleSet init_gaussian(const GroundPlane& plane, const ObjectState& center, double sigma,
                          std::size_t n, std::uint64_t seed);

/// Constant-velocity transition with in-plane Gaussian noise on position and velocity.
ParticleSet predict(ParticleSet particles, const TransitionParams& params, std::uint64_t seed);

/// Multiplies each weight by the bilinear score at the particle's projection and renormalizes.
WeightingResult weight_by_score_map(ParticleSet particles, const ScoreMap& score_map,
                                    const CameraFrame& frame, double floor = kLikelihoodFloor);

/// 1 / Σ w².
double effective_sample_size(std::span<const double> weights);
inline double effective_sample_size(const ParticleSet& p) { return effective_sample_size(p.weights); }

/// Stratified draw: for stratum i take u = (i + U[0,1)) / n and pick by cumulative weight.
std::vector<std::size_t> stratified_indices(std::span<const double> weights, std::uint64_t seed);

ParticleSet resample_stratified(const ParticleSet& particles, std::uint64_t seed);
/// Same with precomputed ancestor indices.
ParticleSet resample_stratified(const ParticleSet& particles, std::span<const std::size_t> ancestors);

/// Replaces the floor(fraction·n) lowest-weight particles by uniform draws in `region`
/// with velocity `velocity`, weight 1/n each, then renormalizes.
ParticleSet redistribute_fraction(ParticleSet particles, double fraction, const PlanePolygon& region,
                                  std::uint64_t seed, const Vec3& velocity = Vec3::Zero());

/// Weighted mean state, re-projected onto the plane.
ObjectState estimate_state(const ParticleSet& particles);

/// Weighted mean over a subset of particles.
ObjectState estimate_state(const ParticleSet& particles, std::span<const std::size_t> members);

/// Normalizes in place; returns false (and sets uniform weights) when the sum is not positive.
bool normalize_weights(std::vector<double>& weights);

/// Uniform samples inside a convex polygon. Throws Error(invalid_argument) on zero area.
std::vector<Vec2> sample_polygon(const PlanePolygon& region, std::size_t n, std::uint64_t seed);

}  // namespace groundtrack
