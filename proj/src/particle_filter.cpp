#include "groundtrack/particle_filter.hpp"

#include "groundtrack/error.hpp"
#include "groundtrack/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace groundtrack {

PlaneBasis::PlaneBasis(const GroundPlane& plane)
    : origin(plane.normal * plane.offset),
      u(plane.normal.unitOrthogonal()),
      v(plane.normal.cross(plane.normal.unitOrthogonal())) {}

ObjectState confine_to_plane(const ObjectState& s, const GroundPlane& plane) {
    ObjectState out;
    out.position = plane.project(s.position);
    out.velocity = s.velocity - plane.normal.dot(s.velocity) * plane.normal;
    return out;
}

std::vector<Vec2> sample_polygon(const PlanePolygon& region, std::size_t n, std::uint64_t seed) {
    if (region.size() < 3) throw Error(ErrorCode::invalid_argument, "region needs 3 vertices");
    std::vector<double> cumulative;
    double total = 0.0;
    double extent = 0.0;
    for (std::size_t i = 1; i + 1 < region.size(); ++i) {
        const Vec2 a = region[i] - region[0];
        const Vec2 b = region[i + 1] - region[0];
        total += 0.5 * std::abs(a.x() * b.y() - a.y() * b.x());
        cumulative.push_back(total);
        extent = std::max({extent, a.norm(), b.norm()});
    }
    if (!(total > 1e-12 * std::max(extent * extent, 1e-300)))
        throw Error(ErrorCode::invalid_argument, "region has zero area");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec2> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double pick = unit(rng) * total;
        std::size_t t = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        t = std::min(t, cumulative.size() - 1);
        double r1 = unit(rng);
        double r2 = unit(rng);
        if (r1 + r2 > 1.0) {
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        const Vec2& a = region[0];
        const Vec2& b = region[t + 1];
        const Vec2& c = region[t + 2];
        out.push_back(a + r1 * (b - a) + r2 * (c - a));
    }
    return out;
}

ParticleSet init_uniform(const GroundPlane& plane, const PlanePolygon& region, std::size_t n,
                         std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::invalid_argument, "need at least one particle");
    const PlaneBasis basis(plane);
    const auto samples = sample_polygon(region, n, seed);
    ParticleSet set;
    set.plane = plane;
    set.rng_seed = seed;
    set.states.reserve(n);
    for (const Vec2& s : samples) set.states.push_back({plane.project(basis.to_world(s)), Vec3::Zero()});
    set.weights.assign(n, 1.0 / static_cast<double>(n));
    return set;
}

ParticleSet init_gaussian(const GroundPlane& plane, const ObjectState& center, double sigma,
                          std::size_t n, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::invalid_argument, "need at least one particle");
    const PlaneBasis basis(plane);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const ObjectState c = confine_to_plane(center, plane);
    ParticleSet set;
    set.plane = plane;
    set.rng_seed = seed;
    set.states.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = gauss(rng);
        const double b = gauss(rng);
        ObjectState s{c.position + sigma * (a * basis.u + b * basis.v), c.velocity};
        set.states.push_back(confine_to_plane(s, plane));
    }
    set.weights.assign(n, 1.0 / static_cast<double>(n));
    return set;
}

ParticleSet predict(ParticleSet particles, const TransitionParams& params, std::uint64_t seed) {
    const PlaneBasis basis(particles.plane);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (ObjectState& s : particles.states) {
        const double g1 = gauss(rng), g2 = gauss(rng), g3 = gauss(rng), g4 = gauss(rng);
        ObjectState next;
        next.position = s.position + s.velocity * params.dt;
        if (params.noise_sigma_pos > 0.0)
            next.position += params.noise_sigma_pos * (g1 * basis.u + g2 * basis.v);
        next.velocity = s.velocity;
        if (params.noise_sigma_vel > 0.0)
            next.velocity += params.noise_sigma_vel * (g3 * basis.u + g4 * basis.v);
        s = confine_to_plane(next, particles.plane);
    }
    return particles;
}

bool normalize_weights(std::vector<double>& weights) {
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(weights.size()));
        return false;
    }
    for (double& w : weights) w /= sum;
    return true;
}

WeightingResult weight_by_score_map(ParticleSet particles, const ScoreMap& score_map,
                                    const CameraFrame& frame, double floor) {
    std::vector<Vec3> positions;
    positions.reserve(particles.size());
    for (const auto& s : particles.states) positions.push_back(s.position);
    const auto likelihood = score_likelihoods(positions, score_map, frame, floor);

    WeightingResult result;
    result.degenerate = std::all_of(likelihood.begin(), likelihood.end(),
                                    [floor](double l) { return l <= floor; });
    if (result.degenerate) {
        std::fill(particles.weights.begin(), particles.weights.end(),
                  1.0 / static_cast<double>(particles.size()));
    } else {
        for (std::size_t i = 0; i < likelihood.size(); ++i) particles.weights[i] *= likelihood[i];
        if (!normalize_weights(particles.weights)) result.degenerate = true;
    }
    result.particles = std::move(particles);
    return result;
}

double effective_sample_size(std::span<const double> weights) {
    double sq = 0.0;
    for (double w : weights) sq += w * w;
    return 1.0 / sq;
}

std::vector<std::size_t> stratified_indices(std::span<const double> weights, std::uint64_t seed) {
    const std::size_t n = weights.size();
    std::vector<double> cumulative(n);
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    const double total = n ? cumulative.back() : 0.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> out(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (static_cast<double>(i) + unit(rng)) / static_cast<double>(n) * total;
        while (j + 1 < n && cumulative[j] <= u) ++j;
        out[i] = j;
    }
    return out;
}

ParticleSet resample_stratified(const ParticleSet& particles, std::uint64_t seed) {
    return resample_stratified(particles, stratified_indices(particles.weights, seed));
}

ParticleSet resample_stratified(const ParticleSet& particles, std::span<const std::size_t> idx) {
    ParticleSet out;
    out.plane = particles.plane;
    out.rng_seed = particles.rng_seed;
    out.states.reserve(idx.size());
    for (std::size_t i : idx) out.states.push_back(particles.states[i]);
    out.weights.assign(idx.size(), 1.0 / static_cast<double>(idx.size()));
    return out;
}

ParticleSet redistribute_fraction(ParticleSet particles, double fraction, const PlanePolygon& region,
                                  std::uint64_t seed, const Vec3& velocity) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw Error(ErrorCode::invalid_argument, "fraction must be in [0, 1]");
    const std::size_t n = particles.size();
    const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
    if (m == 0) return particles;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return particles.weights[a] < particles.weights[b];
    });
    order.resize(m);
    std::sort(order.begin(), order.end());

    const PlaneBasis basis(particles.plane);
    const auto samples = sample_polygon(region, m, seed);
    for (std::size_t k = 0; k < m; ++k) {
        ObjectState s{basis.to_world(samples[k]), velocity};
        particles.states[order[k]] = confine_to_plane(s, particles.plane);
        particles.weights[order[k]] = 1.0 / static_cast<double>(n);
    }
    normalize_weights(particles.weights);
    return particles;
}

ObjectState estimate_state(const ParticleSet& particles) {
    std::vector<std::size_t> all(particles.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return estimate_state(particles, all);
}

ObjectState estimate_state(const ParticleSet& particles, std::span<const std::size_t> members) {
    ObjectState mean;
    double total = 0.0;
    for (std::size_t i : members) {
        const double w = particles.weights[i];
        mean.position += w * particles.states[i].position;
        mean.velocity += w * particles.states[i].velocity;
        total += w;
    }
    if (total > 0.0) {
        mean.position /= total;
        mean.velocity /= total;
    } else if (!members.empty()) {
        // zero total weight: fall back to the unweighted mean
        for (std::size_t i : members) {
            mean.position += particles.states[i].position;
            mean.velocity += particles.states[i].velocity;
        }
        mean.position /= static_cast<double>(members.size());
        mean.velocity /= static_cast<double>(members.size());
    }
    return confine_to_plane(mean, particles.plane);
}

}  // namespace groundtrack
