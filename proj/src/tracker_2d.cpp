// Image-space particle filter: the same cycle as the ground-plane tracker with a 2D
// constant-velocity model and occlusion recognized from the score map alone.

#include "groundtrack/error.hpp"
#include "groundtrack/kernels.hpp"
#include "groundtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace groundtrack {

namespace {

ImageParticles predict_image(ImageParticles p, double sigma_pos, double sigma_vel, double dt,
                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < p.positions.size(); ++i) {
        const double g1 = gauss(rng), g2 = gauss(rng), g3 = gauss(rng), g4 = gauss(rng);
        p.positions[i] += p.velocities[i] * dt + sigma_pos * Vec2(g1, g2);
        p.velocities[i] += sigma_vel * Vec2(g3, g4);
    }
    return p;
}

void redistribute_image(ImageParticles& p, double fraction, const BoundingBox& area,
                        const Vec2& velocity, std::uint64_t seed) {
    const std::size_t n = p.positions.size();
    const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
    if (m == 0) return;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p.weights[a] < p.weights[b]; });
    order.resize(m);
    std::sort(order.begin(), order.end());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i : order) {
        const double a = unit(rng);
        const double b = unit(rng);
        p.positions[i] = Vec2(area.x + a * area.w, area.y + b * area.h);
        p.velocities[i] = velocity;
        p.weights[i] = 1.0 / static_cast<double>(n);
    }
    normalize_weights(p.weights);
}

ImageParticles resample_image(const ImageParticles& p, std::span<const std::size_t> idx) {
    ImageParticles out;
    for (std::size_t i : idx) {
        out.positions.push_back(p.positions[i]);
        out.velocities.push_back(p.velocities[i]);
    }
    out.weights.assign(idx.size(), 1.0 / static_cast<double>(idx.size()));
    return out;
}

}  // namespace

std::optional<StepResult> step_filter_2d(const TrackerState& prev, const FrameContext& ctx,
                                         const ObservationProvider& provider) {
    const TrackerConfig& cfg = prev.config;
    const CameraFrame& frame = ctx.frame;
    const BoundingBox area = detail::search_area_for(prev, frame.intrinsics, nullptr);
    auto obs = provider.observe(frame.frame_index, area);
    if (!obs) return std::nullopt;

    StepResult result{prev, {}};
    TrackerState& s = result.state;
    s.frame_index = frame.frame_index;

    const Vec2 predicted = prev.image_position + prev.image_velocity * cfg.dt;
    s.image_particles = predict_image(prev.image_particles, s.sigma_pos, s.sigma_vel, cfg.dt, s.rng());

    bool visible = prev.occluded ? check_reappearance(*obs, predicted, 0.0, cfg)
                                 : !occlusion_verdict({}, *obs, cfg);
    if (visible) {
        ImageParticles candidate = s.image_particles;
        redistribute_image(candidate, cfg.redistribute_fraction, area, prev.image_velocity, s.rng());
        const auto likelihood = score_likelihoods_image(candidate.positions, obs->score_map,
                                                        kLikelihoodFloor);
        const bool degenerate = std::all_of(likelihood.begin(), likelihood.end(),
                                            [](double l) { return l <= kLikelihoodFloor; });
        if (degenerate) {
            visible = false;
        } else {
            for (std::size_t i = 0; i < likelihood.size(); ++i) candidate.weights[i] *= likelihood[i];
            normalize_weights(candidate.weights);

            std::vector<Vec3> coords;
            coords.reserve(candidate.positions.size());
            for (const Vec2& p : candidate.positions) coords.emplace_back(p.x(), p.y(), 0.0);
            const double link_radius = std::max(cfg.link_radius_frac * area.w, 1.0);
            const auto support = posterior_support(candidate.weights, s.rng());
            const auto clusters = cluster_points(candidate.positions, candidate.weights, coords,
                                                 link_radius, support);
            const Cluster& chosen =
                clusters[select_object_cluster(clusters, Vec3(predicted.x(), predicted.y(), 0.0))];

            auto members = expand_cluster(candidate.positions, chosen.members, link_radius);
            Vec2 position = Vec2::Zero();
            Vec2 velocity = Vec2::Zero();
            double total = 0.0;
            for (std::size_t i : members) {
                position += candidate.weights[i] * candidate.positions[i];
                velocity += candidate.weights[i] * candidate.velocities[i];
                total += candidate.weights[i];
            }
            position /= total;
            velocity /= total;
            if (!s.velocity_initialized) {
                const Vec2 start =
                    detail::box_at_anchor(prev.image_position, s.last_box_w, s.last_box_h, cfg.anchor)
                        .center();
                const BoundingBox peak_box = BoundingBox::centered(
                    obs->score_map.climb_from(start, detail::kPeakSmoothing, true), obs->proposal.w, obs->proposal.h);
                velocity = (detail::anchor_pixel(peak_box, cfg.anchor) - s.reference_pixel.value_or(prev.image_position)) /
                           cfg.dt;
                for (auto& v : candidate.velocities) v = velocity;
                s.velocity_initialized = true;
            }
            if (effective_sample_size(candidate.weights) <
                cfg.resample_ess_fraction * static_cast<double>(candidate.weights.size())) {
                const auto ancestors = stratified_indices(candidate.weights, s.rng());
                members = descendants_of(ancestors, members);
                candidate = resample_image(candidate, ancestors);
            }
            s.image_particles = std::move(candidate);
            s.image_position = position;
            s.image_velocity = velocity;
            s.object_members = std::move(members);
            s.occluded = false;
            s.frames_occluded = 0;
            s.last_box_w = obs->proposal.w;
            s.last_box_h = obs->proposal.h;
        }
    }
    if (!visible) {
        s.image_position = predicted;
        s.occluded = true;
        ++s.frames_occluded;
    }

    TrackOutput& out = result.output;
    out.frame_index = frame.frame_index;
    out.occluded = s.occluded;
    out.confidence = s.occluded ? 0.0 : obs->confidence;
    out.reprojected_center = s.image_position;
    out.box = detail::box_at_anchor(s.image_position, s.last_box_w, s.last_box_h, cfg.anchor);
    s.last_box = *out.box;
    try {
        s.estimate = {backproject_to_plane(s.image_position, frame, ctx.plane), Vec3::Zero()};
    } catch (const Error&) {
        // horizon or behind the camera: keep the last ground estimate
    }
    out.state_3d = s.estimate;
    return result;
}

}  // namespace groundtrack
