#include "groundtrack/tracker.hpp"

#include "groundtrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace groundtrack {

const char* to_string(TrackerVariant v) noexcept {
    switch (v) {
        case TrackerVariant::ml_baseline: return "ml";
        case TrackerVariant::filter_2d: return "2d";
        case TrackerVariant::filter_3d: return "3d";
    }
    return "?";
}

TrackerVariant parse_variant(const std::string& name) {
    if (name == "ml" || name == "ml_baseline") return TrackerVariant::ml_baseline;
    if (name == "2d" || name == "filter_2d") return TrackerVariant::filter_2d;
    if (name == "3d" || name == "filter_3d") return TrackerVariant::filter_3d;
    throw Error(ErrorCode::invalid_argument, "unknown tracker variant '" + name + "'");
}

bool TrackerState::operator==(const TrackerState& o) const {
    return variant == o.variant && particles == o.particles &&
           image_particles == o.image_particles && estimate == o.estimate &&
           last_visible_state == o.last_visible_state && initial_state == o.initial_state &&
           velocity_initialized == o.velocity_initialized && reference_pixel == o.reference_pixel &&
           reference_position == o.reference_position && image_position == o.image_position &&
           image_velocity == o.image_velocity && last_box == o.last_box &&
           last_box_w == o.last_box_w && last_box_h == o.last_box_h && occluded == o.occluded &&
           frames_occluded == o.frames_occluded && object_members == o.object_members &&
           sigma_pos == o.sigma_pos && sigma_vel == o.sigma_vel &&
           frame_index == o.frame_index && rng == o.rng;
}

namespace detail {

Vec2 anchor_pixel(const BoundingBox& box, BoxAnchor anchor) {
    return anchor == BoxAnchor::center ? box.center() : box.bottom_center();
}

BoundingBox box_at_anchor(const Vec2& pixel, double w, double h, BoxAnchor anchor) {
    if (anchor == BoxAnchor::center) return BoundingBox::centered(pixel, w, h);
    return {pixel.x() - 0.5 * w, pixel.y() - h, w, h};
}

BoundingBox search_area_for(const TrackerState& state, const Intrinsics& in, bool* clamped) {
    const BoundingBox area = search_area_from_state(state.last_box, state.config.search_scale,
                                                    in.width, in.height, clamped);
    return clamp_to_image(snap_to_pixels(area), in.width, in.height);
}

}  // namespace detail

namespace {

std::optional<PlanePolygon> ground_region(const BoundingBox& area, const CameraFrame& frame,
                                          const GroundPlane& plane) {
    const PlaneBasis basis(plane);
    const Vec2 corners[4] = {{area.x, area.y},
                             {area.x + area.w, area.y},
                             {area.x + area.w, area.y + area.h},
                             {area.x, area.y + area.h}};
    PlanePolygon poly;
    try {
        for (const Vec2& c : corners) poly.push_back(basis.to_plane(backproject_to_plane(c, frame, plane)));
    } catch (const Error&) {
        return std::nullopt;
    }
    return poly;
}

double polygon_area(const PlanePolygon& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * std::abs(a);
}

std::optional<Vec2> try_project(const Vec3& p, const CameraFrame& frame) {
    try {
        return project_to_image(p, frame).pixel;
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::vector<Vec3> positions_of(const ParticleSet& particles, std::span<const std::size_t> members) {
    std::vector<Vec3> out;
    if (members.empty()) {
        for (const auto& s : particles.states) out.push_back(s.position);
    } else {
        for (std::size_t i : members) out.push_back(particles.states[i].position);
    }
    return out;
}

double fraction_true(const std::vector<bool>& mask) {
    if (mask.empty()) return 0.0;
    return static_cast<double>(std::count(mask.begin(), mask.end(), true)) /
           static_cast<double>(mask.size());
}

}  // namespace

TrackerState initialize(const BoundingBox& first_box, const FrameContext& ctx,
                        const TrackerConfig& cfg) {
    const Intrinsics& in = ctx.frame.intrinsics;
    if (!(first_box.w > 0.0 && first_box.h > 0.0))
        throw Error(ErrorCode::initialization_failed, "first box must have positive size");
    if (!in.contains(first_box.center()))
        throw Error(ErrorCode::initialization_failed, "first box outside the image");

    TrackerState state;
    state.variant = cfg.variant;
    state.config = cfg;
    state.rng.seed(cfg.seed);
    state.last_box = first_box;
    state.last_box_w = first_box.w;
    state.last_box_h = first_box.h;
    state.frame_index = ctx.frame.frame_index;

    const Vec2 anchor = detail::anchor_pixel(first_box, cfg.anchor);
    state.image_position = anchor;

    Vec3 position;
    try {
        position = backproject_to_plane(anchor, ctx.frame, ctx.plane);
    } catch (const Error& e) {
        throw Error(ErrorCode::initialization_failed, e.what());
    }
    state.estimate = confine_to_plane({position, Vec3::Zero()}, ctx.plane);
    state.initial_state = state.estimate;
    state.last_visible_state = state.estimate;

    const BoundingBox area = detail::search_area_for(state, in, nullptr);
    if (cfg.variant == TrackerVariant::filter_2d) {
        state.sigma_pos = cfg.noise_sigma_pos > 0.0 ? cfg.noise_sigma_pos : cfg.noise_pos_frac * area.w;
    } else {
        double extent = 0.0;
        if (const auto region = ground_region(area, ctx.frame, ctx.plane))
            extent = std::sqrt(polygon_area(*region));
        if (!(extent > 0.0)) extent = 1.0;
        state.sigma_pos = cfg.noise_sigma_pos > 0.0 ? cfg.noise_sigma_pos : cfg.noise_pos_frac * extent;
    }
    state.sigma_vel = cfg.noise_sigma_vel > 0.0 ? cfg.noise_sigma_vel : cfg.noise_vel_ratio * state.sigma_pos;

    const std::size_t n = std::max<std::size_t>(cfg.n_particles, 1);
    if (cfg.variant == TrackerVariant::filter_3d) {
        state.particles = init_gaussian(ctx.plane, state.estimate, state.sigma_pos, n, state.rng());
    } else if (cfg.variant == TrackerVariant::filter_2d) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto& ip = state.image_particles;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = gauss(state.rng);
            const double b = gauss(state.rng);
            ip.positions.push_back(anchor + state.sigma_pos * Vec2(a, b));
            ip.velocities.push_back(Vec2::Zero());
        }
        ip.weights.assign(n, 1.0 / static_cast<double>(n));
    }
    return state;
}

void prime_velocity_reference(TrackerState& state, const FrameContext& ctx,
                              const ObservationProvider& provider) {
    const TrackerConfig& cfg = state.config;
    if (cfg.variant == TrackerVariant::ml_baseline) return;
    const BoundingBox area = detail::search_area_for(state, ctx.frame.intrinsics, nullptr);
    const auto obs = provider.observe(ctx.frame.frame_index, area);
    if (!obs || obs->score_map.grid.empty() || obs->score_map.max() < cfg.visibility_threshold) return;
    const Vec2 peak = obs->score_map.climb_from(state.last_box.center(), detail::kPeakSmoothing, true);
    const Vec2 pixel =
        detail::anchor_pixel(BoundingBox::centered(peak, state.last_box_w, state.last_box_h), cfg.anchor);
    if (cfg.variant == TrackerVariant::filter_3d) {
        try {
            state.reference_position =
                confine_to_plane({backproject_to_plane(pixel, ctx.frame, ctx.plane), Vec3::Zero()}, ctx.plane)
                    .position;
        } catch (const Error&) {
            return;
        }
    }
    state.reference_pixel = pixel;
}

TrackOutput initial_output(const TrackerState& state, const BoundingBox& first_box) {
    TrackOutput out;
    out.frame_index = state.frame_index;
    out.box = first_box;
    out.confidence = 1.0;
    out.state_3d = state.estimate;
    out.reprojected_center = detail::anchor_pixel(first_box, state.config.anchor);
    return out;
}

std::vector<bool> identify_occluded_particles(std::span<const Vec3> positions,
                                              const FrameContext& ctx, double depth_tol) {
    std::vector<bool> mask(positions.size(), false);
    const DepthMap* depth = ctx.depth_map.get();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        Projection proj;
        try {
            proj = project_to_image(positions[i], ctx.frame);
        } catch (const Error&) {
            mask[i] = true;
            continue;
        }
        if (!depth) continue;
        const long col = std::lround(proj.pixel.x());
        const long row = std::lround(proj.pixel.y());
        if (col < 0 || row < 0 || col >= depth->width || row >= depth->height) {
            mask[i] = true;
            continue;
        }
        const float observed = depth->at(static_cast<int>(col), static_cast<int>(row));
        if (observed == DepthMap::kNoData) continue;
        mask[i] = proj.depth > static_cast<double>(observed) * (1.0 + depth_tol);
    }
    return mask;
}

std::vector<bool> identify_occluded_particles(const ParticleSet& particles, const FrameContext& ctx,
                                              double depth_tol) {
    return identify_occluded_particles(positions_of(particles, {}), ctx, depth_tol);
}

bool occlusion_verdict(const std::vector<bool>& mask, const Observation& obs,
                       const TrackerConfig& cfg) {
    if (!mask.empty() && fraction_true(mask) >= cfg.occluded_particle_fraction) return true;
    const double peak = obs.score_map.max();
    const double mean = obs.score_map.mean();
    const bool flat = mean <= 0.0 || peak / mean < cfg.flatness_ratio;
    return flat && peak < cfg.visibility_threshold;
}

std::vector<Cluster> cluster_points(std::span<const Vec2> pixels, std::span<const double> weights,
                                    std::span<const Vec3> centroids, double link_radius) {
    if (!(link_radius > 0.0)) throw Error(ErrorCode::invalid_argument, "link radius must be positive");
    const std::size_t n = pixels.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    auto unite = [&](std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    auto cell_of = [&](const Vec2& p) {
        return std::pair<long long, long long>{static_cast<long long>(std::floor(p.x() / link_radius)),
                                               static_cast<long long>(std::floor(p.y() / link_radius))};
    };
    auto key_of = [](long long cx, long long cy) {
        return static_cast<std::uint64_t>(cx) * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(cy);
    };
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    for (std::size_t i = 0; i < n; ++i)
        if (pixels[i].allFinite()) {
            const auto [cx, cy] = cell_of(pixels[i]);
            grid[key_of(cx, cy)].push_back(i);
        }
    const double r2 = link_radius * link_radius;
    for (std::size_t i = 0; i < n; ++i) {
        if (!pixels[i].allFinite()) continue;
        const auto [cx, cy] = cell_of(pixels[i]);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                const auto it = grid.find(key_of(cx + dx, cy + dy));
                if (it == grid.end()) continue;
                for (std::size_t j : it->second)
                    if (j > i && (pixels[i] - pixels[j]).squaredNorm() <= r2) unite(i, j);
            }
    }

    std::vector<Cluster> clusters;
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<std::ptrdiff_t>(clusters.size());
            clusters.emplace_back();
        }
        Cluster& c = clusters[static_cast<std::size_t>(slot[root])];
        c.members.push_back(i);
        c.weight += weights[i];
        c.centroid += weights[i] * centroids[i];
    }
    for (Cluster& c : clusters) {
        if (c.weight > 0.0) {
            c.centroid /= c.weight;
        } else {
            c.centroid.setZero();
            for (std::size_t i : c.members) c.centroid += centroids[i];
            c.centroid /= static_cast<double>(c.members.size());
        }
    }
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const Cluster& a, const Cluster& b) { return a.weight > b.weight; });
    return clusters;
}

std::vector<Cluster> cluster_points(std::span<const Vec2> pixels, std::span<const double> weights,
                                    std::span<const Vec3> centroids, double link_radius,
                                    std::span<const std::size_t> subset) {
    if (subset.empty()) return cluster_points(pixels, weights, centroids, link_radius);
    std::vector<Vec2> px;
    std::vector<double> w;
    std::vector<Vec3> c;
    for (std::size_t i : subset) {
        px.push_back(pixels[i]);
        w.push_back(weights[i]);
        c.push_back(centroids[i]);
    }
    auto clusters = cluster_points(px, w, c, link_radius);
    for (Cluster& cl : clusters)
        for (std::size_t& m : cl.members) m = subset[m];
    return clusters;
}

std::vector<std::size_t> posterior_support(std::span<const double> weights, std::uint64_t seed) {
    auto idx = stratified_indices(weights, seed);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

std::vector<Cluster> cluster_particles(const ParticleSet& particles, const CameraFrame& frame,
                                       double link_radius, std::span<const std::size_t> subset) {
    std::vector<Vec2> pixels;
    std::vector<Vec3> positions;
    pixels.reserve(particles.size());
    for (const auto& s : particles.states) {
        const auto px = try_project(s.position, frame);
        pixels.push_back(px ? *px : Vec2::Constant(std::numeric_limits<double>::quiet_NaN()));
        positions.push_back(s.position);
    }
    return cluster_points(pixels, particles.weights, positions, link_radius, subset);
}

std::vector<std::size_t> expand_cluster(std::span<const Vec2> pixels, std::span<const std::size_t> members,
                                        double link_radius) {
    const double r2 = link_radius * link_radius;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        for (std::size_t m : members) {
            if ((pixels[i] - pixels[m]).squaredNorm() <= r2) {
                out.push_back(i);
                break;
            }
        }
    }
    return out;
}

std::vector<std::size_t> descendants_of(std::span<const std::size_t> ancestors,
                                        std::span<const std::size_t> members) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < ancestors.size(); ++j)
        if (std::binary_search(members.begin(), members.end(), ancestors[j])) out.push_back(j);
    return out;
}

std::size_t select_object_cluster(std::span<const Cluster> clusters, const Vec3& predicted) {
    if (clusters.empty()) throw Error(ErrorCode::no_cluster, "no clusters to select from");
    std::size_t best = 0;
    double best_d = (clusters[0].centroid - predicted).norm();
    for (std::size_t i = 1; i < clusters.size(); ++i) {
        const double d = (clusters[i].centroid - predicted).norm();
        if (d < best_d || (d == best_d && clusters[i].weight > clusters[best].weight)) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

bool check_reappearance(const Observation& obs, const Vec2& predicted_pixel,
                        double occluded_fraction, const TrackerConfig& cfg) {
    if (occluded_fraction >= cfg.occluded_particle_fraction) return false;
    const double radius = cfg.reappear_radius_frac * obs.score_map.search_area.w;
    return obs.score_map.max_within(predicted_pixel, radius) >= cfg.reappear_threshold;
}

std::optional<StepResult> step(const TrackerState& state, const FrameContext& ctx,
                               const ObservationProvider& provider) {
    switch (state.variant) {
        case TrackerVariant::ml_baseline: return step_ml_baseline(state, ctx, provider);
        case TrackerVariant::filter_2d: return step_filter_2d(state, ctx, provider);
        case TrackerVariant::filter_3d: return step_filter_3d(state, ctx, provider);
    }
    return std::nullopt;
}

std::optional<StepResult> step_filter_3d(const TrackerState& prev, const FrameContext& ctx,
                                         const ObservationProvider& provider) {
    const TrackerConfig& cfg = prev.config;
    const CameraFrame& frame = ctx.frame;
    const BoundingBox area = detail::search_area_for(prev, frame.intrinsics, nullptr);
    auto obs = provider.observe(frame.frame_index, area);
    if (!obs) return std::nullopt;

    StepResult result{prev, {}};
    TrackerState& s = result.state;
    s.frame_index = frame.frame_index;

    const ObjectState predicted =
        confine_to_plane({prev.estimate.position + prev.estimate.velocity * cfg.dt,
                          prev.estimate.velocity},
                         ctx.plane);
    s.particles = predict(prev.particles, {s.sigma_pos, s.sigma_vel, cfg.dt}, s.rng());
    const auto predicted_pixel = try_project(predicted.position, frame);

    const auto mask = identify_occluded_particles(positions_of(s.particles, prev.object_members),
                                                  ctx, cfg.depth_tol);
    bool visible = predicted_pixel.has_value();
    if (visible) {
        visible = prev.occluded ? check_reappearance(*obs, *predicted_pixel, fraction_true(mask), cfg)
                                : !occlusion_verdict(mask, *obs, cfg);
    }

    const double link_radius = std::max(cfg.link_radius_frac * area.w, 1.0);
    if (visible) {
        ParticleSet candidate = s.particles;
        if (const auto region = ground_region(area, frame, ctx.plane))
            candidate = redistribute_fraction(std::move(candidate), cfg.redistribute_fraction,
                                              *region, s.rng(), predicted.velocity);
        auto weighted = weight_by_score_map(std::move(candidate), obs->score_map, frame);
        if (weighted.degenerate) {
            visible = false;
        } else {
            ParticleSet& particles = weighted.particles;
            const auto support = posterior_support(particles.weights, s.rng());
            const auto clusters = cluster_particles(particles, frame, link_radius, support);
            const Cluster& chosen = clusters[select_object_cluster(clusters, predicted.position)];
            std::vector<Vec2> pixels;
            pixels.reserve(particles.size());
            for (const auto& p : particles.states) {
                const auto px = try_project(p.position, frame);
                pixels.push_back(px ? *px : Vec2::Constant(std::numeric_limits<double>::quiet_NaN()));
            }
            auto members = expand_cluster(pixels, chosen.members, link_radius);
            ObjectState updated = estimate_state(particles, members);
            if (!s.velocity_initialized) {
                // finite difference against the score peak reached from the previous position
                Vec3 observed = updated.position;
                const Vec2 start =
                    detail::box_at_anchor(*predicted_pixel, s.last_box_w, s.last_box_h, cfg.anchor).center();
                const BoundingBox peak_box = BoundingBox::centered(
                    obs->score_map.climb_from(start, detail::kPeakSmoothing, true), obs->proposal.w, obs->proposal.h);
                try {
                    observed = backproject_to_plane(detail::anchor_pixel(peak_box, cfg.anchor), frame,
                                                    ctx.plane);
                } catch (const Error&) {
                }
                updated.velocity = (observed - s.reference_position.value_or(s.initial_state.position)) / cfg.dt;
                for (auto& p : particles.states) p.velocity = updated.velocity;
                updated = confine_to_plane(updated, ctx.plane);
                s.velocity_initialized = true;
            }
            if (effective_sample_size(particles) <
                cfg.resample_ess_fraction * static_cast<double>(particles.size())) {
                const auto ancestors = stratified_indices(particles.weights, s.rng());
                members = descendants_of(ancestors, members);
                particles = resample_stratified(particles, ancestors);
            }
            s.particles = std::move(particles);
            s.estimate = updated;
            s.last_visible_state = updated;
            s.object_members = std::move(members);
            s.occluded = false;
            s.frames_occluded = 0;
            s.last_box_w = obs->proposal.w;
            s.last_box_h = obs->proposal.h;
        }
    }
    if (!visible) {
        s.estimate = predicted;
        s.occluded = true;
        ++s.frames_occluded;
    }

    TrackOutput& out = result.output;
    out.frame_index = frame.frame_index;
    out.occluded = s.occluded;
    out.state_3d = s.estimate;
    out.confidence = s.occluded ? 0.0 : obs->confidence;
    if (const auto px = try_project(s.estimate.position, frame)) {
        out.reprojected_center = *px;
        out.box = detail::box_at_anchor(*px, s.last_box_w, s.last_box_h, cfg.anchor);
        s.last_box = *out.box;
    } else {
        out.reprojected_center = prev.last_box.center();
        out.box.reset();
    }
    return result;
}

std::optional<StepResult> step_ml_baseline(const TrackerState& prev, const FrameContext& ctx,
                                           const ObservationProvider& provider) {
    const TrackerConfig& cfg = prev.config;
    const BoundingBox area = detail::search_area_for(prev, ctx.frame.intrinsics, nullptr);
    auto obs = provider.observe(ctx.frame.frame_index, area);
    if (!obs) return std::nullopt;

    StepResult result{prev, {}};
    TrackerState& s = result.state;
    s.frame_index = ctx.frame.frame_index;
    TrackOutput& out = result.output;
    out.frame_index = s.frame_index;
    out.confidence = obs->confidence;
    if (obs->confidence < cfg.visibility_threshold) {
        s.occluded = true;
        ++s.frames_occluded;
    } else {
        const Vec2 peak = obs->score_map.argmax_pixel();
        s.last_box = detail::box_at_anchor(peak, obs->proposal.w, obs->proposal.h, cfg.anchor);
        s.last_box_w = obs->proposal.w;
        s.last_box_h = obs->proposal.h;
        s.occluded = false;
        s.frames_occluded = 0;
    }
    out.occluded = s.occluded;
    out.box = s.last_box;
    out.reprojected_center = detail::anchor_pixel(s.last_box, cfg.anchor);
    try {
        s.estimate = {backproject_to_plane(out.reprojected_center, ctx.frame, ctx.plane), Vec3::Zero()};
    } catch (const Error&) {
        // keep the previous ground estimate
    }
    out.state_3d = s.estimate;
    return result;
}

std::vector<TrackOutput> run_tracker(const std::vector<FrameContext>& contexts,
                                     const BoundingBox& first_box, const ObservationProvider& provider,
                                     const TrackerConfig& cfg) {
    if (contexts.empty()) throw Error(ErrorCode::invalid_argument, "no frames to track");
    TrackerState state = initialize(first_box, contexts.front(), cfg);
    prime_velocity_reference(state, contexts.front(), provider);
    std::vector<TrackOutput> outputs{initial_output(state, first_box)};
    for (std::size_t t = 1; t < contexts.size(); ++t) {
        auto result = step(state, contexts[t], provider);
        if (!result) break;
        state = std::move(result->state);
        outputs.push_back(std::move(result->output));
    }
    return outputs;
}

}  // namespace groundtrack
