#include "groundtrack/simulator.hpp"

#include "groundtrack/error.hpp"
#include "groundtrack/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace groundtrack {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

bool same_frame(const CameraFrame& a, const CameraFrame& b) {
    return a.frame_index == b.frame_index &&
           a.world_from_camera.rotation() == b.world_from_camera.rotation() &&
           a.world_from_camera.translation() == b.world_from_camera.translation() &&
           a.intrinsics.focal == b.intrinsics.focal && a.intrinsics.cx == b.intrinsics.cx &&
           a.intrinsics.cy == b.intrinsics.cy && a.intrinsics.width == b.intrinsics.width &&
           a.intrinsics.height == b.intrinsics.height;
}

/// Segment p + s·d, s in [s0, s1], against an AABB. Returns the entry parameter.
std::optional<double> slab_hit(const Vec3& p, const Vec3& d, const Vec3& lo, const Vec3& hi,
                               double s0, double s1) {
    double t0 = s0, t1 = s1;
    for (int k = 0; k < 3; ++k) {
        if (std::abs(d[k]) < 1e-15) {
            if (p[k] < lo[k] || p[k] > hi[k]) return std::nullopt;
            continue;
        }
        double a = (lo[k] - p[k]) / d[k];
        double b = (hi[k] - p[k]) / d[k];
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
        if (t0 > t1) return std::nullopt;
    }
    return t0;
}

std::array<Vec3, 9> footprint_samples(const GroundPlane& plane, const Vec3& center, double extent) {
    const PlaneBasis basis(plane);
    std::array<Vec3, 9> out;
    std::size_t k = 0;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            out[k++] = center + (extent / 3.0) * (i * basis.u + j * basis.v);
    return out;
}

void validate(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::invalid_argument, why); };
    if (cfg.n_frames < 2) fail("n_frames must be at least 2");
    if (cfg.image_width <= 0 || cfg.image_height <= 0 || !(cfg.focal > 0.0)) fail("bad camera");
    if (cfg.altitude_range.first <= 0.0 || cfg.altitude_range.second < cfg.altitude_range.first)
        fail("bad altitude_range");
    if (cfg.pitch_range_deg.first <= 0.0 || cfg.pitch_range_deg.second > 90.0 ||
        cfg.pitch_range_deg.second < cfg.pitch_range_deg.first)
        fail("pitch_range_deg must lie in (0, 90]");
    if (cfg.object_speed_range.first < 0.0 ||
        cfg.object_speed_range.second < cfg.object_speed_range.first)
        fail("bad object_speed_range");
    if (!(cfg.object_extent > 0.0)) fail("object_extent must be positive");
    if (cfg.n_distractors < 0 || cfg.n_random_occlusions < 0) fail("negative counts");
    for (const auto& w : cfg.occlusion_windows)
        if (w.first < 1 || w.last < w.first || w.last >= cfg.n_frames)
            fail("occlusion window outside the sequence");
    if (cfg.n_random_occlusions > 0) {
        const auto [lo, hi] = cfg.occlusion_length_range;
        if (lo < 1 || hi < lo) fail("bad occlusion_length_range");
        if (hi + 10 > cfg.n_frames) fail("occlusion window longer than the sequence allows");
    }
    if (cfg.camera_segment_frames < 1) fail("camera_segment_frames must be >= 1");
    if (cfg.canopy_height.first <= 0.0 || cfg.canopy_height.second <= cfg.canopy_height.first)
        fail("bad canopy_height");
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    if (hi <= lo) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    if (hi <= lo) return lo;
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Vec3 horizontal(double heading) { return {std::cos(heading), std::sin(heading), 0.0}; }

bool fits_in_image(const Vec3& center, double extent, const CameraFrame& frame, double margin) {
    const auto box = footprint_box(center, extent, frame);
    if (!box) return false;
    const auto& in = frame.intrinsics;
    const double mx = margin * in.width;
    const double my = margin * in.height;
    return box->x >= mx && box->y >= my && box->x + box->w <= in.width - mx &&
           box->y + box->h <= in.height - my;
}

}  // namespace

bool Scenario::operator==(const Scenario& o) const {
    if (camera_path.size() != o.camera_path.size()) return false;
    for (std::size_t i = 0; i < camera_path.size(); ++i)
        if (!same_frame(camera_path[i], o.camera_path[i])) return false;
    if (occluders.size() != o.occluders.size()) return false;
    for (std::size_t i = 0; i < occluders.size(); ++i)
        if (occluders[i].min != o.occluders[i].min || occluders[i].max != o.occluders[i].max ||
            occluders[i].active.first != o.occluders[i].active.first ||
            occluders[i].active.last != o.occluders[i].active.last)
            return false;
    return plane.normal == o.plane.normal && plane.offset == o.plane.offset &&
           object_trajectory == o.object_trajectory &&
           distractor_trajectories == o.distractor_trajectories && cloud.points == o.cloud.points &&
           cloud.colors == o.cloud.colors && point_owner == o.point_owner && n_frames == o.n_frames &&
           object_extent == o.object_extent && distractor_gain == o.distractor_gain &&
           peak_sigma_frac == o.peak_sigma_frac && score_noise == o.score_noise &&
           score_background == o.score_background && splat_radius == o.splat_radius &&
           scene_scale == o.scene_scale && seed == o.seed;
}

std::optional<BoundingBox> footprint_box(const Vec3& center, double extent, const CameraFrame& frame) {
    const Vec3 corners[4] = {center + Vec3(-0.5 * extent, -0.5 * extent, 0.0),
                             center + Vec3(0.5 * extent, -0.5 * extent, 0.0),
                             center + Vec3(0.5 * extent, 0.5 * extent, 0.0),
                             center + Vec3(-0.5 * extent, 0.5 * extent, 0.0)};
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    try {
        for (const Vec3& c : corners) {
            const Vec2 px = project_to_image(c, frame).pixel;
            x0 = std::min(x0, px.x());
            y0 = std::min(y0, px.y());
            x1 = std::max(x1, px.x());
            y1 = std::max(y1, px.y());
        }
    } catch (const Error&) {
        return std::nullopt;
    }
    return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    std::mt19937_64 rng(seed);
    const int n = cfg.n_frames;
    constexpr double kDeg = std::numbers::pi / 180.0;

    Scenario s;
    s.plane = GroundPlane::from_normal_offset(Vec3::UnitZ(), 0.0);
    s.n_frames = n;
    s.object_extent = cfg.object_extent;
    s.distractor_gain = cfg.distractor_gain;
    s.peak_sigma_frac = cfg.peak_sigma_frac;
    s.score_noise = cfg.score_noise;
    s.score_background = cfg.score_background;
    s.splat_radius = cfg.splat_radius;
    s.seed = seed;

    Intrinsics in;
    in.focal = cfg.focal;
    in.width = cfg.image_width;
    in.height = cfg.image_height;
    in.cx = 0.5 * cfg.image_width;
    in.cy = 0.5 * cfg.image_height;

    constexpr int kAttempts = 200;
    bool ok = false;
    for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
        const double altitude = uniform(rng, cfg.altitude_range.first, cfg.altitude_range.second);
        const double pitch = kDeg * uniform(rng, cfg.pitch_range_deg.first, cfg.pitch_range_deg.second);
        const double heading = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const Vec3 view(std::cos(pitch) * std::cos(heading), std::cos(pitch) * std::sin(heading),
                        -std::sin(pitch));
        const double distance = altitude / std::sin(pitch);
        const Vec3 c0 = -view * distance;
        const Vec3 up = pitch > 89.999 * kDeg ? horizontal(heading) : Vec3::UnitZ();
        const RigidTransform pose0 = look_at(c0, Vec3::Zero(), up);
        s.scene_scale = distance * cfg.image_width / cfg.focal;

        s.camera_path.clear();
        Vec3 cam = c0;
        Vec3 cam_velocity = Vec3::Zero();
        for (int t = 0; t < n; ++t) {
            if (t >= cfg.camera_motion_start && (t - cfg.camera_motion_start) % cfg.camera_segment_frames == 0)
                cam_velocity = uniform(rng, 0.0, cfg.camera_speed) *
                               horizontal(uniform(rng, 0.0, 2.0 * std::numbers::pi));
            if (t > 0 && t > cfg.camera_motion_start) cam += cam_velocity;
            CameraFrame frame;
            frame.frame_index = t;
            frame.intrinsics = in;
            frame.world_from_camera = RigidTransform(pose0.rotation(), cam);
            s.camera_path.push_back(frame);
        }

        const double speed = uniform(rng, cfg.object_speed_range.first, cfg.object_speed_range.second);
        const Vec3 velocity = speed * horizontal(uniform(rng, 0.0, 2.0 * std::numbers::pi));
        int stop_first = n, stop_last = -1;
        if (uniform(rng, 0.0, 1.0) < cfg.stop_and_go) {
            stop_first = uniform_int(rng, n / 4, n / 2);
            stop_last = std::min(n - 1, stop_first + uniform_int(rng, 5, 10));
        }
        std::vector<ObjectState> path;
        Vec3 p = Vec3::Zero();
        for (int t = 0; t < n; ++t) {
            const bool stopped = t >= stop_first && t <= stop_last;
            const Vec3 v = stopped ? Vec3::Zero() : velocity;
            if (t > 0) p += v;
            path.push_back({p, v});
        }
        const Vec3 shift = -0.5 * (path.front().position + path.back().position);
        for (auto& st : path) st.position += shift;

        ok = true;
        for (int t = 0; t < n && ok; ++t)
            ok = fits_in_image(path[t].position, cfg.object_extent, s.camera_path[t], 0.1);
        if (ok) s.object_trajectory = std::move(path);
    }
    if (!ok) throw Error(ErrorCode::invalid_argument, "could not fit the object path in view");

    for (int k = 0; k < cfg.n_distractors; ++k) {
        const int crossing = uniform_int(rng, n / 4, (3 * n) / 4);
        const Vec3 offset = cfg.distractor_offset * cfg.object_extent *
                            horizontal(uniform(rng, 0.0, 2.0 * std::numbers::pi));
        const double speed = uniform(rng, cfg.object_speed_range.first, cfg.object_speed_range.second);
        const Vec3 v = speed * horizontal(uniform(rng, 0.0, 2.0 * std::numbers::pi));
        const Vec3 at_crossing = s.object_trajectory[crossing].position + offset;
        std::vector<ObjectState> traj;
        for (int t = 0; t < n; ++t) traj.push_back({at_crossing + v * (t - crossing), v});
        s.distractor_trajectories.push_back(std::move(traj));
    }

    std::vector<OcclusionWindow> windows = cfg.occlusion_windows;
    for (int k = 0; k < cfg.n_random_occlusions; ++k) {
        const int len = uniform_int(rng, cfg.occlusion_length_range.first, cfg.occlusion_length_range.second);
        const int first = uniform_int(rng, 5, n - len - 5);
        windows.push_back({first, first + len - 1});
    }
    const double margin = 0.25 * cfg.object_extent;
    const double half = 0.5 * cfg.object_extent + margin;
    for (const auto& w : windows) {
        Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
        for (int t = w.first; t <= w.last; ++t) {
            const Vec3 center = s.object_trajectory[t].position;
            const Vec3 cam = s.camera_path[t].center();
            for (int i = -1; i <= 1; i += 2)
                for (int j = -1; j <= 1; j += 2) {
                    const Vec3 corner = center + Vec3(i * half, j * half, 0.0);
                    for (double z : {cfg.canopy_height.first, cfg.canopy_height.second}) {
                        const Vec3 q = corner + (cam - corner) * (z / cam.z());
                        lo = lo.cwiseMin(q);
                        hi = hi.cwiseMax(q);
                    }
                }
        }
        lo.z() = cfg.canopy_height.first;
        hi.z() = cfg.canopy_height.second;
        s.occluders.push_back({lo, hi, w});
    }

    // Ground samples around the look-at point, then samples on occluder surfaces.
    const double span = s.scene_scale;
    for (int i = 0; i < cfg.ground_points; ++i) {
        s.cloud.points.emplace_back(uniform(rng, -span, span), uniform(rng, -span, span), 0.0);
        s.cloud.colors.push_back({110, 110, 100});
        s.point_owner.push_back(-1);
    }
    for (std::size_t k = 0; k < s.occluders.size(); ++k) {
        const auto& o = s.occluders[k];
        for (int i = 0; i < 200; ++i) {
            Vec3 p(uniform(rng, o.min.x(), o.max.x()), uniform(rng, o.min.y(), o.max.y()),
                   uniform(rng, o.min.z(), o.max.z()));
            const int face = uniform_int(rng, 0, 5);
            const int axis = face / 2;
            p[axis] = face % 2 ? o.max[axis] : o.min[axis];
            s.cloud.points.push_back(p);
            s.cloud.colors.push_back({40, 120, 40});
            s.point_owner.push_back(static_cast<int>(k));
        }
    }
    return s;
}

bool ray_blocked(const Scenario& s, const Vec3& point, int frame) {
    const Vec3 cam = s.camera_path.at(static_cast<std::size_t>(frame)).center();
    const Vec3 d = cam - point;
    for (const auto& o : s.occluders)
        if (o.active_at(frame) && slab_hit(point, d, o.min, o.max, 0.0, 1.0)) return true;
    return false;
}

double visible_fraction(const Scenario& s, const Vec3& center, int frame, double extent) {
    int visible = 0;
    for (const Vec3& p : footprint_samples(s.plane, center, extent))
        if (!ray_blocked(s, p, frame)) ++visible;
    return visible / 9.0;
}

GroundTruth render_ground_truth(const Scenario& s, double object_extent) {
    if (!(object_extent > 0.0)) throw Error(ErrorCode::invalid_argument, "object_extent must be positive");
    GroundTruth gt;
    for (int t = 0; t < s.n_frames; ++t) {
        GroundTruthFrame f;
        f.frame = t;
        f.state = s.object_trajectory[t];
        f.box = footprint_box(f.state.position, object_extent, s.camera_path[t]);
        f.visible_fraction = f.box ? visible_fraction(s, f.state.position, t, object_extent) : 0.0;
        f.occluded = f.visible_fraction < 1.0;
        gt.frames.push_back(f);
    }
    return gt;
}

DepthMap render_scenario_depth(const Scenario& s, int frame) {
    const CameraFrame& cam = s.camera_path.at(static_cast<std::size_t>(frame));
    std::vector<Vec3> pts;
    pts.reserve(s.cloud.size());
    for (std::size_t i = 0; i < s.cloud.size(); ++i) {
        const int owner = s.point_owner.empty() ? -1 : s.point_owner[i];
        if (owner < 0 || s.occluders[static_cast<std::size_t>(owner)].active_at(frame))
            pts.push_back(s.cloud.points[i]);
    }
    DepthMap map = rasterize_depth(pts, s.plane, cam, s.splat_radius);

    const Intrinsics& in = cam.intrinsics;
    const Mat3& R = cam.world_from_camera.rotation();
    const Vec3 c = cam.center();
    for (const auto& o : s.occluders) {
        if (!o.active_at(frame)) continue;
#pragma omp parallel for schedule(static)
        for (int row = 0; row < in.height; ++row)
            for (int col = 0; col < in.width; ++col) {
                // direction with unit camera-z, so the slab parameter is the camera depth
                const Vec3 d = R * pixel_ray(Vec2(col, row), in);
                const auto hit = slab_hit(c, d, o.min, o.max, 1e-9, 1e300);
                if (!hit) continue;
                float& cell = map.at(col, row);
                cell = std::min(cell, static_cast<float>(*hit));
            }
    }
    return map;
}

std::vector<FrameContext> build_frame_contexts(const Scenario& s) {
    std::vector<FrameContext> out(static_cast<std::size_t>(s.n_frames));
    for (int t = 0; t < s.n_frames; ++t) {
        out[t].frame = s.camera_path[t];
        out[t].plane = s.plane;
        out[t].depth_map = std::make_shared<const DepthMap>(render_scenario_depth(s, t));
    }
    return out;
}

SyntheticProvider::SyntheticProvider(const Scenario& scenario, std::uint64_t seed)
    : scenario_(&scenario), seed_(seed) {
    const auto& s = scenario;
    for (int t = 0; t < s.n_frames; ++t) {
        const Vec3& p = s.object_trajectory[t].position;
        object_boxes_.push_back(footprint_box(p, s.object_extent, s.camera_path[t]));
        object_visibility_.push_back(visible_fraction(s, p, t, s.object_extent));
        std::vector<double> dv;
        for (const auto& traj : s.distractor_trajectories)
            dv.push_back(visible_fraction(s, traj[t].position, t, s.object_extent));
        distractor_visibility_.push_back(std::move(dv));
    }
}

std::optional<Observation> SyntheticProvider::observe(int frame, const BoundingBox& area) const {
    const Scenario& s = *scenario_;
    if (frame < 0 || frame >= s.n_frames) return std::nullopt;
    const CameraFrame& cam = s.camera_path[frame];
    const auto& box = object_boxes_[frame];

    SyntheticMapParams p;
    p.search_area = area;
    p.frame_index = frame;
    p.seed = mix_seed(seed_, static_cast<std::uint64_t>(frame));
    p.noise_sigma = s.score_noise;
    p.background = s.score_background;
    const double width = box ? box->w : 10.0;
    p.peak_sigma = std::max(1.5, s.peak_sigma_frac * width);
    p.occluded_fraction = 1.0 - object_visibility_[frame];
    try {
        p.true_pixel = project_to_image(s.object_trajectory[frame].position, cam).pixel;
    } catch (const Error&) {
        p.occluded_fraction = 1.0;
        p.true_pixel = area.center();
    }
    for (std::size_t k = 0; k < s.distractor_trajectories.size(); ++k) {
        try {
            p.distractor_pixels.push_back(
                project_to_image(s.distractor_trajectories[k][frame].position, cam).pixel);
            p.distractor_gains.push_back(s.distractor_gain * distractor_visibility_[frame][k]);
        } catch (const Error&) {
        }
    }

    Observation obs;
    obs.score_map = synthetic_score_map(p);
    obs.confidence = obs.score_map.max();
    const double w = box ? box->w : 10.0;
    const double h = box ? box->h : 10.0;
    obs.proposal = BoundingBox::centered(obs.score_map.argmax_pixel(), w, h);
    return obs;
}

TrackRecord run_episode(const Scenario& s, const std::vector<FrameContext>& contexts,
                        const GroundTruth& gt, const TrackerConfig& cfg_in, std::uint64_t seed,
                        std::vector<TrackOutput>* outputs) {
    if (gt.frames.empty() || !gt.frames.front().box)
        throw Error(ErrorCode::initialization_failed, "no ground-truth box on the first frame");
    TrackerConfig cfg = cfg_in;
    cfg.seed = mix_seed(seed, 1);
    const SyntheticProvider provider(s, mix_seed(seed, 2));
    auto out = run_tracker(contexts, *gt.frames.front().box, provider, cfg);
    TrackRecord record = make_record(out);
    if (outputs) *outputs = std::move(out);
    return record;
}

TrackRecord run_episode(const Scenario& s, const TrackerConfig& cfg, std::uint64_t seed) {
    const auto contexts = build_frame_contexts(s);
    const auto gt = render_ground_truth(s, s.object_extent);
    return run_episode(s, contexts, gt, cfg, seed);
}

ScenarioConfig comparison_scenario_config() {
    ScenarioConfig cfg;
    cfg.n_frames = 60;
    cfg.n_distractors = 1;
    cfg.distractor_gain = 1.2;
    cfg.n_random_occlusions = 1;
    cfg.occlusion_length_range = {10, 20};
    cfg.camera_speed = 0.3;
    return cfg;
}

std::vector<VariantScore> run_suite(const SuiteConfig& cfg) {
    if (cfg.n_scenarios < 1 || cfg.runs < 1 || cfg.variants.empty())
        throw Error(ErrorCode::invalid_argument, "suite needs scenarios, runs and variants");
    const std::size_t nv = cfg.variants.size();
    const int ns = cfg.n_scenarios;
    // fmax[(scenario * nv + variant) * runs + run]
    std::vector<double> fmax(static_cast<std::size_t>(ns) * nv * cfg.runs, 0.0);

#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < ns; ++i) {
        const std::uint64_t scenario_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
        const Scenario s = generate_scenario(cfg.scenario, scenario_seed);
        const auto contexts = build_frame_contexts(s);
        const auto gt = render_ground_truth(s, s.object_extent);
        for (std::size_t v = 0; v < nv; ++v) {
            TrackerConfig tc = cfg.tracker;
            tc.variant = cfg.variants[v];
            for (int r = 0; r < cfg.runs; ++r) {
                const auto record = run_episode(s, contexts, gt, tc,
                                                mix_seed(scenario_seed, static_cast<std::uint64_t>(r)));
                fmax[(static_cast<std::size_t>(i) * nv + v) * cfg.runs + r] =
                    metric_curve(record, gt, cfg.eval).f_max;
            }
        }
    }

    std::vector<VariantScore> out;
    for (std::size_t v = 0; v < nv; ++v) {
        VariantScore vs;
        vs.variant = cfg.variants[v];
        for (int i = 0; i < ns; ++i) {
            auto& runs = vs.grid[i];
            for (int r = 0; r < cfg.runs; ++r)
                runs.push_back(fmax[(static_cast<std::size_t>(i) * nv + v) * cfg.runs + r]);
        }
        vs.score = final_f1(vs.grid);
        out.push_back(std::move(vs));
    }
    return out;
}

}  // namespace groundtrack
