#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "groundtrack/error.hpp"
#include "groundtrack/simulator.hpp"
#include "groundtrack/tracker.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

using namespace groundtrack;

namespace {

// Noise-free score maps of an object following `path` (world positions, one per frame).
class ScriptedProvider : public ObservationProvider {
public:
    ScriptedProvider(std::vector<CameraFrame> cameras, std::vector<Vec3> path, double extent)
        : cameras_(std::move(cameras)), path_(std::move(path)), extent_(extent) {}

    std::set<int> occluded_frames;
    /// Distractor offset from the object in pixels, present from `distractor_from` on.
    Vec2 distractor_offset = Vec2::Zero();
    int distractor_from = std::numeric_limits<int>::max();
    double distractor_gain = 0.0;
    double background = 0.0;

    double box_size(int frame) const {
        const Projection p = project_to_image(path_[frame], cameras_[frame]);
        return extent_ * cameras_[frame].intrinsics.focal / p.depth;
    }
    Vec2 pixel(int frame) const { return project_to_image(path_[frame], cameras_[frame]).pixel; }

    std::optional<Observation> observe(int frame, const BoundingBox& area) const override {
        if (frame < 0 || frame >= static_cast<int>(path_.size())) return std::nullopt;
        SyntheticMapParams p;
        p.true_pixel = pixel(frame);
        const double size = box_size(frame);
        p.peak_sigma = std::max(1.5, 0.2 * size);
        p.occluded_fraction = occluded_frames.count(frame) ? 1.0 : 0.0;
        p.background = background;
        if (frame >= distractor_from) {
            p.distractor_pixels = {p.true_pixel + distractor_offset};
            p.distractor_gains = {distractor_gain};
        }
        p.search_area = area;
        p.frame_index = frame;
        Observation obs;
        obs.score_map = synthetic_score_map(p);
        obs.confidence = obs.score_map.max();
        obs.proposal = BoundingBox::centered(obs.score_map.argmax_pixel(), size, size);
        return obs;
    }

private:
    std::vector<CameraFrame> cameras_;
    std::vector<Vec3> path_;
    double extent_;
};

std::vector<FrameContext> plane_contexts(const std::vector<CameraFrame>& cameras) {
    std::vector<FrameContext> out;
    for (const auto& c : cameras) {
        FrameContext ctx;
        ctx.frame = c;
        ctx.depth_map = std::make_shared<const DepthMap>(render_depth_map(PointCloud{}, GroundPlane{}, c));
        out.push_back(ctx);
    }
    return out;
}

std::vector<CameraFrame> static_nadir(int n, double height = 10.0) {
    std::vector<CameraFrame> cams;
    for (int t = 0; t < n; ++t) cams.push_back(test::nadir_camera({0, 0, height}, 640, 360, 500.0, t));
    return cams;
}

BoundingBox box_at(const Vec2& c, double size) { return BoundingBox::centered(c, size, size); }

Observation observation_with(const ScoreMap& map) {
    Observation o;
    o.score_map = map;
    o.confidence = map.max();
    return o;
}

}  // namespace

TEST_CASE("initialize: nadir box at the principal point lands beneath the camera") {
    const auto ctx = plane_contexts({test::nadir_camera({2.0, -3.0, 10.0})});
    TrackerConfig cfg;
    const TrackerState s = initialize(box_at({320.0, 180.0}, 40.0), ctx[0], cfg);
    CHECK((s.estimate.position - Vec3(2.0, -3.0, 0.0)).norm() < 1e-9);
    CHECK(s.estimate.velocity == Vec3::Zero());
    CHECK(s.particles.size() == cfg.n_particles);
    CHECK_FALSE(s.occluded);
    CHECK(s.frames_occluded == 0);

    cfg.anchor = BoxAnchor::bottom_center;
    const TrackerState b = initialize({300.0, 140.0, 40.0, 40.0}, ctx[0], cfg);
    CHECK((b.estimate.position - Vec3(2.0, -3.0, 0.0)).norm() < 1e-9);
}

TEST_CASE("initialize: deterministic per seed, fails above the horizon") {
    const auto ctx = plane_contexts({test::oblique_camera({0, 0, 0}, 10.0, 10.0, 0.0)});
    TrackerConfig cfg;
    cfg.seed = 5;
    CHECK(initialize(box_at({320.0, 300.0}, 20.0), ctx[0], cfg) == initialize(box_at({320.0, 300.0}, 20.0), ctx[0], cfg));
    try {
        initialize(box_at({320.0, 10.0}, 10.0), ctx[0], cfg);
        FAIL("expected initialization_failed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::initialization_failed);
    }
    CHECK_THROWS_AS(initialize(box_at({-50.0, 300.0}, 10.0), ctx[0], cfg), Error);
}

TEST_CASE("initial velocity from two noise-free frames") {
    // 500 px focal length at height 10 gives exactly 50 px per scene unit.
    const auto cams = static_nadir(2);
    const std::vector<Vec3> path{{-1.0, 0.5, 0.0}, {0.0, 0.5, 0.0}};
    ScriptedProvider provider(cams, path, 1.5);
    const auto ctx = plane_contexts(cams);
    TrackerConfig cfg;
    const TrackerState s0 = initialize(box_at(provider.pixel(0), provider.box_size(0)), ctx[0], cfg);
    const auto r = step(s0, ctx[1], provider);
    REQUIRE(r.has_value());
    CHECK(r->state.velocity_initialized);
    CHECK(std::abs(r->state.estimate.velocity.norm() - 1.0) < 1e-6);
    CHECK((r->state.estimate.velocity - Vec3(1.0, 0.0, 0.0)).norm() < 1e-6);
}

TEST_CASE("occluded particles: plane-only depth map") {
    const auto ctx = plane_contexts({test::nadir_camera({0, 0, 10})});
    std::vector<Vec3> pts;
    for (int i = 0; i < 50; ++i) pts.emplace_back(-3.0 + 0.12 * i, 1.0, 0.0);
    const auto mask = identify_occluded_particles(pts, ctx[0], 0.05);
    CHECK(std::count(mask.begin(), mask.end(), true) == 0);
}

TEST_CASE("occluded particles: constructed wall") {
    FrameContext ctx;
    ctx.frame = test::nadir_camera({0, 0, 10});
    DepthMap depth(640, 360, 0);
    // Wall at depth 5 over the left half of the image, plane depth 10 elsewhere.
    for (int r = 0; r < 360; ++r)
        for (int c = 0; c < 640; ++c) depth.at(c, r) = c < 320 ? 5.0f : 10.0f;
    ctx.depth_map = std::make_shared<const DepthMap>(depth);

    std::vector<Vec3> pts;
    for (int i = 0; i < 10; ++i) pts.emplace_back(i < 6 ? -1.0 - 0.3 * i : 1.0 + 0.3 * i, 0.2 * i - 1.0, 0.0);
    const auto mask = identify_occluded_particles(pts, ctx, 0.05);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 px = project_to_image(pts[i], ctx.frame).pixel;
        CHECK(mask[i] == (std::lround(px.x()) < 320));
    }
    CHECK(std::count(mask.begin(), mask.end(), true) == 6);
    const auto none = identify_occluded_particles(pts, ctx, std::numeric_limits<double>::infinity());
    CHECK(std::count(none.begin(), none.end(), true) == 0);

    DepthMap empty(640, 360, 0);
    ctx.depth_map = std::make_shared<const DepthMap>(empty);
    const auto sentinel = identify_occluded_particles(pts, ctx, 0.05);
    CHECK(std::count(sentinel.begin(), sentinel.end(), true) == 0);

    const auto off = identify_occluded_particles(std::vector<Vec3>{{100.0, 0.0, 0.0}}, ctx, 0.05);
    CHECK(off[0]);
}

TEST_CASE("occlusion verdict") {
    TrackerConfig cfg;
    SyntheticMapParams sharp;
    sharp.search_area = {0, 0, 60, 60};
    sharp.true_pixel = {30, 30};
    const Observation peak = observation_with(synthetic_score_map(sharp));
    SyntheticMapParams flat = sharp;
    flat.occluded_fraction = 1.0;
    flat.noise_sigma = 0.03;
    flat.background = 0.1;
    flat.seed = 3;
    const Observation noise = observation_with(synthetic_score_map(flat));

    std::vector<bool> half(10, false);
    std::fill(half.begin(), half.begin() + 5, true);
    CHECK(occlusion_verdict(half, peak, cfg));
    std::vector<bool> four(10, false);
    std::fill(four.begin(), four.begin() + 4, true);
    CHECK_FALSE(occlusion_verdict(four, peak, cfg));
    CHECK_FALSE(occlusion_verdict(std::vector<bool>(10, false), peak, cfg));
    CHECK(occlusion_verdict(std::vector<bool>(10, false), noise, cfg));
}

TEST_CASE("clustering: single blob, singleton, and weight order") {
    std::vector<Vec2> px{{0, 0}, {1, 0}, {2, 0}, {2, 1}};
    std::vector<double> w{0.25, 0.25, 0.25, 0.25};
    std::vector<Vec3> c{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {2, 1, 0}};
    const auto one = cluster_points(px, w, c, 1.5);
    REQUIRE(one.size() == 1);
    CHECK(one[0].members.size() == 4);
    CHECK(one[0].weight == doctest::Approx(1.0));
    CHECK((one[0].centroid - Vec3(1.25, 0.25, 0)).norm() < 1e-12);

    const auto single = cluster_points(std::vector<Vec2>{{5, 5}}, std::vector<double>{1.0}, std::vector<Vec3>{{1, 2, 3}}, 1.0);
    REQUIRE(single.size() == 1);
    CHECK(single[0].members == std::vector<std::size_t>{0});

    const auto two = cluster_points(std::vector<Vec2>{{0, 0}, {50, 0}, {51, 0}}, std::vector<double>{0.5, 0.2, 0.3},
                                    std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, 2.0);
    REQUIRE(two.size() == 2);
    CHECK(two[0].weight == doctest::Approx(0.5));
    CHECK(two[1].members == std::vector<std::size_t>{1, 2});
    CHECK(two[1].centroid.x() == doctest::Approx((0.2 * 1 + 0.3 * 2) / 0.5));
    CHECK_THROWS_AS(cluster_points(px, w, c, 0.0), Error);
}

TEST_CASE("clustering equals a brute-force union-find") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        std::normal_distribution<double> n(0.0, 4.0);
        std::vector<Vec2> px;
        for (int i = 0; i < 150; ++i) {
            const double offset = (i % 3) * 60.0 * (trial % 2 ? 1.0 : 0.2);
            px.emplace_back(offset + n(rng), n(rng));
        }
        std::vector<double> w(px.size(), 1.0 / px.size());
        std::vector<Vec3> c(px.size(), Vec3::Zero());
        const double radius = 2.5;
        std::vector<std::size_t> label(px.size());
        std::iota(label.begin(), label.end(), 0);
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < px.size(); ++i)
                for (std::size_t j = 0; j < px.size(); ++j)
                    if ((px[i] - px[j]).norm() <= radius && label[j] < label[i]) {
                        label[i] = label[j];
                        changed = true;
                    }
        }
        const auto clusters = cluster_points(px, w, c, radius);
        CHECK(clusters.size() == std::set<std::size_t>(label.begin(), label.end()).size());
        for (const auto& cl : clusters)
            for (std::size_t m : cl.members) CHECK(label[m] == label[cl.members.front()]);
        for (std::size_t i = 1; i < clusters.size(); ++i) CHECK(clusters[i - 1].weight >= clusters[i].weight);
    }
}

TEST_CASE("clustering a subset keeps original indices") {
    const std::vector<Vec2> px{{0, 0}, {100, 0}, {1, 0}, {101, 0}};
    const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
    const std::vector<Vec3> c{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
    const std::vector<std::size_t> subset{1, 2, 3};
    const auto clusters = cluster_points(px, w, c, 2.0, subset);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].members == std::vector<std::size_t>{1, 3});
    CHECK(clusters[1].members == std::vector<std::size_t>{2});
}

TEST_CASE("posterior support is the sorted set of stratified draws") {
    std::vector<double> w(100, 0.0);
    w[3] = 0.5;
    w[70] = 0.5;
    CHECK(posterior_support(w, 4) == std::vector<std::size_t>{3, 70});
    const std::vector<double> u(20, 0.05);
    const auto all = posterior_support(u, 9);
    CHECK(all.size() == 20);
    CHECK(std::is_sorted(all.begin(), all.end()));
}

TEST_CASE("cluster expansion and descendants after resampling") {
    const std::vector<Vec2> px{{0, 0}, {3, 0}, {5.5, 0}, {20, 0}, {std::nan(""), 0}};
    const std::vector<std::size_t> seed{0};
    CHECK(expand_cluster(px, seed, 3.0) == std::vector<std::size_t>{0, 1});
    const std::vector<std::size_t> pair{0, 1};
    CHECK(expand_cluster(px, pair, 3.0) == std::vector<std::size_t>{0, 1, 2});
    CHECK(expand_cluster(px, {}, 3.0).empty());

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    std::vector<Vec2> cloud(200);
    for (auto& p : cloud) p = {u(rng), u(rng)};
    const std::vector<std::size_t> members{3, 17, 40};
    const auto grown = expand_cluster(cloud, members, 4.0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        bool near = false;
        for (std::size_t m : members) near = near || (cloud[i] - cloud[m]).norm() <= 4.0;
        CHECK(std::binary_search(grown.begin(), grown.end(), i) == near);
    }

    const std::vector<std::size_t> ancestors{0, 0, 2, 3, 3, 3, 5};
    const std::vector<std::size_t> kept{0, 3};
    CHECK(descendants_of(ancestors, kept) == std::vector<std::size_t>{0, 1, 3, 4, 5});
    CHECK(descendants_of(ancestors, {}).empty());
}

TEST_CASE("object cluster selection") {
    Cluster near{{0}, {1.0, 0.0, 0.0}, 0.2};
    Cluster far{{1}, {5.0, 0.0, 0.0}, 0.8};
    CHECK(select_object_cluster(std::vector<Cluster>{near}, Vec3::Zero()) == 0);
    CHECK(select_object_cluster(std::vector<Cluster>{far, near}, Vec3::Zero()) == 1);
    Cluster left{{0}, {-1.0, 0.0, 0.0}, 0.3};
    Cluster right{{1}, {1.0, 0.0, 0.0}, 0.7};
    CHECK(select_object_cluster(std::vector<Cluster>{left, right}, Vec3::Zero()) == 1);
    Cluster twin = right;
    CHECK(select_object_cluster(std::vector<Cluster>{right, twin}, Vec3::Zero()) == 0);
    try {
        select_object_cluster(std::vector<Cluster>{}, Vec3::Zero());
        FAIL("expected no_cluster");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_cluster);
    }
}

TEST_CASE("reappearance check") {
    TrackerConfig cfg;
    SyntheticMapParams p;
    p.search_area = {0, 0, 100, 100};
    p.true_pixel = {50, 50};
    p.peak_sigma = 3.0;
    const Observation peak = observation_with(synthetic_score_map(p));
    const double radius = cfg.reappear_radius_frac * 100.0;
    CHECK(check_reappearance(peak, {50, 50}, 0.0, cfg));
    CHECK_FALSE(check_reappearance(peak, {50.0 + 3.0 * radius, 50}, 0.0, cfg));
    CHECK_FALSE(check_reappearance(peak, {50, 50}, 0.5, cfg));
    SyntheticMapParams f = p;
    f.occluded_fraction = 1.0;
    f.background = 0.1;
    CHECK_FALSE(check_reappearance(observation_with(synthetic_score_map(f)), {50, 50}, 0.0, cfg));
}

// Image position of the object center; the ground-truth box is the bbox of the
// projected footprint and need not be centered on it.
Vec2 projected(const GroundTruth& gt, const Scenario& s, int t) {
    return project_to_image(gt.frames[t].state.position, s.camera_path[t]).pixel;
}

TEST_CASE("noise-free linear motion is tracked within 2 px") {
    ScenarioConfig sc;
    sc.n_frames = 30;
    sc.score_noise = 0.0;
    const Scenario s = generate_scenario(sc, 21);
    const auto contexts = build_frame_contexts(s);
    const GroundTruth gt = render_ground_truth(s, s.object_extent);
    std::vector<TrackOutput> outputs;
    TrackerConfig cfg;
    run_episode(s, contexts, gt, cfg, 4, &outputs);
    REQUIRE(outputs.size() == 30);
    for (int t = 5; t < 30; ++t) {
        REQUIRE(gt.frames[t].box.has_value());
        CHECK((outputs[t].reprojected_center - projected(gt, s, t)).norm() < 2.0);
        CHECK_FALSE(outputs[t].occluded);
    }
}

TEST_CASE("full occlusion: constant-velocity coast and recovery within 3 frames") {
    ScenarioConfig sc;
    sc.n_frames = 40;
    sc.score_noise = 0.0;
    sc.occlusion_windows = {{10, 20}};
    const Scenario s = generate_scenario(sc, 8);
    const auto contexts = build_frame_contexts(s);
    const GroundTruth gt = render_ground_truth(s, s.object_extent);
    std::vector<TrackOutput> out;
    TrackerConfig cfg;
    run_episode(s, contexts, gt, cfg, 1, &out);
    REQUIRE(out.size() == 40);

    int occluded = 0;
    for (int t = 10; t <= 20; ++t) occluded += out[t].occluded;
    CHECK(occluded >= 9);
    for (int t = 12; t <= 20; ++t) {
        if (!out[t].occluded || !out[t - 1].occluded) continue;
        CHECK(out[t].confidence == 0.0);
        const Vec3 step = out[t].state_3d.position - out[t - 1].state_3d.position;
        CHECK((step - out[t - 1].state_3d.velocity).norm() < 0.05 * s.object_extent);
    }
    for (int t = 24; t < 40; ++t) {
        REQUIRE(gt.frames[t].box.has_value());
        CHECK((out[t].reprojected_center - projected(gt, s, t)).norm() < 2.0);
    }
}

TEST_CASE("output boxes are centered on the reprojected estimate") {
    const Scenario s = generate_scenario(comparison_scenario_config(), 3);
    const auto contexts = build_frame_contexts(s);
    const GroundTruth gt = render_ground_truth(s, s.object_extent);
    for (TrackerVariant v : {TrackerVariant::filter_3d, TrackerVariant::filter_2d}) {
        TrackerConfig cfg;
        cfg.variant = v;
        std::vector<TrackOutput> out;
        run_episode(s, contexts, gt, cfg, 2, &out);
        for (std::size_t t = 1; t < out.size(); ++t) {
            if (out[t].box) CHECK((out[t].box->center() - out[t].reprojected_center).norm() <= 0.5);
            if (v == TrackerVariant::filter_3d && !out[t].occluded) {
                const Vec3 back = backproject_to_plane(out[t].reprojected_center, contexts[t].frame, s.plane);
                CHECK((back - out[t].state_3d.position).norm() < 1e-6);
            }
            if (!out[t].occluded) CHECK(out[t].confidence > 0.0);
        }
    }
}

TEST_CASE("distractor immunity of the 3D filter and argmax jump of the baseline") {
    for (double gain : {1.1, 1.5, 2.0}) {
        const int n = 14;
        const auto cams = static_nadir(n);
        std::vector<Vec3> path;
        for (int t = 0; t < n; ++t) path.emplace_back(-2.0 + 0.2 * t, 0.0, 0.0);
        ScriptedProvider provider(cams, path, 1.5);
        provider.distractor_offset = {0.0, 70.0};
        provider.distractor_from = 6;
        provider.distractor_gain = gain;
        const auto ctx = plane_contexts(cams);
        const BoundingBox first = box_at(provider.pixel(0), provider.box_size(0));
        for (TrackerVariant v : {TrackerVariant::filter_3d, TrackerVariant::ml_baseline}) {
            TrackerConfig cfg;
            cfg.variant = v;
            cfg.seed = 11;
            const auto out = run_tracker(ctx, first, provider, cfg);
            REQUIRE(out.size() == static_cast<std::size_t>(n));
            for (int t = 8; t < n; ++t) {
                const double err = (out[t].box->center() - provider.pixel(t)).norm();
                if (v == TrackerVariant::filter_3d) {
                    // on the object cluster: far closer to the object than to the distractor
                    CHECK(err < 0.1 * provider.distractor_offset.norm());
                } else {
                    CHECK(err > 60.0);
                }
            }
        }
    }
}

TEST_CASE("ML baseline: argmax box, flat map leaves the box in place") {
    const int n = 6;
    const auto cams = static_nadir(n);
    std::vector<Vec3> path;
    for (int t = 0; t < n; ++t) path.emplace_back(0.1 * t, 0.0, 0.0);
    ScriptedProvider provider(cams, path, 1.5);
    provider.occluded_frames = {4, 5};
    provider.background = 0.1;
    const auto ctx = plane_contexts(cams);
    TrackerConfig cfg;
    cfg.variant = TrackerVariant::ml_baseline;
    const auto out = run_tracker(ctx, box_at(provider.pixel(0), provider.box_size(0)), provider, cfg);
    REQUIRE(out.size() == 6);
    for (int t = 1; t < 4; ++t) CHECK((out[t].box->center() - provider.pixel(t)).norm() <= 0.5);
    CHECK(out[4].occluded);
    CHECK(out[5].occluded);
    CHECK(*out[4].box == *out[3].box);
    CHECK(*out[5].box == *out[3].box);
}

TEST_CASE("2D filter coasts through an occlusion under a static camera") {
    ScenarioConfig sc;
    sc.n_frames = 40;
    sc.score_noise = 0.0;
    sc.occlusion_windows = {{10, 20}};
    const Scenario s = generate_scenario(sc, 8);
    TrackerConfig cfg;
    cfg.variant = TrackerVariant::filter_2d;
    std::vector<TrackOutput> out;
    const auto contexts = build_frame_contexts(s);
    const GroundTruth gt = render_ground_truth(s, s.object_extent);
    run_episode(s, contexts, gt, cfg, 1, &out);
    for (int t = 25; t < 40; ++t) CHECK((out[t].reprojected_center - projected(gt, s, t)).norm() < 3.0);
}

TEST_CASE("static object under a translating camera: 3D estimate stays within 1% of scene scale") {
    const int n = 25;
    std::vector<CameraFrame> cams;
    for (int t = 0; t < n; ++t) cams.push_back(test::nadir_camera({0.15 * t, 0.05 * t, 12.0}, 640, 360, 500.0, t));
    const std::vector<Vec3> path(n, Vec3(1.0, 0.5, 0.0));
    ScriptedProvider provider(cams, path, 1.5);
    const auto ctx = plane_contexts(cams);
    TrackerConfig cfg;
    const auto out = run_tracker(ctx, box_at(provider.pixel(0), provider.box_size(0)), provider, cfg);
    REQUIRE(out.size() == static_cast<std::size_t>(n));
    const double scale = 640.0 * 12.0 / 500.0;
    for (int t = 1; t < n; ++t) CHECK((out[t].state_3d.position - path[0]).norm() < 0.01 * scale);
}

TEST_CASE("tracking is deterministic per seed for every variant") {
    const Scenario s = generate_scenario(comparison_scenario_config(), 6);
    for (TrackerVariant v : {TrackerVariant::ml_baseline, TrackerVariant::filter_2d, TrackerVariant::filter_3d}) {
        TrackerConfig cfg;
        cfg.variant = v;
        const TrackRecord a = run_episode(s, cfg, 99);
        const TrackRecord b = run_episode(s, cfg, 99);
        CHECK(a == b);
    }
}

TEST_CASE("variant names") {
    CHECK(parse_variant("3d") == TrackerVariant::filter_3d);
    CHECK(parse_variant("2d") == TrackerVariant::filter_2d);
    CHECK(parse_variant("ml") == TrackerVariant::ml_baseline);
    CHECK(parse_variant(to_string(TrackerVariant::filter_2d)) == TrackerVariant::filter_2d);
    CHECK_THROWS_AS(parse_variant("4d"), Error);
}
