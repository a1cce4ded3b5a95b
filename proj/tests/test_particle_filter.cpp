#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "groundtrack/error.hpp"
#include "groundtrack/particle_filter.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace groundtrack;

namespace {

const PlanePolygon kUnitSquare{{0, 0}, {1, 0}, {1, 1}, {0, 1}};

GroundPlane tilted_plane() { return GroundPlane::from_normal_offset(Vec3(0.1, -0.2, 1.0), 0.7); }

double weight_sum(const ParticleSet& p) { return std::accumulate(p.weights.begin(), p.weights.end(), 0.0); }

void check_confined(const ParticleSet& p) {
    for (const auto& s : p.states) {
        CHECK(std::abs(p.plane.signed_distance(s.position)) < 1e-6);
        CHECK(std::abs(p.plane.normal.dot(s.velocity)) < 1e-9);
    }
}

// Independent bilinear lookup on a score map, floor applied.
double oracle_score(const ScoreMap& m, const Vec3& world, const CameraFrame& cam, double floor) {
    const Vec3 c = cam.world_from_camera.inverse().apply(world);
    if (c.z() <= 1e-12) return floor;
    const double x = cam.intrinsics.focal * c.x() / c.z() + cam.intrinsics.cx - m.search_area.x;
    const double y = cam.intrinsics.focal * c.y() / c.z() + cam.intrinsics.cy - m.search_area.y;
    if (x < 0 || y < 0 || x > m.width - 1 || y > m.height - 1) return floor;
    const int c0 = std::min(static_cast<int>(std::floor(x)), m.width - 2);
    const int r0 = std::min(static_cast<int>(std::floor(y)), m.height - 2);
    const double a = x - c0, b = y - r0;
    const double v = (1 - a) * (1 - b) * m.at(r0, c0) + a * (1 - b) * m.at(r0, c0 + 1) +
                     (1 - a) * b * m.at(r0 + 1, c0) + a * b * m.at(r0 + 1, c0 + 1);
    return std::max(v, floor);
}

}  // namespace

TEST_CASE("init_uniform: single particle, plane membership, determinism") {
    const GroundPlane plane = tilted_plane();
    const ParticleSet one = init_uniform(plane, kUnitSquare, 1, 3);
    REQUIRE(one.size() == 1);
    CHECK(one.weights[0] == 1.0);
    const Vec2 ab = PlaneBasis(plane).to_plane(one.states[0].position);
    CHECK(ab.x() >= 0.0);
    CHECK(ab.x() <= 1.0);
    CHECK(ab.y() >= 0.0);
    CHECK(ab.y() <= 1.0);

    const ParticleSet a = init_uniform(plane, kUnitSquare, 500, 9);
    check_confined(a);
    CHECK(a == init_uniform(plane, kUnitSquare, 500, 9));
    CHECK_FALSE(a == init_uniform(plane, kUnitSquare, 500, 10));
    for (const auto& s : a.states) CHECK(s.velocity == Vec3::Zero());
}

TEST_CASE("init_uniform: empirical mean approaches the centroid") {
    const GroundPlane plane;
    const ParticleSet p = init_uniform(plane, kUnitSquare, 100000, 5);
    const PlaneBasis basis(plane);
    Vec2 mean = Vec2::Zero();
    for (const auto& s : p.states) mean += basis.to_plane(s.position);
    mean /= static_cast<double>(p.size());
    CHECK(std::abs(mean.x() - 0.5) < 0.01);
    CHECK(std::abs(mean.y() - 0.5) < 0.01);

    const PlanePolygon triangle{{0, 0}, {3, 0}, {0, 3}};
    Vec2 tmean = Vec2::Zero();
    for (const Vec2& s : sample_polygon(triangle, 100000, 8)) tmean += s;
    tmean /= 100000.0;
    CHECK(std::abs(tmean.x() - 1.0) < 0.02);
    CHECK(std::abs(tmean.y() - 1.0) < 0.02);
}

TEST_CASE("init_uniform: degenerate region and empty set") {
    const PlanePolygon segment{{0, 0}, {1, 1}, {2, 2}};
    CHECK_THROWS_AS(init_uniform(GroundPlane{}, segment, 10, 0), Error);
    CHECK_THROWS_AS(init_uniform(GroundPlane{}, kUnitSquare, 0, 0), Error);
}

TEST_CASE("predict: noiseless constant velocity and identity") {
    const GroundPlane plane = tilted_plane();
    ParticleSet p = init_uniform(plane, kUnitSquare, 50, 1);
    const PlaneBasis basis(plane);
    const Vec3 v = 0.3 * basis.u - 0.1 * basis.v;
    for (auto& s : p.states) s.velocity = v;
    const ParticleSet moved = predict(p, {0.0, 0.0, 1.0}, 4);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK((moved.states[i].position - (p.states[i].position + v)).norm() < 1e-12);
        CHECK((moved.states[i].velocity - v).norm() < 1e-12);
    }
    CHECK(moved.weights == p.weights);

    ParticleSet still = init_uniform(plane, kUnitSquare, 50, 1);
    const ParticleSet same = predict(still, {0.0, 0.0, 1.0}, 4);
    for (std::size_t i = 0; i < still.size(); ++i)
        CHECK((same.states[i].position - still.states[i].position).norm() < 1e-12);

    const ParticleSet two_frames = predict(p, {0.0, 0.0, 2.0}, 4);
    CHECK((two_frames.states[0].position - (p.states[0].position + 2.0 * v)).norm() < 1e-12);
}

TEST_CASE("predict: in-plane noise covariance") {
    const GroundPlane plane = tilted_plane();
    const ParticleSet p = init_gaussian(plane, {plane.project(Vec3::Zero()), Vec3::Zero()}, 0.0, 100000, 1);
    const ParticleSet q = predict(p, {1.0, 0.5, 1.0}, 42);
    check_confined(q);
    const PlaneBasis basis(plane);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d vcov = Eigen::Matrix2d::Zero();
    const Vec2 origin = basis.to_plane(p.states[0].position);
    for (const auto& s : q.states) {
        const Vec2 d = basis.to_plane(s.position) - origin;
        cov += d * d.transpose();
        const Vec2 dv(s.velocity.dot(basis.u), s.velocity.dot(basis.v));
        vcov += dv * dv.transpose();
    }
    cov /= static_cast<double>(q.size());
    vcov /= static_cast<double>(q.size());
    CHECK(std::abs(cov(0, 0) - 1.0) < 0.05);
    CHECK(std::abs(cov(1, 1) - 1.0) < 0.05);
    CHECK(std::abs(cov(0, 1)) < 0.05);
    CHECK(std::abs(vcov(0, 0) - 0.25) < 0.0125);
    CHECK(std::abs(vcov(1, 1) - 0.25) < 0.0125);
}

TEST_CASE("weighting: constant map leaves weights unchanged") {
    const CameraFrame cam = test::nadir_camera({0, 0, 10}, 200, 200, 100.0);
    ScoreMap map(200, 200, {0, 0, 200, 200}, 0);
    std::fill(map.grid.begin(), map.grid.end(), 0.4f);
    ParticleSet p = init_uniform(GroundPlane{}, {{-2, -2}, {2, -2}, {2, 2}, {-2, 2}}, 100, 3);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (double& w : p.weights) w = u(rng);
    normalize_weights(p.weights);
    const auto r = weight_by_score_map(p, map, cam);
    CHECK_FALSE(r.degenerate);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(r.particles.weights[i] == doctest::Approx(p.weights[i]).epsilon(1e-12));
}

TEST_CASE("weighting: a delta peak dominates") {
    const CameraFrame cam = test::nadir_camera({0, 0, 10}, 200, 200, 100.0);
    ScoreMap map(200, 200, {0, 0, 200, 200}, 0);
    ParticleSet p = init_uniform(GroundPlane{}, {{-9, -9}, {9, -9}, {9, 9}, {-9, 9}}, 50, 3);
    p.states[17].position = Vec3(1.0, 2.0, 0.0);
    const Vec2 px = project_to_image(p.states[17].position, cam).pixel;
    map.at(static_cast<int>(std::lround(px.y())), static_cast<int>(std::lround(px.x()))) = 1.0f;
    const auto r = weight_by_score_map(p, map, cam);
    CHECK(r.particles.weights[17] > 0.999);
}

TEST_CASE("weighting equals direct re-evaluation") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<float> uf(0.0f, 1.0f);
    const CameraFrame cam = test::oblique_camera({0, -12, 0}, 8.0, 35.0, M_PI / 2, 320, 240, 250.0);
    ScoreMap map(120, 90, {100.0, 80.0, 120.0, 90.0}, 0);
    for (float& v : map.grid) v = uf(rng);
    ParticleSet p = init_uniform(GroundPlane{}, {{-6, -6}, {6, -6}, {6, 6}, {-6, 6}}, 2000, 11);
    std::uniform_real_distribution<double> uw(0.0, 1.0);
    for (double& w : p.weights) w = uw(rng);
    normalize_weights(p.weights);
    const auto r = weight_by_score_map(p, map, cam);
    std::vector<double> expected(p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        expected[i] = p.weights[i] * oracle_score(map, p.states[i].position, cam, kLikelihoodFloor);
        total += expected[i];
    }
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(r.particles.weights[i] - expected[i] / total) < 1e-12);
    CHECK(std::abs(weight_sum(r.particles) - 1.0) < 1e-9);
}

TEST_CASE("weighting: all particles at the floor") {
    const CameraFrame cam = test::nadir_camera({0, 0, 10}, 200, 200, 100.0);
    const ScoreMap map(20, 20, {0, 0, 20, 20}, 0);
    ParticleSet p = init_uniform(GroundPlane{}, kUnitSquare, 30, 2);
    p.weights[0] = 0.9;
    normalize_weights(p.weights);
    const auto r = weight_by_score_map(p, map, cam);
    CHECK(r.degenerate);
    for (double w : r.particles.weights) CHECK(w == doctest::Approx(1.0 / 30.0));
}

TEST_CASE("effective sample size") {
    CHECK(effective_sample_size(std::vector<double>(100, 0.01)) == doctest::Approx(100.0).epsilon(1e-12));
    std::vector<double> one(50, 0.0);
    one[3] = 1.0;
    CHECK(effective_sample_size(one) == 1.0);
    CHECK(effective_sample_size(std::vector<double>{0.5, 0.25, 0.25}) == doctest::Approx(1.0 / 0.375).epsilon(1e-12));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> w(40);
        for (double& x : w) x = u(rng) * u(rng);
        normalize_weights(w);
        const double ess = effective_sample_size(w);
        CHECK(ess >= 1.0 - 1e-12);
        CHECK(ess <= 40.0 + 1e-9);
    }
}

TEST_CASE("stratified resampling: uniform weights stay within stratified bounds") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto idx = stratified_indices(std::vector<double>(64, 1.0 / 64.0), seed);
        std::vector<int> count(64, 0);
        for (std::size_t i : idx) ++count[i];
        for (int c : count) {
            CHECK(c >= 0);
            CHECK(c <= 2);
        }
    }
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> w(25);
        for (double& x : w) x = u(rng);
        normalize_weights(w);
        const auto idx = stratified_indices(w, rng());
        std::vector<int> count(25, 0);
        for (std::size_t i : idx) ++count[i];
        // Each particle covers a cumulative interval of length n·w_i, which spans at most
        // ceil(n·w_i) + 1 strata.
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(count[i] >= static_cast<int>(std::floor(25.0 * w[i])) - 1);
            CHECK(count[i] <= static_cast<int>(std::ceil(25.0 * w[i])) + 1);
        }
    }
}

TEST_CASE("stratified resampling: degenerate weights") {
    ParticleSet p = init_uniform(GroundPlane{}, kUnitSquare, 40, 1);
    std::fill(p.weights.begin(), p.weights.end(), 0.0);
    p.weights[12] = 1.0;
    const ParticleSet r = resample_stratified(p, 77);
    for (const auto& s : r.states) CHECK(s == p.states[12]);
    for (double w : r.weights) CHECK(w == doctest::Approx(1.0 / 40.0));
}

TEST_CASE("stratified resampling: offspring counts are unbiased") {
    const std::vector<double> w{0.7, 0.3};
    std::vector<double> ws;
    for (int i = 0; i < 5; ++i) ws.insert(ws.end(), w.begin(), w.end());
    // Ten particles alternate 0.7/0.3 mass; normalize to sum 1 and group by parity.
    normalize_weights(ws);
    double a = 0.0, b = 0.0;
    const int trials = 10000;
    for (int s = 0; s < trials; ++s) {
        for (std::size_t i : stratified_indices(ws, static_cast<std::uint64_t>(s))) (i % 2 == 0 ? a : b) += 1.0;
    }
    CHECK(std::abs(a / trials - 7.0) < 0.07);
    CHECK(std::abs(b / trials - 3.0) < 0.03);
}

TEST_CASE("stratified resampling preserves the weighted mean in expectation") {
    const GroundPlane plane;
    ParticleSet p = init_uniform(plane, {{0, 0}, {10, 0}, {10, 10}, {0, 10}}, 30, 3);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& w : p.weights) w = u(rng) * u(rng);
    normalize_weights(p.weights);
    const Vec3 target = estimate_state(p).position;
    const int trials = 10000;
    Vec3 sum = Vec3::Zero();
    Vec3 sq = Vec3::Zero();
    for (int s = 0; s < trials; ++s) {
        const Vec3 m = estimate_state(resample_stratified(p, static_cast<std::uint64_t>(s))).position;
        sum += m;
        sq += m.cwiseProduct(m);
    }
    const Vec3 mean = sum / trials;
    const Vec3 var = sq / trials - mean.cwiseProduct(mean);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(mean[k] - target[k]) < 3.0 * std::sqrt(var[k]) / std::sqrt(trials) + 1e-12);
}

TEST_CASE("redistribution replaces the lowest weights") {
    const GroundPlane plane = tilted_plane();
    ParticleSet p = init_uniform(plane, kUnitSquare, 200, 1);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& w : p.weights) w = u(rng);
    normalize_weights(p.weights);
    const PlanePolygon far{{50, 50}, {51, 50}, {51, 51}, {50, 51}};

    CHECK(redistribute_fraction(p, 0.0, far, 5) == p);

    std::vector<std::size_t> order(200);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p.weights[a] < p.weights[b]; });
    std::vector<bool> expect_replaced(200, false);
    for (int i = 0; i < 20; ++i) expect_replaced[order[i]] = true;

    const ParticleSet r = redistribute_fraction(p, 0.1, far, 5);
    const PlaneBasis basis(plane);
    int replaced = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        const bool moved = basis.to_plane(r.states[i].position).x() >= 50.0;
        CHECK(moved == expect_replaced[i]);
        replaced += moved;
    }
    CHECK(replaced == 20);
    CHECK(std::abs(weight_sum(r) - 1.0) < 1e-9);
    check_confined(r);

    const ParticleSet all = redistribute_fraction(p, 1.0, kUnitSquare, 6);
    const ParticleSet fresh = init_uniform(plane, kUnitSquare, 200, 6);
    for (std::size_t i = 0; i < 200; ++i) {
        CHECK((all.states[i].position - fresh.states[i].position).norm() < 1e-12);
        CHECK(all.weights[i] == doctest::Approx(1.0 / 200.0));
    }
    CHECK_THROWS_AS(redistribute_fraction(p, 1.5, kUnitSquare, 0), Error);
}

TEST_CASE("estimate_state: identical, symmetric and random sets") {
    const GroundPlane plane = tilted_plane();
    ParticleSet p = init_uniform(plane, kUnitSquare, 3, 1);
    for (auto& s : p.states) s = p.states[0];
    CHECK((estimate_state(p).position - p.states[0].position).norm() < 1e-12);

    ParticleSet two = init_uniform(plane, kUnitSquare, 2, 4);
    const Vec3 mid = 0.5 * (two.states[0].position + two.states[1].position);
    CHECK((estimate_state(two).position - mid).norm() < 1e-12);

    ParticleSet r = init_uniform(plane, {{0, 0}, {5, 0}, {5, 5}, {0, 5}}, 1000, 2);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const PlaneBasis basis(plane);
    for (auto& s : r.states) s.velocity = u(rng) * basis.u + u(rng) * basis.v;
    for (double& w : r.weights) w = u(rng);
    normalize_weights(r.weights);
    Vec3 pos = Vec3::Zero(), vel = Vec3::Zero();
    for (std::size_t i = 0; i < r.size(); ++i) {
        pos += r.weights[i] * r.states[i].position;
        vel += r.weights[i] * r.states[i].velocity;
    }
    const ObjectState e = estimate_state(r);
    CHECK((e.position - pos).norm() < 1e-12);
    CHECK((e.velocity - vel).norm() < 1e-12);
}

TEST_CASE("a long operation chain keeps weights normalized and particles on the plane") {
    const GroundPlane plane = tilted_plane();
    const CameraFrame cam = test::oblique_camera({0, -10, 0}, 10.0, 45.0, M_PI / 2, 320, 240, 250.0);
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<float> uf(0.0f, 1.0f);
    ScoreMap map(320, 240, {0, 0, 320, 240}, 0);
    for (float& v : map.grid) v = uf(rng);
    ParticleSet p = init_uniform(plane, {{-3, -3}, {3, -3}, {3, 3}, {-3, 3}}, 300, 1);
    for (int step = 0; step < 30; ++step) {
        p = predict(p, {0.05, 0.01, 1.0}, rng());
        p = redistribute_fraction(p, 0.1, {{-3, -3}, {3, -3}, {3, 3}, {-3, 3}}, rng());
        p = weight_by_score_map(p, map, cam).particles;
        CHECK(std::abs(weight_sum(p) - 1.0) < 1e-9);
        const double ess = effective_sample_size(p);
        CHECK(ess >= 1.0 - 1e-9);
        CHECK(ess <= 300.0 + 1e-9);
        if (ess < 150.0) p = resample_stratified(p, rng());
        check_confined(p);
    }
    const ParticleSet a = predict(p, {0.05, 0.01, 1.0}, 123);
    CHECK(a == predict(p, {0.05, 0.01, 1.0}, 123));
}
