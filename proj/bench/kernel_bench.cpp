// Serial reference kernels against their OpenMP counterparts on fixed synthetic inputs.

#include "groundtrack/kernels.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

using namespace groundtrack;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count() / reps;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-22s serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx\n", name, serial, parallel,
                serial / parallel);
}

}  // namespace

int main() {
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-20.0, 20.0);

    std::vector<Vec3> cloud(20000);
    for (auto& p : cloud) p = Vec3(u(rng), u(rng), 0.1 * std::abs(u(rng)));

    CameraFrame frame;
    frame.intrinsics = {500.0, 320.0, 180.0, 640, 360};
    frame.world_from_camera = look_at(Vec3(0.0, -30.0, 25.0), Vec3::Zero());
    const GroundPlane plane;

    ScoreMap map(160, 160, {240.0, 100.0, 160.0, 160.0}, 0);
    for (int r = 0; r < map.height; ++r)
        for (int c = 0; c < map.width; ++c) map.at(r, c) = static_cast<float>(0.5 + 0.5 * std::sin(0.1 * (r + c)));
    std::vector<Vec3> particles(20000);
    for (auto& p : particles) p = Vec3(0.2 * u(rng), 0.2 * u(rng), 0.0);

    report("knn_mean_distances",
           time_ms([&] { reference::knn_mean_distances(cloud, 10); }, 3),
           time_ms([&] { knn_mean_distances(cloud, 10); }, 3));
    report("rasterize_depth",
           time_ms([&] { reference::rasterize_depth(cloud, plane, frame, 1.0); }, 5),
           time_ms([&] { rasterize_depth(cloud, plane, frame, 1.0); }, 5));
    report("score_likelihoods",
           time_ms([&] { reference::score_likelihoods(particles, map, frame, 1e-6); }, 50),
           time_ms([&] { score_likelihoods(particles, map, frame, 1e-6); }, 50));
    return 0;
}
