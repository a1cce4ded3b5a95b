#pragma once

// Data-parallel inner loops. Each OpenMP kernel has a serial reference twin in
// `groundtrack::reference` with identical results; the twins back the equivalence
// tests and the kernel benchmark.

#include "groundtrack/appearance.hpp"
#include "groundtrack/geometry.hpp"
#include "groundtrack/scene.hpp"

#include <span>
#include <vector>

namespace groundtrack {

/// Mean Euclidean distance from each point to its k nearest other points (kd-tree).
/// Neighbour distances are summed in ascending order.
std::vector<double> knn_mean_distances(std::span<const Vec3> points, int k);

/// Plane base layer and point splats into a fresh depth map.
DepthMap rasterize_depth(std::span<const Vec3> points, const GroundPlane& plane,
                         const CameraFrame& frame, double splat_radius);

/// Score-map likelihood of each world position, floored at `floor`. Positions behind the
/// camera or outside the map get the floor.
std::vector<double> score_likelihoods(std::span<const Vec3> positions, const ScoreMap& map,
                                      const CameraFrame& frame, double floor);

/// Same as score_likelihoods for positions already in image coordinates.
std::vector<double> score_likelihoods_image(std::span<const Vec2> pixels, const ScoreMap& map,
                                            double floor);

namespace reference {

std::vector<double> knn_mean_distances(std::span<const Vec3> points, int k);
DepthMap rasterize_depth(std::span<const Vec3> points, const GroundPlane& plane,
                         const CameraFrame& frame, double splat_radius);
std::vector<double> score_likelihoods(std::span<const Vec3> positions, const ScoreMap& map,
                                      const CameraFrame& frame, double floor);

}  // namespace reference

}  // namespace groundtrack
