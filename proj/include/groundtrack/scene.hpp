#pragma once

#include "groundtrack/geometry.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace groundtrack {

struct PointCloud {
    std::vector<Vec3> points;
    /// Either empty or one RGB triple per point.
    std::vector<std::array<std::uint8_t, 3>> colors;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_colors() const { return !colors.empty(); }
    /// Length of the axis-aligned bounding-box diagonal (0 for fewer than two points).
    double bounding_diagonal() const;
    /// Keeps the points whose flag is true, carrying colors along.
    PointCloud select(const std::vector<bool>& keep) const;
};

/// Row-major per-pixel camera depth; +infinity marks "no data".
struct DepthMap {
    static constexpr float kNoData = std::numeric_limits<float>::infinity();

    int width = 0;
    int height = 0;
    int frame_index = 0;
    std::vector<float> values;

    DepthMap() = default;
    DepthMap(int w, int h, int frame) : width(w), height(h), frame_index(frame),
        values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), kNoData) {}

    float at(int col, int row) const { return values[static_cast<std::size_t>(row) * width + col]; }
    float& at(int col, int row) { return values[static_cast<std::size_t>(row) * width + col]; }
    bool has_data(int col, int row) const { return at(col, row) != kNoData; }
    /// Depth at the pixel nearest to `pixel`, or nullopt outside the map / on sentinel.
    std::optional<double> sample(const Vec2& pixel) const;
};

enum class OutlierBand {
    standard_deviations,  ///< keep d_i in d_avg ± sigma_lim·σ(d)
    absolute,             ///< keep d_i in d_avg ± sigma_lim
};

struct OutlierResult {
    PointCloud cloud;
    /// true where the input point was flagged as an outlier.
    std::vector<bool> outlier_mask;
};

struct RansacParams {
    double inlier_tol = 0.0;     ///< 0 selects 0.5% of the cloud diagonal
    int iterations = 1000;
    std::uint64_t seed = 0;
};

struct DepthRenderOptions {
    double splat_radius = 2.0;
    /// When set, must match the frame intrinsics.
    std::optional<std::pair<int, int>> resolution;
};

/// Drops every point closer than `min_distance` to any camera center.
PointCloud remove_near_camera_points(const PointCloud& cloud, std::span<const CameraFrame> frames,
                                     double min_distance);

/// Relative widening of the outlier band edges, in units of d_avg.
inline constexpr double kBandSlack = 1e-12;

/// Mean-distance-to-k-neighbours outlier filter. Requires cloud.size() > k.
OutlierResult remove_statistical_outliers(const PointCloud& cloud, int k = 10,
                                          double sigma_lim = 1.0,
                                          OutlierBand band = OutlierBand::standard_deviations);

/// RANSAC over random point triples with a least-squares refit on the winning inliers.
/// With `camera_centers` the normal is oriented toward the majority of them.
GroundPlane estimate_ground_plane(const PointCloud& cloud, const RansacParams& params,
                                  std::span<const Vec3> camera_centers = {});

/// Flips the plane so most camera centers have positive signed distance.
GroundPlane orient_toward(const GroundPlane& plane, std::span<const Vec3> camera_centers);

/// Removes points with signed distance below -tol.
PointCloud discard_below_ground(const PointCloud& cloud, const GroundPlane& plane, double tol);

/// Ground-plane base layer plus z-buffered splats of the cloud points.
DepthMap render_depth_map(const PointCloud& cloud, const GroundPlane& plane,
                          const CameraFrame& frame, const DepthRenderOptions& options = {});

struct ConditioningParams {
    double min_distance = -1.0;  ///< < 0 selects 1% of the cloud diagonal
    int k = 10;
    double sigma_lim = 1.0;
    OutlierBand band = OutlierBand::standard_deviations;
    RansacParams ransac;
    double below_ground_tol = -1.0;  ///< < 0 selects the RANSAC inlier tolerance
};

struct ConditionedScene {
    PointCloud cloud;
    GroundPlane plane;
};

/// near-camera removal -> statistical outliers -> RANSAC ground plane -> below-ground removal.
ConditionedScene condition_scene(const PointCloud& cloud, std::span<const CameraFrame> frames,
                                 const ConditioningParams& params = {});

}  // namespace groundtrack
