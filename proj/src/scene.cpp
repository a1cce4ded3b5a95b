#include "groundtrack/scene.hpp"

#include "groundtrack/error.hpp"
#include "groundtrack/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace groundtrack {

double PointCloud::bounding_diagonal() const {
    if (points.size() < 2) return 0.0;
    Vec3 lo = points.front();
    Vec3 hi = points.front();
    for (const Vec3& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

PointCloud PointCloud::select(const std::vector<bool>& keep) const {
    PointCloud out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!keep[i]) continue;
        out.points.push_back(points[i]);
        if (has_colors()) out.colors.push_back(colors[i]);
    }
    return out;
}

std::optional<double> DepthMap::sample(const Vec2& pixel) const {
    const long col = std::lround(pixel.x());
    const long row = std::lround(pixel.y());
    if (col < 0 || row < 0 || col >= width || row >= height) return std::nullopt;
    const float v = at(static_cast<int>(col), static_cast<int>(row));
    if (v == kNoData) return std::nullopt;
    return static_cast<double>(v);
}

PointCloud remove_near_camera_points(const PointCloud& cloud, std::span<const CameraFrame> frames,
                                     double min_distance) {
    if (frames.empty()) throw Error(ErrorCode::invalid_argument, "no camera frames given");
    if (!(min_distance >= 0.0)) throw Error(ErrorCode::invalid_argument, "negative min_distance");
    std::vector<bool> keep(cloud.size(), true);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        for (const auto& frame : frames)
            if ((cloud.points[i] - frame.center()).norm() < min_distance) {
                keep[i] = false;
                break;
            }
    return cloud.select(keep);
}

OutlierResult remove_statistical_outliers(const PointCloud& cloud, int k, double sigma_lim,
                                          OutlierBand band) {
    if (!(sigma_lim > 0.0)) throw Error(ErrorCode::invalid_argument, "sigma_lim must be positive");
    if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
    if (cloud.size() <= static_cast<std::size_t>(k))
        throw Error(ErrorCode::insufficient_points, "cloud needs more than k points");

    const std::vector<double> d = knn_mean_distances(cloud.points, k);
    const double n = static_cast<double>(d.size());
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    const double stddev = std::sqrt(var / n);
    const double half = band == OutlierBand::standard_deviations ? sigma_lim * stddev : sigma_lim;
    // Rounding noise in otherwise equal d_i must not open a zero-width band.
    const double slack = kBandSlack * mean;

    OutlierResult result;
    result.outlier_mask.resize(d.size());
    std::vector<bool> keep(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const bool inside = d[i] >= mean - half - slack && d[i] <= mean + half + slack;
        result.outlier_mask[i] = !inside;
        keep[i] = inside;
    }
    result.cloud = cloud.select(keep);
    return result;
}

GroundPlane orient_toward(const GroundPlane& plane, std::span<const Vec3> camera_centers) {
    GroundPlane out = plane;
    if (camera_centers.empty()) return out;
    std::size_t positive = 0;
    for (const Vec3& c : camera_centers)
        if (plane.signed_distance(c) > 0.0) ++positive;
    if (2 * positive < camera_centers.size()) {
        out.normal = -out.normal;
        out.offset = -out.offset;
    }
    return out;
}

namespace {

std::size_t count_inliers(std::span<const Vec3> pts, const Vec3& normal, double offset, double tol) {
    std::size_t count = 0;
    const auto n = static_cast<std::ptrdiff_t>(pts.size());
#pragma omp parallel for reduction(+ : count) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        if (std::abs(normal.dot(pts[i]) - offset) <= tol) ++count;
    return count;
}

// Canonical sign without camera information: offset >= 0, and for planes through the
// origin the largest-magnitude normal component is positive.
void canonical_sign(GroundPlane& plane) {
    bool flip = plane.offset < 0.0;
    if (std::abs(plane.offset) <= 1e-12) {
        Eigen::Index idx;
        plane.normal.cwiseAbs().maxCoeff(&idx);
        flip = plane.normal[idx] < 0.0;
    }
    if (flip) {
        plane.normal = -plane.normal;
        plane.offset = -plane.offset;
    }
}

}  // namespace

GroundPlane estimate_ground_plane(const PointCloud& cloud, const RansacParams& params,
                                  std::span<const Vec3> camera_centers) {
    const auto& pts = cloud.points;
    if (pts.size() < 3) throw Error(ErrorCode::insufficient_points, "RANSAC needs 3 points");
    if (params.iterations < 1) throw Error(ErrorCode::invalid_argument, "iterations must be >= 1");
    double tol = params.inlier_tol;
    if (tol == 0.0) tol = 0.005 * cloud.bounding_diagonal();
    if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "inlier tolerance must be positive");

    std::mt19937_64 rng(params.seed);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);

    bool found = false;
    std::size_t best_count = 0;
    Vec3 best_normal = Vec3::UnitZ();
    double best_offset = 0.0;
    for (int it = 0; it < params.iterations; ++it) {
        const std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        while (b == a) b = pick(rng);
        std::size_t c = pick(rng);
        while (c == a || c == b) c = pick(rng);
        const Vec3 e1 = pts[b] - pts[a];
        const Vec3 e2 = pts[c] - pts[a];
        const Vec3 cross = e1.cross(e2);
        const double scale = e1.norm() * e2.norm();
        if (!(cross.norm() > 1e-12 * scale) || scale == 0.0) continue;
        const Vec3 normal = cross.normalized();
        const double offset = normal.dot(pts[a]);
        const std::size_t count = count_inliers(pts, normal, offset, tol);
        if (!found || count > best_count) {
            found = true;
            best_count = count;
            best_normal = normal;
            best_offset = offset;
        }
    }
    if (!found) throw Error(ErrorCode::degenerate_geometry, "all sampled triples were collinear");

    // Least-squares refit on the winning consensus set.
    Vec3 centroid = Vec3::Zero();
    std::size_t m = 0;
    for (const Vec3& p : pts)
        if (std::abs(best_normal.dot(p) - best_offset) <= tol) {
            centroid += p;
            ++m;
        }
    GroundPlane plane;
    plane.normal = best_normal;
    plane.offset = best_offset;
    plane.inlier_count = best_count;
    if (m >= 3) {
        centroid /= static_cast<double>(m);
        Mat3 cov = Mat3::Zero();
        for (const Vec3& p : pts)
            if (std::abs(best_normal.dot(p) - best_offset) <= tol) {
                const Vec3 q = p - centroid;
                cov += q * q.transpose();
            }
        const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
        Vec3 normal = eig.eigenvectors().col(0).normalized();
        if (normal.dot(best_normal) < 0.0) normal = -normal;
        const double offset = normal.dot(centroid);
        const std::size_t count = count_inliers(pts, normal, offset, tol);
        if (count >= best_count) {
            plane.normal = normal;
            plane.offset = offset;
            plane.inlier_count = count;
        }
    }
    canonical_sign(plane);
    return orient_toward(plane, camera_centers);
}

PointCloud discard_below_ground(const PointCloud& cloud, const GroundPlane& plane, double tol) {
    if (!plane.normal.allFinite() || std::abs(plane.normal.norm() - 1.0) > 1e-9)
        throw Error(ErrorCode::invalid_argument, "plane normal must be a unit vector");
    std::vector<bool> keep(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        keep[i] = plane.signed_distance(cloud.points[i]) >= -tol;
    return cloud.select(keep);
}

DepthMap render_depth_map(const PointCloud& cloud, const GroundPlane& plane,
                          const CameraFrame& frame, const DepthRenderOptions& options) {
    if (!(options.splat_radius >= 0.0))
        throw Error(ErrorCode::invalid_argument, "splat radius must be non-negative");
    if (options.resolution &&
        !frame.intrinsics.same_resolution(options.resolution->first, options.resolution->second))
        throw Error(ErrorCode::invalid_argument, "requested resolution differs from intrinsics");
    return rasterize_depth(cloud.points, plane, frame, options.splat_radius);
}

ConditionedScene condition_scene(const PointCloud& cloud, std::span<const CameraFrame> frames,
                                 const ConditioningParams& params) {
    const double diag = cloud.bounding_diagonal();
    const double min_distance = params.min_distance < 0.0 ? 0.01 * diag : params.min_distance;
    PointCloud filtered = remove_near_camera_points(cloud, frames, min_distance);
    filtered = remove_statistical_outliers(filtered, params.k, params.sigma_lim, params.band).cloud;

    RansacParams ransac = params.ransac;
    if (ransac.inlier_tol == 0.0) ransac.inlier_tol = 0.005 * diag;
    std::vector<Vec3> centers;
    centers.reserve(frames.size());
    for (const auto& f : frames) centers.push_back(f.center());
    ConditionedScene out;
    out.plane = estimate_ground_plane(filtered, ransac, centers);
    const double tol = params.below_ground_tol < 0.0 ? ransac.inlier_tol : params.below_ground_tol;
    out.cloud = discard_below_ground(filtered, out.plane, tol);
    return out;
}

}  // namespace groundtrack
