#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace groundtrack {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics with a single focal length (square pixels, no skew).
/// Pixel coordinates are top-left origin; integer coordinates are pixel centers.
struct Intrinsics {
    double focal = 1.0;
    double cx = 0.5;
    double cy = 0.5;
    int width = 1;
    int height = 1;

    /// Throws Error(invalid_argument) when f <= 0 or the principal point is outside the image.
    void validate() const;

    bool same_resolution(int w, int h) const { return width == w && height == h; }
    bool contains(const Vec2& pixel) const {
        return pixel.x() >= -0.5 && pixel.y() >= -0.5 && pixel.x() < width - 0.5 &&
               pixel.y() < height - 0.5;
    }
};

/// Proper rigid motion p -> R p + t.
class RigidTransform {
public:
    RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
    /// Throws Error(invalid_argument) unless R is orthonormal with det +1 (tolerance 1e-9).
    RigidTransform(const Mat3& rotation, const Vec3& translation);

    static RigidTransform identity() { return {}; }

    const Mat3& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
    Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }
    RigidTransform inverse() const;
    /// (*this) ∘ other: apply other first.
    RigidTransform operator*(const RigidTransform& other) const;

private:
    Mat3 rotation_;
    Vec3 translation_;
};

struct CameraFrame {
    int frame_index = 0;
    RigidTransform world_from_camera;
    Intrinsics intrinsics;

    Vec3 center() const { return world_from_camera.translation(); }
    RigidTransform camera_from_world() const { return world_from_camera.inverse(); }
};

/// World-frame plane n·p = d with unit normal. `inlier_count` is filled by RANSAC.
struct GroundPlane {
    Vec3 normal = Vec3::UnitZ();
    double offset = 0.0;
    std::size_t inlier_count = 0;

    double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
    Vec3 project(const Vec3& p) const { return p - signed_distance(p) * normal; }
    /// Normalizes the normal; throws Error(invalid_argument) on a zero normal.
    static GroundPlane from_normal_offset(const Vec3& normal, double offset);
};

/// Plane in camera coordinates: a_c x + b_c y + c_c z - d_c = 0, unit normal, d_c >= 0.
struct PlaneCameraFrame {
    Vec3 normal = Vec3::UnitZ();
    double offset = 0.0;
};

struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    Vec2 center() const { return {x + 0.5 * w, y + 0.5 * h}; }
    Vec2 bottom_center() const { return {x + 0.5 * w, y + h}; }
    bool valid() const { return w >= 0.0 && h >= 0.0; }
    static BoundingBox centered(const Vec2& c, double w, double h) {
        return {c.x() - 0.5 * w, c.y() - 0.5 * h, w, h};
    }
    bool operator==(const BoundingBox&) const = default;
};

struct Projection {
    Vec2 pixel;
    double depth = 0.0;
};

/// Camera-frame direction (x_i/f, y_i/f, 1) through a top-left-origin pixel.
Vec3 pixel_ray(const Vec2& pixel, const Intrinsics& intrinsics);

/// Pinhole projection of a camera-frame point. Throws Error(behind_camera) when z <= 1e-12.
Projection project_camera_point(const Vec3& point_camera, const Intrinsics& intrinsics);

/// Pinhole projection of a world point through `frame`.
Projection project_to_image(const Vec3& point_world, const CameraFrame& frame);

/// World point at camera depth `depth` along the viewing ray of `pixel`.
Vec3 backproject_at_depth(const Vec2& pixel, double depth, const CameraFrame& frame);

/// Expresses a world plane in camera coordinates with d_c >= 0.
PlaneCameraFrame plane_in_camera(const GroundPlane& plane_world, const CameraFrame& frame);

/// Camera depth z_c of the plane along the ray of `pixel`: f d_c / (a_c x_i + b_c y_i + c_c f),
/// with (x_i, y_i) the pixel relative to the principal point.
/// Throws Error(ray_parallel_to_plane) or Error(plane_behind_camera).
double plane_depth_at_pixel(const Vec2& pixel, const Intrinsics& intrinsics,
                            const PlaneCameraFrame& plane);

/// Intersects the viewing ray of `pixel` with the world plane and returns the world point.
Vec3 backproject_to_plane(const Vec2& pixel, const CameraFrame& frame,
                          const GroundPlane& plane_world);

/// Rotation taking `from` onto `to` about the axis orthogonal to both.
Mat3 rotation_between(const Vec3& from, const Vec3& to);

/// Camera pose looking from `eye` at `target`, image y axis pointing toward -`up` on screen.
RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ());

}  // namespace groundtrack
