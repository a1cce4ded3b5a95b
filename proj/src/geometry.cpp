#include "groundtrack/geometry.hpp"

#include "groundtrack/error.hpp"

#include <cmath>
#include <string>

namespace groundtrack {

namespace {
constexpr double kOrthoTol = 1e-9;
constexpr double kBehindCamera = 1e-12;
constexpr double kParallel = 1e-12;
}  // namespace

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::behind_camera: return "point behind camera";
        case ErrorCode::ray_parallel_to_plane: return "ray parallel to plane";
        case ErrorCode::plane_behind_camera: return "plane behind camera";
        case ErrorCode::insufficient_points: return "insufficient points";
        case ErrorCode::degenerate_geometry: return "degenerate geometry";
        case ErrorCode::no_cluster: return "no cluster";
        case ErrorCode::initialization_failed: return "initialization failed";
        case ErrorCode::incomplete_grid: return "incomplete grid";
        case ErrorCode::parse_error: return "parse error";
        case ErrorCode::ordering_error: return "ordering error";
        case ErrorCode::duplicate_entry: return "duplicate entry";
        case ErrorCode::io_error: return "i/o error";
    }
    return "unknown error";
}

void Intrinsics::validate() const {
    if (!(focal > 0.0)) throw Error(ErrorCode::invalid_argument, "focal length must be positive");
    if (width <= 0 || height <= 0) throw Error(ErrorCode::invalid_argument, "empty image size");
    if (!(cx > 0.0 && cx < width && cy > 0.0 && cy < height))
        throw Error(ErrorCode::invalid_argument, "principal point outside the image");
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho <= kOrthoTol) || std::abs(rotation.determinant() - 1.0) > kOrthoTol)
        throw Error(ErrorCode::invalid_argument, "rotation is not a proper orthonormal matrix");
    if (!translation.allFinite())
        throw Error(ErrorCode::invalid_argument, "non-finite translation");
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform inv;
    inv.rotation_ = rotation_.transpose();
    inv.translation_ = -(inv.rotation_ * translation_);
    return inv;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
    RigidTransform out;
    out.rotation_ = rotation_ * other.rotation_;
    out.translation_ = rotation_ * other.translation_ + translation_;
    return out;
}

GroundPlane GroundPlane::from_normal_offset(const Vec3& normal, double offset) {
    const double n = normal.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw Error(ErrorCode::invalid_argument, "plane normal must be non-zero");
    GroundPlane plane;
    plane.normal = normal / n;
    plane.offset = offset / n;
    return plane;
}

Vec3 pixel_ray(const Vec2& pixel, const Intrinsics& intrinsics) {
    return {(pixel.x() - intrinsics.cx) / intrinsics.focal,
            (pixel.y() - intrinsics.cy) / intrinsics.focal, 1.0};
}

Projection project_camera_point(const Vec3& p, const Intrinsics& intrinsics) {
    if (!(p.z() > kBehindCamera))
        throw Error(ErrorCode::behind_camera, "camera-frame z = " + std::to_string(p.z()));
    return {Vec2(intrinsics.focal * p.x() / p.z() + intrinsics.cx,
                 intrinsics.focal * p.y() / p.z() + intrinsics.cy),
            p.z()};
}

Projection project_to_image(const Vec3& point_world, const CameraFrame& frame) {
    const auto& T = frame.world_from_camera;
    const Vec3 p = T.rotation().transpose() * (point_world - T.translation());
    return project_camera_point(p, frame.intrinsics);
}

Vec3 backproject_at_depth(const Vec2& pixel, double depth, const CameraFrame& frame) {
    return frame.world_from_camera.apply(pixel_ray(pixel, frame.intrinsics) * depth);
}

PlaneCameraFrame plane_in_camera(const GroundPlane& plane_world, const CameraFrame& frame) {
    // n_w·(R p_c + t) = d_w  =>  (Rᵀ n_w)·p_c = d_w − n_w·t
    const auto& T = frame.world_from_camera;
    PlaneCameraFrame plane;
    plane.normal = T.rotation().transpose() * plane_world.normal;
    plane.offset = plane_world.offset - plane_world.normal.dot(T.translation());
    if (plane.offset < 0.0) {
        plane.normal = -plane.normal;
        plane.offset = -plane.offset;
    }
    return plane;
}

double plane_depth_at_pixel(const Vec2& pixel, const Intrinsics& intrinsics,
                            const PlaneCameraFrame& plane) {
    const double xi = pixel.x() - intrinsics.cx;
    const double yi = pixel.y() - intrinsics.cy;
    const double f = intrinsics.focal;
    const double denom = plane.normal.x() * xi + plane.normal.y() * yi + plane.normal.z() * f;
    if (std::abs(denom) < kParallel)
        throw Error(ErrorCode::ray_parallel_to_plane, "viewing ray does not meet the plane");
    const double depth = f * plane.offset / denom;
    if (!(depth > 0.0))
        throw Error(ErrorCode::plane_behind_camera, "plane intersection behind the camera");
    return depth;
}

Vec3 backproject_to_plane(const Vec2& pixel, const CameraFrame& frame,
                          const GroundPlane& plane_world) {
    const PlaneCameraFrame plane = plane_in_camera(plane_world, frame);
    const double zc = plane_depth_at_pixel(pixel, frame.intrinsics, plane);
    const double f = frame.intrinsics.focal;
    const Vec3 pc((pixel.x() - frame.intrinsics.cx) * zc / f,
                  (pixel.y() - frame.intrinsics.cy) * zc / f, zc);
    return frame.world_from_camera.apply(pc);
}

Mat3 rotation_between(const Vec3& from, const Vec3& to) {
    return Eigen::Quaterniond::FromTwoVectors(from, to).normalized().toRotationMatrix();
}

RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
    const Vec3 z = (target - eye).normalized();
    Vec3 x = z.cross(up);
    if (x.norm() < 1e-9) x = z.unitOrthogonal();
    x.normalize();
    const Vec3 y = z.cross(x);
    Mat3 R;
    R.col(0) = x;
    R.col(1) = y;
    R.col(2) = z;
    return RigidTransform(R, eye);
}

}  // namespace groundtrack
