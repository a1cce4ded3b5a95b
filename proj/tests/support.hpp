#pragma once

#include "groundtrack/geometry.hpp"

#include <cmath>

namespace groundtrack::test {

inline CameraFrame make_camera(const RigidTransform& pose, int width = 640, int height = 360,
                               double focal = 500.0, int frame_index = 0) {
    CameraFrame frame;
    frame.frame_index = frame_index;
    frame.world_from_camera = pose;
    frame.intrinsics = {focal, 0.5 * width, 0.5 * height, width, height};
    return frame;
}

/// Camera at `eye` looking straight down at z = 0, image up along world +y.
inline CameraFrame nadir_camera(const Vec3& eye, int width = 640, int height = 360, double focal = 500.0,
                                int frame_index = 0) {
    return make_camera(look_at(eye, {eye.x(), eye.y(), 0.0}, Vec3::UnitY()), width, height, focal, frame_index);
}

/// Camera `height` above z = 0, pitched `pitch_deg` below the horizon toward heading `yaw`.
inline CameraFrame oblique_camera(const Vec3& ground_below, double height, double pitch_deg, double yaw,
                                  int width = 640, int height_px = 360, double focal = 500.0) {
    const double pitch = pitch_deg * M_PI / 180.0;
    const Vec3 forward(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), -std::sin(pitch));
    const Vec3 eye = ground_below + Vec3(0.0, 0.0, height);
    return make_camera(look_at(eye, eye + forward), width, height_px, focal);
}

}  // namespace groundtrack::test
