#pragma once

#include <stdexcept>
#include <string>

namespace groundtrack {

enum class ErrorCode {
    invalid_argument,
    behind_camera,
    ray_parallel_to_plane,
    plane_behind_camera,
    insufficient_points,
    degenerate_geometry,
    no_cluster,
    initialization_failed,
    incomplete_grid,
    parse_error,
    ordering_error,
    duplicate_entry,
    io_error,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace groundtrack
