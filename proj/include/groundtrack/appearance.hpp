#pragma once

#include "groundtrack/geometry.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace groundtrack {

/// Similarity grid over a search area, one cell per pixel. Cell (row, col) sits at
/// image pixel (search_area.x + col, search_area.y + row).
struct ScoreMap {
    int width = 0;
    int height = 0;
    std::vector<float> grid;
    BoundingBox search_area;
    int frame_index = 0;
    bool clamped = false;

    ScoreMap() = default;
    ScoreMap(int w, int h, const BoundingBox& area, int frame)
        : width(w), height(h), grid(static_cast<std::size_t>(w) * h, 0.0f), search_area(area),
          frame_index(frame) {}

    float at(int row, int col) const { return grid[static_cast<std::size_t>(row) * width + col]; }
    float& at(int row, int col) { return grid[static_cast<std::size_t>(row) * width + col]; }

    double max() const;
    double mean() const;
    /// Image pixel of the global maximum (first in row-major order on ties).
    Vec2 argmax_pixel() const;
    /// Bilinear sample at an image pixel; nullopt outside the grid support.
    std::optional<double> sample(const Vec2& pixel) const;
    /// Steepest ascent over 8-neighbors from the cell nearest to `pixel` (clamped into the grid)
    /// on the map box-averaged over a (2·smoothing + 1)² window; returns the image pixel of the
    /// local maximum reached, refined by a per-axis parabola fit when `subpixel` is set.
    Vec2 climb_from(const Vec2& pixel, int smoothing = 0, bool subpixel = false) const;
    /// Largest grid value within `radius` pixels of `pixel` (0 if none).
    double max_within(const Vec2& pixel, double radius) const;
    Vec2 cell_pixel(int row, int col) const {
        return {search_area.x + col, search_area.y + row};
    }
};

struct Observation {
    ScoreMap score_map;
    BoundingBox proposal;
    double confidence = 0.0;
};

/// Source of per-frame tracker observations (a neural tracker, a replay file, or the simulator).
class ObservationProvider {
public:
    virtual ~ObservationProvider() = default;
    /// nullopt signals end of sequence.
    virtual std::optional<Observation> observe(int frame_index,
                                               const BoundingBox& search_area) const = 0;
};

struct SyntheticMapParams {
    Vec2 true_pixel = Vec2::Zero();
    double peak_sigma = 3.0;
    std::vector<Vec2> distractor_pixels;
    /// One gain per distractor; a single value is broadcast.
    std::vector<double> distractor_gains;
    double occluded_fraction = 0.0;
    double noise_sigma = 0.0;
    /// Constant response over the whole area. A non-zero level makes occluded maps flat
    /// rather than empty.
    double background = 0.0;
    BoundingBox search_area;
    int frame_index = 0;
    std::uint64_t seed = 0;
};

/// Gaussian bump at the object, weighted by visibility, plus distractor bumps, a background
/// level and |N(0, noise_sigma)| per cell; clipped at 0 and scaled so the maximum is <= 1.
ScoreMap synthetic_score_map(const SyntheticMapParams& params);

/// Box with the same center and `scale` times the size. No clamping.
BoundingBox scale_box(const BoundingBox& box, double scale);

/// Intersection of `box` with the image [0,width)x[0,height). The center of a box whose
/// center lies inside the image is preserved inside the result.
BoundingBox clamp_to_image(const BoundingBox& box, int width, int height, bool* clamped = nullptr);

/// Search area around the previous estimate: scale_box then clamp_to_image.
BoundingBox search_area_from_state(const BoundingBox& prev_box, double scale, int width, int height,
                                   bool* clamped = nullptr);

/// Snaps a search area to whole pixels (floor origin, ceil extent), at least 1x1.
BoundingBox snap_to_pixels(const BoundingBox& box);

}  // namespace groundtrack
