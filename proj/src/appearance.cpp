#include "groundtrack/appearance.hpp"

#include "groundtrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace groundtrack {

double ScoreMap::max() const {
    if (grid.empty()) return 0.0;
    return *std::max_element(grid.begin(), grid.end());
}

double ScoreMap::mean() const {
    if (grid.empty()) return 0.0;
    double sum = 0.0;
    for (float v : grid) sum += v;
    return sum / static_cast<double>(grid.size());
}

Vec2 ScoreMap::argmax_pixel() const {
    if (grid.empty()) return search_area.center();
    const auto it = std::max_element(grid.begin(), grid.end());
    const auto idx = static_cast<int>(it - grid.begin());
    return cell_pixel(idx / width, idx % width);
}

std::optional<double> ScoreMap::sample(const Vec2& pixel) const {
    if (grid.empty()) return std::nullopt;
    const double u = pixel.x() - search_area.x;
    const double v = pixel.y() - search_area.y;
    if (!(u >= 0.0 && v >= 0.0 && u <= width - 1 && v <= height - 1)) return std::nullopt;
    const int c0 = std::min(static_cast<int>(u), std::max(width - 2, 0));
    const int r0 = std::min(static_cast<int>(v), std::max(height - 2, 0));
    const int c1 = std::min(c0 + 1, width - 1);
    const int r1 = std::min(r0 + 1, height - 1);
    const double fu = u - c0;
    const double fv = v - r0;
    const double top = (1.0 - fu) * at(r0, c0) + fu * at(r0, c1);
    const double bottom = (1.0 - fu) * at(r1, c0) + fu * at(r1, c1);
    return (1.0 - fv) * top + fv * bottom;
}

Vec2 ScoreMap::climb_from(const Vec2& pixel, int smoothing, bool subpixel) const {
    if (width <= 0 || height <= 0) return pixel;
    auto clamp_index = [](double v, int n) {
        if (!std::isfinite(v)) return 0;
        return static_cast<int>(std::clamp(std::lround(v), 0L, static_cast<long>(n - 1)));
    };
    const int k = std::max(smoothing, 0);
    auto value = [&](int r, int c) {
        double sum = 0.0;
        int count = 0;
        for (int rr = std::max(r - k, 0); rr <= std::min(r + k, height - 1); ++rr)
            for (int cc = std::max(c - k, 0); cc <= std::min(c + k, width - 1); ++cc) {
                sum += at(rr, cc);
                ++count;
            }
        return sum / count;
    };
    int r = clamp_index(pixel.y() - search_area.y, height);
    int c = clamp_index(pixel.x() - search_area.x, width);
    double current = value(r, c);
    for (;;) {
        int br = r, bc = c;
        double best = current;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                const int rr = r + dr, cc = c + dc;
                if ((dr == 0 && dc == 0) || rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
                const double v = value(rr, cc);
                if (v > best) {
                    best = v;
                    br = rr;
                    bc = cc;
                }
            }
        if (br == r && bc == c) break;
        r = br;
        c = bc;
        current = best;
    }
    Vec2 out = cell_pixel(r, c);
    if (!subpixel) return out;
    // vertex of the parabola through the peak and its two neighbours, per axis
    auto offset = [](double lo, double mid, double hi) {
        const double curvature = lo - 2.0 * mid + hi;
        if (!(curvature < 0.0)) return 0.0;
        return std::clamp(0.5 * (lo - hi) / curvature, -0.5, 0.5);
    };
    if (c > 0 && c < width - 1) out.x() += offset(value(r, c - 1), current, value(r, c + 1));
    if (r > 0 && r < height - 1) out.y() += offset(value(r - 1, c), current, value(r + 1, c));
    return out;
}

double ScoreMap::max_within(const Vec2& pixel, double radius) const {
    double best = 0.0;
    const double r2 = radius * radius;
    for (int row = 0; row < height; ++row)
        for (int col = 0; col < width; ++col)
            if ((cell_pixel(row, col) - pixel).squaredNorm() <= r2)
                best = std::max(best, static_cast<double>(at(row, col)));
    return best;
}

ScoreMap synthetic_score_map(const SyntheticMapParams& p) {
    if (!(p.peak_sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "peak_sigma must be positive");
    const BoundingBox area = snap_to_pixels(p.search_area);
    ScoreMap map(static_cast<int>(area.w), static_cast<int>(area.h), area, p.frame_index);

    const double visible = std::clamp(1.0 - p.occluded_fraction, 0.0, 1.0);
    const double inv2s2 = 1.0 / (2.0 * p.peak_sigma * p.peak_sigma);
    auto gain_of = [&](std::size_t i) {
        if (p.distractor_gains.empty()) return 1.0;
        return p.distractor_gains.size() == 1 ? p.distractor_gains.front() : p.distractor_gains.at(i);
    };

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    double peak = 0.0;
    for (int row = 0; row < map.height; ++row)
        for (int col = 0; col < map.width; ++col) {
            const Vec2 px = map.cell_pixel(row, col);
            double v = p.background;
            v += visible * std::exp(-(px - p.true_pixel).squaredNorm() * inv2s2);
            for (std::size_t i = 0; i < p.distractor_pixels.size(); ++i)
                v += gain_of(i) * std::exp(-(px - p.distractor_pixels[i]).squaredNorm() * inv2s2);
            const double n = noise(rng);
            if (p.noise_sigma > 0.0) v += std::abs(p.noise_sigma * n);
            v = std::max(v, 0.0);
            map.at(row, col) = static_cast<float>(v);
            peak = std::max(peak, v);
        }
    if (peak > 1.0)
        for (float& v : map.grid) v = static_cast<float>(v / peak);
    return map;
}

BoundingBox scale_box(const BoundingBox& box, double scale) {
    return BoundingBox::centered(box.center(), scale * box.w, scale * box.h);
}

BoundingBox clamp_to_image(const BoundingBox& box, int width, int height, bool* clamped) {
    const double x0 = std::clamp(box.x, 0.0, static_cast<double>(width));
    const double y0 = std::clamp(box.y, 0.0, static_cast<double>(height));
    const double x1 = std::clamp(box.x + box.w, 0.0, static_cast<double>(width));
    const double y1 = std::clamp(box.y + box.h, 0.0, static_cast<double>(height));
    const BoundingBox out{x0, y0, x1 - x0, y1 - y0};
    if (clamped) *clamped = !(out == box);
    return out;
}

BoundingBox search_area_from_state(const BoundingBox& prev_box, double scale, int width, int height,
                                   bool* clamped) {
    if (!(scale >= 1.0)) throw Error(ErrorCode::invalid_argument, "search scale must be >= 1");
    return clamp_to_image(scale_box(prev_box, scale), width, height, clamped);
}

BoundingBox snap_to_pixels(const BoundingBox& box) {
    const double x0 = std::floor(box.x);
    const double y0 = std::floor(box.y);
    const double x1 = std::ceil(box.x + box.w);
    const double y1 = std::ceil(box.y + box.h);
    return {x0, y0, std::max(1.0, x1 - x0), std::max(1.0, y1 - y0)};
}

}  // namespace groundtrack
