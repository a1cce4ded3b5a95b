#include "groundtrack/kernels.hpp"

#include "groundtrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace groundtrack {

namespace {

/// Static kd-tree over a borrowed point array.
class KdTree {
public:
    explicit KdTree(std::span<const Vec3> points) : points_(points), order_(points.size()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        nodes_.reserve(points.size());
        if (!points.empty()) build(0, points.size(), 0);
    }

    /// Squared distances to the k nearest points other than `self`, ascending.
    void nearest(std::size_t self, int k, std::vector<double>& out) const {
        Heap heap;
        search(0, self, static_cast<std::size_t>(k), heap);
        out.clear();
        while (!heap.empty()) {
            out.push_back(heap.top());
            heap.pop();
        }
        std::reverse(out.begin(), out.end());
    }

private:
    using Heap = std::priority_queue<double>;

    struct Node {
        std::size_t begin, end;  // range in order_
        std::size_t point;       // splitting point (order_[mid])
        int axis;
        std::ptrdiff_t left = -1, right = -1;
    };

    std::ptrdiff_t build(std::size_t begin, std::size_t end, int depth) {
        if (begin >= end) return -1;
        const int axis = depth % 3;
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::size_t a, std::size_t b) {
                             return points_[a][axis] < points_[b][axis];
                         });
        const auto id = static_cast<std::ptrdiff_t>(nodes_.size());
        nodes_.push_back({begin, end, order_[mid], axis});
        const auto l = build(begin, mid, depth + 1);
        const auto r = build(mid + 1, end, depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    void search(std::ptrdiff_t id, std::size_t self, std::size_t k, Heap& heap) const {
        if (id < 0) return;
        const Node& node = nodes_[id];
        const Vec3& q = points_[self];
        if (node.point != self) {
            const double d2 = (q - points_[node.point]).squaredNorm();
            if (heap.size() < k) {
                heap.push(d2);
            } else if (d2 < heap.top()) {
                heap.pop();
                heap.push(d2);
            }
        }
        const double diff = q[node.axis] - points_[node.point][node.axis];
        const auto near = diff < 0.0 ? node.left : node.right;
        const auto far = diff < 0.0 ? node.right : node.left;
        search(near, self, k, heap);
        if (heap.size() < k || diff * diff <= heap.top()) search(far, self, k, heap);
    }

    std::span<const Vec3> points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

double mean_of_sqrt(const std::vector<double>& sorted_sq) {
    double sum = 0.0;
    for (double d2 : sorted_sq) sum += std::sqrt(d2);
    return sum / static_cast<double>(sorted_sq.size());
}

void check_knn_args(std::span<const Vec3> points, int k) {
    if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
    if (points.size() <= static_cast<std::size_t>(k))
        throw Error(ErrorCode::insufficient_points, "need more than k points");
}

struct PlaneLayer {
    PlaneCameraFrame plane;
    bool usable;
};

PlaneLayer plane_layer(const GroundPlane& plane, const CameraFrame& frame) {
    return {plane_in_camera(plane, frame), plane.normal.allFinite()};
}

float plane_depth_or_sentinel(const PlaneLayer& layer, const Vec2& pixel, const Intrinsics& in) {
    if (!layer.usable) return DepthMap::kNoData;
    const double xi = pixel.x() - in.cx;
    const double yi = pixel.y() - in.cy;
    const double denom = layer.plane.normal.x() * xi + layer.plane.normal.y() * yi +
                         layer.plane.normal.z() * in.focal;
    if (std::abs(denom) < 1e-12) return DepthMap::kNoData;
    const double depth = in.focal * layer.plane.offset / denom;
    return depth > 0.0 ? static_cast<float>(depth) : DepthMap::kNoData;
}

struct Splat {
    int col, row;
    float depth;
};

std::optional<Splat> splat_of(const Vec3& p, const Mat3& Rt, const Vec3& t, const Intrinsics& in) {
    const Vec3 pc = Rt * (p - t);
    if (!(pc.z() > 1e-12)) return std::nullopt;
    const double u = in.focal * pc.x() / pc.z() + in.cx;
    const double v = in.focal * pc.y() / pc.z() + in.cy;
    if (!std::isfinite(u) || !std::isfinite(v)) return std::nullopt;
    return Splat{static_cast<int>(std::lround(u)), static_cast<int>(std::lround(v)),
                 static_cast<float>(pc.z())};
}

void apply_splat_rows(DepthMap& map, const Splat& s, int radius, double r2, int row_lo,
                      int row_hi) {
    const int r0 = std::max({s.row - radius, row_lo, 0});
    const int r1 = std::min({s.row + radius, row_hi - 1, map.height - 1});
    for (int row = r0; row <= r1; ++row) {
        const int dr = row - s.row;
        for (int col = std::max(s.col - radius, 0); col <= std::min(s.col + radius, map.width - 1);
             ++col) {
            const int dc = col - s.col;
            if (dr * dr + dc * dc > r2) continue;
            float& cell = map.at(col, row);
            if (s.depth < cell) cell = s.depth;
        }
    }
}

double bilinear_or_floor(const ScoreMap& map, const Vec2& pixel, double floor) {
    const auto s = map.sample(pixel);
    if (!s) return floor;
    return std::max(*s, floor);
}

}  // namespace

std::vector<double> knn_mean_distances(std::span<const Vec3> points, int k) {
    check_knn_args(points, k);
    const KdTree tree(points);
    std::vector<double> out(points.size());
    const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel
    {
        std::vector<double> scratch;
        scratch.reserve(static_cast<std::size_t>(k));
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            tree.nearest(static_cast<std::size_t>(i), k, scratch);
            out[static_cast<std::size_t>(i)] = mean_of_sqrt(scratch);
        }
    }
    return out;
}

DepthMap rasterize_depth(std::span<const Vec3> points, const GroundPlane& plane,
                         const CameraFrame& frame, double splat_radius) {
    const Intrinsics& in = frame.intrinsics;
    DepthMap map(in.width, in.height, frame.frame_index);
    const PlaneLayer layer = plane_layer(plane, frame);

#pragma omp parallel for schedule(static)
    for (int row = 0; row < in.height; ++row)
        for (int col = 0; col < in.width; ++col)
            map.at(col, row) = plane_depth_or_sentinel(layer, Vec2(col, row), in);

    const Mat3 Rt = frame.world_from_camera.rotation().transpose();
    const Vec3 t = frame.world_from_camera.translation();
    std::vector<std::optional<Splat>> splats(points.size());
    const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) splats[i] = splat_of(points[i], Rt, t, in);

    const int radius = static_cast<int>(std::floor(splat_radius));
    const double r2 = splat_radius * splat_radius;
    constexpr int kBand = 16;
    const int bands = (in.height + kBand - 1) / kBand;
    // Each band owns its rows; the min rule makes the result order-independent.
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < bands; ++b) {
        const int lo = b * kBand;
        const int hi = std::min(lo + kBand, in.height);
        for (const auto& s : splats)
            if (s && s->row + radius >= lo && s->row - radius < hi)
                apply_splat_rows(map, *s, radius, r2, lo, hi);
    }
    return map;
}

std::vector<double> score_likelihoods(std::span<const Vec3> positions, const ScoreMap& map,
                                      const CameraFrame& frame, double floor) {
    std::vector<double> out(positions.size(), floor);
    const auto n = static_cast<std::ptrdiff_t>(positions.size());
    const RigidTransform camera_from_world = frame.camera_from_world();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const Vec3 pc = camera_from_world.apply(positions[i]);
        if (!(pc.z() > 1e-12)) continue;
        out[i] = bilinear_or_floor(map, project_camera_point(pc, frame.intrinsics).pixel, floor);
    }
    return out;
}

std::vector<double> score_likelihoods_image(std::span<const Vec2> pixels, const ScoreMap& map,
                                            double floor) {
    std::vector<double> out(pixels.size(), floor);
    const auto n = static_cast<std::ptrdiff_t>(pixels.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = bilinear_or_floor(map, pixels[i], floor);
    return out;
}

namespace reference {

std::vector<double> knn_mean_distances(std::span<const Vec3> points, int k) {
    check_knn_args(points, k);
    std::vector<double> out(points.size());
    std::vector<double> d2;
    for (std::size_t i = 0; i < points.size(); ++i) {
        d2.clear();
        for (std::size_t j = 0; j < points.size(); ++j)
            if (j != i) d2.push_back((points[i] - points[j]).squaredNorm());
        std::partial_sort(d2.begin(), d2.begin() + k, d2.end());
        d2.resize(static_cast<std::size_t>(k));
        out[i] = mean_of_sqrt(d2);
    }
    return out;
}

DepthMap rasterize_depth(std::span<const Vec3> points, const GroundPlane& plane,
                         const CameraFrame& frame, double splat_radius) {
    const Intrinsics& in = frame.intrinsics;
    DepthMap map(in.width, in.height, frame.frame_index);
    const PlaneLayer layer = plane_layer(plane, frame);
    for (int row = 0; row < in.height; ++row)
        for (int col = 0; col < in.width; ++col)
            map.at(col, row) = plane_depth_or_sentinel(layer, Vec2(col, row), in);
    const Mat3 Rt = frame.world_from_camera.rotation().transpose();
    const Vec3 t = frame.world_from_camera.translation();
    const int radius = static_cast<int>(std::floor(splat_radius));
    for (const Vec3& p : points)
        if (const auto s = splat_of(p, Rt, t, in))
            apply_splat_rows(map, *s, radius, splat_radius * splat_radius, 0, in.height);
    return map;
}

std::vector<double> score_likelihoods(std::span<const Vec3> positions, const ScoreMap& map,
                                      const CameraFrame& frame, double floor) {
    std::vector<double> out;
    out.reserve(positions.size());
    for (const Vec3& p : positions) {
        const Vec3 pc = frame.camera_from_world().apply(p);
        if (!(pc.z() > 1e-12)) {
            out.push_back(floor);
            continue;
        }
        out.push_back(bilinear_or_floor(map, project_camera_point(pc, frame.intrinsics).pixel, floor));
    }
    return out;
}

}  // namespace reference

}  // namespace groundtrack
