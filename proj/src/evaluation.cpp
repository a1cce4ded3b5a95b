#include "groundtrack/evaluation.hpp"

#include "groundtrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace groundtrack {

const GroundTruthFrame* GroundTruth::find(int frame) const {
    if (frame >= 0 && static_cast<std::size_t>(frame) < frames.size() &&
        frames[static_cast<std::size_t>(frame)].frame == frame)
        return &frames[static_cast<std::size_t>(frame)];
    for (const auto& f : frames)
        if (f.frame == frame) return &f;
    return nullptr;
}

double iou(const std::optional<BoundingBox>& a, const std::optional<BoundingBox>& b) {
    if (!a || !b) return 0.0;
    const double ix = std::max(0.0, std::min(a->x + a->w, b->x + b->w) - std::max(a->x, b->x));
    const double iy = std::max(0.0, std::min(a->y + a->h, b->y + b->h) - std::max(a->y, b->y));
    const double inter = ix * iy;
    const double uni = a->area() + b->area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

MetricCurve metric_curve_at(const TrackRecord& record, const GroundTruth& gt,
                            std::vector<double> thresholds, const EvalOptions& options) {
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::unordered_map<int, const TrackRecordRow*> by_frame;
    for (const auto& row : record.rows) by_frame[row.frame] = &row;

    MetricCurve curve;
    curve.thresholds = thresholds;
    for (double tau : thresholds) {
        double sum_p = 0.0, sum_g = 0.0;
        std::size_t n_p = 0, n_g = 0;
        for (const auto& g : gt.frames) {
            const bool g_present = g.present(options.visible_cutoff);
            const auto it = by_frame.find(g.frame);
            std::optional<BoundingBox> a;
            if (it != by_frame.end() && it->second->box && it->second->confidence >= tau)
                a = it->second->box;
            const std::optional<BoundingBox> gbox = g_present ? g.box : std::nullopt;
            const double omega = iou(a, gbox);
            if (g_present) {
                sum_g += omega;
                ++n_g;
            }
            const bool in_np = options.precision == PrecisionMode::both_present
                                   ? (a.has_value() && g_present)
                                   : a.has_value();
            if (in_np) {
                sum_p += omega;
                ++n_p;
            }
        }
        const double pr = n_p ? sum_p / static_cast<double>(n_p) : 0.0;
        const double re = n_g ? sum_g / static_cast<double>(n_g) : 0.0;
        const double f = pr + re > 0.0 ? 2.0 * pr * re / (pr + re) : 0.0;
        curve.precision.push_back(pr);
        curve.recall.push_back(re);
        curve.f1.push_back(f);
        curve.f_max = std::max(curve.f_max, f);
    }
    return curve;
}

MetricCurve metric_curve(const TrackRecord& record, const GroundTruth& gt,
                         const EvalOptions& options) {
    std::vector<double> thresholds{0.0, 1.0};
    for (const auto& row : record.rows)
        if (row.box) thresholds.push_back(row.confidence);
    return metric_curve_at(record, gt, std::move(thresholds), options);
}

FinalScore final_f1(const FmaxGrid& grid, std::optional<std::size_t> runs) {
    if (grid.empty()) throw Error(ErrorCode::incomplete_grid, "no objects");
    const std::size_t m = runs ? *runs : grid.begin()->second.size();
    if (m == 0) throw Error(ErrorCode::incomplete_grid, "no runs");
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [object, values] : grid) {
        if (values.size() != m)
            throw Error(ErrorCode::incomplete_grid,
                        "object " + std::to_string(object) + " has " + std::to_string(values.size()) +
                            " runs, expected " + std::to_string(m));
        for (double v : values) sum += v;
        count += values.size();
    }
    FinalScore out;
    out.f_final = sum / static_cast<double>(count);
    double var = 0.0;
    for (const auto& [object, values] : grid)
        for (double v : values) var += (v - out.f_final) * (v - out.f_final);
    out.std = std::sqrt(var / static_cast<double>(count));
    return out;
}

std::vector<double> bbox_distribution(const std::vector<CoverageBox>& boxes, int width, int height,
                                      int n_frames) {
    if (width <= 0 || height <= 0 || n_frames <= 0)
        throw Error(ErrorCode::invalid_argument, "empty coverage grid");
    std::vector<double> heat(static_cast<std::size_t>(width) * height, 0.0);
    std::map<int, std::vector<BoundingBox>> per_frame;
    for (const auto& b : boxes) per_frame[b.frame].push_back(b.box);
    std::vector<char> covered(heat.size());
    for (const auto& [frame, list] : per_frame) {
        std::fill(covered.begin(), covered.end(), 0);
        for (const auto& b : list) {
            const int c0 = std::max(0, static_cast<int>(std::ceil(b.x)));
            const int r0 = std::max(0, static_cast<int>(std::ceil(b.y)));
            const int c1 = std::min(width, static_cast<int>(std::ceil(b.x + b.w)));
            const int r1 = std::min(height, static_cast<int>(std::ceil(b.y + b.h)));
            for (int r = r0; r < r1; ++r)
                for (int c = c0; c < c1; ++c) covered[static_cast<std::size_t>(r) * width + c] = 1;
        }
        for (std::size_t i = 0; i < heat.size(); ++i) heat[i] += covered[i];
    }
    for (double& v : heat) v /= static_cast<double>(n_frames);
    return heat;
}

TrackRecord make_record(const std::vector<TrackOutput>& outputs, int object_id, int run) {
    TrackRecord record;
    record.object_id = object_id;
    record.run = run;
    for (const auto& o : outputs) {
        TrackRecordRow row;
        row.frame = o.frame_index;
        row.box = o.box;
        row.confidence = std::clamp(o.confidence, 0.0, 1.0);
        row.occluded = o.occluded;
        row.position = o.state_3d.position;
        record.rows.push_back(row);
    }
    return record;
}

}  // namespace groundtrack
