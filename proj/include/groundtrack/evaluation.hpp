#pragma once

#include "groundtrack/geometry.hpp"
#include "groundtrack/particle_filter.hpp"
#include "groundtrack/tracker.hpp"

#include <map>
#include <optional>
#include <vector>

namespace groundtrack {

struct TrackRecordRow {
    int frame = 0;
    std::optional<BoundingBox> box;  ///< A_t
    double confidence = 0.0;         ///< θ_t
    bool occluded = false;
    Vec3 position = Vec3::Zero();

    bool operator==(const TrackRecordRow&) const = default;
};

struct TrackRecord {
    int object_id = 0;
    int sequence_id = 0;
    int run = 0;
    std::vector<TrackRecordRow> rows;

    bool operator==(const TrackRecord&) const = default;
};

/// Rows from tracker outputs; confidences are clamped to [0, 1].
TrackRecord make_record(const std::vector<TrackOutput>& outputs, int object_id = 0, int run = 0);

struct GroundTruthFrame {
    int frame = 0;
    /// Amodal box; absent only when the object cannot be projected.
    std::optional<BoundingBox> box;
    bool occluded = false;
    double visible_fraction = 1.0;
    ObjectState state;

    /// G_t ≠ 0: the box exists and at least `cutoff` of the object is visible.
    bool present(double cutoff = 1.0) const { return box.has_value() && visible_fraction >= cutoff; }
};

struct GroundTruth {
    std::vector<GroundTruthFrame> frames;

    const GroundTruthFrame* find(int frame) const;
};

enum class PrecisionMode {
    both_present,  ///< N_p = frames with A_t ≠ 0 and G_t ≠ 0
    long_term,      ///< N_p = frames with A_t ≠ 0
};

struct EvalOptions {
    PrecisionMode precision = PrecisionMode::both_present;
    double visible_cutoff = 1.0;
};

struct MetricCurve {
    std::vector<double> thresholds;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    double f_max = 0.0;
};

/// Ω(a, b); 0 when either box is absent or the union is empty.
double iou(const std::optional<BoundingBox>& a, const std::optional<BoundingBox>& b);

/// Precision/recall/F over τ_θ ∈ {observed confidences} ∪ {0, 1}. Frames are matched by index;
/// ground-truth frames missing from the record count as A_t = 0.
MetricCurve metric_curve(const TrackRecord& record, const GroundTruth& gt,
                         const EvalOptions& options = {});

/// Same curve evaluated at explicit thresholds.
MetricCurve metric_curve_at(const TrackRecord& record, const GroundTruth& gt,
                            std::vector<double> thresholds, const EvalOptions& options = {});

struct FinalScore {
    double f_final = 0.0;
    double std = 0.0;  ///< population std of the per-(object, run) f_max values
};

/// f_max grid keyed by object id, one entry per run.
using FmaxGrid = std::map<int, std::vector<double>>;

/// Mean over objects and runs. Throws Error(incomplete_grid) unless every object has the same
/// (non-zero) number of runs, or `runs` when given.
FinalScore final_f1(const FmaxGrid& grid, std::optional<std::size_t> runs = std::nullopt);

struct CoverageBox {
    int frame = 0;
    BoundingBox box;
};

/// Per-pixel fraction of frames in which at least one box covers the pixel
/// (pixel (c, r) is covered when x <= c < x + w and y <= r < y + h).
std::vector<double> bbox_distribution(const std::vector<CoverageBox>& boxes, int width, int height,
                                      int n_frames);

}  // namespace groundtrack
