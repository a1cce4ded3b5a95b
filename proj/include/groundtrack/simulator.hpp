#pragma once

#include "groundtrack/appearance.hpp"
#include "groundtrack/evaluation.hpp"
#include "groundtrack/geometry.hpp"
#include "groundtrack/particle_filter.hpp"
#include "groundtrack/scene.hpp"
#include "groundtrack/tracker.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace groundtrack {

struct OcclusionWindow {
    int first = 0;
    int last = 0;  ///< inclusive
};

/// Axis-aligned box that exists only during [active.first, active.last].
struct Occluder {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
    OcclusionWindow active;

    bool active_at(int frame) const { return frame >= active.first && frame <= active.last; }
};

struct ScenarioConfig {
    int n_frames = 60;
    int image_width = 640;
    int image_height = 360;
    double focal = 500.0;
    std::pair<double, double> altitude_range{10.0, 30.0};
    std::pair<double, double> pitch_range_deg{45.0, 90.0};
    std::pair<double, double> object_speed_range{0.15, 0.4};
    /// Probability that the object path contains a stop-and-go segment.
    double stop_and_go = 0.0;
    double object_extent = 1.5;
    int n_distractors = 0;
    double distractor_gain = 1.2;
    /// Closest approach of a distractor, in object extents.
    double distractor_offset = 2.0;
    /// Explicit windows; when empty, `n_random_occlusions` windows are drawn.
    std::vector<OcclusionWindow> occlusion_windows;
    int n_random_occlusions = 0;
    std::pair<int, int> occlusion_length_range{10, 20};
    std::pair<double, double> canopy_height{2.5, 4.0};
    /// Upper bound of the camera speed (scene units per frame).
    double camera_speed = 0.0;
    /// Camera velocity is redrawn every this many frames.
    int camera_segment_frames = 15;
    /// Camera stays still before this frame.
    int camera_motion_start = 0;
    /// Measurement model of the synthetic score maps.
    double peak_sigma_frac = 0.2;  ///< of the object box width
    double score_noise = 0.02;
    double score_background = 0.1;
    int ground_points = 3000;
    double splat_radius = 2.0;
    std::uint64_t seed = 0;
};

struct Scenario {
    GroundPlane plane;
    std::vector<ObjectState> object_trajectory;
    std::vector<std::vector<ObjectState>> distractor_trajectories;
    std::vector<Occluder> occluders;
    std::vector<CameraFrame> camera_path;
    PointCloud cloud;
    /// -1 for ground samples, otherwise the index of the occluder the point lies on.
    std::vector<int> point_owner;
    int n_frames = 0;
    double object_extent = 1.5;
    double distractor_gain = 1.2;
    double peak_sigma_frac = 0.2;
    double score_noise = 0.02;
    double score_background = 0.1;
    double splat_radius = 2.0;
    /// Characteristic ground size of the scene (visible ground width at the look-at point).
    double scene_scale = 1.0;
    std::uint64_t seed = 0;

    bool operator==(const Scenario& o) const;
};

/// Draws a scenario. Throws Error(invalid_argument) on infeasible configurations.
Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

/// Fraction of the 3x3 footprint samples whose ray to the camera misses every active occluder.
double visible_fraction(const Scenario& s, const Vec3& center, int frame, double extent);

/// Same test for a single ground point.
bool ray_blocked(const Scenario& s, const Vec3& point, int frame);

/// Projected footprint box of a square ground footprint; nullopt when behind the camera.
std::optional<BoundingBox> footprint_box(const Vec3& center, double extent, const CameraFrame& frame);

GroundTruth render_ground_truth(const Scenario& s, double object_extent);

/// Depth map from the cloud points of the ground and active occluders, plus exact occluder faces.
DepthMap render_scenario_depth(const Scenario& s, int frame);

/// Per-frame contexts with rendered depth maps.
std::vector<FrameContext> build_frame_contexts(const Scenario& s);

/// Score maps generated from the scenario ground truth; stateless.
class SyntheticProvider : public ObservationProvider {
public:
    SyntheticProvider(const Scenario& scenario, std::uint64_t seed);

    std::optional<Observation> observe(int frame_index, const BoundingBox& search_area) const override;

private:
    const Scenario* scenario_;
    std::uint64_t seed_;
    std::vector<std::optional<BoundingBox>> object_boxes_;
    std::vector<double> object_visibility_;
    std::vector<std::vector<double>> distractor_visibility_;
};

/// Drives one tracker variant over the scenario from the frame-0 ground-truth box.
TrackRecord run_episode(const Scenario& s, const std::vector<FrameContext>& contexts,
                        const GroundTruth& gt, const TrackerConfig& cfg, std::uint64_t seed,
                        std::vector<TrackOutput>* outputs = nullptr);

/// Convenience overload rendering contexts and ground truth internally.
TrackRecord run_episode(const Scenario& s, const TrackerConfig& cfg, std::uint64_t seed);

/// Scenario family of the variant comparison: one full occlusion of 10-20 frames, one
/// distractor crossing the object, and a translating camera.
ScenarioConfig comparison_scenario_config();

struct SuiteConfig {
    ScenarioConfig scenario = comparison_scenario_config();
    TrackerConfig tracker;
    EvalOptions eval;
    int n_scenarios = 50;
    int runs = 5;
    std::vector<TrackerVariant> variants{TrackerVariant::ml_baseline, TrackerVariant::filter_2d,
                                         TrackerVariant::filter_3d};
    std::uint64_t seed = 0;
};

struct VariantScore {
    TrackerVariant variant = TrackerVariant::filter_3d;
    FmaxGrid grid;  ///< keyed by scenario index
    FinalScore score;
};

/// Runs every variant on `n_scenarios` scenarios x `runs` seeds. Scenarios run concurrently;
/// results do not depend on the thread count.
std::vector<VariantScore> run_suite(const SuiteConfig& cfg);

/// 64-bit mix of two seeds (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace groundtrack
