#pragma once

#include "groundtrack/appearance.hpp"
#include "groundtrack/geometry.hpp"
#include "groundtrack/particle_filter.hpp"
#include "groundtrack/scene.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace groundtrack {

enum class TrackerVariant { ml_baseline, filter_2d, filter_3d };

const char* to_string(TrackerVariant v) noexcept;
/// Accepts "ml", "2d", "3d" and the enum spellings. Throws Error(invalid_argument).
TrackerVariant parse_variant(const std::string& name);

/// Pixel of the box that is backprojected onto the ground and re-anchored on output.
enum class BoxAnchor { center, bottom_center };

struct TrackerConfig {
    TrackerVariant variant = TrackerVariant::filter_3d;
    std::size_t n_particles = 500;
    double search_scale = 5.0;
    double resample_ess_fraction = 0.5;
    double redistribute_fraction = 0.10;
    double depth_tol = 0.05;
    double link_radius_frac = 0.15;      ///< of the search-area width
    double flatness_ratio = 3.0;
    double visibility_threshold = 0.25;
    double reappear_threshold = 0.5;
    double reappear_radius_frac = 0.2;   ///< of the search-area width
    double occluded_particle_fraction = 0.5;
    /// <= 0 selects noise_pos_frac x the ground extent of the initial search area (3D) or its
    /// pixel width (2D).
    double noise_sigma_pos = 0.0;
    /// <= 0 selects noise_vel_ratio x noise_sigma_pos.
    double noise_sigma_vel = 0.0;
    double noise_pos_frac = 0.02;
    double noise_vel_ratio = 0.05;
    double dt = 1.0;
    BoxAnchor anchor = BoxAnchor::center;
    std::uint64_t seed = 0;
};

/// Per-frame geometry shared read-only by every tracker running on a sequence.
struct FrameContext {
    CameraFrame frame;
    std::shared_ptr<const DepthMap> depth_map;
    GroundPlane plane;
};

struct TrackOutput {
    int frame_index = 0;
    std::optional<BoundingBox> box;
    double confidence = 0.0;
    bool occluded = false;
    ObjectState state_3d;
    Vec2 reprojected_center = Vec2::Zero();
};

/// Particles in image coordinates for the 2D variant.
struct ImageParticles {
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    std::vector<double> weights;

    bool operator==(const ImageParticles&) const = default;
};

struct TrackerState {
    TrackerVariant variant = TrackerVariant::filter_3d;
    TrackerConfig config;
    ParticleSet particles;
    ImageParticles image_particles;
    ObjectState estimate;
    ObjectState last_visible_state;
    /// Position backprojected from the first box; source of the initial velocity.
    ObjectState initial_state;
    bool velocity_initialized = false;
    /// Score peak on the initialization frame; when set, the initial velocity is measured from
    /// here instead of from the first box.
    std::optional<Vec2> reference_pixel;
    std::optional<Vec3> reference_position;
    Vec2 image_position = Vec2::Zero();
    Vec2 image_velocity = Vec2::Zero();
    BoundingBox last_box;
    double last_box_w = 0.0;
    double last_box_h = 0.0;
    bool occluded = false;
    int frames_occluded = 0;
    /// Indices of the particles selected as the object cluster in the previous update.
    std::vector<std::size_t> object_members;
    double sigma_pos = 0.0;
    double sigma_vel = 0.0;
    int frame_index = 0;
    std::mt19937_64 rng;

    bool operator==(const TrackerState& o) const;
};

struct Cluster {
    std::vector<std::size_t> members;
    Vec3 centroid = Vec3::Zero();  ///< weighted, in world coordinates (image coordinates for 2D)
    double weight = 0.0;
};

struct StepResult {
    TrackerState state;
    TrackOutput output;
};

/// Backprojects the anchor pixel of `first_box` onto the plane and seeds particles around it.
/// Throws Error(initialization_failed) when the backprojection is impossible.
TrackerState initialize(const BoundingBox& first_box, const FrameContext& ctx,
                        const TrackerConfig& cfg);

/// Particle i is occluded when its predicted camera depth exceeds the observed depth by more
/// than `depth_tol` (relative). Positions off the map count as occluded; no-data pixels do not.
std::vector<bool> identify_occluded_particles(std::span<const Vec3> positions,
                                              const FrameContext& ctx, double depth_tol);
std::vector<bool> identify_occluded_particles(const ParticleSet& particles, const FrameContext& ctx,
                                              double depth_tol);

/// True when at least the configured fraction of the mask is occluded, or the score map is
/// both flat (max/mean below flatness_ratio) and weak (max below visibility_threshold).
bool occlusion_verdict(const std::vector<bool>& mask, const Observation& obs,
                       const TrackerConfig& cfg);

/// Single-linkage components of the points under a pixel link radius, heaviest first.
/// `centroids` supplies the per-point coordinates averaged into each cluster centroid.
std::vector<Cluster> cluster_points(std::span<const Vec2> pixels, std::span<const double> weights,
                                    std::span<const Vec3> centroids, double link_radius);

/// Same, restricted to the points listed in `subset`; members keep their original indices.
std::vector<Cluster> cluster_points(std::span<const Vec2> pixels, std::span<const double> weights,
                                    std::span<const Vec3> centroids, double link_radius,
                                    std::span<const std::size_t> subset);

/// Clusters particles by their image projections; centroids are in world coordinates.
/// A non-empty `subset` restricts clustering to those particles.
std::vector<Cluster> cluster_particles(const ParticleSet& particles, const CameraFrame& frame,
                                       double link_radius, std::span<const std::size_t> subset = {});

/// Sorted distinct indices drawn by one stratified resampling pass: the particles that carry
/// the posterior. Clustering runs on this support so that low-weight particles scattered by
/// redistribution do not chain separate modes together.
std::vector<std::size_t> posterior_support(std::span<const double> weights, std::uint64_t seed);

/// Sorted indices of all points within `link_radius` of some point in `members`; the members
/// themselves are included. Unprojectable (NaN) points never join.
std::vector<std::size_t> expand_cluster(std::span<const Vec2> pixels, std::span<const std::size_t> members,
                                        double link_radius);

/// Positions in a resampled set whose ancestor index is in `members` (sorted).
std::vector<std::size_t> descendants_of(std::span<const std::size_t> ancestors,
                                        std::span<const std::size_t> members);

/// Index of the cluster nearest to `predicted`; ties go to the heavier, then the earlier cluster.
/// Throws Error(no_cluster) on an empty list.
std::size_t select_object_cluster(std::span<const Cluster> clusters, const Vec3& predicted);

/// True when the score near the predicted pixel reaches the reappearance threshold and fewer
/// than half of the predicted particles are occluded.
bool check_reappearance(const Observation& obs, const Vec2& predicted_pixel,
                        double occluded_fraction, const TrackerConfig& cfg);

/// One frame of the configured variant. nullopt when the provider reached the end.
std::optional<StepResult> step(const TrackerState& state, const FrameContext& ctx,
                               const ObservationProvider& provider);

std::optional<StepResult> step_filter_3d(const TrackerState& state, const FrameContext& ctx,
                                         const ObservationProvider& provider);
std::optional<StepResult> step_filter_2d(const TrackerState& state, const FrameContext& ctx,
                                         const ObservationProvider& provider);
std::optional<StepResult> step_ml_baseline(const TrackerState& state, const FrameContext& ctx,
                                           const ObservationProvider& provider);

/// Locates the score peak nearest to the first box on the initialization frame and records it
/// as the start of the initial-velocity finite difference. Leaves the state unchanged when the
/// frame has no usable observation.
void prime_velocity_reference(TrackerState& state, const FrameContext& ctx,
                              const ObservationProvider& provider);

/// Output for the initialization frame: the given box at full confidence.
TrackOutput initial_output(const TrackerState& state, const BoundingBox& first_box);

/// Runs a tracker over `contexts`, initialized from `first_box` on contexts[0] and primed with
/// its observation. Stops early when
/// the provider signals the end of the sequence. The first output is the initialization frame.
std::vector<TrackOutput> run_tracker(const std::vector<FrameContext>& contexts,
                                     const BoundingBox& first_box, const ObservationProvider& provider,
                                     const TrackerConfig& cfg);

namespace detail {
/// Box-filter half width used when locating the score peak for the initial velocity.
inline constexpr int kPeakSmoothing = 2;
Vec2 anchor_pixel(const BoundingBox& box, BoxAnchor anchor);
BoundingBox box_at_anchor(const Vec2& pixel, double w, double h, BoxAnchor anchor);
BoundingBox search_area_for(const TrackerState& state, const Intrinsics& intrinsics, bool* clamped);
}  // namespace detail

}  // namespace groundtrack
