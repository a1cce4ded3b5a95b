#pragma once

#include "groundtrack/appearance.hpp"
#include "groundtrack/evaluation.hpp"
#include "groundtrack/geometry.hpp"
#include "groundtrack/scene.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace groundtrack {

namespace fs = std::filesystem;

/// Pose files hold one camera per line: `frame qw qx qy qz tx ty tz f cx cy`, with the rotation
/// and translation of the world-from-camera transform. An optional `# image W H` comment sets the
/// resolution; without it the image is assumed to be centered on the principal point.
std::vector<CameraFrame> load_poses(const fs::path& path, std::vector<std::string>* warnings = nullptr);
void save_poses(const std::vector<CameraFrame>& frames, const fs::path& path);

struct Annotation {
    int frame = 0;
    int object_id = 0;
    BoundingBox box;
    bool occluded = false;

    bool operator==(const Annotation&) const = default;
};

/// CSV with header `frame,object_id,x,y,w,h,occluded`.
std::vector<Annotation> load_annotations(const fs::path& path);
void save_annotations(const std::vector<Annotation>& annotations, const fs::path& path);

/// CSV with header `frame,present,x,y,w,h,confidence,occluded_flag,xw,yw,zw`, preceded by a
/// `# object_id=.. sequence_id=.. run=..` line. Absent boxes leave x..h empty.
void save_track_record(const TrackRecord& record, const fs::path& path);
TrackRecord load_track_record(const fs::path& path);

/// CSV with header `frame,present,x,y,w,h,occluded,visible_fraction,xw,yw,zw,vx,vy,vz`.
void save_ground_truth(const GroundTruth& gt, const fs::path& path);
GroundTruth load_ground_truth(const fs::path& path);

/// ASCII PLY with x y z and optional red green blue properties.
void save_ply(const PointCloud& cloud, const fs::path& path);
PointCloud load_ply(const fs::path& path);

/// Little-endian binary: "DMAP", u32 width, u32 height, i32 frame, then width·height f32 values
/// in row-major order.
void save_depth_map(const DepthMap& map, const fs::path& path);
DepthMap load_depth_map(const fs::path& path);

/// Little-endian binary: "SMAP", u32 frame, u32 width, u32 height, width·height f32 cells, the
/// proposal box (x, y, w, h) and the confidence as 5 x f32, then an optional 4 x f32 search area.
/// Files without a search area cover the image from (0, 0).
void save_observation(const Observation& obs, const fs::path& path);
Observation load_observation(const fs::path& path);

/// File name used for per-frame rasters inside a directory.
std::string frame_file_name(int frame, const std::string& extension);

/// Replays recorded observations `frame_XXXXXX.smap` from a directory. Score maps are cropped to
/// the requested search area; proposal and confidence are returned as recorded.
class ObservationReplay : public ObservationProvider {
public:
    ObservationReplay(fs::path directory, int n_frames);
    std::optional<Observation> observe(int frame_index, const BoundingBox& search_area) const override;

private:
    fs::path directory_;
    int n_frames_;
};

/// Crops a map to a search area; cells outside the recorded area are 0.
ScoreMap crop_score_map(const ScoreMap& map, const BoundingBox& search_area);

struct SequenceManifest {
    std::string sequence_id;
    int n_frames = 0;
    int image_width = 0;
    int image_height = 0;
    double fps = 30.0;
    fs::path poses;
    fs::path cloud;
    fs::path depth_dir;        ///< optional
    fs::path annotations;
    fs::path score_map_dir;    ///< optional
};

/// key=value text; relative paths resolve against the manifest's directory.
SequenceManifest load_manifest(const fs::path& path);
void save_manifest(const SequenceManifest& manifest, const fs::path& path);

struct ManifestStats {
    int pose_frames = 0;
    int depth_maps = 0;
    int annotated_frames = 0;
    int object_ids = 0;
};

/// Checks that referenced files exist and agree on the frame count and resolution.
/// Throws Error(io_error) for missing files and Error(parse_error) for mismatches.
ManifestStats validate_manifest(const SequenceManifest& manifest);

struct ColmapScene {
    std::vector<CameraFrame> frames;  ///< ordered by image name
    PointCloud cloud;
};

/// Reads cameras.txt, images.txt and points3D.txt from a COLMAP text export. Supports the
/// SIMPLE_PINHOLE, PINHOLE (fx used as focal) and SIMPLE_RADIAL (distortion ignored) models.
ColmapScene load_colmap_text(const fs::path& directory, std::vector<std::string>* warnings = nullptr);

/// Writes the whole file or throws Error(io_error).
void write_text_file(const fs::path& path, const std::string& text);
std::string read_text_file(const fs::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace groundtrack
