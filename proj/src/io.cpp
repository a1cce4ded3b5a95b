#include "groundtrack/io.hpp"

#include "groundtrack/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace groundtrack {

namespace {

[[noreturn]] void parse_fail(const fs::path& path, std::size_t line, const std::string& what) {
    throw Error(ErrorCode::parse_error,
                path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

template <typename T>
std::optional<T> parse_number(const std::string& s) {
    T v{};
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || b == e) return std::nullopt;
    return v;
}

template <typename T>
T number_or_fail(const std::string& s, const fs::path& path, std::size_t line, const char* field) {
    const auto v = parse_number<T>(s);
    if (!v) parse_fail(path, line, std::string("bad ") + field + " '" + s + "'");
    return *v;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

template <typename T>
void put(std::string& buf, T v) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    buf.append(bytes, sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t& pos, const fs::path& path) {
    if (pos + sizeof(T) > buf.size()) throw Error(ErrorCode::parse_error, path.string() + ": truncated");
    char bytes[sizeof(T)];
    std::memcpy(bytes, buf.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos += sizeof(T);
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

std::string read_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_binary(const fs::path& path, const std::string& bytes) {
    auto out = open_out(path, true);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    finish(out, path);
}

bool is_comment_or_blank(const std::string& line) {
    const std::string t = trim(line);
    return t.empty() || t.front() == '#';
}

void expect_header(const std::vector<std::string>& lines, std::size_t& i, const std::string& header,
                   const fs::path& path) {
    while (i < lines.size() && is_comment_or_blank(lines[i])) ++i;
    if (i >= lines.size() || trim(lines[i]) != header)
        parse_fail(path, i + 1, "expected header '" + header + "'");
    ++i;
}

std::string fmt_box_fields(const std::optional<BoundingBox>& box) {
    if (!box) return ",,,";
    return format_double(box->x) + "," + format_double(box->y) + "," + format_double(box->w) + "," +
           format_double(box->h);
}

std::optional<BoundingBox> parse_box_fields(const std::vector<std::string>& f, std::size_t first,
                                            bool present, const fs::path& path, std::size_t line) {
    if (!present) {
        for (std::size_t k = first; k < first + 4; ++k)
            if (!f[k].empty()) parse_fail(path, line, "absent row carries box fields");
        return std::nullopt;
    }
    return BoundingBox{number_or_fail<double>(f[first], path, line, "x"),
                       number_or_fail<double>(f[first + 1], path, line, "y"),
                       number_or_fail<double>(f[first + 2], path, line, "w"),
                       number_or_fail<double>(f[first + 3], path, line, "h")};
}

bool parse_flag(const std::string& s, const fs::path& path, std::size_t line, const char* field) {
    if (s == "0") return false;
    if (s == "1") return true;
    parse_fail(path, line, std::string(field) + " must be 0 or 1");
}

}  // namespace

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_text_file(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

std::string read_text_file(const fs::path& path) { return read_binary(path); }

// ---- poses ----

std::vector<CameraFrame> load_poses(const fs::path& path, std::vector<std::string>* warnings) {
    const auto lines = read_lines(path);
    std::optional<std::pair<int, int>> image;
    std::vector<CameraFrame> frames;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        const std::string t = trim(lines[i]);
        if (t.empty()) continue;
        if (t.front() == '#') {
            const auto tok = split_ws(t.substr(1));
            if (tok.size() == 3 && tok[0] == "image") {
                image = {number_or_fail<int>(tok[1], path, ln, "width"),
                         number_or_fail<int>(tok[2], path, ln, "height")};
            }
            continue;
        }
        const auto tok = split_ws(t);
        if (tok.size() != 11) parse_fail(path, ln, "expected 11 fields, got " + std::to_string(tok.size()));
        CameraFrame f;
        f.frame_index = number_or_fail<int>(tok[0], path, ln, "frame");
        double v[10];
        for (int k = 0; k < 10; ++k) v[k] = number_or_fail<double>(tok[k + 1], path, ln, "value");
        Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
        const double norm = q.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) parse_fail(path, ln, "zero quaternion");
        if (std::abs(norm - 1.0) > 1e-6 && warnings)
            warnings->push_back(path.string() + ":" + std::to_string(ln) +
                                ": quaternion normalized (norm " + format_double(norm) + ")");
        q.normalize();
        f.intrinsics.focal = v[7];
        f.intrinsics.cx = v[8];
        f.intrinsics.cy = v[9];
        if (image) {
            f.intrinsics.width = image->first;
            f.intrinsics.height = image->second;
        } else {
            f.intrinsics.width = static_cast<int>(std::lround(2.0 * v[8]));
            f.intrinsics.height = static_cast<int>(std::lround(2.0 * v[9]));
        }
        try {
            f.intrinsics.validate();
            f.world_from_camera = RigidTransform(q.toRotationMatrix(), Vec3(v[4], v[5], v[6]));
        } catch (const Error& e) {
            parse_fail(path, ln, e.what());
        }
        if (!frames.empty() && f.frame_index <= frames.back().frame_index)
            throw Error(ErrorCode::ordering_error, path.string() + ":" + std::to_string(ln) +
                                                       ": frame " + std::to_string(f.frame_index) +
                                                       " does not increase");
        frames.push_back(f);
    }
    return frames;
}

void save_poses(const std::vector<CameraFrame>& frames, const fs::path& path) {
    std::string text;
    if (!frames.empty())
        text += "# image " + std::to_string(frames.front().intrinsics.width) + " " +
                std::to_string(frames.front().intrinsics.height) + "\n";
    text += "# frame qw qx qy qz tx ty tz f cx cy\n";
    for (const auto& f : frames) {
        Eigen::Quaterniond q(f.world_from_camera.rotation());
        q.normalize();
        if (q.w() < 0.0) q.coeffs() = -q.coeffs();
        const Vec3& t = f.world_from_camera.translation();
        text += std::to_string(f.frame_index);
        for (double v : {q.w(), q.x(), q.y(), q.z(), t.x(), t.y(), t.z(), f.intrinsics.focal,
                         f.intrinsics.cx, f.intrinsics.cy})
            text += " " + format_double(v);
        text += "\n";
    }
    write_text_file(path, text);
}

// ---- annotations ----

std::vector<Annotation> load_annotations(const fs::path& path) {
    const auto lines = read_lines(path);
    std::size_t i = 0;
    expect_header(lines, i, "frame,object_id,x,y,w,h,occluded", path);
    std::vector<Annotation> out;
    std::set<std::pair<int, int>> seen;
    for (; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        if (is_comment_or_blank(lines[i])) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 7) parse_fail(path, ln, "expected 7 fields");
        Annotation a;
        a.frame = number_or_fail<int>(f[0], path, ln, "frame");
        a.object_id = number_or_fail<int>(f[1], path, ln, "object_id");
        a.box = {number_or_fail<double>(f[2], path, ln, "x"), number_or_fail<double>(f[3], path, ln, "y"),
                 number_or_fail<double>(f[4], path, ln, "w"), number_or_fail<double>(f[5], path, ln, "h")};
        a.occluded = parse_flag(f[6], path, ln, "occluded");
        if (!seen.insert({a.frame, a.object_id}).second)
            throw Error(ErrorCode::duplicate_entry, path.string() + ":" + std::to_string(ln) +
                                                        ": duplicate (frame, object_id)");
        out.push_back(a);
    }
    return out;
}

void save_annotations(const std::vector<Annotation>& annotations, const fs::path& path) {
    std::string text = "frame,object_id,x,y,w,h,occluded\n";
    for (const auto& a : annotations)
        text += std::to_string(a.frame) + "," + std::to_string(a.object_id) + "," +
                fmt_box_fields(a.box) + "," + (a.occluded ? "1" : "0") + "\n";
    write_text_file(path, text);
}

// ---- track records ----

namespace {
constexpr const char* kRecordHeader = "frame,present,x,y,w,h,confidence,occluded_flag,xw,yw,zw";
constexpr const char* kTruthHeader =
    "frame,present,x,y,w,h,occluded,visible_fraction,xw,yw,zw,vx,vy,vz";
}  // namespace

void save_track_record(const TrackRecord& record, const fs::path& path) {
    std::string text = "# object_id=" + std::to_string(record.object_id) +
                       " sequence_id=" + std::to_string(record.sequence_id) +
                       " run=" + std::to_string(record.run) + "\n";
    text += kRecordHeader;
    text += "\n";
    for (const auto& r : record.rows) {
        text += std::to_string(r.frame) + "," + (r.box ? "1" : "0") + "," + fmt_box_fields(r.box) + "," +
                format_double(r.confidence) + "," + (r.occluded ? "1" : "0") + "," +
                format_double(r.position.x()) + "," + format_double(r.position.y()) + "," +
                format_double(r.position.z()) + "\n";
    }
    write_text_file(path, text);
}

TrackRecord load_track_record(const fs::path& path) {
    const auto lines = read_lines(path);
    TrackRecord record;
    std::size_t i = 0;
    for (; i < lines.size() && is_comment_or_blank(lines[i]); ++i) {
        const std::string t = trim(lines[i]);
        if (t.empty()) continue;
        for (const auto& kv : split_ws(t.substr(1))) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "object_id") record.object_id = number_or_fail<int>(val, path, i + 1, "object_id");
            if (key == "sequence_id") record.sequence_id = number_or_fail<int>(val, path, i + 1, "sequence_id");
            if (key == "run") record.run = number_or_fail<int>(val, path, i + 1, "run");
        }
    }
    expect_header(lines, i, kRecordHeader, path);
    for (; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        if (is_comment_or_blank(lines[i])) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 11) parse_fail(path, ln, "expected 11 fields");
        TrackRecordRow row;
        row.frame = number_or_fail<int>(f[0], path, ln, "frame");
        const bool present = parse_flag(f[1], path, ln, "present");
        row.box = parse_box_fields(f, 2, present, path, ln);
        row.confidence = number_or_fail<double>(f[6], path, ln, "confidence");
        if (!(row.confidence >= 0.0 && row.confidence <= 1.0))
            parse_fail(path, ln, "confidence outside [0, 1]");
        row.occluded = parse_flag(f[7], path, ln, "occluded_flag");
        row.position = {number_or_fail<double>(f[8], path, ln, "xw"),
                        number_or_fail<double>(f[9], path, ln, "yw"),
                        number_or_fail<double>(f[10], path, ln, "zw")};
        if (!record.rows.empty() && row.frame <= record.rows.back().frame)
            throw Error(ErrorCode::ordering_error,
                        path.string() + ":" + std::to_string(ln) + ": frames must increase");
        record.rows.push_back(row);
    }
    return record;
}

void save_ground_truth(const GroundTruth& gt, const fs::path& path) {
    std::string text = kTruthHeader;
    text += "\n";
    for (const auto& g : gt.frames) {
        text += std::to_string(g.frame) + "," + (g.box ? "1" : "0") + "," + fmt_box_fields(g.box) + "," +
                (g.occluded ? "1" : "0") + "," + format_double(g.visible_fraction);
        for (int k = 0; k < 3; ++k) text += "," + format_double(g.state.position[k]);
        for (int k = 0; k < 3; ++k) text += "," + format_double(g.state.velocity[k]);
        text += "\n";
    }
    write_text_file(path, text);
}

GroundTruth load_ground_truth(const fs::path& path) {
    const auto lines = read_lines(path);
    std::size_t i = 0;
    expect_header(lines, i, kTruthHeader, path);
    GroundTruth gt;
    for (; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        if (is_comment_or_blank(lines[i])) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 14) parse_fail(path, ln, "expected 14 fields");
        GroundTruthFrame g;
        g.frame = number_or_fail<int>(f[0], path, ln, "frame");
        g.box = parse_box_fields(f, 2, parse_flag(f[1], path, ln, "present"), path, ln);
        g.occluded = parse_flag(f[6], path, ln, "occluded");
        g.visible_fraction = number_or_fail<double>(f[7], path, ln, "visible_fraction");
        for (int k = 0; k < 3; ++k) {
            g.state.position[k] = number_or_fail<double>(f[8 + k], path, ln, "position");
            g.state.velocity[k] = number_or_fail<double>(f[11 + k], path, ln, "velocity");
        }
        if (!gt.frames.empty() && g.frame <= gt.frames.back().frame)
            throw Error(ErrorCode::ordering_error,
                        path.string() + ":" + std::to_string(ln) + ": frames must increase");
        gt.frames.push_back(g);
    }
    return gt;
}

// ---- PLY ----

void save_ply(const PointCloud& cloud, const fs::path& path) {
    if (cloud.has_colors() && cloud.colors.size() != cloud.points.size())
        throw Error(ErrorCode::invalid_argument, "color count differs from point count");
    std::string text = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                       "\nproperty double x\nproperty double y\nproperty double z\n";
    if (cloud.has_colors())
        text += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    text += "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        text += format_double(p.x()) + " " + format_double(p.y()) + " " + format_double(p.z());
        if (cloud.has_colors())
            for (auto c : cloud.colors[i]) text += " " + std::to_string(static_cast<int>(c));
        text += "\n";
    }
    write_text_file(path, text);
}

PointCloud load_ply(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || trim(lines[0]) != "ply") parse_fail(path, 1, "missing 'ply' magic");
    std::size_t i = 1;
    long long count = -1;
    std::vector<std::string> props;
    bool in_vertex = false;
    for (; i < lines.size(); ++i) {
        const auto tok = split_ws(lines[i]);
        if (tok.empty()) continue;
        if (tok[0] == "end_header") {
            ++i;
            break;
        }
        if (tok[0] == "format" && (tok.size() < 2 || tok[1] != "ascii"))
            parse_fail(path, i + 1, "only ASCII PLY is supported");
        if (tok[0] == "element") {
            in_vertex = tok.size() == 3 && tok[1] == "vertex";
            if (in_vertex) count = number_or_fail<long long>(tok[2], path, i + 1, "vertex count");
            else if (count >= 0 && tok.size() == 3 && tok[2] != "0")
                parse_fail(path, i + 1, "only vertex elements are supported");
        }
        if (tok[0] == "property" && in_vertex && tok.size() >= 3) props.push_back(tok.back());
    }
    if (count < 0) parse_fail(path, i, "no vertex element");
    auto index_of = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(props.begin(), props.end(), name);
        return it == props.end() ? -1 : it - props.begin();
    };
    const std::ptrdiff_t ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
    const std::ptrdiff_t ir = index_of("red"), ig = index_of("green"), ib = index_of("blue");
    if (ix < 0 || iy < 0 || iz < 0) parse_fail(path, i, "vertex needs x, y, z");
    const bool colors = ir >= 0 && ig >= 0 && ib >= 0;

    PointCloud cloud;
    for (; i < lines.size() && static_cast<long long>(cloud.size()) < count; ++i) {
        const auto tok = split_ws(lines[i]);
        if (tok.empty()) continue;
        if (tok.size() != props.size()) parse_fail(path, i + 1, "wrong number of vertex fields");
        cloud.points.emplace_back(number_or_fail<double>(tok[ix], path, i + 1, "x"),
                                  number_or_fail<double>(tok[iy], path, i + 1, "y"),
                                  number_or_fail<double>(tok[iz], path, i + 1, "z"));
        if (colors) {
            std::array<std::uint8_t, 3> c{};
            const std::ptrdiff_t idx[3] = {ir, ig, ib};
            for (int k = 0; k < 3; ++k) {
                const int v = number_or_fail<int>(tok[idx[k]], path, i + 1, "color");
                if (v < 0 || v > 255) parse_fail(path, i + 1, "color out of range");
                c[k] = static_cast<std::uint8_t>(v);
            }
            cloud.colors.push_back(c);
        }
    }
    if (static_cast<long long>(cloud.size()) != count) parse_fail(path, i, "fewer vertices than declared");
    return cloud;
}

// ---- rasters ----

void save_depth_map(const DepthMap& map, const fs::path& path) {
    std::string buf = "DMAP";
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(map.width));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(map.height));
    put<std::int32_t>(buf, map.frame_index);
    for (float v : map.values) put<float>(buf, v);
    write_binary(path, buf);
}

DepthMap load_depth_map(const fs::path& path) {
    const std::string buf = read_binary(path);
    if (buf.size() < 16 || buf.compare(0, 4, "DMAP") != 0)
        throw Error(ErrorCode::parse_error, path.string() + ": not a DMAP file");
    std::size_t pos = 4;
    const auto w = get<std::uint32_t>(buf, pos, path);
    const auto h = get<std::uint32_t>(buf, pos, path);
    const auto frame = get<std::int32_t>(buf, pos, path);
    if (buf.size() != 16 + 4ull * w * h)
        throw Error(ErrorCode::parse_error, path.string() + ": size does not match the header");
    DepthMap map(static_cast<int>(w), static_cast<int>(h), frame);
    for (float& v : map.values) v = get<float>(buf, pos, path);
    return map;
}

void save_observation(const Observation& obs, const fs::path& path) {
    const ScoreMap& map = obs.score_map;
    std::string buf = "SMAP";
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(map.frame_index));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(map.width));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(map.height));
    for (float v : map.grid) put<float>(buf, v);
    for (double v : {obs.proposal.x, obs.proposal.y, obs.proposal.w, obs.proposal.h, obs.confidence})
        put<float>(buf, static_cast<float>(v));
    for (double v : {map.search_area.x, map.search_area.y, map.search_area.w, map.search_area.h})
        put<float>(buf, static_cast<float>(v));
    write_binary(path, buf);
}

Observation load_observation(const fs::path& path) {
    const std::string buf = read_binary(path);
    if (buf.size() < 16 || buf.compare(0, 4, "SMAP") != 0)
        throw Error(ErrorCode::parse_error, path.string() + ": not a SMAP file");
    std::size_t pos = 4;
    const auto frame = get<std::uint32_t>(buf, pos, path);
    const auto w = get<std::uint32_t>(buf, pos, path);
    const auto h = get<std::uint32_t>(buf, pos, path);
    const std::size_t base = 16 + 4ull * w * h + 20;
    const bool has_area = buf.size() == base + 16;
    if (buf.size() != base && !has_area)
        throw Error(ErrorCode::parse_error, path.string() + ": size does not match the header");
    Observation obs;
    ScoreMap& map = obs.score_map;
    map = ScoreMap(static_cast<int>(w), static_cast<int>(h),
                   BoundingBox{0.0, 0.0, static_cast<double>(w), static_cast<double>(h)},
                   static_cast<int>(frame));
    for (float& v : map.grid) v = get<float>(buf, pos, path);
    obs.proposal.x = get<float>(buf, pos, path);
    obs.proposal.y = get<float>(buf, pos, path);
    obs.proposal.w = get<float>(buf, pos, path);
    obs.proposal.h = get<float>(buf, pos, path);
    obs.confidence = get<float>(buf, pos, path);
    if (has_area) {
        map.search_area.x = get<float>(buf, pos, path);
        map.search_area.y = get<float>(buf, pos, path);
        map.search_area.w = get<float>(buf, pos, path);
        map.search_area.h = get<float>(buf, pos, path);
    }
    return obs;
}

std::string frame_file_name(int frame, const std::string& extension) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.", frame);
    return buf + extension;
}

ScoreMap crop_score_map(const ScoreMap& map, const BoundingBox& search_area) {
    const BoundingBox area = snap_to_pixels(search_area);
    const int w = static_cast<int>(area.w);
    const int h = static_cast<int>(area.h);
    ScoreMap out(w, h, area, map.frame_index);
    const int dx = static_cast<int>(std::lround(area.x - map.search_area.x));
    const int dy = static_cast<int>(std::lround(area.y - map.search_area.y));
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const int sr = r + dy;
            const int sc = c + dx;
            if (sr >= 0 && sr < map.height && sc >= 0 && sc < map.width) out.at(r, c) = map.at(sr, sc);
        }
    return out;
}

ObservationReplay::ObservationReplay(fs::path directory, int n_frames)
    : directory_(std::move(directory)), n_frames_(n_frames) {}

std::optional<Observation> ObservationReplay::observe(int frame_index, const BoundingBox& search_area) const {
    if (frame_index < 0 || frame_index >= n_frames_) return std::nullopt;
    const fs::path file = directory_ / frame_file_name(frame_index, "smap");
    if (!fs::exists(file)) return std::nullopt;
    Observation obs = load_observation(file);
    obs.score_map = crop_score_map(obs.score_map, search_area);
    obs.confidence = std::clamp(obs.confidence, 0.0, 1.0);
    return obs;
}

// ---- manifest ----

namespace {

std::map<std::string, std::pair<std::string, std::size_t>> read_key_values(const fs::path& path) {
    const auto lines = read_lines(path);
    std::map<std::string, std::pair<std::string, std::size_t>> kv;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_comment_or_blank(lines[i])) continue;
        const auto eq = lines[i].find('=');
        if (eq == std::string::npos) parse_fail(path, i + 1, "expected key=value");
        const std::string key = trim(lines[i].substr(0, eq));
        if (!kv.emplace(key, std::make_pair(trim(lines[i].substr(eq + 1)), i + 1)).second)
            throw Error(ErrorCode::duplicate_entry, path.string() + ":" + std::to_string(i + 1) +
                                                        ": duplicate key " + key);
    }
    return kv;
}

}  // namespace

SequenceManifest load_manifest(const fs::path& path) {
    const auto kv = read_key_values(path);
    const fs::path base = path.parent_path();
    SequenceManifest m;
    for (const auto& [key, entry] : kv) {
        const auto& [val, ln] = entry;
        auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
        if (key == "sequence_id") m.sequence_id = val;
        else if (key == "n_frames") m.n_frames = number_or_fail<int>(val, path, ln, key.c_str());
        else if (key == "image_width") m.image_width = number_or_fail<int>(val, path, ln, key.c_str());
        else if (key == "image_height") m.image_height = number_or_fail<int>(val, path, ln, key.c_str());
        else if (key == "fps") m.fps = number_or_fail<double>(val, path, ln, key.c_str());
        else if (key == "poses") m.poses = resolve(val);
        else if (key == "cloud") m.cloud = resolve(val);
        else if (key == "depth_dir") m.depth_dir = resolve(val);
        else if (key == "annotations") m.annotations = resolve(val);
        else if (key == "score_map_dir") m.score_map_dir = resolve(val);
        else parse_fail(path, ln, "unknown key " + key);
    }
    for (const char* required : {"n_frames", "poses", "annotations"})
        if (!kv.count(required)) parse_fail(path, 0, std::string("missing key ") + required);
    return m;
}

void save_manifest(const SequenceManifest& m, const fs::path& path) {
    const fs::path base = path.parent_path();
    auto rel = [&](const fs::path& p) {
        if (p.empty()) return std::string();
        return p.lexically_relative(base).generic_string();
    };
    std::string text = "sequence_id=" + m.sequence_id + "\n";
    text += "n_frames=" + std::to_string(m.n_frames) + "\n";
    text += "image_width=" + std::to_string(m.image_width) + "\n";
    text += "image_height=" + std::to_string(m.image_height) + "\n";
    text += "fps=" + format_double(m.fps) + "\n";
    text += "poses=" + rel(m.poses) + "\n";
    if (!m.cloud.empty()) text += "cloud=" + rel(m.cloud) + "\n";
    if (!m.depth_dir.empty()) text += "depth_dir=" + rel(m.depth_dir) + "\n";
    text += "annotations=" + rel(m.annotations) + "\n";
    if (!m.score_map_dir.empty()) text += "score_map_dir=" + rel(m.score_map_dir) + "\n";
    write_text_file(path, text);
}

ManifestStats validate_manifest(const SequenceManifest& m) {
    auto require = [](const fs::path& p, const char* what) {
        if (p.empty() || !fs::exists(p))
            throw Error(ErrorCode::io_error, std::string(what) + " not found: " + p.string());
    };
    auto mismatch = [](const std::string& what) { throw Error(ErrorCode::parse_error, what); };
    if (m.n_frames <= 0) mismatch("manifest n_frames must be positive");

    ManifestStats stats;
    require(m.poses, "poses");
    const auto poses = load_poses(m.poses);
    stats.pose_frames = static_cast<int>(poses.size());
    if (stats.pose_frames != m.n_frames)
        mismatch("poses hold " + std::to_string(stats.pose_frames) + " frames, manifest says " +
                 std::to_string(m.n_frames));
    for (const auto& f : poses) {
        if (f.frame_index < 0 || f.frame_index >= m.n_frames) mismatch("pose frame index out of range");
        if (m.image_width > 0 && (f.intrinsics.width != m.image_width || f.intrinsics.height != m.image_height))
            mismatch("pose resolution differs from the manifest");
    }
    if (!m.cloud.empty()) require(m.cloud, "cloud");
    if (!m.depth_dir.empty()) {
        require(m.depth_dir, "depth_dir");
        for (int t = 0; t < m.n_frames; ++t) {
            const fs::path file = m.depth_dir / frame_file_name(t, "dmap");
            if (!fs::exists(file)) mismatch("depth map missing for frame " + std::to_string(t));
            ++stats.depth_maps;
        }
        for (const auto& entry : fs::directory_iterator(m.depth_dir))
            if (entry.path().extension() == ".dmap") {
                const std::string stem = entry.path().stem().string();
                const auto idx = parse_number<int>(stem.size() > 6 ? stem.substr(6) : std::string());
                if (!idx || *idx >= m.n_frames) mismatch("depth map beyond n_frames: " + entry.path().string());
            }
    }
    require(m.annotations, "annotations");
    std::set<int> frames, ids;
    for (const auto& a : load_annotations(m.annotations)) {
        if (a.frame < 0 || a.frame >= m.n_frames)
            mismatch("annotation frame " + std::to_string(a.frame) + " outside the sequence");
        frames.insert(a.frame);
        ids.insert(a.object_id);
    }
    stats.annotated_frames = static_cast<int>(frames.size());
    stats.object_ids = static_cast<int>(ids.size());
    if (!m.score_map_dir.empty()) require(m.score_map_dir, "score_map_dir");
    return stats;
}

// ---- COLMAP text export ----

ColmapScene load_colmap_text(const fs::path& dir, std::vector<std::string>* warnings) {
    struct Camera {
        Intrinsics in;
    };
    std::map<long long, Camera> cameras;
    {
        const fs::path path = dir / "cameras.txt";
        const auto lines = read_lines(path);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (is_comment_or_blank(lines[i])) continue;
            const auto tok = split_ws(lines[i]);
            if (tok.size() < 5) parse_fail(path, i + 1, "short camera line");
            const auto id = number_or_fail<long long>(tok[0], path, i + 1, "camera id");
            const std::string& model = tok[1];
            Camera cam;
            cam.in.width = number_or_fail<int>(tok[2], path, i + 1, "width");
            cam.in.height = number_or_fail<int>(tok[3], path, i + 1, "height");
            std::vector<double> params;
            for (std::size_t k = 4; k < tok.size(); ++k)
                params.push_back(number_or_fail<double>(tok[k], path, i + 1, "parameter"));
            if ((model == "SIMPLE_PINHOLE" && params.size() == 3) ||
                (model == "SIMPLE_RADIAL" && params.size() == 4)) {
                cam.in.focal = params[0];
                cam.in.cx = params[1];
                cam.in.cy = params[2];
            } else if (model == "PINHOLE" && params.size() == 4) {
                cam.in.focal = params[0];
                cam.in.cx = params[2];
                cam.in.cy = params[3];
                if (params[0] != params[1] && warnings)
                    warnings->push_back("camera " + tok[0] + ": fx != fy, using fx");
            } else {
                parse_fail(path, i + 1, "unsupported camera model " + model);
            }
            cameras[id] = cam;
        }
    }

    ColmapScene scene;
    {
        const fs::path path = dir / "images.txt";
        const auto lines = read_lines(path);
        std::vector<std::pair<std::string, CameraFrame>> images;
        bool expect_points = false;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (trim(lines[i]).rfind('#', 0) == 0) continue;
            if (expect_points) {
                expect_points = false;
                continue;
            }
            if (trim(lines[i]).empty()) continue;
            const auto tok = split_ws(lines[i]);
            if (tok.size() < 10) parse_fail(path, i + 1, "short image line");
            double v[7];
            for (int k = 0; k < 7; ++k) v[k] = number_or_fail<double>(tok[k + 1], path, i + 1, "pose");
            const auto cam_id = number_or_fail<long long>(tok[8], path, i + 1, "camera id");
            const auto it = cameras.find(cam_id);
            if (it == cameras.end()) parse_fail(path, i + 1, "unknown camera id");
            Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
            q.normalize();
            // COLMAP stores camera-from-world
            const RigidTransform cam_from_world(q.toRotationMatrix(), Vec3(v[4], v[5], v[6]));
            CameraFrame f;
            f.intrinsics = it->second.in;
            f.world_from_camera = cam_from_world.inverse();
            images.emplace_back(tok[9], f);
            expect_points = true;
        }
        std::stable_sort(images.begin(), images.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 0; k < images.size(); ++k) {
            images[k].second.frame_index = static_cast<int>(k);
            scene.frames.push_back(images[k].second);
        }
    }
    {
        const fs::path path = dir / "points3D.txt";
        const auto lines = read_lines(path);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (is_comment_or_blank(lines[i])) continue;
            const auto tok = split_ws(lines[i]);
            if (tok.size() < 8) parse_fail(path, i + 1, "short point line");
            scene.cloud.points.emplace_back(number_or_fail<double>(tok[1], path, i + 1, "x"),
                                            number_or_fail<double>(tok[2], path, i + 1, "y"),
                                            number_or_fail<double>(tok[3], path, i + 1, "z"));
            std::array<std::uint8_t, 3> c{};
            for (int k = 0; k < 3; ++k)
                c[k] = static_cast<std::uint8_t>(
                    std::clamp(number_or_fail<int>(tok[4 + k], path, i + 1, "color"), 0, 255));
            scene.cloud.colors.push_back(c);
        }
    }
    return scene;
}

}  // namespace groundtrack
