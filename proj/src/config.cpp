#include "groundtrack/config.hpp"

#include "groundtrack/error.hpp"
#include "groundtrack/io.hpp"

#include <charconv>
#include <functional>
#include <sstream>

namespace groundtrack {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw Error(ErrorCode::parse_error, "bad value for " + key + ": '" + value + "'");
}

template <typename T>
T parse_as(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, value);
    return out;
}

template <typename T>
std::pair<T, T> parse_pair(const std::string& key, const std::string& value) {
    const auto comma = value.find(',');
    if (comma == std::string::npos) bad_value(key, value);
    return {parse_as<T>(key, value.substr(0, comma)), parse_as<T>(key, value.substr(comma + 1))};
}

std::vector<OcclusionWindow> parse_windows(const std::string& key, const std::string& value) {
    std::vector<OcclusionWindow> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto dash = item.find('-');
        if (dash == std::string::npos) bad_value(key, value);
        out.push_back({parse_as<int>(key, item.substr(0, dash)), parse_as<int>(key, item.substr(dash + 1))});
    }
    return out;
}

std::string fmt(double v) { return format_double(v); }

template <typename T>
std::string fmt_pair(const std::pair<T, T>& p) {
    if constexpr (std::is_floating_point_v<T>) return fmt(p.first) + "," + fmt(p.second);
    else return std::to_string(p.first) + "," + std::to_string(p.second);
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    std::size_t ln = 0;
    while (std::getline(ss, line)) {
        ++ln;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::parse_error, origin + ":" + std::to_string(ln) + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty())
            throw Error(ErrorCode::parse_error, origin + ":" + std::to_string(ln) + ": empty key");
        if (!kv.emplace(key, trim(t.substr(eq + 1))).second)
            throw Error(ErrorCode::duplicate_entry,
                        origin + ":" + std::to_string(ln) + ": duplicate key " + key);
    }
    return kv;
}

RunConfig apply_key_values(const KeyValues& kv, RunConfig cfg) {
    ScenarioConfig& s = cfg.scenario;
    TrackerConfig& t = cfg.tracker;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"seed", [&](auto& k, auto& v) { cfg.seed = parse_as<std::uint64_t>(k, v); }},
        {"n_scenarios", [&](auto& k, auto& v) { cfg.n_scenarios = parse_as<int>(k, v); }},
        {"runs", [&](auto& k, auto& v) { cfg.runs = parse_as<int>(k, v); }},
        // scenario
        {"n_frames", [&](auto& k, auto& v) { s.n_frames = parse_as<int>(k, v); }},
        {"image_width", [&](auto& k, auto& v) { s.image_width = parse_as<int>(k, v); }},
        {"image_height", [&](auto& k, auto& v) { s.image_height = parse_as<int>(k, v); }},
        {"focal", [&](auto& k, auto& v) { s.focal = parse_as<double>(k, v); }},
        {"altitude_range", [&](auto& k, auto& v) { s.altitude_range = parse_pair<double>(k, v); }},
        {"pitch_range_deg", [&](auto& k, auto& v) { s.pitch_range_deg = parse_pair<double>(k, v); }},
        {"object_speed_range", [&](auto& k, auto& v) { s.object_speed_range = parse_pair<double>(k, v); }},
        {"stop_and_go", [&](auto& k, auto& v) { s.stop_and_go = parse_as<double>(k, v); }},
        {"object_extent", [&](auto& k, auto& v) { s.object_extent = parse_as<double>(k, v); }},
        {"n_distractors", [&](auto& k, auto& v) { s.n_distractors = parse_as<int>(k, v); }},
        {"distractor_gain", [&](auto& k, auto& v) { s.distractor_gain = parse_as<double>(k, v); }},
        {"distractor_offset", [&](auto& k, auto& v) { s.distractor_offset = parse_as<double>(k, v); }},
        {"occlusion_windows", [&](auto& k, auto& v) { s.occlusion_windows = parse_windows(k, v); }},
        {"n_random_occlusions", [&](auto& k, auto& v) { s.n_random_occlusions = parse_as<int>(k, v); }},
        {"occlusion_length_range", [&](auto& k, auto& v) { s.occlusion_length_range = parse_pair<int>(k, v); }},
        {"canopy_height", [&](auto& k, auto& v) { s.canopy_height = parse_pair<double>(k, v); }},
        {"camera_speed", [&](auto& k, auto& v) { s.camera_speed = parse_as<double>(k, v); }},
        {"camera_segment_frames", [&](auto& k, auto& v) { s.camera_segment_frames = parse_as<int>(k, v); }},
        {"camera_motion_start", [&](auto& k, auto& v) { s.camera_motion_start = parse_as<int>(k, v); }},
        {"peak_sigma_frac", [&](auto& k, auto& v) { s.peak_sigma_frac = parse_as<double>(k, v); }},
        {"score_noise", [&](auto& k, auto& v) { s.score_noise = parse_as<double>(k, v); }},
        {"score_background", [&](auto& k, auto& v) { s.score_background = parse_as<double>(k, v); }},
        {"ground_points", [&](auto& k, auto& v) { s.ground_points = parse_as<int>(k, v); }},
        {"splat_radius", [&](auto& k, auto& v) { s.splat_radius = parse_as<double>(k, v); }},
        // tracker
        {"variant", [&](auto&, auto& v) { t.variant = parse_variant(v); }},
        {"n_particles", [&](auto& k, auto& v) { t.n_particles = parse_as<std::size_t>(k, v); }},
        {"search_scale", [&](auto& k, auto& v) { t.search_scale = parse_as<double>(k, v); }},
        {"resample_ess_fraction", [&](auto& k, auto& v) { t.resample_ess_fraction = parse_as<double>(k, v); }},
        {"redistribute_fraction", [&](auto& k, auto& v) { t.redistribute_fraction = parse_as<double>(k, v); }},
        {"depth_tol", [&](auto& k, auto& v) { t.depth_tol = parse_as<double>(k, v); }},
        {"link_radius_frac", [&](auto& k, auto& v) { t.link_radius_frac = parse_as<double>(k, v); }},
        {"flatness_ratio", [&](auto& k, auto& v) { t.flatness_ratio = parse_as<double>(k, v); }},
        {"visibility_threshold", [&](auto& k, auto& v) { t.visibility_threshold = parse_as<double>(k, v); }},
        {"reappear_threshold", [&](auto& k, auto& v) { t.reappear_threshold = parse_as<double>(k, v); }},
        {"reappear_radius_frac", [&](auto& k, auto& v) { t.reappear_radius_frac = parse_as<double>(k, v); }},
        {"occluded_particle_fraction",
         [&](auto& k, auto& v) { t.occluded_particle_fraction = parse_as<double>(k, v); }},
        {"noise_sigma_pos", [&](auto& k, auto& v) { t.noise_sigma_pos = parse_as<double>(k, v); }},
        {"noise_sigma_vel", [&](auto& k, auto& v) { t.noise_sigma_vel = parse_as<double>(k, v); }},
        {"noise_pos_frac", [&](auto& k, auto& v) { t.noise_pos_frac = parse_as<double>(k, v); }},
        {"noise_vel_ratio", [&](auto& k, auto& v) { t.noise_vel_ratio = parse_as<double>(k, v); }},
        {"dt", [&](auto& k, auto& v) { t.dt = parse_as<double>(k, v); }},
        {"anchor",
         [&](auto& k, auto& v) {
             if (v == "center") t.anchor = BoxAnchor::center;
             else if (v == "bottom_center") t.anchor = BoxAnchor::bottom_center;
             else bad_value(k, v);
         }},
        // evaluation
        {"precision_mode",
         [&](auto& k, auto& v) {
             if (v == "both_present") cfg.eval.precision = PrecisionMode::both_present;
             else if (v == "long_term") cfg.eval.precision = PrecisionMode::long_term;
             else bad_value(k, v);
         }},
        {"visible_cutoff", [&](auto& k, auto& v) { cfg.eval.visible_cutoff = parse_as<double>(k, v); }},
    };
    for (const auto& [key, value] : kv) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw Error(ErrorCode::parse_error, "unknown config key " + key);
        try {
            it->second(key, value);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::parse_error) throw;
            throw Error(ErrorCode::parse_error, e.what());
        }
    }
    if (t.n_particles == 0) throw Error(ErrorCode::parse_error, "n_particles must be positive");
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    return apply_key_values(parse_key_values(read_text_file(path), path.string()), std::move(base));
}

std::string to_key_values(const RunConfig& cfg) {
    const ScenarioConfig& s = cfg.scenario;
    const TrackerConfig& t = cfg.tracker;
    std::string windows;
    for (const auto& w : s.occlusion_windows) {
        if (!windows.empty()) windows += ";";
        windows += std::to_string(w.first) + "-" + std::to_string(w.last);
    }
    std::string out;
    auto line = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
    line("seed", std::to_string(cfg.seed));
    line("n_scenarios", std::to_string(cfg.n_scenarios));
    line("runs", std::to_string(cfg.runs));
    line("n_frames", std::to_string(s.n_frames));
    line("image_width", std::to_string(s.image_width));
    line("image_height", std::to_string(s.image_height));
    line("focal", fmt(s.focal));
    line("altitude_range", fmt_pair(s.altitude_range));
    line("pitch_range_deg", fmt_pair(s.pitch_range_deg));
    line("object_speed_range", fmt_pair(s.object_speed_range));
    line("stop_and_go", fmt(s.stop_and_go));
    line("object_extent", fmt(s.object_extent));
    line("n_distractors", std::to_string(s.n_distractors));
    line("distractor_gain", fmt(s.distractor_gain));
    line("distractor_offset", fmt(s.distractor_offset));
    line("occlusion_windows", windows);
    line("n_random_occlusions", std::to_string(s.n_random_occlusions));
    line("occlusion_length_range", fmt_pair(s.occlusion_length_range));
    line("canopy_height", fmt_pair(s.canopy_height));
    line("camera_speed", fmt(s.camera_speed));
    line("camera_segment_frames", std::to_string(s.camera_segment_frames));
    line("camera_motion_start", std::to_string(s.camera_motion_start));
    line("peak_sigma_frac", fmt(s.peak_sigma_frac));
    line("score_noise", fmt(s.score_noise));
    line("score_background", fmt(s.score_background));
    line("ground_points", std::to_string(s.ground_points));
    line("splat_radius", fmt(s.splat_radius));
    line("variant", to_string(t.variant));
    line("n_particles", std::to_string(t.n_particles));
    line("search_scale", fmt(t.search_scale));
    line("resample_ess_fraction", fmt(t.resample_ess_fraction));
    line("redistribute_fraction", fmt(t.redistribute_fraction));
    line("depth_tol", fmt(t.depth_tol));
    line("link_radius_frac", fmt(t.link_radius_frac));
    line("flatness_ratio", fmt(t.flatness_ratio));
    line("visibility_threshold", fmt(t.visibility_threshold));
    line("reappear_threshold", fmt(t.reappear_threshold));
    line("reappear_radius_frac", fmt(t.reappear_radius_frac));
    line("occluded_particle_fraction", fmt(t.occluded_particle_fraction));
    line("noise_sigma_pos", fmt(t.noise_sigma_pos));
    line("noise_sigma_vel", fmt(t.noise_sigma_vel));
    line("noise_pos_frac", fmt(t.noise_pos_frac));
    line("noise_vel_ratio", fmt(t.noise_vel_ratio));
    line("dt", fmt(t.dt));
    line("anchor", t.anchor == BoxAnchor::center ? "center" : "bottom_center");
    line("precision_mode", cfg.eval.precision == PrecisionMode::both_present ? "both_present" : "long_term");
    line("visible_cutoff", fmt(cfg.eval.visible_cutoff));
    return out;
}

}  // namespace groundtrack
