#include "groundtrack/cli.hpp"

#include "groundtrack/config.hpp"
#include "groundtrack/error.hpp"
#include "groundtrack/evaluation.hpp"
#include "groundtrack/io.hpp"
#include "groundtrack/scene.hpp"
#include "groundtrack/simulator.hpp"
#include "groundtrack/tracker.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace groundtrack {

namespace {

using nlohmann::json;

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::optional<int> runs;
    std::string out = "out";
};

RunConfig effective_config(const GlobalOptions& g) {
    RunConfig cfg;
    if (!g.config.empty()) cfg = load_run_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    if (g.runs) cfg.runs = *g.runs;
    if (cfg.runs < 1) throw Error(ErrorCode::invalid_argument, "--runs must be at least 1");
    return cfg;
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string record_name(TrackerVariant v, int object_id, int run) {
    return "track_" + std::string(to_string(v)) + "_obj" + std::to_string(object_id) + "_run" +
           std::to_string(run) + ".csv";
}

// ---- simulate ----

int run_simulate(const GlobalOptions& g, bool with_observations, std::ostream& out) {
    const RunConfig cfg = effective_config(g);
    const fs::path dir = g.out;
    const Scenario s = generate_scenario(cfg.scenario, cfg.seed);
    const GroundTruth gt = render_ground_truth(s, s.object_extent);

    write_text_file(dir / "config.txt", to_key_values(cfg));
    save_poses(s.camera_path, dir / "poses.txt");
    save_ply(s.cloud, dir / "cloud.ply");
    save_ground_truth(gt, dir / "ground_truth.csv");
    std::vector<Annotation> annotations;
    for (const auto& f : gt.frames)
        if (f.box) annotations.push_back({f.frame, 0, *f.box, f.occluded});
    save_annotations(annotations, dir / "annotations.csv");
    for (int t = 0; t < s.n_frames; ++t)
        save_depth_map(render_scenario_depth(s, t), dir / "depth" / frame_file_name(t, "dmap"));

    SequenceManifest m;
    m.sequence_id = "synthetic_" + std::to_string(cfg.seed);
    m.n_frames = s.n_frames;
    m.image_width = cfg.scenario.image_width;
    m.image_height = cfg.scenario.image_height;
    m.poses = dir / "poses.txt";
    m.cloud = dir / "cloud.ply";
    m.depth_dir = dir / "depth";
    m.annotations = dir / "annotations.csv";
    if (with_observations) {
        const SyntheticProvider provider(s, mix_seed(cfg.seed, 2));
        const BoundingBox full{0.0, 0.0, static_cast<double>(cfg.scenario.image_width),
                               static_cast<double>(cfg.scenario.image_height)};
        for (int t = 0; t < s.n_frames; ++t)
            save_observation(*provider.observe(t, full), dir / "observations" / frame_file_name(t, "smap"));
        m.score_map_dir = dir / "observations";
    }
    save_manifest(m, dir / "manifest.txt");
    out << "simulated " << s.n_frames << " frames, " << s.occluders.size() << " occluder(s), "
        << s.distractor_trajectories.size() << " distractor(s) -> " << dir.string() << "\n";
    return 0;
}

// ---- track ----

std::vector<FrameContext> contexts_from_manifest(const SequenceManifest& m, std::vector<CameraFrame>& frames,
                                                 std::ostream& err) {
    std::vector<std::string> warnings;
    frames = load_poses(m.poses, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    if (m.cloud.empty()) throw Error(ErrorCode::io_error, "manifest has no cloud for the ground plane");
    const PointCloud cloud = load_ply(m.cloud);
    const ConditionedScene scene = condition_scene(cloud, frames, ConditioningParams{});
    std::vector<FrameContext> contexts;
    for (const auto& f : frames) {
        FrameContext ctx;
        ctx.frame = f;
        ctx.plane = scene.plane;
        if (!m.depth_dir.empty()) {
            DepthMap d = load_depth_map(m.depth_dir / frame_file_name(f.frame_index, "dmap"));
            if (d.width != f.intrinsics.width || d.height != f.intrinsics.height)
                throw Error(ErrorCode::parse_error, "depth map resolution differs from the camera");
            ctx.depth_map = std::make_shared<const DepthMap>(std::move(d));
        } else {
            ctx.depth_map = std::make_shared<const DepthMap>(render_depth_map(scene.cloud, scene.plane, f));
        }
        contexts.push_back(std::move(ctx));
    }
    return contexts;
}

int run_track(const GlobalOptions& g, const std::string& variant_name, const std::string& manifest_path,
              std::optional<int> object, std::ostream& out, std::ostream& err) {
    RunConfig cfg = effective_config(g);
    cfg.tracker.variant = parse_variant(variant_name);
    const fs::path dir = g.out;
    std::vector<std::pair<std::string, TrackRecord>> records(static_cast<std::size_t>(cfg.runs));

    if (manifest_path.empty()) {
        const Scenario s = generate_scenario(cfg.scenario, cfg.seed);
        const auto contexts = build_frame_contexts(s);
        const GroundTruth gt = render_ground_truth(s, s.object_extent);
        save_ground_truth(gt, dir / "ground_truth.csv");
#pragma omp parallel for schedule(dynamic, 1)
        for (int r = 0; r < cfg.runs; ++r) {
            TrackRecord rec = run_episode(s, contexts, gt, cfg.tracker, mix_seed(cfg.seed, r));
            rec.run = r;
            records[r] = {record_name(cfg.tracker.variant, 0, r), std::move(rec)};
        }
    } else {
        const SequenceManifest m = load_manifest(manifest_path);
        validate_manifest(m);
        if (m.score_map_dir.empty())
            throw Error(ErrorCode::io_error, "manifest has no score_map_dir to replay observations from");
        const auto annotations = load_annotations(m.annotations);
        if (annotations.empty()) throw Error(ErrorCode::parse_error, "no annotations to initialize from");
        int id = annotations.front().object_id;
        if (object) {
            id = *object;
        } else {
            for (const auto& a : annotations) id = std::min(id, a.object_id);
        }
        const Annotation* first = nullptr;
        for (const auto& a : annotations)
            if (a.object_id == id && (!first || a.frame < first->frame)) first = &a;
        if (!first) throw Error(ErrorCode::invalid_argument, "object " + std::to_string(id) + " not annotated");

        std::vector<CameraFrame> frames;
        auto contexts = contexts_from_manifest(m, frames, err);
        const auto start = std::find_if(contexts.begin(), contexts.end(),
                                        [&](const FrameContext& c) { return c.frame.frame_index == first->frame; });
        if (start == contexts.end()) throw Error(ErrorCode::parse_error, "no pose for the first annotated frame");
        contexts.erase(contexts.begin(), start);
        const ObservationReplay provider(m.score_map_dir, m.n_frames);
#pragma omp parallel for schedule(dynamic, 1)
        for (int r = 0; r < cfg.runs; ++r) {
            TrackerConfig tc = cfg.tracker;
            tc.seed = mix_seed(cfg.seed, r);
            TrackRecord rec = make_record(run_tracker(contexts, first->box, provider, tc), id, r);
            records[r] = {record_name(cfg.tracker.variant, id, r), std::move(rec)};
        }
    }
    for (const auto& [name, rec] : records) save_track_record(rec, dir / name);
    out << "wrote " << records.size() << " track record(s) to " << dir.string() << "\n";
    return 0;
}

// ---- eval ----

GroundTruth truth_from_annotations(const std::vector<Annotation>& annotations, int object_id) {
    GroundTruth gt;
    for (const auto& a : annotations) {
        if (a.object_id != object_id) continue;
        GroundTruthFrame f;
        f.frame = a.frame;
        f.box = a.box;
        f.occluded = a.occluded;
        f.visible_fraction = a.occluded ? 0.0 : 1.0;
        gt.frames.push_back(f);
    }
    std::sort(gt.frames.begin(), gt.frames.end(),
              [](const GroundTruthFrame& a, const GroundTruthFrame& b) { return a.frame < b.frame; });
    return gt;
}

int run_eval(const GlobalOptions& g, const std::vector<std::string>& files, const std::string& gt_path,
             const std::string& annotations_path, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = effective_config(g);
    if (gt_path.empty() == annotations_path.empty())
        throw Error(ErrorCode::invalid_argument, "eval needs exactly one of --gt or --annotations");
    std::optional<GroundTruth> shared_gt;
    std::vector<Annotation> annotations;
    if (!gt_path.empty()) shared_gt = load_ground_truth(gt_path);
    else annotations = load_annotations(annotations_path);

    json report;
    report["precision_mode"] = cfg.eval.precision == PrecisionMode::both_present ? "both_present" : "long_term";
    report["visible_cutoff"] = cfg.eval.visible_cutoff;
    report["records"] = json::array();
    std::string curves = "file,threshold,precision,recall,f1\n";
    std::map<int, std::map<int, double>> by_object;
    for (const auto& file : files) {
        const TrackRecord rec = load_track_record(file);
        const GroundTruth gt = shared_gt ? *shared_gt : truth_from_annotations(annotations, rec.object_id);
        const MetricCurve curve = metric_curve(rec, gt, cfg.eval);
        const MetricCurve zero = metric_curve_at(rec, gt, {0.0}, cfg.eval);
        json r;
        r["file"] = fs::path(file).filename().string();
        r["object_id"] = rec.object_id;
        r["run"] = rec.run;
        r["f_max"] = curve.f_max;
        r["at_zero"] = {{"precision", zero.precision[0]}, {"recall", zero.recall[0]}, {"f1", zero.f1[0]}};
        report["records"].push_back(r);
        for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
            curves += r["file"].get<std::string>() + "," + format_double(curve.thresholds[i]) + "," +
                      format_double(curve.precision[i]) + "," + format_double(curve.recall[i]) + "," +
                      format_double(curve.f1[i]) + "\n";
        if (!by_object[rec.object_id].emplace(rec.run, curve.f_max).second)
            throw Error(ErrorCode::duplicate_entry, "duplicate (object, run) in " + file);
    }
    FmaxGrid grid;
    for (const auto& [id, runs] : by_object)
        for (const auto& [run, f] : runs) grid[id].push_back(f);
    try {
        const FinalScore score = final_f1(grid);
        report["f_final"] = score.f_final;
        report["std"] = score.std;
        out << "f_final " << format_double(score.f_final) << " std " << format_double(score.std) << "\n";
    } catch (const Error& e) {
        report["f_final"] = nullptr;
        report["std"] = nullptr;
        err << "warning: " << e.what() << "\n";
    }
    write_json(fs::path(g.out) / "report.json", report);
    write_text_file(fs::path(g.out) / "curves.csv", curves);
    return 0;
}

// ---- report ----

struct Raster {
    int width, height;
    std::vector<std::array<std::uint8_t, 3>> pixels;
    Raster(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, {255, 255, 255}) {}
    void set(int x, int y, std::array<std::uint8_t, 3> c) {
        if (x >= 0 && y >= 0 && x < width && y < height) pixels[static_cast<std::size_t>(y) * width + x] = c;
    }
    void line(int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> c) {
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int e = dx + dy;
        for (;;) {
            set(x0, y0, c);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * e;
            if (e2 >= dy) { e += dy; x0 += sx; }
            if (e2 <= dx) { e += dx; y0 += sy; }
        }
    }
    void dot(int x, int y, std::array<std::uint8_t, 3> c) {
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) set(x + dx, y + dy, c);
    }
    std::string ppm() const {
        std::string s = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
        for (const auto& p : pixels) s.append(reinterpret_cast<const char*>(p.data()), 3);
        return s;
    }
};

std::string pgm(const std::vector<double>& values, int width, int height) {
    std::string s = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    for (double v : values) s.push_back(static_cast<char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
    return s;
}

/// Top-down plot of the ground positions (x right, y up) of a track against the ground truth.
std::string trajectory_plot(const TrackRecord& rec, const GroundTruth* gt) {
    constexpr int kSize = 512;
    constexpr int kMargin = 24;
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    auto grow = [&](const Vec3& p) {
        x0 = std::min(x0, p.x());
        y0 = std::min(y0, p.y());
        x1 = std::max(x1, p.x());
        y1 = std::max(y1, p.y());
    };
    for (const auto& r : rec.rows) grow(r.position);
    if (gt)
        for (const auto& f : gt->frames) grow(f.state.position);
    const double span = std::max({x1 - x0, y1 - y0, 1e-9});
    auto to_px = [&](const Vec3& p) {
        const double s = (kSize - 2 * kMargin) / span;
        return std::pair<int, int>{kMargin + static_cast<int>(std::lround((p.x() - x0) * s)),
                                   kSize - kMargin - static_cast<int>(std::lround((p.y() - y0) * s))};
    };
    Raster img(kSize, kSize);
    if (gt) {
        for (std::size_t i = 1; i < gt->frames.size(); ++i) {
            const auto [ax, ay] = to_px(gt->frames[i - 1].state.position);
            const auto [bx, by] = to_px(gt->frames[i].state.position);
            img.line(ax, ay, bx, by, {0, 150, 0});
        }
    }
    for (const auto& r : rec.rows) {
        const auto [x, y] = to_px(r.position);
        img.dot(x, y, r.occluded ? std::array<std::uint8_t, 3>{30, 60, 220} : std::array<std::uint8_t, 3>{210, 30, 30});
    }
    return img.ppm();
}

int run_report(const GlobalOptions& g, const std::vector<std::string>& files, const std::string& gt_path,
               int width, int height, std::ostream& out) {
    const fs::path dir = g.out;
    std::optional<GroundTruth> gt;
    if (!gt_path.empty()) gt = load_ground_truth(gt_path);
    std::vector<CoverageBox> boxes;
    int n_frames = 0;
    std::set<std::string> stems;
    for (const auto& file : files) {
        const TrackRecord rec = load_track_record(file);
        std::string stem = fs::path(file).stem().string();
        while (!stems.insert(stem).second) stem += "_";
        write_text_file(dir / ("trajectory_" + stem + ".ppm"), trajectory_plot(rec, gt ? &*gt : nullptr));
        for (const auto& r : rec.rows) {
            if (r.box) boxes.push_back({r.frame, *r.box});
            n_frames = std::max(n_frames, r.frame + 1);
        }
    }
    if (n_frames > 0)
        write_text_file(dir / "bbox_distribution.pgm",
                        pgm(bbox_distribution(boxes, width, height, n_frames), width, height));
    if (gt) {
        std::vector<CoverageBox> gt_boxes;
        for (const auto& f : gt->frames)
            if (f.box) gt_boxes.push_back({f.frame, *f.box});
        if (!gt->frames.empty())
            write_text_file(dir / "bbox_distribution_gt.pgm",
                            pgm(bbox_distribution(gt_boxes, width, height, gt->frames.back().frame + 1),
                                width, height));
    }
    out << "wrote report images for " << files.size() << " record(s) to " << dir.string() << "\n";
    return 0;
}

// ---- bench ----

int run_bench(const GlobalOptions& g, std::optional<int> scenarios, std::ostream& out) {
    RunConfig cfg = effective_config(g);
    if (scenarios) cfg.n_scenarios = *scenarios;
    SuiteConfig suite;
    suite.scenario = cfg.scenario;
    suite.tracker = cfg.tracker;
    suite.eval = cfg.eval;
    suite.n_scenarios = cfg.n_scenarios;
    suite.runs = cfg.runs;
    suite.seed = cfg.seed;
    const auto results = run_suite(suite);

    json report;
    report["n_scenarios"] = suite.n_scenarios;
    report["runs"] = suite.runs;
    report["seed"] = suite.seed;
    report["variants"] = json::object();
    std::string table = "scenario,run,variant,f_max\n";
    std::map<TrackerVariant, double> f;
    for (const auto& v : results) {
        report["variants"][to_string(v.variant)] = {{"f_final", v.score.f_final}, {"std", v.score.std}};
        f[v.variant] = v.score.f_final;
        for (const auto& [scenario, runs] : v.grid)
            for (std::size_t r = 0; r < runs.size(); ++r)
                table += std::to_string(scenario) + "," + std::to_string(r) + "," + to_string(v.variant) + "," +
                         format_double(runs[r]) + "\n";
        out << to_string(v.variant) << ": f_final " << format_double(v.score.f_final) << " std "
            << format_double(v.score.std) << "\n";
    }
    if (f.size() == 3)
        report["ordering_3d_2d_ml"] = f[TrackerVariant::filter_3d] >= f[TrackerVariant::filter_2d] &&
                                      f[TrackerVariant::filter_2d] >= f[TrackerVariant::ml_baseline];
    write_text_file(fs::path(g.out) / "bench.json", report.dump(2) + "\n");
    write_text_file(fs::path(g.out) / "fmax.csv", table);
    return 0;
}

}  // namespace

int cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ground-plane particle-filter object tracking: simulation, tracking and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    std::uint64_t seed = 0;
    int runs = 5;
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
    auto* runs_opt = app.add_option("--runs", runs, "Runs per object (default 5)");
    app.add_option("--config", g.config, "key=value configuration file");
    app.add_option("--out", g.out, "Output directory");

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario and its ground truth");
    bool with_observations = false;
    simulate->add_flag("--observations", with_observations, "Also write full-image score maps");

    auto* track = app.add_subcommand("track", "Track the object of a scenario or a sequence manifest");
    std::string variant = "3d";
    std::string manifest;
    std::optional<int> object;
    track->add_option("--variant", variant, "ml, 2d or 3d")->check(CLI::IsMember({"ml", "2d", "3d"}));
    track->add_option("--manifest", manifest, "Sequence manifest (default: simulate from the config)")
        ;
    track->add_option("--object", object, "Object id in the manifest annotations");

    auto* eval = app.add_subcommand("eval", "Score track records against ground truth");
    std::vector<std::string> eval_files;
    std::string gt_path, annotations_path;
    eval->add_option("records", eval_files, "Track record files")->required();
    eval->add_option("--gt", gt_path, "Ground-truth CSV");
    eval->add_option("--annotations", annotations_path, "Annotation CSV");

    auto* report = app.add_subcommand("report", "Trajectory plots and bounding-box distribution grids");
    std::vector<std::string> report_files;
    std::string report_gt;
    int width = 640, height = 360;
    report->add_option("records", report_files, "Track record files")->required();
    report->add_option("--gt", report_gt, "Ground-truth CSV");
    report->add_option("--width", width, "Image width")->check(CLI::PositiveNumber);
    report->add_option("--height", height, "Image height")->check(CLI::PositiveNumber);

    auto* bench = app.add_subcommand("bench", "Variant comparison over the synthetic suite");
    std::optional<int> scenarios;
    bench->add_option("--scenarios", scenarios, "Number of scenarios")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }
    if (seed_opt->count() > 0) g.seed = seed;
    if (runs_opt->count() > 0) g.runs = runs;

    try {
        if (simulate->parsed()) return run_simulate(g, with_observations, out);
        if (track->parsed()) return run_track(g, variant, manifest, object, out, err);
        if (eval->parsed()) return run_eval(g, eval_files, gt_path, annotations_path, out, err);
        if (report->parsed()) return run_report(g, report_files, report_gt, width, height, out);
        if (bench->parsed()) return run_bench(g, scenarios, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::invalid_argument ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace groundtrack
