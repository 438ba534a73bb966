#include "vtcav/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

#include "vtcav/clip.hpp"
#include "vtcav/concepts.hpp"
#include "vtcav/container.hpp"
#include "vtcav/detections.hpp"
#include "vtcav/gradcam.hpp"
#include "vtcav/plots.hpp"
#include "vtcav/synthetic.hpp"
#include "vtcav/tracks.hpp"

namespace fs = std::filesystem;

namespace vtcav::cmd {

namespace {

void write_ppm(const std::string& path, const VideoClip& clip, int64_t t) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write image: " + path);
    os << "P6\n" << clip.W() << " " << clip.H() << "\n255\n";
    for (int64_t y = 0; y < clip.H(); ++y)
        for (int64_t x = 0; x < clip.W(); ++x)
            for (int c = 0; c < 3; ++c) {
                float v = std::clamp(clip.at(t, y, x, c), 0.0f, 1.0f);
                os.put(static_cast<char>(std::lround(v * 255.0f)));
            }
}

Box union_box(const std::vector<Box>& boxes) {
    Box u = boxes.front();
    for (const auto& b : boxes) {
        u.x1 = std::min(u.x1, b.x1);
        u.y1 = std::min(u.y1, b.y1);
        u.x2 = std::max(u.x2, b.x2);
        u.y2 = std::max(u.y2, b.y2);
    }
    return u;
}

void write_detections_json(const std::string& path, const std::string& video_id, int w, int h,
                           const std::vector<Box>& boxes) {
    nlohmann::json frames = nlohmann::json::array();
    const Box tube = union_box(boxes);
    for (size_t t = 0; t < boxes.size(); ++t) {
        const Box& b = boxes[t];
        nlohmann::json dets = nlohmann::json::array();
        dets.push_back({{"label", "square"},
                        {"confidence", 0.95},
                        {"bbox", {b.x1, b.y1, b.x2, b.y2}}});
        dets.push_back({{"label", "moving_square"},
                        {"confidence", 0.9},
                        {"bbox", {tube.x1, tube.y1, tube.x2, tube.y2}}});
        frames.push_back({{"frame_index", static_cast<int>(t)}, {"detections", dets}});
    }
    nlohmann::json j = {{"video_id", video_id}, {"width", w}, {"height", h}, {"frames", frames}};
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write detections: " + path);
    os << j.dump(1) << "\n";
}

Tensor extract_frame(const VideoClip& clip, int64_t t) {
    Tensor frame({clip.H(), clip.W(), 3});
    const int64_t sz = clip.H() * clip.W() * 3;
    std::copy_n(clip.frames.data.begin() + t * sz, sz, frame.data.begin());
    return frame;
}

Tensor crop_frame(const Tensor& frame, int x1, int y1, int x2, int y2) {
    const int64_t h = frame.shape[0], w = frame.shape[1];
    x1 = std::clamp(x1, 0, static_cast<int>(w));
    x2 = std::clamp(x2, 0, static_cast<int>(w));
    y1 = std::clamp(y1, 0, static_cast<int>(h));
    y2 = std::clamp(y2, 0, static_cast<int>(h));
    if (x2 <= x1 || y2 <= y1) throw std::runtime_error("zero-area crop");
    Tensor out({y2 - y1, x2 - x1, 3});
    for (int y = y1; y < y2; ++y)
        for (int x = x1; x < x2; ++x)
            for (int c = 0; c < 3; ++c)
                out.data[((y - y1) * static_cast<int64_t>(x2 - x1) + (x - x1)) * 3 + c] =
                    frame.data[(y * w + x) * 3 + c];
    return out;
}

}  // namespace

void run_synth(const SynthArgs& args) {
    if (!args.seed_set) throw std::invalid_argument("seed required (pass --seed)");
    if (args.out.empty()) throw std::invalid_argument("output directory required (pass --out)");
    if (args.n_train < 1) throw std::invalid_argument("n_train must be >= 1");

    SyntheticSpec spec;
    if (args.task == "direction_lr")
        spec.task = SyntheticTask::direction_lr;
    else if (args.task == "presence")
        spec.task = SyntheticTask::presence;
    else
        throw std::invalid_argument("unknown task: " + args.task);
    spec.T = args.T;
    spec.H = args.H;
    spec.W = args.W;
    spec.shape_size = args.shape_size;
    spec.speed = args.speed;
    spec.noise_std = args.noise_std;
    spec.n_train = args.n_train;
    spec.n_test = args.n_test;
    spec.seed = args.seed;

    SyntheticCorpus corpus = generate_synthetic_dataset(spec);

    fs::create_directories(fs::path(args.out) / "clips");
    fs::create_directories(fs::path(args.out) / "detections");

    std::vector<CorpusEntry> manifest;
    nlohmann::json boxes_json = nlohmann::json::object();
    auto emit = [&](const std::vector<SyntheticClip>& clips, const std::string& split) {
        for (const auto& sc : clips) {
            const std::string rel = "clips/" + sc.clip.clip_id + ".vtn";
            save_clip((fs::path(args.out) / rel).string(), sc.clip);
            manifest.push_back({sc.clip.clip_id, rel, sc.label, split});
            nlohmann::json jb = nlohmann::json::array();
            for (const auto& b : sc.boxes) jb.push_back({b.x1, b.y1, b.x2, b.y2});
            boxes_json[sc.clip.clip_id] = jb;
            if (!sc.boxes.empty())
                write_detections_json(
                    (fs::path(args.out) / "detections" / (sc.clip.clip_id + ".json")).string(),
                    sc.clip.clip_id, spec.W, spec.H, sc.boxes);
        }
    };
    emit(corpus.train, "train");
    emit(corpus.test, "test");
    write_corpus_manifest((fs::path(args.out) / "corpus.json").string(), manifest);

    {
        nlohmann::json classes = corpus.class_names();
        std::ofstream os((fs::path(args.out) / "classes.json").string(), std::ios::trunc);
        os << classes.dump() << "\n";
    }
    {
        std::ofstream os((fs::path(args.out) / "boxes.json").string(), std::ios::trunc);
        os << boxes_json.dump(1) << "\n";
    }

    // Mixed-content random pool: noise, leftward, rightward, and static squares.
    if (args.random_pool_size > 0) {
        fs::create_directories(fs::path(args.out) / "pool");
        std::mt19937_64 rng(args.seed + 0x9e3779b9u);
        std::vector<CorpusEntry> pool_manifest;
        for (int i = 0; i < args.random_pool_size; ++i) {
            VideoClip clip;
            clip.clip_id = "pool_" + std::to_string(i);
            clip.source = "synthetic:random_pool:seed" + std::to_string(args.seed);
            clip.frames = Tensor({spec.T, spec.H, spec.W, 3});
            const int kind = static_cast<int>(rng() % 4);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            if (kind == 0) {
                for (auto& v : clip.frames.data) v = static_cast<float>(unif(rng));
            } else {
                const int ss = spec.shape_size;
                const int travel = kind == 3 ? 0 : (spec.T - 1) * spec.speed;
                const int dir = kind == 1 ? -1 : (kind == 2 ? 1 : 0);
                std::uniform_int_distribution<int> ydist(0, spec.H - ss);
                const int y0 = ydist(rng);
                std::uniform_int_distribution<int> xdist(dir < 0 ? travel : 0,
                                                         dir > 0 ? spec.W - ss - travel
                                                                 : spec.W - ss);
                const int x0 = xdist(rng);
                std::uniform_real_distribution<double> bdist(0.6, 1.0);
                const double brightness = bdist(rng);
                std::normal_distribution<double> noise(0.0, spec.noise_std);
                for (int t = 0; t < spec.T; ++t) {
                    const int x = x0 + dir * spec.speed * t;
                    for (int yy = 0; yy < spec.H; ++yy)
                        for (int xx = 0; xx < spec.W; ++xx) {
                            const bool inside =
                                yy >= y0 && yy < y0 + ss && xx >= x && xx < x + ss;
                            double v = inside ? brightness : 0.0;
                            v = std::clamp(v + noise(rng), 0.0, 1.0);
                            for (int c = 0; c < 3; ++c)
                                clip.at(t, yy, xx, c) = static_cast<float>(v);
                        }
                }
            }
            const std::string rel = "pool/" + clip.clip_id + ".vtn";
            save_clip((fs::path(args.out) / rel).string(), clip);
            pool_manifest.push_back({clip.clip_id, rel, 0, "pool"});
        }
        write_corpus_manifest((fs::path(args.out) / "random_pool.json").string(), pool_manifest);
    }
}

double run_train(const TrainArgs& args) {
    auto manifest = read_corpus_manifest(args.corpus_manifest);
    if (manifest.empty()) throw std::runtime_error("empty corpus manifest");

    const fs::path base = fs::path(args.corpus_manifest).parent_path();
    std::vector<LabeledClip> train, test;
    int max_label = 0;
    for (const auto& e : manifest) {
        LabeledClip lc;
        lc.clip = load_clip((base / e.path).string(), e.clip_id);
        lc.label = e.label;
        max_label = std::max(max_label, e.label);
        (e.split == "test" ? test : train).push_back(std::move(lc));
    }
    if (train.empty()) throw std::runtime_error("corpus has no train split");

    ModelConfig cfg;
    const VideoClip& first = train.front().clip;
    cfg.T = static_cast<int>(first.T());
    cfg.H = static_cast<int>(first.H());
    cfg.W = static_cast<int>(first.W());
    cfg.class_names.clear();
    const fs::path classes_path = base / "classes.json";
    if (fs::exists(classes_path)) {
        std::ifstream is(classes_path);
        nlohmann::json j;
        is >> j;
        cfg.class_names = j.get<std::vector<std::string>>();
    } else {
        for (int k = 0; k <= max_label; ++k) cfg.class_names.push_back("class" + std::to_string(k));
    }

    ReferenceModel model = build_reference_model(args.seed, cfg);
    TrainReport report =
        train_reference_model(model, train, test, args.epochs, args.lr, args.seed);
    save_model(args.out_dir, model);
    std::cout << "trained " << model.model_id << ": test accuracy " << report.test_accuracy
              << " after " << report.epochs << " epochs (final loss " << report.final_train_loss
              << ")\n";
    return report.test_accuracy;
}

void run_concepts(const ConceptsArgs& args) {
    if (args.classes.empty()) throw std::invalid_argument("at least one --classes label required");
    fs::create_directories(fs::path(args.out_dir) / "clips");

    std::vector<std::string> det_files;
    for (const auto& entry : fs::directory_iterator(args.detections_dir))
        if (entry.path().extension() == ".json") det_files.push_back(entry.path().string());
    std::sort(det_files.begin(), det_files.end());

    std::map<std::string, std::vector<VideoClip>> dynamic_sets, static_sets;
    std::map<std::string, std::vector<std::string>> origins;

    for (const auto& det_path : det_files) {
        DetectionFile dets;
        try {
            dets = ingest_detections(det_path);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string(e.what()));
        }
        const fs::path video_path = fs::path(args.video_dir) / (dets.video_id + ".vtn");
        if (!fs::exists(video_path))
            throw std::runtime_error("no video clip for detections " + det_path + " (expected " +
                                     video_path.string() + ")");
        VideoClip video = load_clip(video_path.string(), dets.video_id);

        for (const auto& cls : args.classes) {
            auto tracks = build_tracks(dets.frames, cls, args.iou_threshold, args.max_gap);
            for (const auto& track : tracks) {
                if (track.length() < args.T) continue;
                VideoClip dyn =
                    build_spatiotemporal_concept(video, track, args.T, args.pad_value);
                dyn = resize_clip(dyn, args.size, args.size);
                dyn.clip_id = cls + "_dyn_" + dets.video_id + "_" + track.track_id;
                dynamic_sets[cls].push_back(std::move(dyn));
                origins[cls + "_dynamic"].push_back(track.track_id);

                const TrackBox& b0 = track.boxes.front();
                Tensor frame = extract_frame(video, b0.frame_index);
                Tensor crop = crop_frame(frame, static_cast<int>(std::floor(b0.x1)),
                                         static_cast<int>(std::floor(b0.y1)),
                                         static_cast<int>(std::ceil(b0.x2)),
                                         static_cast<int>(std::ceil(b0.y2)));
                VideoClip stat = build_spatial_concept(crop, args.T, args.size, args.size);
                stat.clip_id = cls + "_stat_" + dets.video_id + "_" + track.track_id;
                static_sets[cls].push_back(std::move(stat));
            }
        }
    }

    std::vector<ConceptManifestEntry> entries;
    auto emit_set = [&](const std::string& name, ConceptKind kind,
                        const std::vector<VideoClip>& clips) {
        if (clips.empty()) return;
        ConceptManifestEntry e;
        e.name = name;
        e.kind = kind;
        e.origin = "tracker iou>=" + std::to_string(args.iou_threshold) +
                   " max_gap=" + std::to_string(args.max_gap) + " resize=stretch";
        for (const auto& clip : clips) {
            const std::string rel = "clips/" + clip.clip_id + ".vtn";
            save_clip((fs::path(args.out_dir) / rel).string(), clip);
            e.clip_paths.push_back(rel);
        }
        entries.push_back(std::move(e));
    };
    for (const auto& cls : args.classes) {
        if (dynamic_sets.count(cls))
            emit_set(cls + "_dynamic", ConceptKind::spatiotemporal, dynamic_sets[cls]);
        if (static_sets.count(cls))
            emit_set(cls + "_static", ConceptKind::spatial, static_sets[cls]);
    }
    if (entries.empty())
        std::cerr << "warning: no concepts generated (no tracks matched the class filter)\n";
    write_concept_manifest((fs::path(args.out_dir) / "concepts.json").string(), entries);
}

ExperimentOutput run_run(const std::string& config_path) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    ExperimentOutput out = run_experiment(cfg);
    for (const auto& row : out.rows) {
        std::cout << row.variant << " " << row.result.layer << " " << row.result.concept_name << " ("
                  << row.kind << "): score " << row.result.score;
        if (row.result.p_value) std::cout << ", p " << *row.result.p_value;
        if (row.result.significant)
            std::cout << (*row.result.significant ? " significant" : " not significant");
        std::cout << "\n";
    }
    std::cout << "results: " << out.csv_path << "\n";
    return out;
}

void run_gradcam(const GradcamArgs& args) {
    ReferenceModel model = load_model(args.model_dir);
    VideoClip clip = load_clip(args.clip_path, fs::path(args.clip_path).stem().string());
    if (clip.T() != model.cfg.T)
        throw std::runtime_error("clip time length does not match model input");
    if (clip.H() != model.cfg.H || clip.W() != model.cfg.W)
        clip = resize_clip(clip, model.cfg.H, model.cfg.W);

    const int class_index = model.class_index(args.target_class);
    HeatmapVolume vol =
        compute_gradcam(model, clip, args.layer, class_index,
                        args.nearest ? UpsampleMode::nearest : UpsampleMode::trilinear);
    VideoClip overlay = overlay_heatmap(clip, vol, args.alpha);

    fs::create_directories(args.out_dir);
    for (int64_t t = 0; t < overlay.T(); ++t) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03d.ppm", static_cast<int>(t));
        write_ppm((fs::path(args.out_dir) / name).string(), overlay, t);
    }
    write_tensor_container((fs::path(args.out_dir) / "volume.vtn").string(),
                           {{"values", vol.values}, {"upsampled", vol.upsampled}});
}

void run_report(const std::string& summary_path, const std::string& out_dir) {
    std::ifstream is(summary_path);
    if (!is) throw std::runtime_error("cannot read summary: " + summary_path);
    nlohmann::json j;
    is >> j;
    fs::create_directories(out_dir);

    std::map<std::string, std::vector<BarDatum>> bars;
    std::map<std::string, std::vector<SignificanceDatum>> sig;
    for (const auto& row : j.at("results")) {
        const std::string layer = row.at("layer").get<std::string>();
        if (row.at("variant") == "relative") {
            bars[layer].push_back({row.at("concept").get<std::string>(),
                                   row.at("score").get<double>()});
        } else if (row.contains("p_value")) {
            sig[layer].push_back({row.at("concept").get<std::string>(),
                                  row.at("per_set_scores").get<std::vector<double>>(),
                                  row.at("p_value").get<double>(),
                                  row.value("significant", false)});
        }
    }
    const std::string cls = j.at("target_class").get<std::string>();
    for (const auto& [layer, data] : bars)
        write_bar_chart_svg(out_dir + "/relative_" + layer + ".svg",
                            "Relative TCAV scores, " + layer + " (class " + cls + ")", data);
    for (const auto& [layer, data] : sig)
        write_significance_svg(out_dir + "/significance_" + layer + ".svg",
                               "Random-set score distributions, " + layer, data);
}

}  // namespace vtcav::cmd
