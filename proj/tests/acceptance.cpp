// Acceptance suite: end-to-end checks on the synthetic direction task.
// Each criterion prints exactly one PASS/FAIL line; the exit code is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "vtcav/commands.hpp"
#include "vtcav/concepts.hpp"
#include "vtcav/gradcam.hpp"
#include "vtcav/tracks.hpp"

using namespace vtcav;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << number << " (" << name << "): "
              << detail << std::endl;
    if (!pass) ++g_failures;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct Ctx {
    fs::path work, data, model_dir, concepts_dir, out_dir;
    std::string config_path;
    ReferenceModel model;
    double test_accuracy = 0.0;
    std::vector<CorpusEntry> corpus;
    std::vector<ExperimentRow> rows;
    std::string results_csv;
    int right_class = 1;
};

const ExperimentRow* find_row(const Ctx& ctx, const std::string& variant,
                              const std::string& layer, const std::string& concept_name) {
    for (const auto& r : ctx.rows)
        if (r.variant == variant && r.result.layer == layer &&
            r.result.concept_name == concept_name)
            return &r;
    return nullptr;
}

Ctx setup() {
    Ctx ctx;
    ctx.work = fs::temp_directory_path() / "vtcav_acceptance";
    fs::remove_all(ctx.work);
    ctx.data = ctx.work / "data";
    ctx.model_dir = ctx.work / "model";
    ctx.concepts_dir = ctx.work / "concepts";
    ctx.out_dir = ctx.work / "results";

    cmd::SynthArgs sa;
    sa.n_train = 120;
    sa.n_test = 80;
    sa.seed = 11;
    sa.seed_set = true;
    sa.random_pool_size = 150;
    sa.out = ctx.data.string();
    cmd::run_synth(sa);
    ctx.corpus = read_corpus_manifest((ctx.data / "corpus.json").string());

    cmd::TrainArgs ta;
    ta.corpus_manifest = (ctx.data / "corpus.json").string();
    ta.out_dir = ctx.model_dir.string();
    ta.epochs = 20;
    ta.lr = 0.1;
    ta.seed = 7;
    ctx.test_accuracy = cmd::run_train(ta);
    ctx.model = load_model(ctx.model_dir.string());

    // concept material: rightward train clips only, tracked via the
    // trajectory-union "moving_square" box so the translation survives the crop
    fs::create_directories(ctx.data / "det_right");
    int copied = 0;
    for (const auto& e : ctx.corpus) {
        if (e.split != "train" || e.label != ctx.right_class || copied >= 20) continue;
        const fs::path src = ctx.data / "detections" / (e.clip_id + ".json");
        if (!fs::exists(src)) continue;
        fs::copy_file(src, ctx.data / "det_right" / (e.clip_id + ".json"));
        ++copied;
    }
    cmd::ConceptsArgs ca;
    ca.video_dir = (ctx.data / "clips").string();
    ca.detections_dir = (ctx.data / "det_right").string();
    ca.classes = {"moving_square"};
    ca.out_dir = ctx.concepts_dir.string();
    ca.T = 8;
    ca.size = 32;
    ca.iou_threshold = 0.4;
    cmd::run_concepts(ca);

    ExperimentConfig cfg;
    cfg.model_dir = ctx.model_dir.string();
    cfg.corpus_manifest = (ctx.data / "corpus.json").string();
    cfg.concept_manifest = (ctx.concepts_dir / "concepts.json").string();
    cfg.random_pool_manifest = (ctx.data / "random_pool.json").string();
    cfg.layers = {"stage2", "stage3"};
    cfg.target_class = "right";
    cfg.variant = ExperimentVariant::both;
    cfg.n_inputs = 30;
    cfg.n_random_sets = 10;
    cfg.random_set_size = 30;
    cfg.pooling = "spatial_mean";
    cfg.seed_data = 1;
    cfg.seed_cav = 2;
    cfg.seed_sampling = 3;
    cfg.cache_dir = (ctx.work / "cache").string();
    cfg.out_dir = ctx.out_dir.string();
    ctx.config_path = (ctx.work / "experiment.json").string();
    save_experiment_config(ctx.config_path, cfg);

    ExperimentOutput out = run_experiment(cfg);
    ctx.rows = out.rows;
    ctx.results_csv = out.csv_path;
    return ctx;
}

// --- criterion 1: analytic directional derivatives vs central differences ---
void criterion_gradient_oracle(const Ctx& ctx) {
    VideoClip clip;
    for (const auto& e : ctx.corpus)
        if (e.split == "test") {
            clip = load_clip((ctx.data / e.path).string(), e.clip_id);
            break;
        }
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> nd;
    const double eps = 1e-2;
    double worst = 0.0;
    for (const auto& layer : ctx.model.probe_layers()) {
        DTensor act = capture_activations(ctx.model, clip, {layer}).at(layer);
        DTensor grad = gradient_wrt_activation(ctx.model, clip, layer, ctx.right_class);
        for (int d = 0; d < 10; ++d) {
            std::vector<double> u(act.data.size());
            double norm = 0.0;
            for (auto& x : u) {
                x = nd(rng);
                norm += x * x;
            }
            norm = std::sqrt(norm);
            double analytic = 0.0;
            for (size_t i = 0; i < u.size(); ++i) {
                u[i] /= norm;
                analytic += grad.data[i] * u[i];
            }
            DTensor plus = act, minus = act;
            for (size_t i = 0; i < u.size(); ++i) {
                plus.data[i] += eps * u[i];
                minus.data[i] -= eps * u[i];
            }
            const double fd = (forward_from_activation(ctx.model, layer, plus)[ctx.right_class] -
                               forward_from_activation(ctx.model, layer, minus)[ctx.right_class]) /
                              (2.0 * eps);
            const double rel =
                std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8});
            worst = std::max(worst, rel);
        }
    }
    report(1, "gradient oracle", worst < 1e-3,
           "max relative error " + fmt(worst) + " over 3 layers x 10 directions (limit 1e-3)");
}

// --- criterion 2: dynamic concepts dominate static ones at the deepest layer ---
void criterion_dynamic_dominates(const Ctx& ctx) {
    const auto* dyn = find_row(ctx, "relative", "stage3", "moving_square_dynamic");
    const auto* stat = find_row(ctx, "relative", "stage3", "moving_square_static");
    if (!dyn || !stat) {
        report(2, "dynamic vs static", false, "missing relative rows at stage3");
        return;
    }
    const bool pass = ctx.test_accuracy >= 0.95 && dyn->result.score >= 0.8 &&
                      dyn->result.score - stat->result.score >= 0.2;
    report(2, "dynamic vs static", pass,
           "test accuracy " + fmt(ctx.test_accuracy) + " (>= 0.95), TCAV dynamic " +
               fmt(dyn->result.score) + " (>= 0.8), static " + fmt(stat->result.score) +
               ", margin " + fmt(dyn->result.score - stat->result.score) + " (>= 0.2)");
}

// shared material for criteria 3 and 4: pooled stage2 vectors
struct Stage2Data {
    std::vector<ActivationRecord> inputs;
    std::vector<std::vector<std::vector<float>>> random_vectors;
};

Stage2Data stage2_data(const Ctx& ctx) {
    Stage2Data d;
    int n = 0;
    for (const auto& e : ctx.corpus) {
        if (e.split != "test" || e.label != ctx.right_class || n >= 30) continue;
        VideoClip clip = load_clip((ctx.data / e.path).string(), e.clip_id);
        ActivationRecord rec;
        rec.clip_id = e.clip_id;
        rec.layer = "stage2";
        rec.class_index = ctx.right_class;
        rec.activation = pool_activation(capture_activations(ctx.model, clip, {"stage2"}).at("stage2"),
                                         PoolMode::spatial_mean);
        rec.gradient = pool_activation(
            gradient_wrt_activation(ctx.model, clip, "stage2", ctx.right_class),
            PoolMode::spatial_mean);
        d.inputs.push_back(std::move(rec));
        ++n;
    }

    auto pool_entries = read_corpus_manifest((ctx.data / "random_pool.json").string());
    std::vector<VideoClip> pool;
    for (const auto& e : pool_entries)
        pool.push_back(load_clip((ctx.data / e.path).string(), e.clip_id));
    auto sets = sample_random_sets(pool, 10, 30, {}, 31);
    for (const auto& s : sets) {
        std::vector<std::vector<float>> vecs;
        for (const auto& clip : s.clips)
            vecs.push_back(pool_activation(
                capture_activations(ctx.model, clip, {"stage2"}).at("stage2"),
                PoolMode::spatial_mean));
        d.random_vectors.push_back(std::move(vecs));
    }
    return d;
}

// --- criterion 3: dynamic concept significant; random-vs-random nulls are not ---
void criterion_significance(const Ctx& ctx, const Stage2Data& d) {
    const auto* dyn = find_row(ctx, "random_sets", "stage2", "moving_square_dynamic");
    const bool dyn_sig = dyn && dyn->result.significant && *dyn->result.significant;

    auto null_scores = random_vs_random_null_scores(d.random_vectors, d.inputs, kDefaultCavL2, 501);
    int quiet = 0;
    for (int rep = 0; rep < 10; ++rep) {
        // treat random set `rep` as a concept, scored against the other nine
        std::vector<std::vector<std::vector<float>>> others;
        for (int i = 0; i < 10; ++i)
            if (i != rep) others.push_back(d.random_vectors[i]);
        auto res = tcav_with_random_sets("null", d.random_vectors[rep], others, d.inputs,
                                         kDefaultCavL2, 600 + rep);
        auto sig = significance_test(res.per_random_set_scores, null_scores, 1, 0.05);
        if (sig.p_value > 0.05) ++quiet;
    }
    const bool pass = dyn_sig && quiet >= 9;
    report(3, "statistical significance", pass,
           std::string("dynamic concept corrected p ") +
               (dyn && dyn->result.p_value ? fmt(*dyn->result.p_value) : "n/a") +
               (dyn_sig ? " significant" : " NOT significant") + "; " + std::to_string(quiet) +
               "/10 random-vs-random repetitions non-significant (need >= 9)");
}

// --- criterion 4: random-concept scores sit in the binomial chance band ---
void criterion_random_null_band(const Ctx& ctx) {
    const auto* rnd = find_row(ctx, "random_sets", "stage2", "random");
    if (!rnd) {
        report(4, "random-concept null", false, "missing random_sets row for 'random'");
        return;
    }
    const double s = rnd->result.score;
    report(4, "random-concept null", s >= 0.35 && s <= 0.65,
           "mean sign-count score " + fmt(s) + " over 10 random sets (band [0.35, 0.65])");
}

// --- criterion 5: frame reversal flips the prediction ---
void criterion_temporal_reversal(const Ctx& ctx) {
    int correct = 0, flipped = 0;
    for (const auto& e : ctx.corpus) {
        if (e.split != "test") continue;
        VideoClip clip = load_clip((ctx.data / e.path).string(), e.clip_id);
        if (predict_class(ctx.model, clip) != e.label) continue;
        ++correct;
        if (predict_class(ctx.model, reverse_clip(clip)) != e.label) ++flipped;
    }
    const double frac = correct ? static_cast<double>(flipped) / correct : 0.0;
    report(5, "temporal reversal", correct > 0 && frac >= 0.9,
           "reversal flips " + std::to_string(flipped) + "/" + std::to_string(correct) +
               " correctly classified test clips (" + fmt(frac) + ", need >= 0.9)");
}

// --- criterion 6: concept-builder golden fixtures, bit-exact ---
void criterion_builder_exactness(const Ctx&) {
    bool pass = true;
    std::string detail = "floor-rule offsets, max-box canvas, and frame identity all exact";

    VideoClip video;
    video.frames = Tensor({4, 40, 40, 3});
    for (size_t i = 0; i < video.frames.data.size(); ++i)
        video.frames.data[i] = static_cast<float>((i * 7) % 101) / 101.0f;

    Track track;
    track.track_id = "t";
    track.class_label = "obj";
    track.boxes = {{0, 0, 0, 20, 20}, {1, 10, 10, 20, 20}, {2, 4, 4, 14, 14}};
    VideoClip built = build_spatiotemporal_concept(video, track, 3, 0.5f);
    if (built.H() != 20 || built.W() != 20) pass = false;
    // frame 1: 10x10 crop centered at floor((20-10)/2) = 5
    for (int y = 0; y < 20 && pass; ++y)
        for (int x = 0; x < 20 && pass; ++x) {
            const bool inside = y >= 5 && y < 15 && x >= 5 && x < 15;
            const float expect =
                inside ? video.at(1, 10 + (y - 5), 10 + (x - 5), 0) : 0.5f;
            if (built.at(1, y, x, 0) != expect) pass = false;
        }

    Tensor frame({16, 16, 3});
    for (size_t i = 0; i < frame.data.size(); ++i)
        frame.data[i] = static_cast<float>((i * 13) % 97) / 97.0f;
    VideoClip spatial = build_spatial_concept(frame, 6, 16, 16);
    ConceptSet set;
    set.kind = ConceptKind::spatial;
    set.name = "s";
    set.clips = {spatial, spatial};
    if (!validate_concept_set(set).empty()) pass = false;
    const int64_t fsz = 16 * 16 * 3;
    for (int t = 1; t < 6 && pass; ++t)
        for (int64_t i = 0; i < fsz; ++i)
            if (spatial.frames.data[t * fsz + i] != spatial.frames.data[i]) {
                pass = false;
                break;
            }

    if (!pass) detail = "fixture mismatch";
    report(6, "concept-builder exactness", pass, detail);
}

// --- criterion 7: scoring and tracking match brute-force oracles ---
void criterion_oracle_equivalence(const Ctx&) {
    bool pass = true;
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd;

    // sign_count against a direct count
    for (int trial = 0; trial < 50 && pass; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        std::vector<double> s(n);
        int expect = 0;
        for (auto& v : s) {
            v = nd(rng);
            if (v > 0) ++expect;
        }
        if (sign_count_score(s) != static_cast<double>(expect) / n) pass = false;
    }

    // relative_tcav against per-input dot products, <= 5 inputs x <= 3 concepts
    for (int trial = 0; trial < 20 && pass; ++trial) {
        const int n_concepts = 2 + static_cast<int>(rng() % 2);
        const int n_inputs = 2 + static_cast<int>(rng() % 4);
        std::map<std::string, Cav> cavs;
        for (int c = 0; c < n_concepts; ++c) {
            Cav cav;
            cav.concept_name = "c" + std::to_string(c);
            std::vector<float> v(3);
            double norm = 0.0;
            for (auto& x : v) {
                x = static_cast<float>(nd(rng));
                norm += static_cast<double>(x) * x;
            }
            for (auto& x : v) x = static_cast<float>(x / std::sqrt(norm));
            cav.vector = v;
            cavs[cav.concept_name] = cav;
        }
        std::vector<ActivationRecord> inputs;
        for (int i = 0; i < n_inputs; ++i) {
            ActivationRecord r;
            r.clip_id = "i" + std::to_string(i);
            std::vector<float> g(3);
            for (auto& x : g) x = static_cast<float>(nd(rng));
            r.activation = g;
            r.gradient = g;
            inputs.push_back(std::move(r));
        }
        auto res = relative_tcav(cavs, inputs);
        for (const auto& [name, cav] : cavs) {
            int positive = 0;
            for (const auto& r : inputs) {
                double dot = 0.0;
                for (int j = 0; j < 3; ++j)
                    dot += static_cast<double>((*r.gradient)[j]) * cav.vector[j];
                if (dot > 0) ++positive;
            }
            if (res.at(name).score != static_cast<double>(positive) / n_inputs) pass = false;
        }
    }

    // tracker against a literal re-implementation of the association rule
    for (int trial = 0; trial < 50 && pass; ++trial) {
        std::vector<DetectionFrame> frames;
        const int nf = 1 + static_cast<int>(rng() % 10);
        for (int f = 0; f < nf; ++f) {
            DetectionFrame df;
            df.frame_index = f;
            const int nd_ = static_cast<int>(rng() % 4);
            for (int k = 0; k < nd_; ++k) {
                Detection det;
                det.class_label = "obj";
                det.confidence = 0.1 + 0.8 * static_cast<double>(rng() % 100) / 100.0;
                det.x1 = static_cast<double>(rng() % 20);
                det.y1 = static_cast<double>(rng() % 20);
                det.x2 = det.x1 + 2 + static_cast<double>(rng() % 8);
                det.y2 = det.y1 + 2 + static_cast<double>(rng() % 8);
                df.detections.push_back(det);
            }
            frames.push_back(std::move(df));
        }
        const double thr = 0.3;
        const int max_gap = trial % 3;
        auto got = build_tracks(frames, "obj", thr, max_gap);

        // oracle: greedy per-frame matching, highest IoU first, ties to the
        // lower x1; leftovers seed new tracks by descending confidence
        struct OT {
            std::vector<TrackBox> boxes;
            int last = 0;
            bool alive = true;
        };
        std::vector<OT> oracle;
        for (const auto& f : frames) {
            for (auto& t : oracle)
                if (t.alive && f.frame_index - t.last - 1 > max_gap) t.alive = false;
            struct P {
                double iou;
                size_t t, d;
            };
            std::vector<P> pairs;
            for (size_t ti = 0; ti < oracle.size(); ++ti) {
                if (!oracle[ti].alive) continue;
                const auto& b = oracle[ti].boxes.back();
                for (size_t di = 0; di < f.detections.size(); ++di) {
                    const auto& det = f.detections[di];
                    double iou = box_iou(b.x1, b.y1, b.x2, b.y2, det.x1, det.y1, det.x2, det.y2);
                    if (iou >= thr) pairs.push_back({iou, ti, di});
                }
            }
            std::stable_sort(pairs.begin(), pairs.end(), [&](const P& a, const P& b) {
                if (a.iou != b.iou) return a.iou > b.iou;
                return f.detections[a.d].x1 < f.detections[b.d].x1;
            });
            std::vector<bool> tu(oracle.size()), du(f.detections.size());
            for (const auto& p : pairs) {
                if (tu[p.t] || du[p.d]) continue;
                tu[p.t] = du[p.d] = true;
                const auto& det = f.detections[p.d];
                oracle[p.t].boxes.push_back({f.frame_index, det.x1, det.y1, det.x2, det.y2});
                oracle[p.t].last = f.frame_index;
            }
            std::vector<size_t> seeds;
            for (size_t di = 0; di < f.detections.size(); ++di)
                if (!du[di]) seeds.push_back(di);
            std::stable_sort(seeds.begin(), seeds.end(), [&](size_t a, size_t b) {
                if (f.detections[a].confidence != f.detections[b].confidence)
                    return f.detections[a].confidence > f.detections[b].confidence;
                return f.detections[a].x1 < f.detections[b].x1;
            });
            for (size_t di : seeds) {
                OT t;
                const auto& det = f.detections[di];
                t.boxes.push_back({f.frame_index, det.x1, det.y1, det.x2, det.y2});
                t.last = f.frame_index;
                oracle.push_back(std::move(t));
            }
        }
        auto key = [](const std::vector<TrackBox>& boxes) {
            std::ostringstream os;
            for (const auto& b : boxes)
                os << b.frame_index << ":" << b.x1 << "," << b.y1 << "," << b.x2 << "," << b.y2
                   << ";";
            return os.str();
        };
        std::vector<std::string> a, b;
        for (const auto& t : got) a.push_back(key(t.boxes));
        for (const auto& t : oracle) b.push_back(key(t.boxes));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) pass = false;
    }

    report(7, "oracle equivalence", pass,
           pass ? "sign_count, relative_tcav, and tracker match brute-force oracles"
                : "oracle mismatch");
}

// --- criterion 8: Grad-CAM mass concentrates on the moving shape ---
void criterion_gradcam_localization(const Ctx& ctx) {
    nlohmann::json boxes_json;
    {
        std::ifstream is((ctx.data / "boxes.json").string());
        is >> boxes_json;
    }
    double mass_sum = 0.0;
    int n = 0;
    for (const auto& e : ctx.corpus) {
        if (e.split != "test" || n >= 10) continue;
        VideoClip clip = load_clip((ctx.data / e.path).string(), e.clip_id);
        HeatmapVolume vol = compute_gradcam(ctx.model, clip, "stage2", e.label);
        std::vector<Box> tube;
        for (const auto& jb : boxes_json.at(e.clip_id))
            tube.push_back({jb[0].get<int>(), jb[1].get<int>(), jb[2].get<int>(), jb[3].get<int>()});
        mass_sum += heatmap_mass_in_tube(vol, tube, 4);
        ++n;
    }
    const double mean_mass = n ? mass_sum / n : 0.0;
    report(8, "Grad-CAM localization", mean_mass >= 0.6,
           "mean heatmap mass in the dilated tube " + fmt(mean_mass) + " over " +
               std::to_string(n) + " test clips (need >= 0.6)");
}

// --- criterion 9: repeated runs are byte-identical ---
void criterion_determinism(const Ctx& ctx) {
    cmd::run_run(ctx.config_path);
    const std::string first = slurp(ctx.results_csv);
    const fs::path keep = ctx.work / "results_first.csv";
    fs::copy_file(ctx.results_csv, keep, fs::copy_options::overwrite_existing);
    cmd::run_run(ctx.config_path);
    const bool pass = !first.empty() && slurp(keep) == slurp(ctx.results_csv) &&
                      first == slurp(ctx.results_csv);
    report(9, "determinism", pass,
           pass ? "two runs with identical config/seeds produced byte-identical CSV"
                : "CSV outputs differ between runs");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    Ctx ctx = setup();
    const auto t1 = std::chrono::steady_clock::now();
    std::cout << "setup (synth + train + concepts + experiment) took "
              << std::chrono::duration_cast<std::chrono::seconds>(t1 - t0).count() << "s\n";

    criterion_gradient_oracle(ctx);
    criterion_dynamic_dominates(ctx);
    Stage2Data d = stage2_data(ctx);
    criterion_significance(ctx, d);
    criterion_random_null_band(ctx);
    criterion_temporal_reversal(ctx);
    criterion_builder_exactness(ctx);
    criterion_oracle_equivalence(ctx);
    criterion_gradcam_localization(ctx);
    criterion_determinism(ctx);

    const auto t2 = std::chrono::steady_clock::now();
    std::cout << "acceptance suite finished in "
              << std::chrono::duration_cast<std::chrono::seconds>(t2 - t0).count() << "s, "
              << g_failures << " criteria failed\n";
    return g_failures;
}
