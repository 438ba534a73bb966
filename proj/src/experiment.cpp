#include "vtcav/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vtcav/clip.hpp"
#include "vtcav/concepts.hpp"
#include "vtcav/container.hpp"
#include "vtcav/plots.hpp"

namespace fs = std::filesystem;

namespace vtcav {

ExperimentVariant variant_from_name(const std::string& s) {
    if (s == "relative") return ExperimentVariant::relative;
    if (s == "random_sets") return ExperimentVariant::random_sets;
    if (s == "both") return ExperimentVariant::both;
    throw std::invalid_argument("unknown experiment variant: " + s);
}

std::string variant_name(ExperimentVariant v) {
    switch (v) {
        case ExperimentVariant::relative: return "relative";
        case ExperimentVariant::random_sets: return "random_sets";
        case ExperimentVariant::both: return "both";
    }
    return "?";
}

namespace {

uint64_t fnv1a(const std::string& s, uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string file_contents(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read file: " + path);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::string resolve(const std::string& base_file, const std::string& rel) {
    fs::path p(rel);
    if (p.is_absolute()) return rel;
    return (fs::path(base_file).parent_path() / p).string();
}

std::string fmtg(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Loads a clip and adapts it to the model input: H/W stretch-resized when they
// differ, time length mismatches rejected.
VideoClip load_for_model(const ReferenceModel& model, const std::string& path,
                         const std::string& clip_id) {
    VideoClip clip = load_clip(path, clip_id);
    if (clip.T() != model.cfg.T)
        throw std::runtime_error("clip time length " + std::to_string(clip.T()) +
                                 " does not match model T=" + std::to_string(model.cfg.T) +
                                 " (clip " + clip_id + ")");
    if (clip.H() != model.cfg.H || clip.W() != model.cfg.W)
        clip = resize_clip(clip, model.cfg.H, model.cfg.W);
    return clip;
}

struct NamedClips {
    std::vector<std::string> ids;
    std::vector<VideoClip> clips;
};

// Activation (and optionally gradient) records for a list of clips at one
// layer, cached as a tensor container in cache_dir.
std::vector<ActivationRecord> layer_records(const ReferenceModel& model, const NamedClips& clips,
                                            const std::string& layer, PoolMode pooling,
                                            int class_index, bool with_grads,
                                            const std::string& cache_dir,
                                            const std::string& provenance) {
    uint64_t key = fnv1a(provenance);
    key = fnv1a(hex64(model.weight_hash()), key);
    key = fnv1a(layer, key);
    key = fnv1a(pool_mode_name(pooling), key);
    key = fnv1a(std::to_string(class_index), key);
    key = fnv1a(with_grads ? "grads" : "acts", key);
    for (const auto& id : clips.ids) key = fnv1a(id, key);
    const std::string cache_path = cache_dir + "/act_" + hex64(key) + ".vtn";

    auto raw_shape = model.stage_out_shape(model.layer_index(layer));

    if (!cache_dir.empty() && fs::exists(cache_path)) {
        auto entries = read_tensor_container(cache_path);
        std::vector<ActivationRecord> records;
        bool complete = true;
        for (const auto& id : clips.ids) {
            auto a = entries.find("a_" + id);
            auto g = entries.find("g_" + id);
            if (a == entries.end() || (with_grads && g == entries.end())) {
                complete = false;
                break;
            }
            ActivationRecord rec;
            rec.clip_id = id;
            rec.layer = layer;
            rec.class_index = class_index;
            rec.activation = a->second.data;
            if (with_grads) rec.gradient = g->second.data;
            rec.raw_shape = raw_shape;
            records.push_back(std::move(rec));
        }
        if (complete) return records;
    }

    std::vector<ActivationRecord> records;
    std::map<std::string, Tensor> entries;
    for (size_t i = 0; i < clips.clips.size(); ++i) {
        const VideoClip& clip = clips.clips[i];
        ActivationRecord rec;
        rec.clip_id = clips.ids[i];
        rec.layer = layer;
        rec.class_index = class_index;
        rec.raw_shape = raw_shape;
        auto acts = capture_activations(model, clip, {layer});
        rec.activation = pool_activation(acts.at(layer), pooling);
        entries["a_" + rec.clip_id] =
            Tensor({static_cast<int64_t>(rec.activation.size())}, rec.activation);
        if (with_grads) {
            DTensor grad = gradient_wrt_activation(model, clip, layer, class_index);
            rec.gradient = pool_activation(grad, pooling);
            entries["g_" + rec.clip_id] =
                Tensor({static_cast<int64_t>(rec.gradient->size())}, *rec.gradient);
        }
        records.push_back(std::move(rec));
    }
    if (!cache_dir.empty()) {
        fs::create_directories(cache_dir);
        write_tensor_container(cache_path, entries);
    }
    return records;
}

std::vector<std::vector<float>> record_vectors(const std::vector<ActivationRecord>& records) {
    std::vector<std::vector<float>> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.activation);
    return out;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read experiment config: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("experiment config parse error: " + std::string(e.what()));
    }

    static const std::set<std::string> known = {
        "model",       "corpus",        "concepts",       "random_pool", "layers",
        "target_class", "variant",      "n_inputs",       "n_random_sets", "random_set_size",
        "alpha",       "cav_l2",        "pooling",        "seeds",       "cache_dir",
        "out_dir"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::runtime_error("experiment config: unknown key '" + it.key() + "'");

    ExperimentConfig cfg;
    cfg.model_dir = resolve(path, j.at("model").get<std::string>());
    cfg.corpus_manifest = resolve(path, j.at("corpus").get<std::string>());
    cfg.concept_manifest = resolve(path, j.at("concepts").get<std::string>());
    cfg.random_pool_manifest = resolve(path, j.at("random_pool").get<std::string>());
    cfg.layers = j.at("layers").get<std::vector<std::string>>();
    if (j.at("target_class").is_number())
        cfg.target_class = std::to_string(j.at("target_class").get<int>());
    else
        cfg.target_class = j.at("target_class").get<std::string>();
    cfg.variant = variant_from_name(j.value("variant", "both"));
    cfg.n_inputs = j.value("n_inputs", 30);
    cfg.n_random_sets = j.value("n_random_sets", 10);
    cfg.random_set_size = j.value("random_set_size", 30);
    cfg.alpha = j.value("alpha", 0.05);
    cfg.cav_l2 = j.value("cav_l2", kDefaultCavL2);
    cfg.pooling = j.value("pooling", "flatten");
    if (!j.contains("seeds")) throw std::runtime_error("experiment config: seeds required");
    const auto& seeds = j.at("seeds");
    cfg.seed_data = seeds.at("data").get<uint64_t>();
    cfg.seed_cav = seeds.at("cav").get<uint64_t>();
    cfg.seed_sampling = seeds.at("sampling").get<uint64_t>();
    cfg.cache_dir = resolve(path, j.value("cache_dir", "cache"));
    cfg.out_dir = resolve(path, j.value("out_dir", "results"));
    if (const char* env = std::getenv("VIDEOTCAV_CACHE")) cfg.cache_dir = env;
    return cfg;
}

void save_experiment_config(const std::string& path, const ExperimentConfig& cfg) {
    nlohmann::json j = {
        {"model", cfg.model_dir},
        {"corpus", cfg.corpus_manifest},
        {"concepts", cfg.concept_manifest},
        {"random_pool", cfg.random_pool_manifest},
        {"layers", cfg.layers},
        {"target_class", cfg.target_class},
        {"variant", variant_name(cfg.variant)},
        {"n_inputs", cfg.n_inputs},
        {"n_random_sets", cfg.n_random_sets},
        {"random_set_size", cfg.random_set_size},
        {"alpha", cfg.alpha},
        {"cav_l2", cfg.cav_l2},
        {"pooling", cfg.pooling},
        {"seeds",
         {{"data", cfg.seed_data}, {"cav", cfg.seed_cav}, {"sampling", cfg.seed_sampling}}},
        {"cache_dir", cfg.cache_dir},
        {"out_dir", cfg.out_dir}};
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write experiment config: " + path);
    os << j.dump(1) << "\n";
}

std::vector<std::string> validate_experiment_config(const ExperimentConfig& cfg) {
    std::vector<std::string> errors;
    auto need_file = [&errors](const std::string& p, const std::string& what) {
        if (p.empty())
            errors.push_back(what + " not set");
        else if (!fs::exists(p))
            errors.push_back(what + " does not exist: " + p);
    };
    need_file(cfg.model_dir, "model");
    need_file(cfg.corpus_manifest, "corpus manifest");
    need_file(cfg.concept_manifest, "concept manifest");
    need_file(cfg.random_pool_manifest, "random pool manifest");
    if (cfg.layers.empty()) errors.push_back("layers list is empty");
    if (cfg.n_inputs < 1) errors.push_back("n_inputs must be >= 1");
    if (cfg.n_random_sets < 2) errors.push_back("n_random_sets must be >= 2");
    if (cfg.random_set_size < 2) errors.push_back("random_set_size must be >= 2");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) errors.push_back("alpha must be in (0,1)");
    if (cfg.pooling != "flatten" && cfg.pooling != "spatial_mean")
        errors.push_back("pooling must be flatten or spatial_mean");
    if (cfg.out_dir.empty()) errors.push_back("out_dir not set");
    return errors;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    auto errors = validate_experiment_config(cfg);
    if (!errors.empty()) {
        std::string msg = "experiment config invalid:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw std::runtime_error(msg);
    }

    ReferenceModel model = load_model(cfg.model_dir);
    for (const auto& layer : cfg.layers) model.layer_index(layer);
    const int class_index = model.class_index(cfg.target_class);
    const PoolMode pooling = pool_mode_from_name(cfg.pooling);

    // --- input clips (target class, test split preferred) ---
    const std::string corpus_hash = hex64(fnv1a(file_contents(cfg.corpus_manifest)));
    auto corpus_entries = read_corpus_manifest(cfg.corpus_manifest);
    NamedClips inputs;
    for (const auto& e : corpus_entries) {
        if (e.label != class_index || e.split != "test") continue;
        if (static_cast<int>(inputs.ids.size()) >= cfg.n_inputs) break;
        inputs.ids.push_back(e.clip_id);
        inputs.clips.push_back(load_for_model(model, resolve(cfg.corpus_manifest, e.path), e.clip_id));
    }
    if (static_cast<int>(inputs.ids.size()) < cfg.n_inputs)
        throw std::runtime_error("input corpus has only " + std::to_string(inputs.ids.size()) +
                                 " test clips of class '" + cfg.target_class + "', need " +
                                 std::to_string(cfg.n_inputs));

    // --- concept sets ---
    auto concept_entries = read_concept_manifest(cfg.concept_manifest);
    const std::string concepts_hash = hex64(fnv1a(file_contents(cfg.concept_manifest)));
    struct LoadedConcept {
        std::string name;
        std::string kind;
        NamedClips clips;
    };
    std::vector<LoadedConcept> concepts;
    for (const auto& e : concept_entries) {
        LoadedConcept c;
        c.name = e.name;
        c.kind = concept_kind_name(e.kind);
        int i = 0;
        for (const auto& p : e.clip_paths) {
            const std::string id = e.name + "_" + std::to_string(i++);
            c.clips.ids.push_back(id);
            c.clips.clips.push_back(load_for_model(model, resolve(cfg.concept_manifest, p), id));
        }
        if (c.clips.ids.size() < 2)
            throw std::runtime_error("concept '" + e.name + "' has fewer than 2 clips");
        concepts.push_back(std::move(c));
    }
    if (concepts.empty()) throw std::runtime_error("concept manifest lists no concepts");

    // --- random pool; +2 extra sets: relative-group member and random concept ---
    const std::string pool_hash = hex64(fnv1a(file_contents(cfg.random_pool_manifest)));
    auto pool_entries = read_corpus_manifest(cfg.random_pool_manifest);
    NamedClips pool;
    for (const auto& e : pool_entries) {
        pool.ids.push_back(e.clip_id);
        pool.clips.push_back(load_for_model(model, resolve(cfg.random_pool_manifest, e.path), e.clip_id));
    }
    std::set<std::string> exclude(inputs.ids.begin(), inputs.ids.end());
    auto random_sets = sample_random_sets(pool.clips, cfg.n_random_sets + 2, cfg.random_set_size,
                                          exclude, cfg.seed_sampling);

    ExperimentOutput output;
    fs::create_directories(cfg.out_dir);

    const int n_hypotheses =
        static_cast<int>(concepts.size() + 1) * static_cast<int>(cfg.layers.size());

    struct LayerPlotData {
        std::vector<BarDatum> bars;
        std::vector<SignificanceDatum> sig;
    };
    std::map<std::string, LayerPlotData> plot_data;

    for (const auto& layer : cfg.layers) {
        auto input_records = layer_records(model, inputs, layer, pooling, class_index, true,
                                           cfg.cache_dir, corpus_hash + ":inputs");

        std::map<std::string, std::vector<std::vector<float>>> concept_vectors;
        std::map<std::string, std::string> concept_kinds;
        for (const auto& c : concepts) {
            try {
                auto recs = layer_records(model, c.clips, layer, pooling, class_index, false,
                                          cfg.cache_dir, concepts_hash + ":concept:" + c.name);
                concept_vectors[c.name] = record_vectors(recs);
                concept_kinds[c.name] = c.kind;
            } catch (const std::exception& e) {
                throw std::runtime_error("(" + c.name + ", " + layer + "): " + e.what());
            }
        }

        std::vector<std::vector<std::vector<float>>> random_vectors;
        for (size_t i = 0; i < random_sets.size(); ++i) {
            NamedClips nc;
            for (const auto& clip : random_sets[i].clips) {
                nc.ids.push_back(clip.clip_id);
                nc.clips.push_back(clip);
            }
            auto recs = layer_records(model, nc, layer, pooling, class_index, false, cfg.cache_dir,
                                      pool_hash + ":rset" + std::to_string(i) + ":" +
                                          std::to_string(cfg.seed_sampling));
            random_vectors.push_back(record_vectors(recs));
        }
        // last two sets are reserved: group member for the relative variant and
        // the "random" concept for the random-set variant
        auto group_random = random_vectors[cfg.n_random_sets];
        auto concept_random = random_vectors[cfg.n_random_sets + 1];
        random_vectors.resize(cfg.n_random_sets);

        if (cfg.variant == ExperimentVariant::relative || cfg.variant == ExperimentVariant::both) {
            auto group = concept_vectors;
            group["random"] = group_random;
            std::map<std::string, Cav> cavs;
            try {
                cavs = train_relative_cavs(group, cfg.cav_l2, cfg.seed_cav);
            } catch (const std::exception& e) {
                throw std::runtime_error("(relative CAVs, " + layer + "): " + e.what());
            }
            for (auto& [name, cav] : cavs) cav.layer = layer;
            auto results = relative_tcav(cavs, input_records);
            for (const auto& [name, res] : results) {
                ExperimentRow row;
                row.result = res;
                row.kind = concept_kinds.count(name) ? concept_kinds[name] : "random";
                row.variant = "relative";
                plot_data[layer].bars.push_back({name, res.score});
                output.rows.push_back(std::move(row));
            }
        }

        if (cfg.variant == ExperimentVariant::random_sets ||
            cfg.variant == ExperimentVariant::both) {
            auto null_scores = random_vs_random_null_scores(random_vectors, input_records,
                                                            cfg.cav_l2, cfg.seed_cav + 7000);
            auto scored = concept_vectors;
            scored["random"] = concept_random;
            for (const auto& [name, vectors] : scored) {
                TcavResult res;
                try {
                    res = tcav_with_random_sets(name, vectors, random_vectors, input_records,
                                                cfg.cav_l2, cfg.seed_cav);
                } catch (const std::exception& e) {
                    throw std::runtime_error("(" + name + ", " + layer + "): " + e.what());
                }
                auto sig = significance_test(res.per_random_set_scores, null_scores, n_hypotheses,
                                             cfg.alpha);
                res.p_value = sig.p_value;
                res.corrected_alpha = sig.corrected_alpha;
                res.significant = sig.significant;
                ExperimentRow row;
                row.result = res;
                row.kind = concept_kinds.count(name) ? concept_kinds[name] : "random";
                row.variant = "random_sets";
                plot_data[layer].sig.push_back(
                    {name, res.per_random_set_scores, sig.p_value, sig.significant});
                output.rows.push_back(std::move(row));
            }
        }
    }

    // --- results CSV ---
    output.csv_path = cfg.out_dir + "/results.csv";
    {
        std::ofstream os(output.csv_path, std::ios::trunc);
        os << "concept,kind,layer,class,variant,score,per_set_scores,p_value,corrected_alpha,"
              "significant,cav_accuracy,pooling,seed_cav,seed_sampling,n_inputs\n";
        for (const auto& row : output.rows) {
            const TcavResult& r = row.result;
            std::string per_set;
            for (size_t i = 0; i < r.per_random_set_scores.size(); ++i) {
                if (i) per_set += ";";
                per_set += fmtg(r.per_random_set_scores[i]);
            }
            os << r.concept_name << "," << row.kind << "," << r.layer << ","
               << model.cfg.class_names[r.class_index] << "," << row.variant << ","
               << fmtg(r.score) << "," << per_set << ","
               << (r.p_value ? fmtg(*r.p_value) : "") << ","
               << (r.corrected_alpha ? fmtg(*r.corrected_alpha) : "") << ","
               << (r.significant ? (*r.significant ? "true" : "false") : "") << ","
               << fmtg(r.cav_accuracy) << "," << cfg.pooling << "," << cfg.seed_cav << ","
               << cfg.seed_sampling << "," << r.n_inputs << "\n";
        }
    }

    // --- plots ---
    for (const auto& [layer, data] : plot_data) {
        if (!data.bars.empty()) {
            std::string p = cfg.out_dir + "/relative_" + layer + ".svg";
            write_bar_chart_svg(p, "Relative TCAV scores, " + layer + " (class " +
                                       model.cfg.class_names[class_index] + ")",
                                data.bars);
            output.plot_paths.push_back(p);
        }
        if (!data.sig.empty()) {
            std::string p = cfg.out_dir + "/significance_" + layer + ".svg";
            write_significance_svg(p, "Random-set score distributions, " + layer, data.sig);
            output.plot_paths.push_back(p);
        }
    }

    // --- summary JSON ---
    output.summary_path = cfg.out_dir + "/summary.json";
    {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : output.rows) {
            const TcavResult& r = row.result;
            nlohmann::json jr = {{"concept", r.concept_name},   {"kind", row.kind},
                                 {"layer", r.layer},       {"class", model.cfg.class_names[r.class_index]},
                                 {"variant", row.variant}, {"score", r.score},
                                 {"n_inputs", r.n_inputs}, {"cav_accuracy", r.cav_accuracy},
                                 {"per_set_scores", r.per_random_set_scores}};
            if (r.p_value) jr["p_value"] = *r.p_value;
            if (r.corrected_alpha) jr["corrected_alpha"] = *r.corrected_alpha;
            if (r.significant) jr["significant"] = *r.significant;
            rows.push_back(jr);
        }
        nlohmann::json summary = {{"model_id", model.model_id},
                                  {"target_class", model.cfg.class_names[class_index]},
                                  {"pooling", cfg.pooling},
                                  {"variant", variant_name(cfg.variant)},
                                  {"alpha", cfg.alpha},
                                  {"n_hypotheses", n_hypotheses},
                                  {"layers", cfg.layers},
                                  {"results", rows}};
        std::ofstream os(output.summary_path, std::ios::trunc);
        os << summary.dump(1) << "\n";
    }

    return output;
}

}  // namespace vtcav
