#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vtcav/experiment.hpp"

namespace vtcav::cmd {

struct SynthArgs {
    std::string task = "direction_lr";
    int T = 8, H = 32, W = 32;
    int shape_size = 6;
    int speed = 2;
    double noise_std = 0.02;
    int n_train = 200, n_test = 60;
    uint64_t seed = 0;
    bool seed_set = false;
    int random_pool_size = 0;  // additionally emit a mixed-content random pool
    std::string out;
};

// Writes clips/, corpus.json, classes.json, boxes.json, per-clip detection
// JSON under detections/, and optionally random_pool.json + pool clips.
void run_synth(const SynthArgs& args);

struct TrainArgs {
    std::string corpus_manifest;
    std::string out_dir;
    int epochs = 15;
    double lr = 0.1;
    uint64_t seed = 0;
};

// Trains the reference model on the manifest's train split and reports
// held-out accuracy; writes weights + architecture sidecar to out_dir.
double run_train(const TrainArgs& args);

struct ConceptsArgs {
    std::string video_dir;
    std::string detections_dir;
    std::vector<std::string> classes;
    std::string out_dir;
    int T = 8;
    int size = 64;  // concept clips are resized to size x size
    double iou_threshold = 0.5;
    int max_gap = 1;
    float pad_value = 0.0f;
};

// Builds spatiotemporal concepts from tracks and spatial counterparts from
// each track's first crop; writes clips and a concept manifest.
void run_concepts(const ConceptsArgs& args);

// Loads the config, runs the experiment, prints one line per result row.
ExperimentOutput run_run(const std::string& config_path);

struct GradcamArgs {
    std::string model_dir;
    std::string clip_path;
    std::string layer;
    std::string target_class;  // name or index
    float alpha = 0.5f;
    bool nearest = false;
    std::string out_dir;
};

// Writes per-frame overlay images (PPM) and the raw heatmap volume container.
void run_gradcam(const GradcamArgs& args);

// Regenerates the SVG charts from an existing summary JSON.
void run_report(const std::string& summary_path, const std::string& out_dir);

}  // namespace vtcav::cmd
