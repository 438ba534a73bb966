#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vtcav/model.hpp"
#include "vtcav/tcav.hpp"

namespace vtcav {

enum class ExperimentVariant { relative, random_sets, both };

ExperimentVariant variant_from_name(const std::string& s);
std::string variant_name(ExperimentVariant v);

struct ExperimentConfig {
    std::string model_dir;
    std::string corpus_manifest;       // scored inputs come from here
    std::string concept_manifest;
    std::string random_pool_manifest;  // corpus random control sets are drawn from
    std::vector<std::string> layers;
    std::string target_class;          // class name or index
    ExperimentVariant variant = ExperimentVariant::both;
    int n_inputs = 30;
    int n_random_sets = 10;
    int random_set_size = 30;
    double alpha = 0.05;
    double cav_l2 = 1e-3;
    std::string pooling = "flatten";
    uint64_t seed_data = 0;
    uint64_t seed_cav = 0;
    uint64_t seed_sampling = 0;
    std::string cache_dir;
    std::string out_dir;
};

// Single JSON document; unknown keys rejected so typos fail loudly.
ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const std::string& path, const ExperimentConfig& cfg);

// All validation failures at once, before any compute. Empty means valid.
std::vector<std::string> validate_experiment_config(const ExperimentConfig& cfg);

struct ExperimentRow {
    TcavResult result;
    std::string kind;     // spatial | spatiotemporal | random
    std::string variant;  // relative | random_sets
};

struct ExperimentOutput {
    std::vector<ExperimentRow> rows;
    std::string csv_path;
    std::string summary_path;
    std::vector<std::string> plot_paths;
};

// Full pipeline: activations & gradients (cached), pooling, CAVs, scores,
// significance, CSV + plots + summary JSON. Deterministic given seeds.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

}  // namespace vtcav
