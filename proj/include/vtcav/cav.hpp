#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vtcav/tensor.hpp"

namespace vtcav {

enum class PoolMode { flatten, spatial_mean };

std::string pool_mode_name(PoolMode m);
PoolMode pool_mode_from_name(const std::string& s);

// flatten: row-major flattening. spatial_mean: average over all leading axes,
// leaving a vector over the trailing (channel) axis.
std::vector<float> pool_activation(const DTensor& raw, PoolMode mode);
std::vector<float> pool_activation(const Tensor& raw, PoolMode mode);

// Unit normal of a logistic separator, oriented toward the concept.
struct Cav {
    std::string concept_name;
    std::string layer;
    std::vector<float> vector;   // unit L2 norm
    float bias = 0.0f;           // decision rule: x . vector - bias > 0 => concept side
    float heldout_accuracy = 0.0f;
    std::string negatives_descriptor;
    uint64_t trainer_seed = 0;
};

// L2-penalized logistic regression trained to convergence (gradient norm
// < 1e-5 or 5000 iterations) with deterministic full-batch descent.
// heldout_accuracy comes from a seeded stratified 80/20 split.
Cav train_cav(const std::vector<std::vector<float>>& positives,
              const std::vector<std::vector<float>>& negatives, double l2, uint64_t seed);

// One-vs-rest CAV per concept; negatives are the union of the other concepts.
std::map<std::string, Cav> train_relative_cavs(
    const std::map<std::string, std::vector<std::vector<float>>>& group, double l2, uint64_t seed);

double cav_validation_accuracy(const Cav& cav, const std::vector<std::vector<float>>& positives,
                               const std::vector<std::vector<float>>& negatives);

constexpr double kDefaultCavL2 = 1e-3;
constexpr float kWeakCavAccuracy = 0.6f;

}  // namespace vtcav
