#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vtcav/cav.hpp"

namespace vtcav {

// Pooled activation (and optional logit gradient) for one clip at one layer.
struct ActivationRecord {
    std::string clip_id;
    std::string layer;
    int class_index = 0;
    std::vector<float> activation;
    std::optional<std::vector<float>> gradient;
    std::vector<int64_t> raw_shape;
};

struct TcavResult {
    std::string concept_name;
    std::string layer;
    int class_index = 0;
    double score = 0.0;
    std::vector<double> per_random_set_scores;
    std::optional<double> p_value;
    std::optional<double> corrected_alpha;
    std::optional<bool> significant;
    int n_inputs = 0;
    double cav_accuracy = 0.0;
};

// Directional derivative of the class logit along the CAV: gradient . v.
double conceptual_sensitivity(const std::vector<float>& gradient, const Cav& cav);

// Fraction of strictly positive sensitivities; zeros count as non-positive.
double sign_count_score(const std::vector<double>& sensitivities);

std::map<std::string, TcavResult> relative_tcav(const std::map<std::string, Cav>& group_cavs,
                                                const std::vector<ActivationRecord>& inputs);

TcavResult tcav_with_random_sets(const std::string& concept_name,
                                 const std::vector<std::vector<float>>& concept_vectors,
                                 const std::vector<std::vector<std::vector<float>>>& random_sets,
                                 const std::vector<ActivationRecord>& inputs, double l2,
                                 uint64_t seed);

struct SignificanceResult {
    double p_value = 1.0;
    double corrected_alpha = 0.0;
    bool significant = false;
};

// Welch two-sided t-test with Bonferroni correction (alpha / n_hypotheses).
SignificanceResult significance_test(const std::vector<double>& concept_scores,
                                     const std::vector<double>& null_scores, int n_hypotheses,
                                     double alpha);

// Sign-count scores of CAVs trained to separate pairs of random sets; the
// null sample for significance testing. Produces one score per set (set i vs
// set (i+1) mod n).
std::vector<double> random_vs_random_null_scores(
    const std::vector<std::vector<std::vector<float>>>& random_sets,
    const std::vector<ActivationRecord>& inputs, double l2, uint64_t seed);

}  // namespace vtcav
