#include "vtcav/tcav.hpp"

#include <cmath>
#include <stdexcept>

#include "vtcav/stats.hpp"

namespace vtcav {

double conceptual_sensitivity(const std::vector<float>& gradient, const Cav& cav) {
    if (gradient.size() != cav.vector.size())
        throw std::invalid_argument("conceptual_sensitivity: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < gradient.size(); ++i)
        s += static_cast<double>(gradient[i]) * static_cast<double>(cav.vector[i]);
    return s;
}

double sign_count_score(const std::vector<double>& sensitivities) {
    if (sensitivities.empty()) throw std::invalid_argument("sign_count_score: empty list");
    int positive = 0;
    for (double s : sensitivities) {
        if (!std::isfinite(s)) throw std::invalid_argument("sign_count_score: non-finite value");
        if (s > 0.0) ++positive;
    }
    return static_cast<double>(positive) / static_cast<double>(sensitivities.size());
}

namespace {

std::vector<double> input_sensitivities(const Cav& cav,
                                        const std::vector<ActivationRecord>& inputs) {
    std::vector<double> sens;
    sens.reserve(inputs.size());
    for (const auto& rec : inputs) {
        if (!rec.gradient)
            throw std::invalid_argument("missing gradient for input clip " + rec.clip_id);
        if (!cav.layer.empty() && rec.layer != cav.layer)
            throw std::invalid_argument("layer mismatch: record at '" + rec.layer +
                                        "', CAV at '" + cav.layer + "'");
        sens.push_back(conceptual_sensitivity(*rec.gradient, cav));
    }
    return sens;
}

}  // namespace

std::map<std::string, TcavResult> relative_tcav(const std::map<std::string, Cav>& group_cavs,
                                                const std::vector<ActivationRecord>& inputs) {
    if (inputs.empty()) throw std::invalid_argument("relative_tcav: no input records");
    std::map<std::string, TcavResult> out;
    for (const auto& [name, cav] : group_cavs) {
        TcavResult r;
        r.concept_name = name;
        r.layer = cav.layer;
        r.class_index = inputs.front().class_index;
        r.n_inputs = static_cast<int>(inputs.size());
        r.score = sign_count_score(input_sensitivities(cav, inputs));
        r.cav_accuracy = cav.heldout_accuracy;
        out.emplace(name, std::move(r));
    }
    return out;
}

TcavResult tcav_with_random_sets(const std::string& concept_name,
                                 const std::vector<std::vector<float>>& concept_vectors,
                                 const std::vector<std::vector<std::vector<float>>>& random_sets,
                                 const std::vector<ActivationRecord>& inputs, double l2,
                                 uint64_t seed) {
    if (random_sets.size() < 2)
        throw std::invalid_argument("tcav_with_random_sets: need >= 2 random sets");
    if (inputs.empty()) throw std::invalid_argument("tcav_with_random_sets: no input records");

    TcavResult r;
    r.concept_name = concept_name;
    r.layer = inputs.front().layer;
    r.class_index = inputs.front().class_index;
    r.n_inputs = static_cast<int>(inputs.size());

    double acc_sum = 0.0;
    for (size_t i = 0; i < random_sets.size(); ++i) {
        Cav cav = train_cav(concept_vectors, random_sets[i], l2, seed + i);
        cav.concept_name = concept_name;
        cav.layer = r.layer;
        cav.negatives_descriptor = "random_set_" + std::to_string(i);
        r.per_random_set_scores.push_back(sign_count_score(input_sensitivities(cav, inputs)));
        acc_sum += cav.heldout_accuracy;
    }
    r.score = mean(r.per_random_set_scores);
    r.cav_accuracy = acc_sum / static_cast<double>(random_sets.size());
    return r;
}

SignificanceResult significance_test(const std::vector<double>& concept_scores,
                                     const std::vector<double>& null_scores, int n_hypotheses,
                                     double alpha) {
    if (concept_scores.size() < 2 || null_scores.size() < 2)
        throw std::invalid_argument("significance_test: each sample needs >= 2 scores");
    if (n_hypotheses < 1) throw std::invalid_argument("significance_test: n_hypotheses must be >= 1");
    SignificanceResult r;
    r.p_value = welch_ttest(concept_scores, null_scores).p;
    r.corrected_alpha = alpha / static_cast<double>(n_hypotheses);
    r.significant = r.p_value < r.corrected_alpha;
    return r;
}

std::vector<double> random_vs_random_null_scores(
    const std::vector<std::vector<std::vector<float>>>& random_sets,
    const std::vector<ActivationRecord>& inputs, double l2, uint64_t seed) {
    if (random_sets.size() < 2)
        throw std::invalid_argument("random null: need >= 2 random sets");
    std::vector<double> scores;
    const size_t n = random_sets.size();
    for (size_t i = 0; i < n; ++i) {
        const size_t j = (i + 1) % n;
        Cav cav = train_cav(random_sets[i], random_sets[j], l2, seed + i);
        cav.layer = inputs.empty() ? "" : inputs.front().layer;
        scores.push_back(sign_count_score(input_sensitivities(cav, inputs)));
    }
    return scores;
}

}  // namespace vtcav
