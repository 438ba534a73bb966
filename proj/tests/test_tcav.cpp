#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "vtcav/tcav.hpp"

using namespace vtcav;

namespace {

Cav unit_cav(std::vector<float> v) {
    double n = 0.0;
    for (float x : v) n += static_cast<double>(x) * x;
    n = std::sqrt(n);
    for (float& x : v) x = static_cast<float>(x / n);
    Cav c;
    c.vector = std::move(v);
    return c;
}

ActivationRecord record(std::vector<float> grad, const std::string& layer = "stage2",
                        int class_index = 0) {
    ActivationRecord r;
    r.clip_id = "clip";
    r.layer = layer;
    r.class_index = class_index;
    r.activation = grad;  // tests here only exercise the gradient path
    r.gradient = std::move(grad);
    return r;
}

std::vector<ActivationRecord> random_records(int n, int dim, uint64_t seed,
                                             const std::string& layer = "stage2") {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<ActivationRecord> out;
    for (int i = 0; i < n; ++i) {
        std::vector<float> g(dim);
        for (auto& x : g) x = static_cast<float>(nd(rng));
        out.push_back(record(std::move(g), layer));
    }
    return out;
}

std::vector<std::vector<float>> cloud(int n, int dim, const std::vector<double>& center,
                                      double sigma, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, sigma);
    std::vector<std::vector<float>> out;
    for (int i = 0; i < n; ++i) {
        std::vector<float> v(dim);
        for (int j = 0; j < dim; ++j) v[j] = static_cast<float>(center[j] + nd(rng));
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

TEST_CASE("conceptual sensitivity is the plain dot product") {
    auto cav = unit_cav({3, 4});
    CHECK(conceptual_sensitivity({0.6f, 0.8f}, cav) == doctest::Approx(1.0));
    CHECK(conceptual_sensitivity({-0.8f, 0.6f}, cav) == doctest::Approx(0.0).scale(1.0));
    CHECK(conceptual_sensitivity({1.2f, 1.6f}, cav) == doctest::Approx(2.0));
    CHECK_THROWS(conceptual_sensitivity({1.0f}, cav));
}

TEST_CASE("sign-count score counts strictly positive sensitivities") {
    CHECK(sign_count_score({1, 2, 3}) == doctest::Approx(1.0));
    CHECK(sign_count_score({-1, 1}) == doctest::Approx(0.5));
    CHECK(sign_count_score({0, 0, 1}) == doctest::Approx(1.0 / 3.0));
    CHECK(sign_count_score({-5}) == doctest::Approx(0.0));
    CHECK_THROWS(sign_count_score({}));
    CHECK_THROWS(sign_count_score({1.0, std::nan("")}));
}

TEST_CASE("relative TCAV on an antipodal two-concept group is antisymmetric") {
    std::map<std::string, std::vector<std::vector<float>>> group;
    group["a"] = cloud(30, 3, {3, 1, 0}, 0.4, 1);
    group["b"] = cloud(30, 3, {-3, -1, 0}, 0.4, 2);
    auto cavs = train_relative_cavs(group, kDefaultCavL2, 5);
    for (auto& [name, c] : cavs) c.layer = "stage2";
    auto inputs = random_records(41, 3, 3);
    auto res = relative_tcav(cavs, inputs);
    REQUIRE(res.size() == 2);
    CHECK(res.at("a").n_inputs == 41);
    // opposite CAVs flip every sensitivity sign; with continuous gradients no
    // sensitivity is exactly zero, so the scores are exact complements
    CHECK(res.at("a").score + res.at("b").score == doctest::Approx(1.0));
}

TEST_CASE("relative TCAV validates inputs") {
    std::map<std::string, Cav> cavs;
    cavs["a"] = unit_cav({1, 0});
    CHECK_THROWS(relative_tcav(cavs, {}));
    ActivationRecord no_grad;
    no_grad.layer = "stage2";
    no_grad.activation = {1, 0};
    CHECK_THROWS_WITH_AS(relative_tcav(cavs, {no_grad}), doctest::Contains("missing gradient"),
                         std::invalid_argument);
    cavs["a"].layer = "stage1";
    CHECK_THROWS_WITH_AS(relative_tcav(cavs, {record({1, 0})}),
                         doctest::Contains("layer mismatch"), std::invalid_argument);
}

TEST_CASE("constant gradients give exact 0 or 1 scores") {
    auto cav = unit_cav({0, 1});
    cav.layer = "stage2";
    std::map<std::string, Cav> cavs = {{"c", cav}};
    std::vector<ActivationRecord> aligned, opposed;
    for (int i = 0; i < 7; ++i) {
        aligned.push_back(record({0.3f, 2.0f}));
        opposed.push_back(record({0.3f, -2.0f}));
    }
    CHECK(relative_tcav(cavs, aligned).at("c").score == 1.0);
    CHECK(relative_tcav(cavs, opposed).at("c").score == 0.0);
}

TEST_CASE("random directions score near one half on symmetric gradients") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    auto inputs = random_records(200, 8, 18);
    double acc = 0.0;
    const int n_dirs = 30;
    for (int d = 0; d < n_dirs; ++d) {
        std::vector<float> v(8);
        for (auto& x : v) x = static_cast<float>(nd(rng));
        auto cav = unit_cav(v);
        cav.layer = "stage2";
        std::vector<double> sens;
        for (const auto& r : inputs) sens.push_back(conceptual_sensitivity(*r.gradient, cav));
        acc += sign_count_score(sens);
    }
    const double mean_score = acc / n_dirs;
    CHECK(mean_score > 0.35);
    CHECK(mean_score < 0.65);
}

TEST_CASE("scaling every gradient by a positive constant changes no score") {
    std::map<std::string, std::vector<std::vector<float>>> group;
    group["a"] = cloud(20, 4, {2, 0, 0, 0}, 0.5, 21);
    group["b"] = cloud(20, 4, {0, 2, 0, 0}, 0.5, 22);
    auto cavs = train_relative_cavs(group, kDefaultCavL2, 6);
    for (auto& [name, c] : cavs) c.layer = "stage2";
    auto inputs = random_records(33, 4, 23);
    auto base = relative_tcav(cavs, inputs);
    auto scaled_inputs = inputs;
    for (auto& r : scaled_inputs)
        for (auto& g : *r.gradient) g *= 137.0f;
    auto scaled = relative_tcav(cavs, scaled_inputs);
    for (const auto& [name, res] : base) CHECK(scaled.at(name).score == res.score);
}

TEST_CASE("tcav_with_random_sets produces one score per random set") {
    const int dim = 5;
    auto concept_vectors = cloud(25, dim, {4, 0, 0, 0, 0}, 0.5, 31);
    std::vector<std::vector<std::vector<float>>> random_sets;
    for (int s = 0; s < 10; ++s) random_sets.push_back(cloud(25, dim, {0, 0, 0, 0, 0}, 1.0, 40 + s));

    SUBCASE("aligned gradients score 1.0 against every set") {
        std::vector<ActivationRecord> inputs;
        for (int i = 0; i < 12; ++i) inputs.push_back(record({5, 0.1f, -0.1f, 0, 0}, "stage2"));
        auto r = tcav_with_random_sets("motion", concept_vectors, random_sets, inputs,
                                       kDefaultCavL2, 7);
        REQUIRE(r.per_random_set_scores.size() == 10);
        CHECK(r.score == doctest::Approx(1.0));
        CHECK(r.concept_name == "motion");
        CHECK(r.layer == "stage2");
        CHECK(r.cav_accuracy > 0.9);
    }
    SUBCASE("a concept drawn from the random distribution lands near chance") {
        auto fake_concept = cloud(25, dim, {0, 0, 0, 0, 0}, 1.0, 99);
        auto inputs = random_records(60, dim, 77);
        auto r = tcav_with_random_sets("fake", fake_concept, random_sets, inputs,
                                       kDefaultCavL2, 8);
        CHECK(r.score > 0.3);
        CHECK(r.score < 0.7);
    }
    SUBCASE("fewer than two random sets is an error") {
        CHECK_THROWS(tcav_with_random_sets("x", concept_vectors, {random_sets[0]},
                                           random_records(5, dim, 1), kDefaultCavL2, 1));
    }
}

TEST_CASE("random-vs-random null scores cluster around one half") {
    const int dim = 6;
    std::vector<std::vector<std::vector<float>>> random_sets;
    for (int s = 0; s < 8; ++s)
        random_sets.push_back(cloud(30, dim, {0, 0, 0, 0, 0, 0}, 1.0, 200 + s));
    auto inputs = random_records(80, dim, 300);
    auto null_scores = random_vs_random_null_scores(random_sets, inputs, kDefaultCavL2, 9);
    REQUIRE(null_scores.size() == 8);
    double m = 0.0;
    for (double s : null_scores) m += s;
    m /= static_cast<double>(null_scores.size());
    CHECK(m > 0.3);
    CHECK(m < 0.7);
}

TEST_CASE("significance testing") {
    std::vector<double> high = {1.0, 1.0, 0.98, 1.0, 0.97, 1.0, 0.99, 1.0};
    std::vector<double> null_like = {0.45, 0.55, 0.5, 0.6, 0.4, 0.52, 0.48, 0.5};

    SUBCASE("a saturated concept against a chance null is significant") {
        auto r = significance_test(high, null_like, 1, 0.05);
        CHECK(r.significant);
        CHECK(r.p_value < 0.001);
        CHECK(r.corrected_alpha == doctest::Approx(0.05));
    }
    SUBCASE("identical constant samples have p = 1") {
        std::vector<double> c = {0.5, 0.5, 0.5};
        auto r = significance_test(c, c, 1, 0.05);
        CHECK(r.p_value == doctest::Approx(1.0));
        CHECK_FALSE(r.significant);
    }
    SUBCASE("Bonferroni correction shrinks alpha and is monotone") {
        auto r1 = significance_test(high, null_like, 1, 0.05);
        auto r6 = significance_test(high, null_like, 6, 0.05);
        CHECK(r6.corrected_alpha == doctest::Approx(0.05 / 6.0));
        CHECK(r6.p_value == doctest::Approx(r1.p_value));
        // more hypotheses can only remove significance, never add it
        if (r6.significant) CHECK(r1.significant);
    }
    SUBCASE("same-distribution samples are rarely significant") {
        std::mt19937_64 rng(400);
        std::normal_distribution<double> nd(0.5, 0.1);
        int sig = 0;
        const int trials = 50;
        for (int t = 0; t < trials; ++t) {
            std::vector<double> a(8), b(8);
            for (auto& x : a) x = nd(rng);
            for (auto& x : b) x = nd(rng);
            if (significance_test(a, b, 1, 0.05).significant) ++sig;
        }
        CHECK(sig <= trials / 10);
    }
    SUBCASE("input validation") {
        CHECK_THROWS(significance_test({1.0}, null_like, 1, 0.05));
        CHECK_THROWS(significance_test(high, null_like, 0, 0.05));
    }
}

TEST_CASE("relative TCAV agrees with a brute-force recomputation") {
    std::map<std::string, std::vector<std::vector<float>>> group;
    group["a"] = cloud(15, 3, {3, 0, 0}, 0.5, 61);
    group["b"] = cloud(15, 3, {0, 3, 0}, 0.5, 62);
    group["c"] = cloud(15, 3, {0, 0, 3}, 0.5, 63);
    auto cavs = train_relative_cavs(group, kDefaultCavL2, 10);
    for (auto& [name, c] : cavs) c.layer = "stage2";
    auto inputs = random_records(5, 3, 64);
    auto res = relative_tcav(cavs, inputs);
    for (const auto& [name, cav] : cavs) {
        int positive = 0;
        for (const auto& rec : inputs) {
            double s = 0.0;
            for (size_t j = 0; j < 3; ++j)
                s += static_cast<double>((*rec.gradient)[j]) * cav.vector[j];
            if (s > 0) ++positive;
        }
        CHECK(res.at(name).score == doctest::Approx(positive / 5.0));
    }
}
