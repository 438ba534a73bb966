#include "vtcav/cav.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace vtcav {

std::string pool_mode_name(PoolMode m) {
    return m == PoolMode::flatten ? "flatten" : "spatial_mean";
}

PoolMode pool_mode_from_name(const std::string& s) {
    if (s == "flatten") return PoolMode::flatten;
    if (s == "spatial_mean") return PoolMode::spatial_mean;
    throw std::invalid_argument("unknown pooling mode: " + s);
}

template <typename T>
static std::vector<float> pool_impl(const TensorT<T>& raw, PoolMode mode) {
    for (T v : raw.data)
        if (!std::isfinite(static_cast<double>(v)))
            throw std::invalid_argument("pool_activation: non-finite input");
    if (mode == PoolMode::flatten) {
        std::vector<float> out(raw.data.size());
        for (size_t i = 0; i < raw.data.size(); ++i) out[i] = static_cast<float>(raw.data[i]);
        return out;
    }
    if (raw.shape.empty()) throw std::invalid_argument("pool_activation: scalar input");
    const int64_t c = raw.shape.back();
    const int64_t n_pos = raw.numel() / c;
    std::vector<double> acc(static_cast<size_t>(c), 0.0);
    for (int64_t p = 0; p < n_pos; ++p)
        for (int64_t ch = 0; ch < c; ++ch) acc[ch] += static_cast<double>(raw.data[p * c + ch]);
    std::vector<float> out(static_cast<size_t>(c));
    for (int64_t ch = 0; ch < c; ++ch) out[ch] = static_cast<float>(acc[ch] / n_pos);
    return out;
}

std::vector<float> pool_activation(const DTensor& raw, PoolMode mode) { return pool_impl(raw, mode); }
std::vector<float> pool_activation(const Tensor& raw, PoolMode mode) { return pool_impl(raw, mode); }

namespace {

struct Dataset {
    std::vector<const std::vector<float>*> x;
    std::vector<double> y;  // +1 / -1
};

double objective(const Dataset& d, const std::vector<double>& w, double b, double l2,
                 std::vector<double>* grad_w = nullptr, double* grad_b = nullptr) {
    const size_t n = d.x.size(), dim = w.size();
    double loss = 0.0;
    if (grad_w) {
        grad_w->assign(dim, 0.0);
        *grad_b = 0.0;
    }
    for (size_t i = 0; i < n; ++i) {
        const auto& xi = *d.x[i];
        double m = b;
        for (size_t j = 0; j < dim; ++j) m += w[j] * xi[j];
        const double ym = d.y[i] * m;
        // log(1 + exp(-ym)), stable
        loss += ym > 0 ? std::log1p(std::exp(-ym)) : -ym + std::log1p(std::exp(ym));
        if (grad_w) {
            const double s = -d.y[i] / (1.0 + std::exp(ym));
            for (size_t j = 0; j < dim; ++j) (*grad_w)[j] += s * xi[j];
            *grad_b += s;
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    loss *= inv;
    double reg = 0.0;
    for (double v : w) reg += v * v;
    loss += 0.5 * l2 * reg;
    if (grad_w) {
        for (size_t j = 0; j < dim; ++j) (*grad_w)[j] = (*grad_w)[j] * inv + l2 * w[j];
        *grad_b *= inv;
    }
    return loss;
}

// Full-batch gradient descent with Armijo backtracking. Deterministic.
void fit_logistic(const Dataset& d, size_t dim, double l2, std::vector<double>& w, double& b) {
    w.assign(dim, 0.0);
    b = 0.0;
    std::vector<double> gw;
    double gb = 0.0;
    double step = 1.0;
    const int max_iter = 5000;
    const double tol = 1e-5;
    for (int it = 0; it < max_iter; ++it) {
        double f = objective(d, w, b, l2, &gw, &gb);
        double gnorm2 = gb * gb;
        for (double g : gw) gnorm2 += g * g;
        if (std::sqrt(gnorm2) < tol) break;

        step = std::min(step * 2.0, 1e4);
        std::vector<double> w_new(dim);
        double b_new;
        for (;;) {
            for (size_t j = 0; j < dim; ++j) w_new[j] = w[j] - step * gw[j];
            b_new = b - step * gb;
            double f_new = objective(d, w_new, b_new, l2);
            if (f_new <= f - 1e-4 * step * gnorm2 || step < 1e-12) break;
            step *= 0.5;
        }
        w.swap(w_new);
        b = b_new;
    }
}

double accuracy_on(const std::vector<const std::vector<float>*>& pos,
                   const std::vector<const std::vector<float>*>& neg,
                   const std::vector<double>& w, double b) {
    int correct = 0;
    for (const auto* x : pos) {
        double m = b;
        for (size_t j = 0; j < w.size(); ++j) m += w[j] * (*x)[j];
        if (m > 0) ++correct;
    }
    for (const auto* x : neg) {
        double m = b;
        for (size_t j = 0; j < w.size(); ++j) m += w[j] * (*x)[j];
        if (m <= 0) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(pos.size() + neg.size());
}

}  // namespace

Cav train_cav(const std::vector<std::vector<float>>& positives,
              const std::vector<std::vector<float>>& negatives, double l2, uint64_t seed) {
    if (positives.size() < 2 || negatives.size() < 2)
        throw std::invalid_argument("train_cav: need >= 2 vectors per side");
    const size_t dim = positives.front().size();
    for (const auto& v : positives)
        if (v.size() != dim) throw std::invalid_argument("train_cav: dimension mismatch");
    for (const auto& v : negatives)
        if (v.size() != dim) throw std::invalid_argument("train_cav: dimension mismatch");

    bool all_same = true;
    for (const auto& v : positives)
        if (v != positives.front()) { all_same = false; break; }
    if (all_same)
        for (const auto& v : negatives)
            if (v != positives.front()) { all_same = false; break; }
    if (all_same) throw std::invalid_argument("inseparable degenerate data");

    // seeded stratified 80/20 split for held-out accuracy
    std::mt19937_64 rng(seed);
    auto split = [&rng](size_t n) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        size_t held = std::max<size_t>(1, n / 5);
        return std::pair{std::vector<size_t>(idx.begin(), idx.begin() + held),
                         std::vector<size_t>(idx.begin() + held, idx.end())};
    };
    auto [pos_held, pos_train] = split(positives.size());
    auto [neg_held, neg_train] = split(negatives.size());

    Dataset d;
    for (size_t i : pos_train) {
        d.x.push_back(&positives[i]);
        d.y.push_back(1.0);
    }
    for (size_t i : neg_train) {
        d.x.push_back(&negatives[i]);
        d.y.push_back(-1.0);
    }

    std::vector<double> w;
    double b = 0.0;
    fit_logistic(d, dim, l2, w, b);

    std::vector<const std::vector<float>*> ph, nh;
    for (size_t i : pos_held) ph.push_back(&positives[i]);
    for (size_t i : neg_held) nh.push_back(&negatives[i]);
    double heldout = accuracy_on(ph, nh, w, b);

    double norm = 0.0;
    for (double v : w) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::invalid_argument("inseparable degenerate data");

    // orientation: mean projection of positives must exceed that of negatives
    double mp = 0.0, mn = 0.0;
    for (const auto& x : positives)
        for (size_t j = 0; j < dim; ++j) mp += w[j] * x[j];
    for (const auto& x : negatives)
        for (size_t j = 0; j < dim; ++j) mn += w[j] * x[j];
    mp /= static_cast<double>(positives.size());
    mn /= static_cast<double>(negatives.size());
    double sign = mp > mn ? 1.0 : -1.0;

    Cav cav;
    cav.vector.resize(dim);
    for (size_t j = 0; j < dim; ++j) cav.vector[j] = static_cast<float>(sign * w[j] / norm);
    cav.bias = static_cast<float>(sign * -b / norm);
    cav.heldout_accuracy = static_cast<float>(heldout);
    cav.trainer_seed = seed;
    return cav;
}

std::map<std::string, Cav> train_relative_cavs(
    const std::map<std::string, std::vector<std::vector<float>>>& group, double l2,
    uint64_t seed) {
    if (group.size() < 2)
        throw std::invalid_argument("train_relative_cavs: need >= 2 concepts in group");
    std::map<std::string, Cav> out;
    for (const auto& [name, positives] : group) {
        std::vector<std::vector<float>> negatives;
        for (const auto& [other, vecs] : group) {
            if (other == name) continue;
            negatives.insert(negatives.end(), vecs.begin(), vecs.end());
        }
        Cav cav = train_cav(positives, negatives, l2, seed);
        cav.concept_name = name;
        cav.negatives_descriptor = "rest-of-group";
        out.emplace(name, std::move(cav));
    }
    return out;
}

double cav_validation_accuracy(const Cav& cav, const std::vector<std::vector<float>>& positives,
                               const std::vector<std::vector<float>>& negatives) {
    const size_t dim = cav.vector.size();
    int correct = 0;
    size_t total = positives.size() + negatives.size();
    if (total == 0) throw std::invalid_argument("cav_validation_accuracy: empty data");
    auto margin = [&](const std::vector<float>& x) {
        if (x.size() != dim)
            throw std::invalid_argument("cav_validation_accuracy: dimension mismatch");
        double m = -static_cast<double>(cav.bias);
        for (size_t j = 0; j < dim; ++j) m += static_cast<double>(cav.vector[j]) * x[j];
        return m;
    };
    for (const auto& x : positives)
        if (margin(x) > 0) ++correct;
    for (const auto& x : negatives)
        if (margin(x) <= 0) ++correct;
    return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace vtcav
