#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vtcav {

// Dense row-major tensor. Shapes are explicit; no broadcasting, no views.
template <typename T>
struct TensorT {
    std::vector<int64_t> shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(std::vector<int64_t> s) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(numel_of(shape)), T{0});
    }

    TensorT(std::vector<int64_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<int64_t>(data.size()) != numel_of(shape))
            throw std::invalid_argument("tensor data size does not match shape");
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) {
            if (d < 0) throw std::invalid_argument("negative tensor dimension");
            n *= d;
        }
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }

    int64_t dim(size_t i) const {
        if (i >= shape.size()) throw std::out_of_range("tensor dim index");
        return shape[i];
    }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }
};

using Tensor = TensorT<float>;
using DTensor = TensorT<double>;

inline Tensor to_f32(const DTensor& t) {
    Tensor out;
    out.shape = t.shape;
    out.data.reserve(t.data.size());
    for (double v : t.data) out.data.push_back(static_cast<float>(v));
    return out;
}

inline DTensor to_f64(const Tensor& t) {
    DTensor out;
    out.shape = t.shape;
    out.data.assign(t.data.begin(), t.data.end());
    return out;
}

inline std::string shape_str(const std::vector<int64_t>& s) {
    std::string r = "(";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) r += ",";
        r += std::to_string(s[i]);
    }
    return r + ")";
}

}  // namespace vtcav
