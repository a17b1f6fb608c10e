#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lsmu/errors.hpp"

namespace lsmu {

// Dense row-major tensor of doubles. Values are stored in 64-bit throughout;
// the on-disk dataset and checkpoint formats are 32-bit floats (see
// dataset.hpp / checkpoint.hpp).
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(numel(shape)), 0.0);
    }
    Tensor(std::vector<std::int64_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (numel(shape) != static_cast<std::int64_t>(data.size()))
            throw ConfigError("tensor shape/data size mismatch");
    }

    static std::int64_t numel(const std::vector<std::int64_t>& s) {
        std::int64_t n = 1;
        for (auto d : s) {
            if (d < 0) throw ConfigError("negative tensor dimension");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<std::int64_t> s) { return Tensor(std::move(s)); }

    static Tensor full(std::vector<std::int64_t> s, double v) {
        Tensor t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor vector(std::vector<double> d) {
        const auto n = static_cast<std::int64_t>(d.size());
        return Tensor({n}, std::move(d));
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    std::int64_t dim(std::size_t i) const { return shape.at(i); }
    std::size_t rank() const { return shape.size(); }

    double& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    // 2-D access, row-major.
    double& at2(std::int64_t r, std::int64_t c) { return data[static_cast<std::size_t>(r * shape[1] + c)]; }
    double at2(std::int64_t r, std::int64_t c) const { return data[static_cast<std::size_t>(r * shape[1] + c)]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << ")";
        return os.str();
    }
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw ConfigError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace lsmu
