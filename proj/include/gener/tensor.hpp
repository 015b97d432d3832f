#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "gener/errors.hpp"

namespace gener::net {

// Dense row-major tensor. Rank is dynamic; the layers only use ranks 1-3.
template <class Real>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<Real> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), data(count(shape), Real(0)) {}
    Tensor(std::vector<std::size_t> s, std::vector<Real> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != count(shape))
            throw GenerError(errc::shape_mismatch, fail_class::data,
                             "tensor data does not match shape");
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
    }

    std::size_t size() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape[i]; }
    std::size_t rank() const { return shape.size(); }

    Real& operator[](std::size_t i) { return data[i]; }
    Real operator[](std::size_t i) const { return data[i]; }

    Real& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    Real at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

    Real& at(std::size_t b, std::size_t c, std::size_t i) {
        return data[(b * shape[1] + c) * shape[2] + i];
    }
    Real at(std::size_t b, std::size_t c, std::size_t i) const {
        return data[(b * shape[1] + c) * shape[2] + i];
    }

    void fill(Real v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

template <class Real>
void require_shape(const Tensor<Real>& t, std::initializer_list<std::size_t> shape,
                   const char* what) {
    bool ok = t.shape.size() == shape.size();
    if (ok) {
        std::size_t i = 0;
        for (std::size_t d : shape) ok = ok && t.shape[i++] == d;
    }
    if (!ok)
        throw GenerError(errc::shape_mismatch, fail_class::data,
                         std::string("unexpected tensor shape for ") + what);
}

}  // namespace gener::net
