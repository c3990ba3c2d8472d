#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "smcforge/errors.hpp"

namespace smcforge::nn {

/// Dense row-major tensor. Rank is whatever the shape says; ops interpret
/// (C,H,W) for activations, (Cout,Cin,K,K) for conv weights and so on.
template <typename S>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<S> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims) : shape(std::move(dims)) {
        data.assign(numel(shape), S(0));
    }

    static std::size_t numel(const std::vector<std::size_t>& dims) {
        std::size_t n = 1;
        for (std::size_t d : dims) n *= d;
        return n;
    }

    [[nodiscard]] std::size_t size() const { return data.size(); }
    [[nodiscard]] bool same_shape(const Tensor& other) const { return shape == other.shape; }

    S& operator[](std::size_t i) { return data[i]; }
    const S& operator[](std::size_t i) const { return data[i]; }

    void fill(S v) { std::fill(data.begin(), data.end(), v); }
    void zero() { fill(S(0)); }

    template <typename T>
    [[nodiscard]] Tensor<T> cast() const {
        Tensor<T> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
        return out;
    }
};

template <typename S>
inline void require_shape(const Tensor<S>& t, std::initializer_list<std::size_t> dims,
                          const char* what) {
    if (t.shape.size() != dims.size()) {
        throw ValidationError(std::string(what) + ": rank " + std::to_string(t.shape.size()) +
                              ", expected " + std::to_string(dims.size()));
    }
    std::size_t i = 0;
    for (std::size_t d : dims) {
        if (t.shape[i] != d) {
            throw ValidationError(std::string(what) + ": dim " + std::to_string(i) + " is " +
                                  std::to_string(t.shape[i]) + ", expected " + std::to_string(d));
        }
        ++i;
    }
}

}  // namespace smcforge::nn
