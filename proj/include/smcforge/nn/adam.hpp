#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "smcforge/nn/tensor.hpp"

namespace smcforge::nn {

/// Adam with bias correction and optional global-norm gradient clipping.
/// Moment buffers are public so checkpoints can round-trip them exactly.
template <typename S>
class Adam {
public:
    explicit Adam(S lr, S beta1 = S(0.9), S beta2 = S(0.999), S eps = S(1e-8))
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    /// One update over parallel param/grad lists. clip_norm <= 0 disables
    /// clipping; otherwise the whole gradient vector is rescaled when its
    /// L2 norm exceeds clip_norm.
    void step(const std::vector<Tensor<S>*>& params, const std::vector<Tensor<S>*>& grads,
              S clip_norm = S(0)) {
        if (params.size() != grads.size()) {
            throw ValidationError("Adam::step: param/grad list length mismatch");
        }
        if (m_.empty()) {
            for (const Tensor<S>* p : params) {
                m_.emplace_back(p->shape);
                v_.emplace_back(p->shape);
            }
        }
        if (m_.size() != params.size()) {
            throw ValidationError("Adam::step: parameter list changed size");
        }

        S scale = S(1);
        if (clip_norm > S(0)) {
            double sq = 0.0;
            for (const Tensor<S>* g : grads) {
                for (const S v : g->data) sq += static_cast<double>(v) * v;
            }
            const double norm = std::sqrt(sq);
            if (norm > static_cast<double>(clip_norm)) {
                scale = static_cast<S>(static_cast<double>(clip_norm) / norm);
            }
        }

        ++t_;
        const S bc1 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta1_), t_));
        const S bc2 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta2_), t_));
        for (std::size_t p = 0; p < params.size(); ++p) {
            Tensor<S>& param = *params[p];
            const Tensor<S>& grad = *grads[p];
            if (!param.same_shape(grad) || !param.same_shape(m_[p])) {
                throw ValidationError("Adam::step: shape mismatch at slot " + std::to_string(p));
            }
            for (std::size_t i = 0; i < param.size(); ++i) {
                const S g = grad.data[i] * scale;
                m_[p].data[i] = beta1_ * m_[p].data[i] + (S(1) - beta1_) * g;
                v_[p].data[i] = beta2_ * v_[p].data[i] + (S(1) - beta2_) * g * g;
                const S m_hat = m_[p].data[i] / bc1;
                const S v_hat = v_[p].data[i] / bc2;
                param.data[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
            }
        }
    }

    [[nodiscard]] std::uint64_t t() const { return t_; }
    [[nodiscard]] S lr() const { return lr_; }
    void set_lr(S lr) { lr_ = lr; }

    [[nodiscard]] std::vector<Tensor<S>>& moments_m() { return m_; }
    [[nodiscard]] std::vector<Tensor<S>>& moments_v() { return v_; }
    [[nodiscard]] const std::vector<Tensor<S>>& moments_m() const { return m_; }
    [[nodiscard]] const std::vector<Tensor<S>>& moments_v() const { return v_; }
    void restore(std::vector<Tensor<S>> m, std::vector<Tensor<S>> v, std::uint64_t t) {
        m_ = std::move(m);
        v_ = std::move(v);
        t_ = t;
    }

private:
    S lr_;
    S beta1_;
    S beta2_;
    S eps_;
    std::uint64_t t_ = 0;
    std::vector<Tensor<S>> m_;
    std::vector<Tensor<S>> v_;
};

}  // namespace smcforge::nn
