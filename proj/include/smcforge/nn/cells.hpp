#pragma once

#include <cmath>
#include <cstdint>

#include "smcforge/nn/ops.hpp"
#include "smcforge/nn/tensor.hpp"
#include "smcforge/rng.hpp"

// Recurrent cells with explicit step forward/backward, no peephole terms.
// Gate pre-activations are stacked along the channel axis in the fixed order
// [input, forget, cell, output], so slice g of a (4*hidden, ...) tensor
// starts at g*hidden.

namespace smcforge::nn {

namespace detail {

/// He-uniform fill: U(-sqrt(6/fan_in), +sqrt(6/fan_in)), one sub-key per
/// element so values do not depend on traversal order.
template <typename S>
void he_uniform(Tensor<S>& t, std::size_t fan_in, rng::Key key) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.size(); ++i) {
        t.data[i] = static_cast<S>(rng::uniform(key.derive(i), -limit, limit));
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ConvLSTM

template <typename S>
struct ConvLstmParams {
    Tensor<S> w_x;  // (4*hidden, in, K, K)
    Tensor<S> w_h;  // (4*hidden, hidden, K, K)
    Tensor<S> b;    // (4*hidden)

    std::size_t in_channels = 0;
    std::size_t hidden = 0;
    std::size_t k = 3;

    static ConvLstmParams sized(std::size_t in_channels, std::size_t hidden, std::size_t k) {
        ConvLstmParams p;
        p.in_channels = in_channels;
        p.hidden = hidden;
        p.k = k;
        p.w_x = Tensor<S>({4 * hidden, in_channels, k, k});
        p.w_h = Tensor<S>({4 * hidden, hidden, k, k});
        p.b = Tensor<S>({4 * hidden});
        return p;
    }

    /// Seeded init; forget-gate bias starts at +1 so early training keeps
    /// state instead of flushing it.
    void init(rng::Key key) {
        detail::he_uniform(w_x, in_channels * k * k, key.derive(1));
        detail::he_uniform(w_h, hidden * k * k, key.derive(2));
        b.zero();
        for (std::size_t i = hidden; i < 2 * hidden; ++i) b.data[i] = S(1);
    }

    [[nodiscard]] ConvLstmParams zeros_like() const {
        return sized(in_channels, hidden, k);
    }
};

template <typename S>
struct ConvLstmCache {
    Tensor<S> x, h_prev, c_prev;
    Tensor<S> i, f, g, o;  // post-activation gates, each (hidden,H,W)
    Tensor<S> tanh_c;
};

template <typename S>
void convlstm_step(const ConvLstmParams<S>& p, const Tensor<S>& x, const Tensor<S>& h_prev,
                   const Tensor<S>& c_prev, Tensor<S>& h, Tensor<S>& c,
                   ConvLstmCache<S>* cache = nullptr) {
    // a = W_x * x + W_h * h_prev + b, stacked gates
    Tensor<S> a = conv2d(x, p.w_x, p.b, 1);
    {
        Tensor<S> zero_b({4 * p.hidden});
        const Tensor<S> ah = conv2d(h_prev, p.w_h, zero_b, 1);
        for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += ah.data[i];
    }
    const std::size_t plane = a.shape[1] * a.shape[2];
    const std::size_t n = p.hidden * plane;

    Tensor<S> gi({p.hidden, a.shape[1], a.shape[2]});
    Tensor<S> gf = gi;
    Tensor<S> gg = gi;
    Tensor<S> go = gi;
    for (std::size_t j = 0; j < n; ++j) {
        gi.data[j] = sigmoid(a.data[j]);
        gf.data[j] = sigmoid(a.data[n + j]);
        gg.data[j] = std::tanh(a.data[2 * n + j]);
        go.data[j] = sigmoid(a.data[3 * n + j]);
    }

    c = Tensor<S>({p.hidden, a.shape[1], a.shape[2]});
    h = Tensor<S>({p.hidden, a.shape[1], a.shape[2]});
    Tensor<S> tc = c;
    for (std::size_t j = 0; j < n; ++j) {
        c.data[j] = gf.data[j] * c_prev.data[j] + gi.data[j] * gg.data[j];
        tc.data[j] = std::tanh(c.data[j]);
        h.data[j] = go.data[j] * tc.data[j];
    }

    if (cache != nullptr) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->c_prev = c_prev;
        cache->i = std::move(gi);
        cache->f = std::move(gf);
        cache->g = std::move(gg);
        cache->o = std::move(go);
        cache->tanh_c = std::move(tc);
    }
}

/// Reverse of one step. dh/dc_in are gradients flowing in from the future;
/// dx, dh_prev, dc_prev come out accumulated, grads collects dW/db.
template <typename S>
void convlstm_step_backward(const ConvLstmParams<S>& p, const ConvLstmCache<S>& cache,
                            const Tensor<S>& dh, const Tensor<S>& dc_in,
                            ConvLstmParams<S>& grads, Tensor<S>& dx, Tensor<S>& dh_prev,
                            Tensor<S>& dc_prev) {
    const std::size_t hh = cache.i.shape[1];
    const std::size_t ww = cache.i.shape[2];
    const std::size_t n = p.hidden * hh * ww;

    Tensor<S> da({4 * p.hidden, hh, ww});
    for (std::size_t j = 0; j < n; ++j) {
        const S i_ = cache.i.data[j];
        const S f_ = cache.f.data[j];
        const S g_ = cache.g.data[j];
        const S o_ = cache.o.data[j];
        const S tc = cache.tanh_c.data[j];

        const S do_ = dh.data[j] * tc;
        const S dc = dc_in.data[j] + dh.data[j] * o_ * (S(1) - tc * tc);

        dc_prev.data[j] += dc * f_;
        const S di = dc * g_;
        const S df = dc * cache.c_prev.data[j];
        const S dg = dc * i_;

        da.data[j] = di * i_ * (S(1) - i_);
        da.data[n + j] = df * f_ * (S(1) - f_);
        da.data[2 * n + j] = dg * (S(1) - g_ * g_);
        da.data[3 * n + j] = do_ * o_ * (S(1) - o_);
    }

    conv2d_backward(cache.x, p.w_x, std::size_t(1), da, dx, grads.w_x, grads.b);
    Tensor<S> db_unused({4 * p.hidden});
    conv2d_backward(cache.h_prev, p.w_h, std::size_t(1), da, dh_prev, grads.w_h, db_unused);
}

// ---------------------------------------------------------------------------
// Dense LSTM

template <typename S>
struct LstmParams {
    Tensor<S> w_x;  // (4*hidden, in)
    Tensor<S> w_h;  // (4*hidden, hidden)
    Tensor<S> b;    // (4*hidden)

    std::size_t in_features = 0;
    std::size_t hidden = 0;

    static LstmParams sized(std::size_t in_features, std::size_t hidden) {
        LstmParams p;
        p.in_features = in_features;
        p.hidden = hidden;
        p.w_x = Tensor<S>({4 * hidden, in_features});
        p.w_h = Tensor<S>({4 * hidden, hidden});
        p.b = Tensor<S>({4 * hidden});
        return p;
    }

    void init(rng::Key key) {
        detail::he_uniform(w_x, in_features, key.derive(1));
        detail::he_uniform(w_h, hidden, key.derive(2));
        b.zero();
        for (std::size_t i = hidden; i < 2 * hidden; ++i) b.data[i] = S(1);
    }

    [[nodiscard]] LstmParams zeros_like() const { return sized(in_features, hidden); }
};

template <typename S>
struct LstmCache {
    Tensor<S> x, h_prev, c_prev;
    Tensor<S> i, f, g, o;
    Tensor<S> tanh_c;
};

template <typename S>
void lstm_step(const LstmParams<S>& p, const Tensor<S>& x, const Tensor<S>& h_prev,
               const Tensor<S>& c_prev, Tensor<S>& h, Tensor<S>& c,
               LstmCache<S>* cache = nullptr) {
    require_shape(x, {p.in_features}, "lstm_step x");
    require_shape(h_prev, {p.hidden}, "lstm_step h_prev");
    const std::size_t n = p.hidden;

    Tensor<S> a({4 * n});
    for (std::size_t r = 0; r < 4 * n; ++r) {
        S acc = p.b.data[r];
        const S* wx = p.w_x.data.data() + r * p.in_features;
        for (std::size_t cidx = 0; cidx < p.in_features; ++cidx) acc += wx[cidx] * x.data[cidx];
        const S* wh = p.w_h.data.data() + r * n;
        for (std::size_t cidx = 0; cidx < n; ++cidx) acc += wh[cidx] * h_prev.data[cidx];
        a.data[r] = acc;
    }

    Tensor<S> gi({n});
    Tensor<S> gf({n});
    Tensor<S> gg({n});
    Tensor<S> go({n});
    for (std::size_t j = 0; j < n; ++j) {
        gi.data[j] = sigmoid(a.data[j]);
        gf.data[j] = sigmoid(a.data[n + j]);
        gg.data[j] = std::tanh(a.data[2 * n + j]);
        go.data[j] = sigmoid(a.data[3 * n + j]);
    }
    c = Tensor<S>({n});
    h = Tensor<S>({n});
    Tensor<S> tc({n});
    for (std::size_t j = 0; j < n; ++j) {
        c.data[j] = gf.data[j] * c_prev.data[j] + gi.data[j] * gg.data[j];
        tc.data[j] = std::tanh(c.data[j]);
        h.data[j] = go.data[j] * tc.data[j];
    }
    if (cache != nullptr) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->c_prev = c_prev;
        cache->i = std::move(gi);
        cache->f = std::move(gf);
        cache->g = std::move(gg);
        cache->o = std::move(go);
        cache->tanh_c = std::move(tc);
    }
}

template <typename S>
void lstm_step_backward(const LstmParams<S>& p, const LstmCache<S>& cache, const Tensor<S>& dh,
                        const Tensor<S>& dc_in, LstmParams<S>& grads, Tensor<S>& dx,
                        Tensor<S>& dh_prev, Tensor<S>& dc_prev) {
    const std::size_t n = p.hidden;
    Tensor<S> da({4 * n});
    for (std::size_t j = 0; j < n; ++j) {
        const S i_ = cache.i.data[j];
        const S f_ = cache.f.data[j];
        const S g_ = cache.g.data[j];
        const S o_ = cache.o.data[j];
        const S tc = cache.tanh_c.data[j];

        const S do_ = dh.data[j] * tc;
        const S dc = dc_in.data[j] + dh.data[j] * o_ * (S(1) - tc * tc);
        dc_prev.data[j] += dc * f_;
        const S di = dc * g_;
        const S df = dc * cache.c_prev.data[j];
        const S dg = dc * i_;

        da.data[j] = di * i_ * (S(1) - i_);
        da.data[n + j] = df * f_ * (S(1) - f_);
        da.data[2 * n + j] = dg * (S(1) - g_ * g_);
        da.data[3 * n + j] = do_ * o_ * (S(1) - o_);
    }

    for (std::size_t r = 0; r < 4 * n; ++r) {
        const S g = da.data[r];
        grads.b.data[r] += g;
        S* dwx = grads.w_x.data.data() + r * p.in_features;
        const S* wx = p.w_x.data.data() + r * p.in_features;
        for (std::size_t cidx = 0; cidx < p.in_features; ++cidx) {
            dwx[cidx] += g * cache.x.data[cidx];
            dx.data[cidx] += g * wx[cidx];
        }
        S* dwh = grads.w_h.data.data() + r * n;
        const S* wh = p.w_h.data.data() + r * n;
        for (std::size_t cidx = 0; cidx < n; ++cidx) {
            dwh[cidx] += g * cache.h_prev.data[cidx];
            dh_prev.data[cidx] += g * wh[cidx];
        }
    }
}

// ---------------------------------------------------------------------------
// Dense linear head

template <typename S>
struct LinearParams {
    Tensor<S> w;  // (out, in)
    Tensor<S> b;  // (out)
    std::size_t in_features = 0;
    std::size_t out_features = 0;

    static LinearParams sized(std::size_t in_features, std::size_t out_features) {
        LinearParams p;
        p.in_features = in_features;
        p.out_features = out_features;
        p.w = Tensor<S>({out_features, in_features});
        p.b = Tensor<S>({out_features});
        return p;
    }

    void init(rng::Key key) { detail::he_uniform(w, in_features, key.derive(1)); }

    [[nodiscard]] LinearParams zeros_like() const { return sized(in_features, out_features); }
};

template <typename S>
Tensor<S> linear(const LinearParams<S>& p, const Tensor<S>& x) {
    require_shape(x, {p.in_features}, "linear x");
    Tensor<S> y({p.out_features});
    for (std::size_t r = 0; r < p.out_features; ++r) {
        S acc = p.b.data[r];
        const S* w = p.w.data.data() + r * p.in_features;
        for (std::size_t c = 0; c < p.in_features; ++c) acc += w[c] * x.data[c];
        y.data[r] = acc;
    }
    return y;
}

template <typename S>
void linear_backward(const LinearParams<S>& p, const Tensor<S>& x, const Tensor<S>& dy,
                     LinearParams<S>& grads, Tensor<S>& dx) {
    for (std::size_t r = 0; r < p.out_features; ++r) {
        const S g = dy.data[r];
        grads.b.data[r] += g;
        S* dw = grads.w.data.data() + r * p.in_features;
        const S* w = p.w.data.data() + r * p.in_features;
        for (std::size_t c = 0; c < p.in_features; ++c) {
            dw[c] += g * x.data[c];
            dx.data[c] += g * w[c];
        }
    }
}

}  // namespace smcforge::nn
