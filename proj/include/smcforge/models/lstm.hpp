#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smcforge/errors.hpp"
#include "smcforge/nn/cells.hpp"
#include "smcforge/nn/tensor.hpp"
#include "smcforge/raster.hpp"
#include "smcforge/rng.hpp"

// Sensor-fused site forecaster: a two-layer dense LSTM over the per-day
// feature vectors of one site (EO features averaged over the 3x3 pixel
// neighbourhood, weather, seasonal clock, and the site's own lagged sensor
// reading), finished by a linear head that emits all K horizon values at
// once through a sigmoid rescaled to [theta_r, theta_s].

namespace smcforge::models {

struct SiteLstmConfig {
    std::size_t in_features = raster::kFeatureChannelCount;
    std::size_t hidden = 64;
    std::size_t horizon = 3;  // K values out
    std::size_t t_in = 10;    // history length used in training windows
    float theta_r = 0.05f;
    float theta_s = 0.45f;

    void validate() const {
        if (in_features == 0 || hidden == 0) throw ValidationError("SiteLstmConfig: zero width");
        if (horizon < 1) throw ValidationError("SiteLstmConfig: need K >= 1");
        if (t_in < 1) throw ValidationError("SiteLstmConfig: need T >= 1");
        if (!(theta_r < theta_s)) throw ValidationError("SiteLstmConfig: need theta_r < theta_s");
    }
};

template <typename S>
struct SiteLstmParams {
    nn::LstmParams<S> l1, l2;
    nn::LinearParams<S> head;  // hidden -> horizon
};

template <typename S>
struct SiteLstmForward {
    nn::Tensor<S> preds;  // (horizon), in [theta_r, theta_s]
    bool cached = false;
    std::vector<nn::LstmCache<S>> c1, c2;
    nn::Tensor<S> h2_last;
    nn::Tensor<S> sig;  // sigmoid(head(h2_last))
};

template <typename S>
class SiteLstm {
public:
    SiteLstmConfig cfg;
    SiteLstmParams<S> p;

    explicit SiteLstm(const SiteLstmConfig& config) : cfg(config) {
        cfg.validate();
        p.l1 = nn::LstmParams<S>::sized(cfg.in_features, cfg.hidden);
        p.l2 = nn::LstmParams<S>::sized(cfg.hidden, cfg.hidden);
        p.head = nn::LinearParams<S>::sized(cfg.hidden, cfg.horizon);
    }

    /// Seeded fill; the head stays zero so an untrained model predicts the
    /// sigmoid midpoint (theta_r + theta_s) / 2 for every horizon step.
    void init(std::uint64_t seed) {
        const rng::Key root(seed);
        p.l1.init(root.derive(1));
        p.l2.init(root.derive(2));
        // head stays zero.
    }

    /// steps: the site's day-by-day feature vectors, oldest first.  Any
    /// non-empty length is accepted (cfg.t_in is the training convention).
    SiteLstmForward<S> forward(const std::vector<nn::Tensor<S>>& steps,
                               bool want_cache = false) const {
        if (steps.empty()) throw ValidationError("site lstm: empty history");
        for (const auto& s : steps) nn::require_shape(s, {cfg.in_features}, "site lstm step");

        SiteLstmForward<S> out;
        out.cached = want_cache;
        nn::Tensor<S> h1({cfg.hidden}), c1 = h1, h2 = h1, c2 = h1;
        for (const auto& x : steps) {
            nn::Tensor<S> h1n, c1n, h2n, c2n;
            nn::LstmCache<S> cc1, cc2;
            nn::lstm_step(p.l1, x, h1, c1, h1n, c1n, want_cache ? &cc1 : nullptr);
            nn::lstm_step(p.l2, h1n, h2, c2, h2n, c2n, want_cache ? &cc2 : nullptr);
            h1 = std::move(h1n);
            c1 = std::move(c1n);
            h2 = std::move(h2n);
            c2 = std::move(c2n);
            if (want_cache) {
                out.c1.push_back(std::move(cc1));
                out.c2.push_back(std::move(cc2));
            }
        }

        nn::Tensor<S> sig = nn::linear(p.head, h2);
        nn::sigmoid_inplace(sig);
        out.preds = nn::Tensor<S>({cfg.horizon});
        const S lo = S(cfg.theta_r);
        const S range = S(cfg.theta_s) - S(cfg.theta_r);
        for (std::size_t i = 0; i < sig.size(); ++i) out.preds.data[i] = lo + range * sig.data[i];
        if (want_cache) {
            out.h2_last = std::move(h2);
            out.sig = std::move(sig);
        }
        return out;
    }

    void backward(const SiteLstmForward<S>& fwd, const nn::Tensor<S>& dpreds,
                  SiteLstmParams<S>& g) const {
        if (!fwd.cached) throw ValidationError("site lstm backward: forward kept no caches");
        nn::require_shape(dpreds, {cfg.horizon}, "site lstm dpreds");
        const S range = S(cfg.theta_s) - S(cfg.theta_r);

        nn::Tensor<S> dsig({cfg.horizon});
        for (std::size_t i = 0; i < dsig.size(); ++i) dsig.data[i] = dpreds.data[i] * range;
        nn::Tensor<S> dlogits({cfg.horizon});
        nn::sigmoid_backward(fwd.sig, dsig, dlogits);

        nn::Tensor<S> dh2({cfg.hidden});
        nn::linear_backward(p.head, fwd.h2_last, dlogits, g.head, dh2);

        nn::Tensor<S> dh1({cfg.hidden}), dc1 = dh1, dc2 = dh1;
        for (std::size_t t = fwd.c1.size(); t-- > 0;) {
            nn::Tensor<S> dx2({cfg.hidden}), dh2p(dx2.shape), dc2p(dx2.shape);
            nn::lstm_step_backward(p.l2, fwd.c2[t], dh2, dc2, g.l2, dx2, dh2p, dc2p);
            for (std::size_t i = 0; i < dh1.size(); ++i) dh1.data[i] += dx2.data[i];

            nn::Tensor<S> dx({cfg.in_features});
            nn::Tensor<S> dh1p({cfg.hidden}), dc1p(dh1p.shape);
            nn::lstm_step_backward(p.l1, fwd.c1[t], dh1, dc1, g.l1, dx, dh1p, dc1p);

            dh1 = std::move(dh1p);
            dc1 = std::move(dc1p);
            dh2 = std::move(dh2p);
            dc2 = std::move(dc2p);
        }
    }

    [[nodiscard]] SiteLstmParams<S> zero_grads() const {
        SiteLstmParams<S> g;
        g.l1 = p.l1.zeros_like();
        g.l2 = p.l2.zeros_like();
        g.head = p.head.zeros_like();
        return g;
    }

    static std::vector<std::pair<std::string, nn::Tensor<S>*>> named_tensors(
        SiteLstmParams<S>& q) {
        return {
            {"l1.w_x", &q.l1.w_x}, {"l1.w_h", &q.l1.w_h}, {"l1.b", &q.l1.b},
            {"l2.w_x", &q.l2.w_x}, {"l2.w_h", &q.l2.w_h}, {"l2.b", &q.l2.b},
            {"head.w", &q.head.w}, {"head.b", &q.head.b},
        };
    }

    std::vector<std::pair<std::string, nn::Tensor<S>*>> named_params() {
        return named_tensors(p);
    }
};

}  // namespace smcforge::models
