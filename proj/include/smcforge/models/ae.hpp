#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smcforge/errors.hpp"
#include "smcforge/nn/cells.hpp"
#include "smcforge/nn/ops.hpp"
#include "smcforge/nn/tensor.hpp"
#include "smcforge/raster.hpp"
#include "smcforge/rng.hpp"

// EO-only map forecaster: a sequence-to-sequence encoder-decoder whose
// recurrent core is a two-layer ConvLSTM.  The encoder reads T feature
// frames; its final (h, c) pairs seed the matching decoder layers, which run
// K free-running steps.  Each decoder step k > 1 re-embeds the previous
// predicted map through the input stem (written into the moisture-feedback
// channel of an otherwise-zero frame); the very first step consumes an
// all-zero frame.  The head is the final transposed convolution followed by
// a sigmoid rescaled to [theta_r, theta_s], so a zero-initialized head
// predicts the midpoint everywhere.
//
// `flatten_mode` swaps the spatial pipeline for the literal flat reading:
// each frame is flattened into one vector and pushed through two dense LSTM
// layers with a linear head per pixel.  Same interface, same feedback rule.

namespace smcforge::models {

struct AeConfig {
    std::size_t in_channels = raster::kFeatureChannelCount;
    std::size_t height = 16;
    std::size_t width = 16;
    std::size_t stem1 = 16;  // first stride-2 conv, output channels
    std::size_t stem2 = 32;  // second stride-2 conv, output channels
    std::size_t hidden = 32; // ConvLSTM hidden channels, both layers
    std::size_t up1 = 16;    // first stride-2 transposed conv, output channels
    std::size_t kernel = 3;
    std::size_t t_in = 10;   // encoder frames T
    std::size_t horizon = 3; // decoder steps K
    // Frame slot that carries the model's own previous prediction while
    // free-running (the ground-moisture lag channel of the feature order).
    std::size_t feedback_channel = 13;
    bool flatten_mode = false;
    float theta_r = 0.05f;
    float theta_s = 0.45f;

    void validate() const {
        if (in_channels == 0 || height == 0 || width == 0) {
            throw ValidationError("AeConfig: zero-sized input");
        }
        if (!flatten_mode && (height % 4 != 0 || width % 4 != 0)) {
            throw ValidationError("AeConfig: grid height and width must be divisible by 4");
        }
        if (stem1 == 0 || stem2 == 0 || hidden == 0 || up1 == 0) {
            throw ValidationError("AeConfig: zero-width layer");
        }
        if (kernel % 2 == 0) throw ValidationError("AeConfig: kernel must be odd");
        if (t_in < 1 || horizon < 1) throw ValidationError("AeConfig: need T >= 1 and K >= 1");
        if (feedback_channel >= in_channels) {
            throw ValidationError("AeConfig: feedback channel outside the frame");
        }
        if (!(theta_r < theta_s)) throw ValidationError("AeConfig: need theta_r < theta_s");
    }

    [[nodiscard]] std::size_t flat_inputs() const { return in_channels * height * width; }
    [[nodiscard]] std::size_t pixels() const { return height * width; }
};

template <typename S>
struct AeParams {
    // Spatial pipeline.
    nn::Tensor<S> stem1_w, stem1_b;  // (stem1, in, k, k)
    nn::Tensor<S> stem2_w, stem2_b;  // (stem2, stem1, k, k)
    nn::ConvLstmParams<S> enc1, enc2, dec1, dec2;
    nn::Tensor<S> up1_w, up1_b;      // transpose (hidden, up1, k, k)
    nn::Tensor<S> up2_w, up2_b;      // transpose (up1, 1, k, k) -- the head
    // Flat pipeline.
    nn::LstmParams<S> fenc1, fenc2, fdec1, fdec2;
    nn::LinearParams<S> fhead;       // hidden -> pixels
};

template <typename S>
struct AeStemCache {
    nn::Tensor<S> x;   // input frame
    nn::Tensor<S> s1;  // tanh(conv1(x))
    nn::Tensor<S> s2;  // tanh(conv2(s1))
};

template <typename S>
struct AeForward {
    std::vector<nn::Tensor<S>> maps;  // K maps, each (1, H, W)
    // Which decoder steps consumed the model's own previous map (gradient
    // flows back through the feedback); false for step 0 and forced steps.
    std::vector<bool> fed_own;
    bool cached = false;

    // Spatial caches.
    std::vector<AeStemCache<S>> enc_stem, dec_stem;
    std::vector<nn::ConvLstmCache<S>> enc1c, enc2c, dec1c, dec2c;
    std::vector<nn::Tensor<S>> dec_h2;  // layer-2 decoder state feeding the head
    std::vector<nn::Tensor<S>> u1;      // tanh(up1(h2))
    std::vector<nn::Tensor<S>> sig;     // sigmoid(head(u1)), (1, H, W)

    // Flat caches.
    std::vector<nn::LstmCache<S>> fenc1c, fenc2c, fdec1c, fdec2c;
    std::vector<nn::Tensor<S>> fdec_h2;
    std::vector<nn::Tensor<S>> fsig;    // sigmoid(head(h2)), (pixels)
};

template <typename S>
class AeModel {
public:
    AeConfig cfg;
    AeParams<S> p;

    explicit AeModel(const AeConfig& config) : cfg(config) {
        cfg.validate();
        if (cfg.flatten_mode) {
            p.fenc1 = nn::LstmParams<S>::sized(cfg.flat_inputs(), cfg.hidden);
            p.fenc2 = nn::LstmParams<S>::sized(cfg.hidden, cfg.hidden);
            p.fdec1 = nn::LstmParams<S>::sized(cfg.flat_inputs(), cfg.hidden);
            p.fdec2 = nn::LstmParams<S>::sized(cfg.hidden, cfg.hidden);
            p.fhead = nn::LinearParams<S>::sized(cfg.hidden, cfg.pixels());
        } else {
            const std::size_t k = cfg.kernel;
            p.stem1_w = nn::Tensor<S>({cfg.stem1, cfg.in_channels, k, k});
            p.stem1_b = nn::Tensor<S>({cfg.stem1});
            p.stem2_w = nn::Tensor<S>({cfg.stem2, cfg.stem1, k, k});
            p.stem2_b = nn::Tensor<S>({cfg.stem2});
            p.enc1 = nn::ConvLstmParams<S>::sized(cfg.stem2, cfg.hidden, k);
            p.enc2 = nn::ConvLstmParams<S>::sized(cfg.hidden, cfg.hidden, k);
            p.dec1 = nn::ConvLstmParams<S>::sized(cfg.stem2, cfg.hidden, k);
            p.dec2 = nn::ConvLstmParams<S>::sized(cfg.hidden, cfg.hidden, k);
            p.up1_w = nn::Tensor<S>({cfg.hidden, cfg.up1, k, k});
            p.up1_b = nn::Tensor<S>({cfg.up1});
            p.up2_w = nn::Tensor<S>({cfg.up1, 1, k, k});
            p.up2_b = nn::Tensor<S>({1});
        }
    }

    /// Seeded parameter fill.  The head stays zero so an untrained model
    /// predicts the sigmoid midpoint (theta_r + theta_s) / 2 everywhere.
    void init(std::uint64_t seed) {
        const rng::Key root(seed);
        if (cfg.flatten_mode) {
            p.fenc1.init(root.derive(11));
            p.fenc2.init(root.derive(12));
            p.fdec1.init(root.derive(13));
            p.fdec2.init(root.derive(14));
            // fhead stays zero.
        } else {
            const std::size_t k = cfg.kernel;
            nn::detail::he_uniform(p.stem1_w, cfg.in_channels * k * k, root.derive(1));
            nn::detail::he_uniform(p.stem2_w, cfg.stem1 * k * k, root.derive(2));
            p.enc1.init(root.derive(3));
            p.enc2.init(root.derive(4));
            p.dec1.init(root.derive(5));
            p.dec2.init(root.derive(6));
            nn::detail::he_uniform(p.up1_w, cfg.hidden * k * k, root.derive(7));
            // up2 (the head) stays zero.
        }
    }

    /// frames: exactly T input frames (in, H, W).  teacher: empty for pure
    /// free-running, otherwise K entries where a non-null teacher[j]
    /// replaces the model's map j as feedback into step j+1 (the last entry
    /// is never consumed).  Returns K maps in [theta_r, theta_s].
    AeForward<S> forward(const std::vector<nn::Tensor<S>>& frames,
                         const std::vector<const nn::Tensor<S>*>& teacher = {},
                         bool want_cache = false) const {
        if (frames.size() != cfg.t_in) {
            throw ValidationError("ae forward: expected " + std::to_string(cfg.t_in) +
                                  " input frames, got " + std::to_string(frames.size()));
        }
        if (!teacher.empty() && teacher.size() != cfg.horizon) {
            throw ValidationError("ae forward: teacher list must be empty or one entry per step");
        }
        for (const auto& f : frames) {
            nn::require_shape(f, {cfg.in_channels, cfg.height, cfg.width}, "ae input frame");
        }
        return cfg.flatten_mode ? forward_flat(frames, teacher, want_cache)
                                : forward_conv(frames, teacher, want_cache);
    }

    /// Accumulates parameter gradients for d(loss)/d(maps) into `grads`.
    /// Needs a forward pass that kept its caches.
    void backward(const AeForward<S>& fwd, const std::vector<nn::Tensor<S>>& dmaps,
                  AeParams<S>& grads) const {
        if (!fwd.cached) throw ValidationError("ae backward: forward pass kept no caches");
        if (dmaps.size() != cfg.horizon) {
            throw ValidationError("ae backward: need one gradient map per step");
        }
        if (cfg.flatten_mode) backward_flat(fwd, dmaps, grads);
        else backward_conv(fwd, dmaps, grads);
    }

    [[nodiscard]] AeParams<S> zero_grads() const {
        AeParams<S> g;
        if (cfg.flatten_mode) {
            g.fenc1 = p.fenc1.zeros_like();
            g.fenc2 = p.fenc2.zeros_like();
            g.fdec1 = p.fdec1.zeros_like();
            g.fdec2 = p.fdec2.zeros_like();
            g.fhead = p.fhead.zeros_like();
        } else {
            g.stem1_w = nn::Tensor<S>(p.stem1_w.shape);
            g.stem1_b = nn::Tensor<S>(p.stem1_b.shape);
            g.stem2_w = nn::Tensor<S>(p.stem2_w.shape);
            g.stem2_b = nn::Tensor<S>(p.stem2_b.shape);
            g.enc1 = p.enc1.zeros_like();
            g.enc2 = p.enc2.zeros_like();
            g.dec1 = p.dec1.zeros_like();
            g.dec2 = p.dec2.zeros_like();
            g.up1_w = nn::Tensor<S>(p.up1_w.shape);
            g.up1_b = nn::Tensor<S>(p.up1_b.shape);
            g.up2_w = nn::Tensor<S>(p.up2_w.shape);
            g.up2_b = nn::Tensor<S>(p.up2_b.shape);
        }
        return g;
    }

    /// Stable name -> tensor listing; drives the optimizer and checkpoints.
    static std::vector<std::pair<std::string, nn::Tensor<S>*>> named_tensors(const AeConfig& cfg,
                                                                             AeParams<S>& q) {
        std::vector<std::pair<std::string, nn::Tensor<S>*>> out;
        auto cell = [&out](const std::string& prefix, nn::ConvLstmParams<S>& c) {
            out.emplace_back(prefix + ".w_x", &c.w_x);
            out.emplace_back(prefix + ".w_h", &c.w_h);
            out.emplace_back(prefix + ".b", &c.b);
        };
        auto dcell = [&out](const std::string& prefix, nn::LstmParams<S>& c) {
            out.emplace_back(prefix + ".w_x", &c.w_x);
            out.emplace_back(prefix + ".w_h", &c.w_h);
            out.emplace_back(prefix + ".b", &c.b);
        };
        if (cfg.flatten_mode) {
            dcell("fenc1", q.fenc1);
            dcell("fenc2", q.fenc2);
            dcell("fdec1", q.fdec1);
            dcell("fdec2", q.fdec2);
            out.emplace_back("fhead.w", &q.fhead.w);
            out.emplace_back("fhead.b", &q.fhead.b);
        } else {
            out.emplace_back("stem1.w", &q.stem1_w);
            out.emplace_back("stem1.b", &q.stem1_b);
            out.emplace_back("stem2.w", &q.stem2_w);
            out.emplace_back("stem2.b", &q.stem2_b);
            cell("enc1", q.enc1);
            cell("enc2", q.enc2);
            cell("dec1", q.dec1);
            cell("dec2", q.dec2);
            out.emplace_back("up1.w", &q.up1_w);
            out.emplace_back("up1.b", &q.up1_b);
            out.emplace_back("up2.w", &q.up2_w);
            out.emplace_back("up2.b", &q.up2_b);
        }
        return out;
    }

    std::vector<std::pair<std::string, nn::Tensor<S>*>> named_params() {
        return named_tensors(cfg, p);
    }

private:
    [[nodiscard]] S midpoint() const { return S(0.5) * (S(cfg.theta_r) + S(cfg.theta_s)); }
    [[nodiscard]] S half_range() const { return S(0.5) * (S(cfg.theta_s) - S(cfg.theta_r)); }

    /// Zero frame with the previous map written into the feedback slot,
    /// scaled to roughly unit range: (map - mid) / half_range.
    nn::Tensor<S> feedback_frame(const nn::Tensor<S>& map) const {
        nn::Tensor<S> frame({cfg.in_channels, cfg.height, cfg.width});
        const S mid = midpoint();
        const S inv_half = S(1) / half_range();
        const std::size_t px = cfg.pixels();
        S* slot = frame.data.data() + cfg.feedback_channel * px;
        for (std::size_t i = 0; i < px; ++i) slot[i] = (map.data[i] - mid) * inv_half;
        return frame;
    }

    // -- spatial pipeline ---------------------------------------------------

    AeStemCache<S> stem_forward(const nn::Tensor<S>& x) const {
        AeStemCache<S> c;
        c.x = x;
        c.s1 = nn::conv2d(x, p.stem1_w, p.stem1_b, 2);
        nn::tanh_inplace(c.s1);
        c.s2 = nn::conv2d(c.s1, p.stem2_w, p.stem2_b, 2);
        nn::tanh_inplace(c.s2);
        return c;
    }

    /// d_s2 is the gradient at the stem output; returns the input gradient.
    nn::Tensor<S> stem_backward(const AeStemCache<S>& c, const nn::Tensor<S>& d_s2,
                                AeParams<S>& g) const {
        nn::Tensor<S> da2(c.s2.shape);
        nn::tanh_backward(c.s2, d_s2, da2);
        nn::Tensor<S> ds1(c.s1.shape);
        nn::conv2d_backward(c.s1, p.stem2_w, std::size_t(2), da2, ds1, g.stem2_w, g.stem2_b);
        nn::Tensor<S> da1(c.s1.shape);
        nn::tanh_backward(c.s1, ds1, da1);
        nn::Tensor<S> dx(c.x.shape);
        nn::conv2d_backward(c.x, p.stem1_w, std::size_t(2), da1, dx, g.stem1_w, g.stem1_b);
        return dx;
    }

    AeForward<S> forward_conv(const std::vector<nn::Tensor<S>>& frames,
                              const std::vector<const nn::Tensor<S>*>& teacher,
                              bool want_cache) const {
        const std::size_t hb = cfg.height / 4;
        const std::size_t wb = cfg.width / 4;
        AeForward<S> out;
        out.cached = want_cache;

        nn::Tensor<S> h1({cfg.hidden, hb, wb}), c1 = h1, h2 = h1, c2 = h1;
        for (std::size_t t = 0; t < cfg.t_in; ++t) {
            AeStemCache<S> stem = stem_forward(frames[t]);
            nn::Tensor<S> h1n, c1n, h2n, c2n;
            nn::ConvLstmCache<S> cc1, cc2;
            nn::convlstm_step(p.enc1, stem.s2, h1, c1, h1n, c1n, want_cache ? &cc1 : nullptr);
            nn::convlstm_step(p.enc2, h1n, h2, c2, h2n, c2n, want_cache ? &cc2 : nullptr);
            h1 = std::move(h1n);
            c1 = std::move(c1n);
            h2 = std::move(h2n);
            c2 = std::move(c2n);
            if (want_cache) {
                out.enc_stem.push_back(std::move(stem));
                out.enc1c.push_back(std::move(cc1));
                out.enc2c.push_back(std::move(cc2));
            }
        }

        out.maps.reserve(cfg.horizon);
        out.fed_own.assign(cfg.horizon, false);
        for (std::size_t k = 0; k < cfg.horizon; ++k) {
            nn::Tensor<S> frame({cfg.in_channels, cfg.height, cfg.width});
            if (k > 0) {
                const nn::Tensor<S>* forced = teacher.empty() ? nullptr : teacher[k - 1];
                frame = feedback_frame(forced != nullptr ? *forced : out.maps[k - 1]);
                out.fed_own[k] = forced == nullptr;
            }
            AeStemCache<S> stem = stem_forward(frame);
            nn::Tensor<S> h1n, c1n, h2n, c2n;
            nn::ConvLstmCache<S> cc1, cc2;
            nn::convlstm_step(p.dec1, stem.s2, h1, c1, h1n, c1n, want_cache ? &cc1 : nullptr);
            nn::convlstm_step(p.dec2, h1n, h2, c2, h2n, c2n, want_cache ? &cc2 : nullptr);
            h1 = std::move(h1n);
            c1 = std::move(c1n);
            h2 = std::move(h2n);
            c2 = std::move(c2n);

            nn::Tensor<S> u1 = nn::conv2d_transpose(h2, p.up1_w, p.up1_b, 2);
            nn::tanh_inplace(u1);
            nn::Tensor<S> sig = nn::conv2d_transpose(u1, p.up2_w, p.up2_b, 2);
            nn::sigmoid_inplace(sig);

            nn::Tensor<S> map(sig.shape);
            const S lo = S(cfg.theta_r);
            const S range = S(cfg.theta_s) - S(cfg.theta_r);
            for (std::size_t i = 0; i < sig.size(); ++i) map.data[i] = lo + range * sig.data[i];
            out.maps.push_back(std::move(map));

            if (want_cache) {
                out.dec_stem.push_back(std::move(stem));
                out.dec1c.push_back(std::move(cc1));
                out.dec2c.push_back(std::move(cc2));
                out.dec_h2.push_back(h2);
                out.u1.push_back(std::move(u1));
                out.sig.push_back(std::move(sig));
            }
        }
        return out;
    }

    void backward_conv(const AeForward<S>& fwd, const std::vector<nn::Tensor<S>>& dmaps,
                       AeParams<S>& g) const {
        const std::size_t hb = cfg.height / 4;
        const std::size_t wb = cfg.width / 4;
        const S range = S(cfg.theta_s) - S(cfg.theta_r);
        const S inv_half = S(1) / half_range();
        const std::size_t px = cfg.pixels();

        nn::Tensor<S> dh1({cfg.hidden, hb, wb}), dc1 = dh1, dh2 = dh1, dc2 = dh1;
        nn::Tensor<S> dmap_carry({1, cfg.height, cfg.width});

        for (std::size_t k = cfg.horizon; k-- > 0;) {
            nn::Tensor<S> dmap = dmaps[k];
            nn::require_shape(dmap, {1, cfg.height, cfg.width}, "ae backward dmap");
            for (std::size_t i = 0; i < dmap.size(); ++i) dmap.data[i] += dmap_carry.data[i];
            dmap_carry.zero();

            // Head: map = theta_r + range * sigmoid(up2(u1)).
            nn::Tensor<S> dsig(dmap.shape);
            for (std::size_t i = 0; i < dsig.size(); ++i) dsig.data[i] = dmap.data[i] * range;
            nn::Tensor<S> dlogits(dsig.shape);
            nn::sigmoid_backward(fwd.sig[k], dsig, dlogits);

            nn::Tensor<S> du1(fwd.u1[k].shape);
            nn::conv2d_transpose_backward(fwd.u1[k], p.up2_w, std::size_t(2), dlogits, du1,
                                          g.up2_w, g.up2_b);
            nn::Tensor<S> da1(du1.shape);
            nn::tanh_backward(fwd.u1[k], du1, da1);
            nn::Tensor<S> dh2_head(dh2.shape);
            nn::conv2d_transpose_backward(fwd.dec_h2[k], p.up1_w, std::size_t(2), da1, dh2_head,
                                          g.up1_w, g.up1_b);
            for (std::size_t i = 0; i < dh2.size(); ++i) dh2.data[i] += dh2_head.data[i];

            nn::Tensor<S> dx2({cfg.hidden, hb, wb}), dh2p(dx2.shape), dc2p(dx2.shape);
            nn::convlstm_step_backward(p.dec2, fwd.dec2c[k], dh2, dc2, g.dec2, dx2, dh2p, dc2p);
            for (std::size_t i = 0; i < dh1.size(); ++i) dh1.data[i] += dx2.data[i];

            nn::Tensor<S> dstem({cfg.stem2, hb, wb});
            nn::Tensor<S> dh1p({cfg.hidden, hb, wb}), dc1p(dh1p.shape);
            nn::convlstm_step_backward(p.dec1, fwd.dec1c[k], dh1, dc1, g.dec1, dstem, dh1p, dc1p);

            nn::Tensor<S> dframe = stem_backward(fwd.dec_stem[k], dstem, g);
            if (fwd.fed_own[k]) {
                // Feedback slot held (map_{k-1} - mid) / half_range.
                const S* slot = dframe.data.data() + cfg.feedback_channel * px;
                for (std::size_t i = 0; i < px; ++i) dmap_carry.data[i] = slot[i] * inv_half;
            }
            dh1 = std::move(dh1p);
            dc1 = std::move(dc1p);
            dh2 = std::move(dh2p);
            dc2 = std::move(dc2p);
        }

        // Decoder initial states were the encoder finals; keep flowing back.
        for (std::size_t t = cfg.t_in; t-- > 0;) {
            nn::Tensor<S> dx2({cfg.hidden, hb, wb}), dh2p(dx2.shape), dc2p(dx2.shape);
            nn::convlstm_step_backward(p.enc2, fwd.enc2c[t], dh2, dc2, g.enc2, dx2, dh2p, dc2p);
            for (std::size_t i = 0; i < dh1.size(); ++i) dh1.data[i] += dx2.data[i];

            nn::Tensor<S> dstem({cfg.stem2, hb, wb});
            nn::Tensor<S> dh1p({cfg.hidden, hb, wb}), dc1p(dh1p.shape);
            nn::convlstm_step_backward(p.enc1, fwd.enc1c[t], dh1, dc1, g.enc1, dstem, dh1p, dc1p);
            stem_backward(fwd.enc_stem[t], dstem, g);  // input-frame gradient unused

            dh1 = std::move(dh1p);
            dc1 = std::move(dc1p);
            dh2 = std::move(dh2p);
            dc2 = std::move(dc2p);
        }
    }

    // -- flat pipeline ------------------------------------------------------

    static nn::Tensor<S> flatten(const nn::Tensor<S>& frame) {
        nn::Tensor<S> v({frame.size()});
        v.data = frame.data;
        return v;
    }

    AeForward<S> forward_flat(const std::vector<nn::Tensor<S>>& frames,
                              const std::vector<const nn::Tensor<S>*>& teacher,
                              bool want_cache) const {
        AeForward<S> out;
        out.cached = want_cache;

        nn::Tensor<S> h1({cfg.hidden}), c1 = h1, h2 = h1, c2 = h1;
        for (std::size_t t = 0; t < cfg.t_in; ++t) {
            const nn::Tensor<S> x = flatten(frames[t]);
            nn::Tensor<S> h1n, c1n, h2n, c2n;
            nn::LstmCache<S> cc1, cc2;
            nn::lstm_step(p.fenc1, x, h1, c1, h1n, c1n, want_cache ? &cc1 : nullptr);
            nn::lstm_step(p.fenc2, h1n, h2, c2, h2n, c2n, want_cache ? &cc2 : nullptr);
            h1 = std::move(h1n);
            c1 = std::move(c1n);
            h2 = std::move(h2n);
            c2 = std::move(c2n);
            if (want_cache) {
                out.fenc1c.push_back(std::move(cc1));
                out.fenc2c.push_back(std::move(cc2));
            }
        }

        out.maps.reserve(cfg.horizon);
        out.fed_own.assign(cfg.horizon, false);
        const S lo = S(cfg.theta_r);
        const S range = S(cfg.theta_s) - S(cfg.theta_r);
        for (std::size_t k = 0; k < cfg.horizon; ++k) {
            nn::Tensor<S> frame({cfg.in_channels, cfg.height, cfg.width});
            if (k > 0) {
                const nn::Tensor<S>* forced = teacher.empty() ? nullptr : teacher[k - 1];
                frame = feedback_frame(forced != nullptr ? *forced : out.maps[k - 1]);
                out.fed_own[k] = forced == nullptr;
            }
            const nn::Tensor<S> x = flatten(frame);
            nn::Tensor<S> h1n, c1n, h2n, c2n;
            nn::LstmCache<S> cc1, cc2;
            nn::lstm_step(p.fdec1, x, h1, c1, h1n, c1n, want_cache ? &cc1 : nullptr);
            nn::lstm_step(p.fdec2, h1n, h2, c2, h2n, c2n, want_cache ? &cc2 : nullptr);
            h1 = std::move(h1n);
            c1 = std::move(c1n);
            h2 = std::move(h2n);
            c2 = std::move(c2n);

            nn::Tensor<S> sig = nn::linear(p.fhead, h2);
            nn::sigmoid_inplace(sig);
            nn::Tensor<S> map({1, cfg.height, cfg.width});
            for (std::size_t i = 0; i < sig.size(); ++i) map.data[i] = lo + range * sig.data[i];
            out.maps.push_back(std::move(map));

            if (want_cache) {
                out.fdec1c.push_back(std::move(cc1));
                out.fdec2c.push_back(std::move(cc2));
                out.fdec_h2.push_back(h2);
                out.fsig.push_back(std::move(sig));
            }
        }
        return out;
    }

    void backward_flat(const AeForward<S>& fwd, const std::vector<nn::Tensor<S>>& dmaps,
                       AeParams<S>& g) const {
        const S range = S(cfg.theta_s) - S(cfg.theta_r);
        const S inv_half = S(1) / half_range();
        const std::size_t px = cfg.pixels();

        nn::Tensor<S> dh1({cfg.hidden}), dc1 = dh1, dh2 = dh1, dc2 = dh1;
        nn::Tensor<S> dmap_carry({px});

        for (std::size_t k = cfg.horizon; k-- > 0;) {
            nn::Tensor<S> dsig({px});
            for (std::size_t i = 0; i < px; ++i) {
                dsig.data[i] = (dmaps[k].data[i] + dmap_carry.data[i]) * range;
            }
            dmap_carry.zero();
            nn::Tensor<S> dlogits({px});
            nn::sigmoid_backward(fwd.fsig[k], dsig, dlogits);
            nn::Tensor<S> dh2_head({cfg.hidden});
            nn::linear_backward(p.fhead, fwd.fdec_h2[k], dlogits, g.fhead, dh2_head);
            for (std::size_t i = 0; i < dh2.size(); ++i) dh2.data[i] += dh2_head.data[i];

            nn::Tensor<S> dx2({cfg.hidden}), dh2p(dx2.shape), dc2p(dx2.shape);
            nn::lstm_step_backward(p.fdec2, fwd.fdec2c[k], dh2, dc2, g.fdec2, dx2, dh2p, dc2p);
            for (std::size_t i = 0; i < dh1.size(); ++i) dh1.data[i] += dx2.data[i];

            nn::Tensor<S> dx({cfg.flat_inputs()});
            nn::Tensor<S> dh1p({cfg.hidden}), dc1p(dh1p.shape);
            nn::lstm_step_backward(p.fdec1, fwd.fdec1c[k], dh1, dc1, g.fdec1, dx, dh1p, dc1p);
            if (fwd.fed_own[k]) {
                const S* slot = dx.data.data() + cfg.feedback_channel * px;
                for (std::size_t i = 0; i < px; ++i) dmap_carry.data[i] = slot[i] * inv_half;
            }
            dh1 = std::move(dh1p);
            dc1 = std::move(dc1p);
            dh2 = std::move(dh2p);
            dc2 = std::move(dc2p);
        }

        for (std::size_t t = cfg.t_in; t-- > 0;) {
            nn::Tensor<S> dx2({cfg.hidden}), dh2p(dx2.shape), dc2p(dx2.shape);
            nn::lstm_step_backward(p.fenc2, fwd.fenc2c[t], dh2, dc2, g.fenc2, dx2, dh2p, dc2p);
            for (std::size_t i = 0; i < dh1.size(); ++i) dh1.data[i] += dx2.data[i];

            nn::Tensor<S> dx({cfg.flat_inputs()});
            nn::Tensor<S> dh1p({cfg.hidden}), dc1p(dh1p.shape);
            nn::lstm_step_backward(p.fenc1, fwd.fenc1c[t], dh1, dc1, g.fenc1, dx, dh1p, dc1p);

            dh1 = std::move(dh1p);
            dc1 = std::move(dc1p);
            dh2 = std::move(dh2p);
            dc2 = std::move(dc2p);
        }
    }
};

}  // namespace smcforge::models
