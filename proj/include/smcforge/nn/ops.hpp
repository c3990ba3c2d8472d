#pragma once

#include <cmath>
#include <cstddef>

#include "smcforge/nn/tensor.hpp"

// Forward/backward pairs written out longhand so every gradient is inspectable.
// All backward functions accumulate (+=) into their output buffers; callers
// zero them once per optimization step so weight sharing across time sums up
// naturally.

namespace smcforge::nn {

/// Same-padded convolution, odd kernel, stride 1 or 2.
/// x (Cin,H,W), w (Cout,Cin,K,K), b (Cout) -> y (Cout,Ho,Wo) with
/// Ho = (H + 2*(K/2) - K)/stride + 1.
template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b, std::size_t stride) {
    if (x.shape.size() != 3 || w.shape.size() != 4 || b.shape.size() != 1) {
        throw ValidationError("conv2d: need x rank 3, w rank 4, b rank 1");
    }
    const std::size_t cin = x.shape[0];
    const std::size_t h = x.shape[1];
    const std::size_t wd = x.shape[2];
    const std::size_t cout = w.shape[0];
    const std::size_t k = w.shape[2];
    if (w.shape[1] != cin || w.shape[3] != k || k % 2 == 0 || b.shape[0] != cout) {
        throw ValidationError("conv2d: weight/bias shapes inconsistent with input");
    }
    if (stride != 1 && stride != 2) throw ValidationError("conv2d: stride must be 1 or 2");
    const std::size_t pad = k / 2;
    const std::size_t ho = (h + 2 * pad - k) / stride + 1;
    const std::size_t wo = (wd + 2 * pad - k) / stride + 1;

    Tensor<S> y({cout, ho, wo});
    for (std::size_t co = 0; co < cout; ++co) {
        S* yp = y.data.data() + co * ho * wo;
        for (std::size_t i = 0; i < ho * wo; ++i) yp[i] = b.data[co];
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const S* xp = x.data.data() + ci * h * wd;
            const S* wp = w.data.data() + (co * cin + ci) * k * k;
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    const S wv = wp[ky * k + kx];
                    if (wv == S(0)) continue;
                    for (std::size_t oy = 0; oy < ho; ++oy) {
                        const std::ptrdiff_t iy =
                            static_cast<std::ptrdiff_t>(oy * stride + ky) -
                            static_cast<std::ptrdiff_t>(pad);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                        S* yrow = yp + oy * wo;
                        const S* xrow = xp + static_cast<std::size_t>(iy) * wd;
                        for (std::size_t ox = 0; ox < wo; ++ox) {
                            const std::ptrdiff_t ix =
                                static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
                            yrow[ox] += wv * xrow[static_cast<std::size_t>(ix)];
                        }
                    }
                }
            }
        }
    }
    return y;
}

template <typename S>
void conv2d_backward(const Tensor<S>& x, const Tensor<S>& w, std::size_t stride,
                     const Tensor<S>& dy, Tensor<S>& dx, Tensor<S>& dw, Tensor<S>& db) {
    const std::size_t cin = x.shape[0];
    const std::size_t h = x.shape[1];
    const std::size_t wd = x.shape[2];
    const std::size_t cout = w.shape[0];
    const std::size_t k = w.shape[2];
    const std::size_t pad = k / 2;
    const std::size_t ho = dy.shape[1];
    const std::size_t wo = dy.shape[2];
    if (!dx.same_shape(x) || !dw.same_shape(w) || db.shape[0] != cout || dy.shape[0] != cout) {
        throw ValidationError("conv2d_backward: gradient buffer shapes wrong");
    }

    for (std::size_t co = 0; co < cout; ++co) {
        const S* dyp = dy.data.data() + co * ho * wo;
        S acc = S(0);
        for (std::size_t i = 0; i < ho * wo; ++i) acc += dyp[i];
        db.data[co] += acc;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const S* xp = x.data.data() + ci * h * wd;
            S* dxp = dx.data.data() + ci * h * wd;
            const S* wp = w.data.data() + (co * cin + ci) * k * k;
            S* dwp = dw.data.data() + (co * cin + ci) * k * k;
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    const S wv = wp[ky * k + kx];
                    S wgrad = S(0);
                    for (std::size_t oy = 0; oy < ho; ++oy) {
                        const std::ptrdiff_t iy =
                            static_cast<std::ptrdiff_t>(oy * stride + ky) -
                            static_cast<std::ptrdiff_t>(pad);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                        const S* dyrow = dyp + oy * wo;
                        const S* xrow = xp + static_cast<std::size_t>(iy) * wd;
                        S* dxrow = dxp + static_cast<std::size_t>(iy) * wd;
                        for (std::size_t ox = 0; ox < wo; ++ox) {
                            const std::ptrdiff_t ix =
                                static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
                            const S g = dyrow[ox];
                            wgrad += g * xrow[static_cast<std::size_t>(ix)];
                            dxrow[static_cast<std::size_t>(ix)] += g * wv;
                        }
                    }
                    dwp[ky * k + kx] += wgrad;
                }
            }
        }
    }
}

/// Transposed convolution (fractionally strided): exact stride-x upsampling
/// when K is odd, pad = K/2 and output_padding = stride-1.
/// x (Cin,H,W), w (Cin,Cout,K,K), b (Cout) -> y (Cout, H*stride, W*stride).
template <typename S>
Tensor<S> conv2d_transpose(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                           std::size_t stride) {
    if (x.shape.size() != 3 || w.shape.size() != 4 || b.shape.size() != 1) {
        throw ValidationError("conv2d_transpose: need x rank 3, w rank 4, b rank 1");
    }
    const std::size_t cin = x.shape[0];
    const std::size_t h = x.shape[1];
    const std::size_t wd = x.shape[2];
    const std::size_t cout = w.shape[1];
    const std::size_t k = w.shape[2];
    if (w.shape[0] != cin || w.shape[3] != k || k % 2 == 0 || b.shape[0] != cout) {
        throw ValidationError("conv2d_transpose: weight/bias shapes inconsistent");
    }
    if (stride != 1 && stride != 2) throw ValidationError("conv2d_transpose: stride must be 1 or 2");
    const std::size_t pad = k / 2;
    const std::size_t ho = h * stride;  // (h-1)*stride - 2*pad + k + (stride-1)
    const std::size_t wo = wd * stride;

    Tensor<S> y({cout, ho, wo});
    for (std::size_t co = 0; co < cout; ++co) {
        S* yp = y.data.data() + co * ho * wo;
        for (std::size_t i = 0; i < ho * wo; ++i) yp[i] = b.data[co];
    }
    for (std::size_t ci = 0; ci < cin; ++ci) {
        const S* xp = x.data.data() + ci * h * wd;
        for (std::size_t co = 0; co < cout; ++co) {
            S* yp = y.data.data() + co * ho * wo;
            const S* wp = w.data.data() + (ci * cout + co) * k * k;
            for (std::size_t iy = 0; iy < h; ++iy) {
                for (std::size_t ix = 0; ix < wd; ++ix) {
                    const S xv = xp[iy * wd + ix];
                    if (xv == S(0)) continue;
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        const std::ptrdiff_t oy =
                            static_cast<std::ptrdiff_t>(iy * stride + ky) -
                            static_cast<std::ptrdiff_t>(pad);
                        if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(ho)) continue;
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            const std::ptrdiff_t ox =
                                static_cast<std::ptrdiff_t>(ix * stride + kx) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(wo)) continue;
                            yp[static_cast<std::size_t>(oy) * wo + static_cast<std::size_t>(ox)] +=
                                xv * wp[ky * k + kx];
                        }
                    }
                }
            }
        }
    }
    return y;
}

template <typename S>
void conv2d_transpose_backward(const Tensor<S>& x, const Tensor<S>& w, std::size_t stride,
                               const Tensor<S>& dy, Tensor<S>& dx, Tensor<S>& dw, Tensor<S>& db) {
    const std::size_t cin = x.shape[0];
    const std::size_t h = x.shape[1];
    const std::size_t wd = x.shape[2];
    const std::size_t cout = w.shape[1];
    const std::size_t k = w.shape[2];
    const std::size_t pad = k / 2;
    const std::size_t ho = dy.shape[1];
    const std::size_t wo = dy.shape[2];
    if (!dx.same_shape(x) || !dw.same_shape(w) || db.shape[0] != cout || dy.shape[0] != cout) {
        throw ValidationError("conv2d_transpose_backward: gradient buffer shapes wrong");
    }

    for (std::size_t co = 0; co < cout; ++co) {
        const S* dyp = dy.data.data() + co * ho * wo;
        S acc = S(0);
        for (std::size_t i = 0; i < ho * wo; ++i) acc += dyp[i];
        db.data[co] += acc;
    }
    for (std::size_t ci = 0; ci < cin; ++ci) {
        const S* xp = x.data.data() + ci * h * wd;
        S* dxp = dx.data.data() + ci * h * wd;
        for (std::size_t co = 0; co < cout; ++co) {
            const S* dyp = dy.data.data() + co * ho * wo;
            const S* wp = w.data.data() + (ci * cout + co) * k * k;
            S* dwp = dw.data.data() + (ci * cout + co) * k * k;
            for (std::size_t iy = 0; iy < h; ++iy) {
                for (std::size_t ix = 0; ix < wd; ++ix) {
                    const S xv = xp[iy * wd + ix];
                    S xgrad = S(0);
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        const std::ptrdiff_t oy =
                            static_cast<std::ptrdiff_t>(iy * stride + ky) -
                            static_cast<std::ptrdiff_t>(pad);
                        if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(ho)) continue;
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            const std::ptrdiff_t ox =
                                static_cast<std::ptrdiff_t>(ix * stride + kx) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(wo)) continue;
                            const S g = dyp[static_cast<std::size_t>(oy) * wo +
                                            static_cast<std::size_t>(ox)];
                            xgrad += g * wp[ky * k + kx];
                            dwp[ky * k + kx] += g * xv;
                        }
                    }
                    dxp[iy * wd + ix] += xgrad;
                }
            }
        }
    }
}

template <typename S>
S sigmoid(S x) {
    return S(1) / (S(1) + std::exp(-x));
}

/// Elementwise activations. tanh/sigmoid backward take the *output* value so
/// callers cache activations, not pre-activations.
template <typename S>
void sigmoid_inplace(Tensor<S>& t) {
    for (S& v : t.data) v = sigmoid(v);
}

template <typename S>
void tanh_inplace(Tensor<S>& t) {
    for (S& v : t.data) v = std::tanh(v);
}

/// dX for y = tanh(x): dy * (1 - y^2), accumulated.
template <typename S>
void tanh_backward(const Tensor<S>& y, const Tensor<S>& dy, Tensor<S>& dx) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        dx.data[i] += dy.data[i] * (S(1) - y.data[i] * y.data[i]);
    }
}

/// dX for y = sigmoid(x): dy * y * (1 - y), accumulated.
template <typename S>
void sigmoid_backward(const Tensor<S>& y, const Tensor<S>& dy, Tensor<S>& dx) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        dx.data[i] += dy.data[i] * y.data[i] * (S(1) - y.data[i]);
    }
}

/// Mean squared error over the cells where mask is nonzero. Masked-out
/// cells are skipped entirely, so NaN targets under a zero mask are safe.
template <typename S>
S masked_mse(const Tensor<S>& pred, const Tensor<S>& target, const Tensor<S>& mask,
             std::size_t* n_valid = nullptr) {
    if (!pred.same_shape(target) || !pred.same_shape(mask)) {
        throw ValidationError("masked_mse: shape mismatch");
    }
    S sum = S(0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mask.data[i] == S(0)) continue;
        const S d = pred.data[i] - target.data[i];
        sum += d * d;
        ++n;
    }
    if (n_valid != nullptr) *n_valid = n;
    if (n == 0) return S(0);
    return sum / static_cast<S>(n);
}

/// dPred for loss = scale * masked_mse: scale * 2*(p-t)/n on valid cells.
template <typename S>
void masked_mse_backward(const Tensor<S>& pred, const Tensor<S>& target, const Tensor<S>& mask,
                         S scale, Tensor<S>& dpred) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) n += mask.data[i] != S(0) ? 1 : 0;
    if (n == 0) return;
    const S coeff = scale * S(2) / static_cast<S>(n);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mask.data[i] == S(0)) continue;
        dpred.data[i] += coeff * (pred.data[i] - target.data[i]);
    }
}

}  // namespace smcforge::nn
