#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stroke/parallel.hpp"
#include "stroke/tensor.hpp"

// Value-level forward/backward computations. The tape ops in ops.hpp and the
// no-grad inference path both sit on top of these. Accumulation order inside
// each output cell is fixed and parallel partitions write disjoint ranges, so
// results are identical for any worker count.

namespace stroke::kernels {

using Dims3 = std::array<std::int64_t, 3>;

// ---------------------------------------------------------------- conv3d

// x (B,Cin,T,H,W), w (Cout,Cin,kT,kH,kW), b (Cout). Stride 1, zero "same"
// padding of (k-1)/2 per axis, so the output keeps (T,H,W).
template <typename T>
void conv3d_check(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
    if (x.rank() != 5 || w.rank() != 5) {
        throw DimensionError("conv3d: expected x (B,Cin,T,H,W) and w (Cout,Cin,kT,kH,kW), got " +
                             shape_str(x.shape) + " and " + shape_str(w.shape));
    }
    if (x.shape[1] != w.shape[1]) {
        throw DimensionError("conv3d: input channels " + std::to_string(x.shape[1]) +
                             " do not match weight channels " + std::to_string(w.shape[1]));
    }
    for (int a = 2; a < 5; ++a) {
        if (w.shape[static_cast<std::size_t>(a)] % 2 == 0) {
            throw DimensionError("conv3d: kernel must be odd in every axis, got " + shape_str(w.shape));
        }
    }
    if (b.rank() != 1 || b.shape[0] != w.shape[0]) {
        throw DimensionError("conv3d: bias shape " + shape_str(b.shape) + " does not match Cout " +
                             std::to_string(w.shape[0]));
    }
}

template <typename T>
TensorT<T> conv3d_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
    conv3d_check(x, w, b);
    const std::int64_t B = x.shape[0], Cin = x.shape[1], Tt = x.shape[2], H = x.shape[3], W = x.shape[4];
    const std::int64_t Cout = w.shape[0], kT = w.shape[2], kH = w.shape[3], kW = w.shape[4];
    const std::int64_t pT = (kT - 1) / 2, pH = (kH - 1) / 2, pW = (kW - 1) / 2;
    const std::int64_t plane = Tt * H * W;

    TensorT<T> y({B, Cout, Tt, H, W});
    const T* xd = x.ptr();
    const T* wd = w.ptr();
    T* yd = y.ptr();

    parallel_for(B * Cout, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t bc = lo; bc < hi; ++bc) {
            const std::int64_t bi = bc / Cout;
            const std::int64_t co = bc % Cout;
            T* yb = yd + bc * plane;
            std::fill(yb, yb + plane, b[co]);
            for (std::int64_t ci = 0; ci < Cin; ++ci) {
                const T* xb = xd + (bi * Cin + ci) * plane;
                const T* wc = wd + (co * Cin + ci) * kT * kH * kW;
                for (std::int64_t kt = 0; kt < kT; ++kt) {
                    const std::int64_t dt = kt - pT;
                    const std::int64_t t0 = std::max<std::int64_t>(0, -dt);
                    const std::int64_t t1 = std::min<std::int64_t>(Tt, Tt - dt);
                    for (std::int64_t kh = 0; kh < kH; ++kh) {
                        const std::int64_t dh = kh - pH;
                        const std::int64_t h0 = std::max<std::int64_t>(0, -dh);
                        const std::int64_t h1 = std::min<std::int64_t>(H, H - dh);
                        for (std::int64_t kw = 0; kw < kW; ++kw) {
                            const std::int64_t dw = kw - pW;
                            const std::int64_t w0 = std::max<std::int64_t>(0, -dw);
                            const std::int64_t w1 = std::min<std::int64_t>(W, W - dw);
                            const T wv = wc[(kt * kH + kh) * kW + kw];
                            for (std::int64_t t = t0; t < t1; ++t) {
                                for (std::int64_t h = h0; h < h1; ++h) {
                                    T* __restrict__ yrow = yb + (t * H + h) * W;
                                    const T* __restrict__ xrow = xb + ((t + dt) * H + (h + dh)) * W + dw;
                                    for (std::int64_t wi = w0; wi < w1; ++wi) {
                                        yrow[wi] += wv * xrow[wi];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    return y;
}

// Accumulates into gx (callers pass a zero or partially accumulated buffer).
template <typename T>
void conv3d_bwd_data(const TensorT<T>& w, const TensorT<T>& gy, TensorT<T>& gx) {
    const Shape& x_shape = gx.shape;
    const std::int64_t B = x_shape[0], Cin = x_shape[1], Tt = x_shape[2], H = x_shape[3], W = x_shape[4];
    const std::int64_t Cout = w.shape[0], kT = w.shape[2], kH = w.shape[3], kW = w.shape[4];
    const std::int64_t pT = (kT - 1) / 2, pH = (kH - 1) / 2, pW = (kW - 1) / 2;
    const std::int64_t plane = Tt * H * W;

    const T* wd = w.ptr();
    const T* gyd = gy.ptr();
    T* gxd = gx.ptr();

    parallel_for(B * Cin, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t bc = lo; bc < hi; ++bc) {
            const std::int64_t bi = bc / Cin;
            const std::int64_t ci = bc % Cin;
            T* gxb = gxd + bc * plane;
            for (std::int64_t co = 0; co < Cout; ++co) {
                const T* gyb = gyd + (bi * Cout + co) * plane;
                const T* wc = wd + (co * Cin + ci) * kT * kH * kW;
                for (std::int64_t kt = 0; kt < kT; ++kt) {
                    const std::int64_t dt = kt - pT;
                    const std::int64_t t0 = std::max<std::int64_t>(0, -dt);
                    const std::int64_t t1 = std::min<std::int64_t>(Tt, Tt - dt);
                    for (std::int64_t kh = 0; kh < kH; ++kh) {
                        const std::int64_t dh = kh - pH;
                        const std::int64_t h0 = std::max<std::int64_t>(0, -dh);
                        const std::int64_t h1 = std::min<std::int64_t>(H, H - dh);
                        for (std::int64_t kw = 0; kw < kW; ++kw) {
                            const std::int64_t dw = kw - pW;
                            const std::int64_t w0 = std::max<std::int64_t>(0, -dw);
                            const std::int64_t w1 = std::min<std::int64_t>(W, W - dw);
                            const T wv = wc[(kt * kH + kh) * kW + kw];
                            for (std::int64_t t = t0; t < t1; ++t) {
                                for (std::int64_t h = h0; h < h1; ++h) {
                                    const T* __restrict__ gyrow = gyb + (t * H + h) * W;
                                    T* __restrict__ gxrow = gxb + ((t + dt) * H + (h + dh)) * W + dw;
                                    for (std::int64_t wi = w0; wi < w1; ++wi) {
                                        gxrow[wi] += wv * gyrow[wi];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    });
}

template <typename T>
void conv3d_bwd_filter(const TensorT<T>& x, const TensorT<T>& gy, TensorT<T>& gw, TensorT<T>& gb) {
    const std::int64_t B = x.shape[0], Cin = x.shape[1], Tt = x.shape[2], H = x.shape[3], W = x.shape[4];
    const std::int64_t Cout = gw.shape[0], kT = gw.shape[2], kH = gw.shape[3], kW = gw.shape[4];
    const std::int64_t pT = (kT - 1) / 2, pH = (kH - 1) / 2, pW = (kW - 1) / 2;
    const std::int64_t plane = Tt * H * W;

    const T* xd = x.ptr();
    const T* gyd = gy.ptr();
    T* gwd = gw.ptr();

    // Each (co,ci) pair owns a disjoint slice of gw; bias split by co.
    parallel_for(Cout * Cin, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t cc = lo; cc < hi; ++cc) {
            const std::int64_t co = cc / Cin;
            const std::int64_t ci = cc % Cin;
            T* gwc = gwd + cc * kT * kH * kW;
            for (std::int64_t kt = 0; kt < kT; ++kt) {
                const std::int64_t dt = kt - pT;
                const std::int64_t t0 = std::max<std::int64_t>(0, -dt);
                const std::int64_t t1 = std::min<std::int64_t>(Tt, Tt - dt);
                for (std::int64_t kh = 0; kh < kH; ++kh) {
                    const std::int64_t dh = kh - pH;
                    const std::int64_t h0 = std::max<std::int64_t>(0, -dh);
                    const std::int64_t h1 = std::min<std::int64_t>(H, H - dh);
                    for (std::int64_t kw = 0; kw < kW; ++kw) {
                        const std::int64_t dw = kw - pW;
                        const std::int64_t w0 = std::max<std::int64_t>(0, -dw);
                        const std::int64_t w1 = std::min<std::int64_t>(W, W - dw);
                        T acc = 0;
                        for (std::int64_t bi = 0; bi < B; ++bi) {
                            const T* xb = xd + (bi * Cin + ci) * plane;
                            const T* gyb = gyd + (bi * Cout + co) * plane;
                            for (std::int64_t t = t0; t < t1; ++t) {
                                for (std::int64_t h = h0; h < h1; ++h) {
                                    const T* __restrict__ gyrow = gyb + (t * H + h) * W;
                                    const T* __restrict__ xrow = xb + ((t + dt) * H + (h + dh)) * W + dw;
                                    for (std::int64_t wi = w0; wi < w1; ++wi) {
                                        acc += xrow[wi] * gyrow[wi];
                                    }
                                }
                            }
                        }
                        gwc[(kt * kH + kh) * kW + kw] += acc;
                    }
                }
            }
        }
    });

    parallel_for(Cout, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t co = lo; co < hi; ++co) {
            T acc = 0;
            for (std::int64_t bi = 0; bi < B; ++bi) {
                const T* gyb = gyd + (bi * Cout + co) * plane;
                for (std::int64_t i = 0; i < plane; ++i) {
                    acc += gyb[i];
                }
            }
            gb[co] += acc;
        }
    });
}

// -------------------------------------------------------------- maxpool3d

// Non-overlapping windows (stride == window); trailing partial windows are
// discarded. Ties resolve to the first index in row-major scan order.
template <typename T>
TensorT<T> maxpool3d_fwd(const TensorT<T>& x, Dims3 window, std::vector<std::int64_t>* argmax = nullptr) {
    if (x.rank() != 5) {
        throw DimensionError("maxpool3d: expected (B,C,T,H,W), got " + shape_str(x.shape));
    }
    const std::int64_t pT = window[0], pH = window[1], pW = window[2];
    if (pT < 1 || pH < 1 || pW < 1) {
        throw DimensionError("maxpool3d: window must be >= 1 in every axis");
    }
    const std::int64_t B = x.shape[0], C = x.shape[1], Tt = x.shape[2], H = x.shape[3], W = x.shape[4];
    if (pT > Tt || pH > H || pW > W) {
        throw DimensionError("maxpool3d: window (" + std::to_string(pT) + "," + std::to_string(pH) + "," +
                             std::to_string(pW) + ") exceeds input " + shape_str(x.shape));
    }
    const std::int64_t To = Tt / pT, Ho = H / pH, Wo = W / pW;
    TensorT<T> y({B, C, To, Ho, Wo});
    if (argmax != nullptr) {
        argmax->assign(static_cast<std::size_t>(y.size()), 0);
    }

    const T* xd = x.ptr();
    T* yd = y.ptr();
    const std::int64_t in_plane = Tt * H * W;
    const std::int64_t out_plane = To * Ho * Wo;

    parallel_for(B * C, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t bc = lo; bc < hi; ++bc) {
            const T* xb = xd + bc * in_plane;
            T* yb = yd + bc * out_plane;
            for (std::int64_t to = 0; to < To; ++to) {
                for (std::int64_t ho = 0; ho < Ho; ++ho) {
                    for (std::int64_t wo = 0; wo < Wo; ++wo) {
                        T best{};
                        std::int64_t best_i = -1;
                        for (std::int64_t it = to * pT; it < (to + 1) * pT; ++it) {
                            for (std::int64_t ih = ho * pH; ih < (ho + 1) * pH; ++ih) {
                                const T* xrow = xb + (it * H + ih) * W;
                                for (std::int64_t iw = wo * pW; iw < (wo + 1) * pW; ++iw) {
                                    if (best_i < 0 || xrow[iw] > best) {
                                        best = xrow[iw];
                                        best_i = (it * H + ih) * W + iw;
                                    }
                                }
                            }
                        }
                        const std::int64_t oi = (to * Ho + ho) * Wo + wo;
                        yb[oi] = best;
                        if (argmax != nullptr) {
                            (*argmax)[static_cast<std::size_t>(bc * out_plane + oi)] = bc * in_plane + best_i;
                        }
                    }
                }
            }
        }
    });
    return y;
}

// Routes each output gradient to the single recorded argmax cell,
// accumulating into gx.
template <typename T>
void maxpool3d_bwd(const TensorT<T>& gy, const std::vector<std::int64_t>& argmax, TensorT<T>& gx) {
    const std::int64_t BC = gy.shape[0] * gy.shape[1];
    const std::int64_t out_plane = gy.size() / BC;
    const T* gyd = gy.ptr();
    T* gxd = gx.ptr();
    parallel_for(BC, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t bc = lo; bc < hi; ++bc) {
            for (std::int64_t i = bc * out_plane; i < (bc + 1) * out_plane; ++i) {
                gxd[argmax[static_cast<std::size_t>(i)]] += gyd[i];
            }
        }
    });
}

// -------------------------------------------------------------- attention

// Residual multiplicative attention. The mask is a sigmoid of a 1x1x1
// convolution across channels: m = sigmoid(sum_c mw[c]*x[:,c] + mb), and the
// output is x * (1 + m) with m broadcast over channels.
template <typename T>
void attention_check(const TensorT<T>& x, const TensorT<T>& mw, const TensorT<T>& mb) {
    if (x.rank() != 5) {
        throw DimensionError("attention: expected (B,C,T,H,W), got " + shape_str(x.shape));
    }
    const Shape want{1, x.shape[1], 1, 1, 1};
    if (mw.shape != want) {
        throw DimensionError("attention: mask weight shape " + shape_str(mw.shape) + " should be " +
                             shape_str(want));
    }
    if (mb.shape != Shape{1}) {
        throw DimensionError("attention: mask bias shape " + shape_str(mb.shape) + " should be (1)");
    }
}

template <typename T>
TensorT<T> attention_fwd(const TensorT<T>& x, const TensorT<T>& mw, const TensorT<T>& mb,
                         TensorT<T>* mask_out = nullptr) {
    attention_check(x, mw, mb);
    const std::int64_t B = x.shape[0], C = x.shape[1];
    const std::int64_t plane = x.shape[2] * x.shape[3] * x.shape[4];

    TensorT<T> mask({B, x.shape[2], x.shape[3], x.shape[4]});
    TensorT<T> y(x.shape);
    const T* xd = x.ptr();
    T* md = mask.ptr();
    T* yd = y.ptr();

    for (std::int64_t bi = 0; bi < B; ++bi) {
        T* mrow = md + bi * plane;
        std::fill(mrow, mrow + plane, mb[0]);
        for (std::int64_t c = 0; c < C; ++c) {
            const T wv = mw[c];
            const T* __restrict__ xrow = xd + (bi * C + c) * plane;
            for (std::int64_t i = 0; i < plane; ++i) {
                mrow[i] += wv * xrow[i];
            }
        }
        for (std::int64_t i = 0; i < plane; ++i) {
            mrow[i] = T(1) / (T(1) + std::exp(-mrow[i]));
        }
        for (std::int64_t c = 0; c < C; ++c) {
            const T* __restrict__ xrow = xd + (bi * C + c) * plane;
            T* __restrict__ yrow = yd + (bi * C + c) * plane;
            for (std::int64_t i = 0; i < plane; ++i) {
                yrow[i] = xrow[i] * (T(1) + mrow[i]);
            }
        }
    }
    if (mask_out != nullptr) {
        *mask_out = std::move(mask);
    } else {
        (void)mask;
    }
    return y;
}

template <typename T>
void attention_bwd(const TensorT<T>& x, const TensorT<T>& mw, const TensorT<T>& mask, const TensorT<T>& gy,
                   TensorT<T>& gx, TensorT<T>& gmw, TensorT<T>& gmb) {
    const std::int64_t B = x.shape[0], C = x.shape[1];
    const std::int64_t plane = x.shape[2] * x.shape[3] * x.shape[4];
    const T* xd = x.ptr();
    const T* md = mask.ptr();
    const T* gyd = gy.ptr();
    T* gxd = gx.ptr();

    std::vector<T> gate(static_cast<std::size_t>(plane));
    for (std::int64_t bi = 0; bi < B; ++bi) {
        const T* mrow = md + bi * plane;
        // gate = sigmoid'(z) * sum_c gy*x, the shared mask-path factor
        std::fill(gate.begin(), gate.end(), T(0));
        for (std::int64_t c = 0; c < C; ++c) {
            const T* __restrict__ xrow = xd + (bi * C + c) * plane;
            const T* __restrict__ gyrow = gyd + (bi * C + c) * plane;
            for (std::int64_t i = 0; i < plane; ++i) {
                gate[static_cast<std::size_t>(i)] += gyrow[i] * xrow[i];
            }
        }
        for (std::int64_t i = 0; i < plane; ++i) {
            gate[static_cast<std::size_t>(i)] *= mrow[i] * (T(1) - mrow[i]);
        }
        for (std::int64_t c = 0; c < C; ++c) {
            const T* __restrict__ xrow = xd + (bi * C + c) * plane;
            const T* __restrict__ gyrow = gyd + (bi * C + c) * plane;
            T* __restrict__ gxrow = gxd + (bi * C + c) * plane;
            const T wv = mw[c];
            T acc = 0;
            for (std::int64_t i = 0; i < plane; ++i) {
                gxrow[i] += gyrow[i] * (T(1) + mrow[i]) + wv * gate[static_cast<std::size_t>(i)];
                acc += gate[static_cast<std::size_t>(i)] * xrow[i];
            }
            gmw[c] += acc;
        }
        T acc = 0;
        for (std::int64_t i = 0; i < plane; ++i) {
            acc += gate[static_cast<std::size_t>(i)];
        }
        gmb[0] += acc;
    }
}

// ----------------------------------------------------------------- linear

template <typename T>
TensorT<T> linear_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
    if (x.rank() != 2 || w.rank() != 2) {
        throw DimensionError("linear: expected x (B,F) and w (O,F), got " + shape_str(x.shape) + " and " +
                             shape_str(w.shape));
    }
    if (x.shape[1] != w.shape[1]) {
        throw DimensionError("linear: feature mismatch " + shape_str(x.shape) + " vs " + shape_str(w.shape));
    }
    if (b.rank() != 1 || b.shape[0] != w.shape[0]) {
        throw DimensionError("linear: bias shape " + shape_str(b.shape) + " does not match outputs " +
                             std::to_string(w.shape[0]));
    }
    const std::int64_t B = x.shape[0], F = x.shape[1], O = w.shape[0];
    TensorT<T> y({B, O});
    const T* xd = x.ptr();
    const T* wd = w.ptr();
    T* yd = y.ptr();
    parallel_for(B, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t bi = lo; bi < hi; ++bi) {
            const T* __restrict__ xrow = xd + bi * F;
            for (std::int64_t o = 0; o < O; ++o) {
                const T* __restrict__ wrow = wd + o * F;
                T acc = b[o];
                for (std::int64_t f = 0; f < F; ++f) {
                    acc += xrow[f] * wrow[f];
                }
                yd[bi * O + o] = acc;
            }
        }
    });
    return y;
}

template <typename T>
void linear_bwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& gy, TensorT<T>& gx, TensorT<T>& gw,
                TensorT<T>& gb) {
    const std::int64_t B = x.shape[0], F = x.shape[1], O = w.shape[0];
    const T* xd = x.ptr();
    const T* wd = w.ptr();
    const T* gyd = gy.ptr();

    parallel_for(B, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t bi = lo; bi < hi; ++bi) {
            T* __restrict__ gxrow = gx.ptr() + bi * F;
            for (std::int64_t o = 0; o < O; ++o) {
                const T g = gyd[bi * O + o];
                const T* __restrict__ wrow = wd + o * F;
                for (std::int64_t f = 0; f < F; ++f) {
                    gxrow[f] += g * wrow[f];
                }
            }
        }
    });
    parallel_for(O, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t o = lo; o < hi; ++o) {
            T* __restrict__ gwrow = gw.ptr() + o * F;
            T acc = 0;
            for (std::int64_t bi = 0; bi < B; ++bi) {
                const T g = gyd[bi * O + o];
                acc += g;
                const T* __restrict__ xrow = xd + bi * F;
                for (std::int64_t f = 0; f < F; ++f) {
                    gwrow[f] += g * xrow[f];
                }
            }
            gb[o] += acc;
        }
    });
}

// ------------------------------------------------------------------- relu

template <typename T>
TensorT<T> relu_fwd(const TensorT<T>& x) {
    TensorT<T> y(x.shape);
    for (std::int64_t i = 0; i < x.size(); ++i) {
        y[i] = x[i] > T(0) ? x[i] : T(0);
    }
    return y;
}

template <typename T>
void relu_bwd(const TensorT<T>& x, const TensorT<T>& gy, TensorT<T>& gx) {
    for (std::int64_t i = 0; i < x.size(); ++i) {
        if (x[i] > T(0)) {
            gx[i] += gy[i];
        }
    }
}

// ------------------------------------------------- softmax / cross-entropy

// Row-wise softmax with max subtraction, logits (B,N).
template <typename T>
TensorT<T> softmax_fwd(const TensorT<T>& logits) {
    if (logits.rank() != 2) {
        throw DimensionError("softmax: expected (B,N), got " + shape_str(logits.shape));
    }
    const std::int64_t B = logits.shape[0], N = logits.shape[1];
    TensorT<T> p(logits.shape);
    for (std::int64_t bi = 0; bi < B; ++bi) {
        const T* row = logits.ptr() + bi * N;
        T* prow = p.ptr() + bi * N;
        T m = row[0];
        for (std::int64_t i = 1; i < N; ++i) {
            m = std::max(m, row[i]);
        }
        if (!std::isfinite(static_cast<double>(m))) {
            throw NumericError("softmax: non-finite logit in row " + std::to_string(bi));
        }
        T sum = 0;
        for (std::int64_t i = 0; i < N; ++i) {
            prow[i] = std::exp(row[i] - m);
            sum += prow[i];
        }
        for (std::int64_t i = 0; i < N; ++i) {
            prow[i] /= sum;
        }
    }
    return p;
}

// gx = p * (gy - sum(p*gy)) per row.
template <typename T>
void softmax_bwd(const TensorT<T>& p, const TensorT<T>& gy, TensorT<T>& gx) {
    const std::int64_t B = p.shape[0], N = p.shape[1];
    for (std::int64_t bi = 0; bi < B; ++bi) {
        const T* prow = p.ptr() + bi * N;
        const T* gyrow = gy.ptr() + bi * N;
        T dot = 0;
        for (std::int64_t i = 0; i < N; ++i) {
            dot += prow[i] * gyrow[i];
        }
        T* gxrow = gx.ptr() + bi * N;
        for (std::int64_t i = 0; i < N; ++i) {
            gxrow[i] += prow[i] * (gyrow[i] - dot);
        }
    }
}

// Summed (not averaged) negative log softmax over the batch. Saves the
// softmax rows for the backward rule.
template <typename T>
T cross_entropy_fwd(const TensorT<T>& logits, const std::vector<int>& targets, TensorT<T>* probs_out) {
    if (logits.rank() != 2) {
        throw DimensionError("cross_entropy: expected (B,N), got " + shape_str(logits.shape));
    }
    const std::int64_t B = logits.shape[0], N = logits.shape[1];
    if (static_cast<std::int64_t>(targets.size()) != B) {
        throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for batch " +
                             std::to_string(B));
    }
    for (const int t : targets) {
        if (t < 0 || t >= N) {
            throw DimensionError("cross_entropy: target " + std::to_string(t) + " out of range [0," +
                                 std::to_string(N) + ")");
        }
    }
    TensorT<T> p = softmax_fwd(logits);
    T loss = 0;
    for (std::int64_t bi = 0; bi < B; ++bi) {
        const T* row = logits.ptr() + bi * N;
        T m = row[0];
        for (std::int64_t i = 1; i < N; ++i) {
            m = std::max(m, row[i]);
        }
        T sum = 0;
        for (std::int64_t i = 0; i < N; ++i) {
            sum += std::exp(row[i] - m);
        }
        loss += m + std::log(sum) - row[targets[static_cast<std::size_t>(bi)]];
    }
    if (probs_out != nullptr) {
        *probs_out = std::move(p);
    }
    return loss;
}

// dlogits for upstream gradient g on the summed loss: g * (p - onehot).
template <typename T>
void cross_entropy_bwd(const TensorT<T>& probs, const std::vector<int>& targets, T g, TensorT<T>& glogits) {
    const std::int64_t B = probs.shape[0], N = probs.shape[1];
    for (std::int64_t bi = 0; bi < B; ++bi) {
        const T* prow = probs.ptr() + bi * N;
        T* grow = glogits.ptr() + bi * N;
        for (std::int64_t i = 0; i < N; ++i) {
            grow[i] += g * prow[i];
        }
        grow[targets[static_cast<std::size_t>(bi)]] -= g;
    }
}

} // namespace stroke::kernels
