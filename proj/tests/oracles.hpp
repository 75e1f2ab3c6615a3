#pragma once

// Independent reference implementations used as test oracles. Everything
// here is written as directly as possible (plain nested loops, threshold
// enumeration) and must stay decoupled from the library's compute paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stroke/evaluator.hpp"
#include "stroke/rng.hpp"
#include "stroke/tensor.hpp"

namespace oracle {

// Triple correlation with zero "same" padding, one output cell at a time.
template <typename T>
stroke::TensorT<T> conv3d(const stroke::TensorT<T>& x, const stroke::TensorT<T>& w,
                          const stroke::TensorT<T>& b) {
    const auto B = x.shape[0], Ci = x.shape[1], Tt = x.shape[2], H = x.shape[3], W = x.shape[4];
    const auto Co = w.shape[0], kT = w.shape[2], kH = w.shape[3], kW = w.shape[4];
    const auto pT = (kT - 1) / 2, pH = (kH - 1) / 2, pW = (kW - 1) / 2;
    stroke::TensorT<T> y({B, Co, Tt, H, W});
    for (std::int64_t bi = 0; bi < B; ++bi)
        for (std::int64_t co = 0; co < Co; ++co)
            for (std::int64_t t = 0; t < Tt; ++t)
                for (std::int64_t h = 0; h < H; ++h)
                    for (std::int64_t wo = 0; wo < W; ++wo) {
                        double acc = b[co];
                        for (std::int64_t ci = 0; ci < Ci; ++ci)
                            for (std::int64_t kt = 0; kt < kT; ++kt)
                                for (std::int64_t kh = 0; kh < kH; ++kh)
                                    for (std::int64_t kw = 0; kw < kW; ++kw) {
                                        const std::int64_t ti = t + kt - pT;
                                        const std::int64_t hi = h + kh - pH;
                                        const std::int64_t wi = wo + kw - pW;
                                        if (ti < 0 || ti >= Tt || hi < 0 || hi >= H || wi < 0 || wi >= W)
                                            continue;
                                        acc += static_cast<double>(x[(((bi * Ci + ci) * Tt + ti) * H + hi) * W + wi]) *
                                               static_cast<double>(w[(((co * Ci + ci) * kT + kt) * kH + kh) * kW + kw]);
                                    }
                        y[(((bi * Co + co) * Tt + t) * H + h) * W + wo] = static_cast<T>(acc);
                    }
    return y;
}

template <typename T>
stroke::TensorT<T> maxpool3d(const stroke::TensorT<T>& x, std::int64_t pT, std::int64_t pH, std::int64_t pW) {
    const auto B = x.shape[0], C = x.shape[1], Tt = x.shape[2], H = x.shape[3], W = x.shape[4];
    const auto To = Tt / pT, Ho = H / pH, Wo = W / pW;
    stroke::TensorT<T> y({B, C, To, Ho, Wo});
    for (std::int64_t bc = 0; bc < B * C; ++bc)
        for (std::int64_t to = 0; to < To; ++to)
            for (std::int64_t ho = 0; ho < Ho; ++ho)
                for (std::int64_t wo = 0; wo < Wo; ++wo) {
                    T best = x[((bc * Tt + to * pT) * H + ho * pH) * W + wo * pW];
                    for (std::int64_t a = 0; a < pT; ++a)
                        for (std::int64_t b2 = 0; b2 < pH; ++b2)
                            for (std::int64_t c2 = 0; c2 < pW; ++c2)
                                best = std::max(best, x[((bc * Tt + to * pT + a) * H + ho * pH + b2) * W + wo * pW + c2]);
                    y[((bc * To + to) * Ho + ho) * Wo + wo] = best;
                }
    return y;
}

// x * (1 + sigmoid(sum_c mw_c x_c + mb)), scalar loop.
template <typename T>
stroke::TensorT<T> attention(const stroke::TensorT<T>& x, const stroke::TensorT<T>& mw,
                             const stroke::TensorT<T>& mb) {
    const auto B = x.shape[0], C = x.shape[1];
    const auto plane = x.shape[2] * x.shape[3] * x.shape[4];
    stroke::TensorT<T> y(x.shape);
    for (std::int64_t bi = 0; bi < B; ++bi)
        for (std::int64_t p = 0; p < plane; ++p) {
            double z = mb[0];
            for (std::int64_t c = 0; c < C; ++c)
                z += static_cast<double>(mw[c]) * static_cast<double>(x[(bi * C + c) * plane + p]);
            const double m = 1.0 / (1.0 + std::exp(-z));
            for (std::int64_t c = 0; c < C; ++c)
                y[(bi * C + c) * plane + p] = static_cast<T>(x[(bi * C + c) * plane + p] * (1.0 + m));
        }
    return y;
}

template <typename T>
stroke::TensorT<T> linear(const stroke::TensorT<T>& x, const stroke::TensorT<T>& w, const stroke::TensorT<T>& b) {
    const auto B = x.shape[0], F = x.shape[1], O = w.shape[0];
    stroke::TensorT<T> y({B, O});
    for (std::int64_t bi = 0; bi < B; ++bi)
        for (std::int64_t o = 0; o < O; ++o) {
            double acc = b[o];
            for (std::int64_t f = 0; f < F; ++f)
                acc += static_cast<double>(x[bi * F + f]) * static_cast<double>(w[o * F + f]);
            y[bi * O + o] = static_cast<T>(acc);
        }
    return y;
}

template <typename T>
void fill_random(stroke::TensorT<T>& t, stroke::Rng& rng, double lo = -1.0, double hi = 1.0) {
    for (std::int64_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<T>(rng.uniform(lo, hi));
    }
}

// Brute-force all-point-interpolated AP: enumerate every confidence
// threshold, rebuild the greedy matching from scratch for the detections at
// or above it, and integrate precision over the recall steps.
inline double brute_force_ap(const std::vector<stroke::VideoSegment>& detections,
                             const std::vector<stroke::VideoSegment>& gts, double iou_thr) {
    const std::int64_t G = static_cast<std::int64_t>(gts.size());
    if (G == 0) {
        return 0.0;
    }
    auto sorted = detections;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.seg.confidence != b.seg.confidence) return a.seg.confidence > b.seg.confidence;
        if (a.seg.begin != b.seg.begin) return a.seg.begin < b.seg.begin;
        return a.video_id < b.video_id;
    });

    const auto match_prefix = [&](std::size_t n) {
        std::vector<bool> used(gts.size(), false);
        std::int64_t tp = 0;
        for (std::size_t d = 0; d < n; ++d) {
            double best = 0.0;
            std::int64_t bg = -1;
            for (std::size_t g = 0; g < gts.size(); ++g) {
                if (used[g] || gts[g].video_id != sorted[d].video_id) continue;
                const double iou = stroke::temporal_iou(sorted[d].seg, gts[g].seg);
                if (iou > best || (iou == best && bg >= 0 &&
                                   gts[g].seg.begin < gts[static_cast<std::size_t>(bg)].seg.begin)) {
                    best = iou;
                    bg = static_cast<std::int64_t>(g);
                }
            }
            if (bg >= 0 && best >= iou_thr) {
                used[static_cast<std::size_t>(bg)] = true;
                ++tp;
            }
        }
        return tp;
    };

    // PR point per threshold (one per prefix length).
    std::vector<std::pair<double, double>> pr; // (recall, precision)
    for (std::size_t n = 1; n <= sorted.size(); ++n) {
        const std::int64_t tp = match_prefix(n);
        pr.emplace_back(static_cast<double>(tp) / static_cast<double>(G),
                        static_cast<double>(tp) / static_cast<double>(n));
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < pr.size(); ++i) {
        if (pr[i].first <= prev_recall) {
            continue;
        }
        double env = 0.0;
        for (std::size_t j = i; j < pr.size(); ++j) {
            if (pr[j].first >= pr[i].first) {
                env = std::max(env, pr[j].second);
            }
        }
        ap += (pr[i].first - prev_recall) * env;
        prev_recall = pr[i].first;
    }
    return ap;
}

} // namespace oracle
