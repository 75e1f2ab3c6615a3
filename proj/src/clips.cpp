#include "stroke/clips.hpp"

#include <algorithm>
#include <cmath>

#include "stroke/rng.hpp"

namespace stroke {

Clip extract_clip(const RawVideo& video, std::int64_t begin, std::int64_t end, std::int64_t length,
                  std::int64_t jitter) {
    if (length < 1) {
        throw ConfigError("extract_clip: length must be positive");
    }
    if (video.frame_count < length) {
        throw DimensionError("extract_clip: video has " + std::to_string(video.frame_count) +
                             " frames, need at least " + std::to_string(length));
    }
    const std::int64_t mid = (begin + end) / 2; // floor for non-negative frames
    std::int64_t start = mid - (length / 2 - 1) + jitter;
    start = std::clamp<std::int64_t>(start, 0, video.frame_count - length);

    const std::int64_t H = video.height, W = video.width;
    Clip clip;
    clip.start_frame = start;
    clip.tensor = Tensor({3, length, H, W});
    float* out = clip.tensor.ptr();
    const std::int64_t plane = H * W;
    for (std::int64_t t = 0; t < length; ++t) {
        const std::uint8_t* src = video.frame(start + t);
        for (std::int64_t i = 0; i < plane; ++i) {
            out[0 * length * plane + t * plane + i] = static_cast<float>(src[i * 3 + 0]) / 255.0f;
            out[1 * length * plane + t * plane + i] = static_cast<float>(src[i * 3 + 1]) / 255.0f;
            out[2 * length * plane + t * plane + i] = static_cast<float>(src[i * 3 + 2]) / 255.0f;
        }
    }
    return clip;
}

Clip apply_spatial_transform(const Clip& clip, bool hflip, double angle_deg) {
    const std::int64_t C = clip.tensor.shape[0], L = clip.tensor.shape[1];
    const std::int64_t H = clip.tensor.shape[2], W = clip.tensor.shape[3];

    Clip out = clip;
    if (!hflip && angle_deg == 0.0) {
        return out;
    }

    const double theta = angle_deg * 3.14159265358979323846 / 180.0;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    const double cx = (static_cast<double>(W) - 1.0) / 2.0;
    const double cy = (static_cast<double>(H) - 1.0) / 2.0;

    const float* in = clip.tensor.ptr();
    float* dst = out.tensor.ptr();
    const std::int64_t plane = H * W;

    for (std::int64_t y = 0; y < H; ++y) {
        for (std::int64_t x = 0; x < W; ++x) {
            // Inverse map: rotate the output coordinate back, then undo the
            // flip when sampling.
            const double dx = static_cast<double>(x) - cx;
            const double dy = static_cast<double>(y) - cy;
            const double sx = cx + cos_t * dx + sin_t * dy;
            const double sy = cy - sin_t * dx + cos_t * dy;

            const std::int64_t oi = y * W + x;
            if (sx < 0.0 || sy < 0.0 || sx > static_cast<double>(W - 1) || sy > static_cast<double>(H - 1)) {
                for (std::int64_t c = 0; c < C; ++c) {
                    for (std::int64_t t = 0; t < L; ++t) {
                        dst[(c * L + t) * plane + oi] = 0.0f;
                    }
                }
                continue;
            }
            const std::int64_t x0 = static_cast<std::int64_t>(std::floor(sx));
            const std::int64_t y0 = static_cast<std::int64_t>(std::floor(sy));
            const std::int64_t x1 = std::min<std::int64_t>(x0 + 1, W - 1);
            const std::int64_t y1 = std::min<std::int64_t>(y0 + 1, H - 1);
            const double fx = sx - static_cast<double>(x0);
            const double fy = sy - static_cast<double>(y0);

            const auto sample_x = [&](std::int64_t xx) { return hflip ? (W - 1 - xx) : xx; };
            const std::int64_t sx0 = sample_x(x0), sx1 = sample_x(x1);

            for (std::int64_t c = 0; c < C; ++c) {
                for (std::int64_t t = 0; t < L; ++t) {
                    const float* p = in + (c * L + t) * plane;
                    const double v00 = p[y0 * W + sx0];
                    const double v01 = p[y0 * W + sx1];
                    const double v10 = p[y1 * W + sx0];
                    const double v11 = p[y1 * W + sx1];
                    const double v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
                    dst[(c * L + t) * plane + oi] = static_cast<float>(v);
                }
            }
        }
    }
    return out;
}

Clip augment_clip(const Clip& clip, std::uint64_t seed) {
    Rng rng(seed);
    const bool flip = rng.coin();
    const double angle = rng.uniform(-10.0, 10.0);
    return apply_spatial_transform(clip, flip, angle);
}

std::vector<StrokeAnnotation> mine_negative_segments(std::int64_t frame_count,
                                                     const std::vector<StrokeAnnotation>& annotations,
                                                     std::int64_t count, std::int64_t length,
                                                     std::uint64_t seed) {
    std::vector<StrokeAnnotation> sorted = annotations;
    std::sort(sorted.begin(), sorted.end(),
              [](const StrokeAnnotation& a, const StrokeAnnotation& b) { return a.begin < b.begin; });

    // Candidate starts: every s with [s, s+length-1] inside an uncovered gap.
    std::vector<std::int64_t> starts;
    std::int64_t cursor = 0;
    const auto add_gap = [&](std::int64_t lo, std::int64_t hi) { // [lo,hi) free
        for (std::int64_t s = lo; s + length <= hi; ++s) {
            starts.push_back(s);
        }
    };
    for (const auto& a : sorted) {
        add_gap(cursor, std::min(a.begin, frame_count));
        cursor = std::max(cursor, a.end + 1);
    }
    add_gap(cursor, frame_count);

    Rng rng(seed);
    rng.shuffle(starts.begin(), starts.end());

    std::vector<StrokeAnnotation> out;
    std::vector<std::pair<std::int64_t, std::int64_t>> taken;
    for (const std::int64_t s : starts) {
        if (static_cast<std::int64_t>(out.size()) >= count) {
            break;
        }
        const std::int64_t e = s + length - 1;
        bool overlaps = false;
        for (const auto& [tb, te] : taken) {
            if (s <= te && tb <= e) {
                overlaps = true;
                break;
            }
        }
        if (overlaps) {
            continue;
        }
        taken.emplace_back(s, e);
        out.push_back(StrokeAnnotation{s, e, "negative"});
    }
    std::sort(out.begin(), out.end(),
              [](const StrokeAnnotation& a, const StrokeAnnotation& b) { return a.begin < b.begin; });
    return out;
}

} // namespace stroke
