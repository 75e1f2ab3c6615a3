#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stroke/annotations.hpp"
#include "stroke/tensor.hpp"
#include "stroke/video.hpp"

namespace stroke {

// A fixed-length training/evaluation sample: (3, length, H, W) float in
// [0,1].
struct Clip {
    Tensor tensor;
    int label = -1;
    std::string video_id;
    std::int64_t start_frame = 0;
};

// Cuts a `length`-frame window centred on the stroke midpoint: start =
// floor((begin+end)/2) - (length/2 - 1), shifted by jitter, then clamped to
// [0, frame_count - length]. Pixels are scaled to [0,1]. Throws
// DimensionError when the video is shorter than `length`.
Clip extract_clip(const RawVideo& video, std::int64_t begin, std::int64_t end, std::int64_t length,
                  std::int64_t jitter = 0);

// The same transform applied to all frames: optional horizontal flip, then
// rotation about the frame centre with zero fill (bilinear sampling).
Clip apply_spatial_transform(const Clip& clip, bool hflip, double angle_deg);

// Seeded augmentation: flip with probability 0.5, rotation angle uniform in
// [-10, +10] degrees. Label unchanged.
Clip augment_clip(const Clip& clip, std::uint64_t seed);

// Up to `count` non-overlapping intervals of `length` frames drawn uniformly
// from the frames not covered by any annotation. Returns fewer when the gaps
// run out; labels are "negative".
std::vector<StrokeAnnotation> mine_negative_segments(std::int64_t frame_count,
                                                     const std::vector<StrokeAnnotation>& annotations,
                                                     std::int64_t count, std::int64_t length,
                                                     std::uint64_t seed);

} // namespace stroke
