#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stroke/errors.hpp"

namespace stroke {

// Uncompressed RGB video. Frame-major, row-major within a frame, 3 bytes per
// pixel. Codec decoding is out of scope; the method starts at RGB frames.
struct RawVideo {
    std::int64_t width = 0;
    std::int64_t height = 0;
    std::int64_t frame_count = 0;
    std::vector<std::uint8_t> rgb;

    std::int64_t frame_bytes() const { return width * height * 3; }

    const std::uint8_t* frame(std::int64_t t) const { return rgb.data() + t * frame_bytes(); }
    std::uint8_t* frame(std::int64_t t) { return rgb.data() + t * frame_bytes(); }

    void check() const {
        if (width < 0 || height < 0 || frame_count < 0 ||
            static_cast<std::int64_t>(rgb.size()) != frame_count * frame_bytes()) {
            throw FormatError("raw video: buffer length does not match declared geometry");
        }
    }
};

RawVideo make_video(std::int64_t width, std::int64_t height, std::int64_t frame_count);

// Container: magic "RVID", u32 LE version (1), u32 LE width, u32 LE height,
// u32 LE frame_count, u32 LE channels (3), then the payload. Lossless.
RawVideo read_raw_video(const std::filesystem::path& path);
void write_raw_video(const RawVideo& video, const std::filesystem::path& path);

// Bilinear per-frame downscale to the target width; height keeps the aspect
// ratio, rounded to the nearest even integer. Upscaling is rejected; a video
// already at the target width is returned unchanged.
RawVideo resize_video(const RawVideo& video, std::int64_t target_width = 320);

} // namespace stroke
