#include "stroke/video.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little, "raw video I/O assumes a little-endian host");

namespace stroke {

namespace {

constexpr char kMagic[4] = {'R', 'V', 'I', 'D'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& is, const char* what) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) {
        throw FormatError(std::string("raw video: truncated while reading ") + what);
    }
    return v;
}

} // namespace

RawVideo make_video(std::int64_t width, std::int64_t height, std::int64_t frame_count) {
    RawVideo v;
    v.width = width;
    v.height = height;
    v.frame_count = frame_count;
    v.rgb.assign(static_cast<std::size_t>(frame_count * width * height * 3), 0);
    return v;
}

RawVideo read_raw_video(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("raw video: cannot open " + path.string());
    }
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("raw video: bad magic in " + path.string());
    }
    const std::uint32_t version = read_u32(is, "version");
    if (version != kVersion) {
        throw FormatError("raw video: unsupported version " + std::to_string(version));
    }
    RawVideo v;
    v.width = read_u32(is, "width");
    v.height = read_u32(is, "height");
    v.frame_count = read_u32(is, "frame count");
    const std::uint32_t channels = read_u32(is, "channels");
    if (channels != 3) {
        throw FormatError("raw video: expected 3 channels, got " + std::to_string(channels));
    }
    const std::int64_t payload = v.frame_count * v.frame_bytes();
    v.rgb.resize(static_cast<std::size_t>(payload));
    is.read(reinterpret_cast<char*>(v.rgb.data()), payload);
    if (is.gcount() != payload) {
        throw FormatError("raw video: payload shorter than declared frame count");
    }
    char extra;
    if (is.read(&extra, 1)) {
        throw FormatError("raw video: payload longer than declared frame count");
    }
    return v;
}

void write_raw_video(const RawVideo& video, const std::filesystem::path& path) {
    video.check();
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("raw video: cannot open " + path.string() + " for writing");
    }
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(video.width));
    write_u32(os, static_cast<std::uint32_t>(video.height));
    write_u32(os, static_cast<std::uint32_t>(video.frame_count));
    write_u32(os, 3);
    os.write(reinterpret_cast<const char*>(video.rgb.data()), static_cast<std::streamsize>(video.rgb.size()));
    if (!os) {
        throw IoError("raw video: write failed for " + path.string());
    }
}

RawVideo resize_video(const RawVideo& video, std::int64_t target_width) {
    video.check();
    if (target_width > video.width) {
        throw ConfigError("resize: upscaling from width " + std::to_string(video.width) + " to " +
                          std::to_string(target_width) + " is not supported");
    }
    if (target_width == video.width) {
        return video;
    }
    const double scale = static_cast<double>(video.width) / static_cast<double>(target_width);
    std::int64_t target_height = std::llround(static_cast<double>(video.height) / scale / 2.0) * 2;
    target_height = std::max<std::int64_t>(2, target_height);

    RawVideo out = make_video(target_width, target_height, video.frame_count);
    const double sx_scale = static_cast<double>(video.width) / static_cast<double>(target_width);
    const double sy_scale = static_cast<double>(video.height) / static_cast<double>(target_height);

    for (std::int64_t t = 0; t < video.frame_count; ++t) {
        const std::uint8_t* src = video.frame(t);
        std::uint8_t* dst = out.frame(t);
        for (std::int64_t y = 0; y < target_height; ++y) {
            const double sy = (static_cast<double>(y) + 0.5) * sy_scale - 0.5;
            const std::int64_t y0 = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(sy)), 0, video.height - 1);
            const std::int64_t y1 = std::min<std::int64_t>(y0 + 1, video.height - 1);
            const double fy = std::clamp(sy - static_cast<double>(y0), 0.0, 1.0);
            for (std::int64_t x = 0; x < target_width; ++x) {
                const double sx = (static_cast<double>(x) + 0.5) * sx_scale - 0.5;
                const std::int64_t x0 = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(sx)), 0, video.width - 1);
                const std::int64_t x1 = std::min<std::int64_t>(x0 + 1, video.width - 1);
                const double fx = std::clamp(sx - static_cast<double>(x0), 0.0, 1.0);
                for (int c = 0; c < 3; ++c) {
                    const double v00 = src[(y0 * video.width + x0) * 3 + c];
                    const double v01 = src[(y0 * video.width + x1) * 3 + c];
                    const double v10 = src[(y1 * video.width + x0) * 3 + c];
                    const double v11 = src[(y1 * video.width + x1) * 3 + c];
                    const double v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
                    dst[(y * target_width + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
                }
            }
        }
    }
    return out;
}

} // namespace stroke
