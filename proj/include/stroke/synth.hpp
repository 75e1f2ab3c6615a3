#pragma once

#include <filesystem>

#include "stroke/annotations.hpp"
#include "stroke/video.hpp"

namespace stroke {

// Generator for the stand-in dataset: untrimmed videos of moving bright bars
// over a noisy background. Class k is a bar at orientation 180*(k-1)/classes
// degrees sweeping the frame at 1 + ((k-1) % 2) pixels per frame; the
// background between strokes is bare noise (the "negative" content).
struct SynthConfig {
    int classes = 4; // bar classes; negative background comes for free
    int videos_per_split = 4;
    int strokes_per_video = 8;
    std::int64_t width = 64;
    std::int64_t height = 48;
    std::int64_t min_stroke = 60;
    std::int64_t max_stroke = 180;
    std::int64_t min_gap = 30;
    std::int64_t max_gap = 90;
    std::uint64_t seed = 0;

    bool operator==(const SynthConfig&) const = default;
};

struct SynthDataset {
    std::filesystem::path root;
    std::filesystem::path manifest; // root / "splits.tsv"
};

std::string synth_class_name(int k); // 1-based -> "class1", ...

// Renders one untrimmed video plus its ground truth. Used by synth_dataset
// and directly by tests that need in-memory videos.
std::pair<RawVideo, std::vector<StrokeAnnotation>> render_synth_video(const SynthConfig& cfg,
                                                                      std::uint64_t video_seed);

// Writes videos/, annotations/ and splits.tsv under out_dir for the train,
// validation and test splits. Deterministic: equal seeds give equal bytes.
SynthDataset synth_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir);

} // namespace stroke
