#pragma once

#include <filesystem>

#include "stroke/detector.hpp"
#include "stroke/network.hpp"
#include "stroke/synth.hpp"
#include "stroke/trainer.hpp"

namespace stroke {

// Merged experiment configuration, read from an INI-style file: [section]
// headers, key = value lines, '#' comments. Unknown keys are rejected.
// Sections: [experiment], [model], [train], [detect], [synth].
struct ExperimentConfig {
    std::uint64_t seed = 0;

    // [model]
    std::string arch = "v2";
    std::int64_t input_channels = 3;
    std::int64_t input_frames = 96;
    std::int64_t input_height = 180;
    std::int64_t input_width = 320;
    std::vector<std::int64_t> channels; // empty selects the default plan
    std::int64_t hidden_fc = 500;
    std::int64_t num_classes = 21;
    std::int64_t spatial_pool_blocks = 2;

    TrainConfig train;
    std::int64_t negatives_per_video = 2;
    DetectionConfig detect;
    SynthConfig synth;

    bool operator==(const ExperimentConfig&) const = default;

    // Substructures with the experiment seed folded in.
    BuildOptions build_options() const;
    NetworkSpec network_spec() const;
    TrainConfig train_config() const;
    SynthConfig synth_config() const;
};

ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<memory>");

// Inverse of the parser: parse(dump(c)) == c.
std::string dump_config(const ExperimentConfig& cfg);

} // namespace stroke
