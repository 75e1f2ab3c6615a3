#pragma once

#include <filesystem>
#include <map>

#include "stroke/dataset.hpp"
#include "stroke/network.hpp"
#include "stroke/video.hpp"

namespace stroke {

enum class Fusion { no_window, vote, mean, gaussian };
enum class Decision { neg_vs_all, neg_vs_sum };

Fusion fusion_from_name(const std::string& name);
std::string fusion_name(Fusion f);
Decision decision_from_name(const std::string& name);
std::string decision_name(Decision d);

struct DetectionConfig {
    Fusion fusion = Fusion::gaussian;
    double sigma = 16.0; // frames
    Decision decision = Decision::neg_vs_all;
    int negative_class = 0;
    std::int64_t min_segment_len = 30;
    std::int64_t proposal_len = 150;
    bool proposal_mode = false;
    std::int64_t batch_windows = 16;

    bool operator==(const DetectionConfig&) const = default;

    void validate() const;
};

// A detected stroke: inclusive frame interval, class index, confidence.
struct Segment {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    int label = 0;
    double confidence = 1.0;

    std::int64_t length() const { return end - begin + 1; }
};

using SegmentsByVideo = std::map<std::string, std::vector<Segment>>;

// Softmax outputs of every stride-1 window of a video. Window w covers
// frames [starts[w], starts[w] + window_length - 1]; its centre is
// starts[w] + (window_length - 1) / 2.
struct ScoreTimeline {
    std::vector<std::int64_t> window_starts;
    std::vector<std::vector<double>> scores; // each sums to 1
    std::int64_t window_length = 96;
    std::int64_t frame_count = 0;
    int num_classes = 0;
};

// Per-frame class probability vectors, frames 0..frame_count-1.
using FrameScores = std::vector<std::vector<double>>;

// One probability vector per start in [0, F - L], stride 1. L is the model's
// input length. Throws DimensionError when the video is shorter than L.
ScoreTimeline slide_window_scores(const Model& model, const RawVideo& video, std::int64_t batch_windows = 16);

// Classifies the trimmed region [begin, end] of a video. no_window uses one
// centred window; the other methods slide stride-1 windows across the region
// and fuse: vote by window argmax majority (ties to the lower class index),
// mean by averaging probabilities, gaussian by a centre-distance-weighted
// average with weights exp(-d^2 / 2 sigma^2).
std::pair<int, double> classify_trimmed(const Model& model, const RawVideo& video, std::int64_t begin,
                                        std::int64_t end, Fusion method, double sigma = 16.0,
                                        std::int64_t batch_windows = 16);

// Combines window scores into one vector per frame using the windows that
// cover it. vote yields the normalized histogram of covering windows' argmax
// labels.
FrameScores fuse_frame_scores(const ScoreTimeline& timeline, Fusion method, double sigma);

struct FrameDecision {
    std::vector<std::uint8_t> stroke_mask;
    std::vector<double> stroke_score; // 1 - p_negative
};

// neg_vs_all: stroke iff argmax != negative class. neg_vs_sum: stroke iff
// p_negative < 0.5.
FrameDecision frame_decision(const FrameScores& frames, Decision approach, int negative_class);

// Maximal stroke runs, dropping those shorter than min_len. Multi-class
// labels come from the mean non-negative probabilities over the run;
// confidence is the mean stroke score.
std::vector<Segment> segments_from_frames(const FrameDecision& decision, const FrameScores& frames,
                                          std::int64_t min_len, int negative_class);

// Non-overlapping [0,len-1], [len,2len-1], ...; the incomplete tail is
// dropped.
std::vector<std::pair<std::int64_t, std::int64_t>> proposal_candidates(std::int64_t frame_count,
                                                                       std::int64_t proposal_len);

// Full detection pass. Sliding mode: slide -> fuse -> decide -> segment.
// Proposal mode: classify each fixed-length proposal and emit those not
// classified negative as whole-proposal segments.
std::vector<Segment> detect_video(const Model& model, const RawVideo& video, const DetectionConfig& cfg);

// CSV `video_id,begin,end,label,score` with class names from the map.
void write_detections_csv(const std::filesystem::path& path, const SegmentsByVideo& segments,
                          const ClassMap& classes);
SegmentsByVideo read_detections_csv(const std::filesystem::path& path, const ClassMap& classes);

} // namespace stroke
