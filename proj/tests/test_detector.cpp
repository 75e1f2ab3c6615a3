#include <doctest.h>

#include <cmath>

#include "stroke/detector.hpp"
#include "stroke/rng.hpp"

using namespace stroke;

namespace {

// Hand-built timeline: stride-1 starts covering frame_count frames.
ScoreTimeline make_timeline(std::int64_t frame_count, std::int64_t window_length,
                            const std::vector<std::vector<double>>& scores) {
    ScoreTimeline tl;
    tl.frame_count = frame_count;
    tl.window_length = window_length;
    tl.num_classes = static_cast<int>(scores.empty() ? 0 : scores[0].size());
    tl.scores = scores;
    tl.window_starts.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        tl.window_starts[i] = static_cast<std::int64_t>(i);
    }
    return tl;
}

std::vector<double> random_prob(Rng& rng, int n) {
    std::vector<double> p(static_cast<std::size_t>(n));
    double sum = 0;
    for (auto& v : p) {
        v = rng.uniform(0.01, 1.0);
        sum += v;
    }
    for (auto& v : p) {
        v /= sum;
    }
    return p;
}

Model zeroed_model(int num_classes, float negative_bias) {
    BuildOptions opt;
    opt.input_shape = {3, 8, 16, 16};
    opt.channels = {2, 3};
    opt.hidden_fc = 8;
    opt.num_classes = num_classes;
    opt.seed = 1;
    Model m = build_v2(opt);
    for (Param& p : m.params) {
        p.value.fill(0.0f);
    }
    // final linear bias: favor the negative class
    m.params.back().value[0] = negative_bias;
    return m;
}

RawVideo gray_video(std::int64_t frames) {
    RawVideo v = make_video(16, 16, frames);
    for (auto& b : v.rgb) {
        b = 127;
    }
    return v;
}

} // namespace

TEST_CASE("slide_window_scores: window count is F - L + 1, rows sum to 1") {
    const Model m = zeroed_model(3, 0.0f);
    SUBCASE("video of exactly one window") {
        const ScoreTimeline tl = slide_window_scores(m, gray_video(8));
        CHECK(tl.window_starts.size() == 1);
        CHECK(tl.window_starts[0] == 0);
    }
    SUBCASE("four extra frames give five windows") {
        const ScoreTimeline tl = slide_window_scores(m, gray_video(12));
        REQUIRE(tl.window_starts.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(tl.window_starts[i] == static_cast<std::int64_t>(i));
            double sum = 0;
            for (const double v : tl.scores[i]) {
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) < 1e-5);
        }
    }
    SUBCASE("too-short videos are rejected") {
        CHECK_THROWS_AS(slide_window_scores(m, gray_video(7)), DimensionError);
    }
}

TEST_CASE("classify_trimmed: a single-window region makes all four methods agree") {
    const Model m = zeroed_model(3, 1.0f); // negative wins everywhere
    const RawVideo v = gray_video(8);
    const auto a = classify_trimmed(m, v, 0, 7, Fusion::no_window);
    const auto b = classify_trimmed(m, v, 0, 7, Fusion::vote);
    const auto c = classify_trimmed(m, v, 0, 7, Fusion::mean);
    const auto d = classify_trimmed(m, v, 0, 7, Fusion::gaussian);
    CHECK(a.first == b.first);
    CHECK(b.first == c.first);
    CHECK(c.first == d.first);
    CHECK(a.first == 0);
    CHECK_THROWS_AS(classify_trimmed(m, v, 0, 5, Fusion::mean), DimensionError);
}

TEST_CASE("fuse: constant timelines reproduce the vector (mean/gaussian) or its one-hot (vote)") {
    const std::vector<double> p{0.2, 0.5, 0.3};
    const ScoreTimeline tl = make_timeline(10, 4, std::vector<std::vector<double>>(7, p));
    for (const Fusion f : {Fusion::mean, Fusion::gaussian}) {
        const FrameScores frames = fuse_frame_scores(tl, f, 2.0);
        REQUIRE(frames.size() == 10);
        for (const auto& row : frames) {
            for (std::size_t i = 0; i < 3; ++i) {
                CHECK(row[i] == doctest::Approx(p[i]).epsilon(1e-9));
            }
        }
    }
    const FrameScores frames = fuse_frame_scores(tl, Fusion::vote, 2.0);
    for (const auto& row : frames) {
        CHECK(row[0] == 0.0);
        CHECK(row[1] == 1.0);
        CHECK(row[2] == 0.0);
    }
}

TEST_CASE("fuse: mean of two covering windows averages their vectors") {
    const ScoreTimeline tl = make_timeline(3, 2, {{1.0, 0.0}, {0.0, 1.0}});
    const FrameScores frames = fuse_frame_scores(tl, Fusion::mean, 1.0);
    // frame 1 is covered by both windows
    CHECK(frames[1][0] == doctest::Approx(0.5));
    CHECK(frames[1][1] == doctest::Approx(0.5));
    // edge frames see a single window each
    CHECK(frames[0][0] == doctest::Approx(1.0));
    CHECK(frames[2][1] == doctest::Approx(1.0));
}

TEST_CASE("fuse: gaussian weight at distance sigma is e^-1/2 of the centre weight") {
    // window length 33: centres at start+16
    const std::vector<double> p0{1.0, 0.0};
    const std::vector<double> p1{0.0, 1.0};
    ScoreTimeline tl;
    tl.frame_count = 49;
    tl.window_length = 33;
    tl.num_classes = 2;
    tl.window_starts = {0, 16};
    tl.scores = {p0, p1};
    const double sigma = 16.0;
    const FrameScores frames = fuse_frame_scores(tl, Fusion::gaussian, sigma);
    // frame 16: centre of window 0 (d=0, w=1); window 1 centre is 32 (d=16)
    const double w1 = std::exp(-0.5);
    CHECK(frames[16][0] == doctest::Approx(1.0 / (1.0 + w1)).epsilon(1e-9));
    CHECK(frames[16][1] == doctest::Approx(w1 / (1.0 + w1)).epsilon(1e-9));
}

TEST_CASE("fuse: gaussian converges to mean as sigma grows") {
    Rng rng(17);
    for (int iter = 0; iter < 20; ++iter) {
        const std::int64_t L = 3 + rng.uniform_int(6);
        const std::int64_t F = L + rng.uniform_int(20);
        std::vector<std::vector<double>> scores;
        for (std::int64_t i = 0; i + L <= F; ++i) {
            scores.push_back(random_prob(rng, 4));
        }
        const ScoreTimeline tl = make_timeline(F, L, scores);
        const FrameScores mean = fuse_frame_scores(tl, Fusion::mean, 1.0);
        const FrameScores gauss = fuse_frame_scores(tl, Fusion::gaussian, 1e9);
        double max_diff = 0;
        for (std::size_t f = 0; f < mean.size(); ++f) {
            for (std::size_t c = 0; c < 4; ++c) {
                max_diff = std::max(max_diff, std::abs(mean[f][c] - gauss[f][c]));
            }
        }
        CHECK(max_diff < 1e-6);
    }
}

TEST_CASE("fuse: fused vectors stay normalized") {
    Rng rng(18);
    std::vector<std::vector<double>> scores;
    for (int i = 0; i < 12; ++i) {
        scores.push_back(random_prob(rng, 5));
    }
    const ScoreTimeline tl = make_timeline(16, 5, scores);
    for (const Fusion f : {Fusion::vote, Fusion::mean, Fusion::gaussian}) {
        for (const auto& row : fuse_frame_scores(tl, f, 3.0)) {
            double sum = 0;
            for (const double v : row) {
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) < 1e-5);
        }
    }
}

TEST_CASE("fuse: no_window is rejected and empty timelines are state errors") {
    const ScoreTimeline tl = make_timeline(4, 2, {{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}});
    CHECK_THROWS_AS(fuse_frame_scores(tl, Fusion::no_window, 1.0), ConfigError);
    ScoreTimeline empty;
    CHECK_THROWS_AS(fuse_frame_scores(empty, Fusion::mean, 1.0), StateError);
}

TEST_CASE("frame_decision: the two approaches diverge exactly as specified") {
    const FrameScores frames{{0.4, 0.35, 0.25}};
    const FrameDecision all = frame_decision(frames, Decision::neg_vs_all, 0);
    const FrameDecision sum = frame_decision(frames, Decision::neg_vs_sum, 0);
    CHECK(all.stroke_mask[0] == 0); // argmax is the negative class
    CHECK(sum.stroke_mask[0] == 1); // 0.6 > 0.4
    CHECK(all.stroke_score[0] == doctest::Approx(0.6));
    CHECK(sum.stroke_score[0] == doctest::Approx(0.6));
}

TEST_CASE("frame_decision: certainty in the negative class is a non-stroke under both") {
    const FrameScores frames{{1.0, 0.0, 0.0}};
    CHECK(frame_decision(frames, Decision::neg_vs_all, 0).stroke_mask[0] == 0);
    CHECK(frame_decision(frames, Decision::neg_vs_sum, 0).stroke_mask[0] == 0);
}

TEST_CASE("frame_decision: the approaches agree for two-class models on a fine grid") {
    for (int i = 0; i <= 100; ++i) {
        const double p_neg = i / 100.0;
        const FrameScores frames{{p_neg, 1.0 - p_neg}};
        const auto a = frame_decision(frames, Decision::neg_vs_all, 0);
        const auto b = frame_decision(frames, Decision::neg_vs_sum, 0);
        CHECK(a.stroke_mask[0] == b.stroke_mask[0]);
    }
}

TEST_CASE("frame_decision: raising p_neg never creates a stroke") {
    Rng rng(19);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<double> p = random_prob(rng, 4);
        for (const Decision d : {Decision::neg_vs_all, Decision::neg_vs_sum}) {
            const auto base = frame_decision({p}, d, 0);
            // raise p_neg, shrink the others proportionally
            std::vector<double> q = p;
            const double delta = rng.uniform(0.0, 1.0 - p[0]);
            const double scale = (1.0 - p[0] - delta) / (1.0 - p[0]);
            q[0] += delta;
            for (std::size_t i = 1; i < q.size(); ++i) {
                q[i] *= scale;
            }
            const auto raised = frame_decision({q}, d, 0);
            if (base.stroke_mask[0] == 0) {
                CHECK(raised.stroke_mask[0] == 0);
            }
        }
    }
}

TEST_CASE("frame_decision: bad negative index is a config error") {
    const FrameScores frames{{0.5, 0.5}};
    CHECK_THROWS_AS(frame_decision(frames, Decision::neg_vs_all, 2), ConfigError);
    CHECK_THROWS_AS(frame_decision(frames, Decision::neg_vs_all, -1), ConfigError);
}

TEST_CASE("segments: empty mask, 29/30 filter boundary, split runs") {
    const int N = 3;
    const auto frames_of = [&](const std::vector<int>& mask) {
        FrameScores fs;
        for (const int m : mask) {
            fs.push_back(m ? std::vector<double>{0.1, 0.8, 0.1} : std::vector<double>{0.9, 0.05, 0.05});
        }
        (void)N;
        return fs;
    };
    const auto decide = [&](const std::vector<int>& mask) {
        return frame_decision(frames_of(mask), Decision::neg_vs_all, 0);
    };

    SUBCASE("all-negative mask gives no segments") {
        const std::vector<int> mask(50, 0);
        CHECK(segments_from_frames(decide(mask), frames_of(mask), 30, 0).empty());
    }
    SUBCASE("a 29-frame run is dropped, a 30-frame run kept") {
        std::vector<int> mask29(80, 0), mask30(80, 0);
        std::fill(mask29.begin() + 10, mask29.begin() + 39, 1);
        std::fill(mask30.begin() + 10, mask30.begin() + 40, 1);
        CHECK(segments_from_frames(decide(mask29), frames_of(mask29), 30, 0).empty());
        const auto segs = segments_from_frames(decide(mask30), frames_of(mask30), 30, 0);
        REQUIRE(segs.size() == 1);
        CHECK(segs[0].begin == 10);
        CHECK(segs[0].end == 39);
        CHECK(segs[0].length() == 30);
        CHECK(segs[0].label == 1);
        CHECK(segs[0].confidence == doctest::Approx(0.9));
    }
    SUBCASE("two runs split by one frame stay separate, sorted and disjoint") {
        std::vector<int> mask(100, 0);
        std::fill(mask.begin() + 5, mask.begin() + 45, 1);
        std::fill(mask.begin() + 46, mask.begin() + 86, 1);
        const auto segs = segments_from_frames(decide(mask), frames_of(mask), 30, 0);
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].begin == 5);
        CHECK(segs[0].end == 44);
        CHECK(segs[1].begin == 46);
        CHECK(segs[1].end == 85);
        CHECK(segs[0].end < segs[1].begin);
    }
    SUBCASE("re-filtering the kept segments is idempotent") {
        std::vector<int> mask(200, 0);
        std::fill(mask.begin() + 3, mask.begin() + 20, 1);   // 17, dropped
        std::fill(mask.begin() + 40, mask.begin() + 90, 1);  // 50, kept
        std::fill(mask.begin() + 120, mask.begin() + 155, 1); // 35, kept
        const auto min30 = segments_from_frames(decide(mask), frames_of(mask), 30, 0);
        auto min1 = segments_from_frames(decide(mask), frames_of(mask), 1, 0);
        min1.erase(std::remove_if(min1.begin(), min1.end(), [](const Segment& s) { return s.length() < 30; }),
                   min1.end());
        REQUIRE(min1.size() == min30.size());
        for (std::size_t i = 0; i < min1.size(); ++i) {
            CHECK(min1[i].begin == min30[i].begin);
            CHECK(min1[i].end == min30[i].end);
        }
    }
}

TEST_CASE("segments: multi-class labels use mean non-negative probabilities") {
    FrameScores fs;
    for (int i = 0; i < 40; ++i) {
        // class 2 dominates class 1 on average
        fs.push_back(i % 2 == 0 ? std::vector<double>{0.1, 0.5, 0.4} : std::vector<double>{0.1, 0.1, 0.8});
    }
    const auto d = frame_decision(fs, Decision::neg_vs_sum, 0);
    const auto segs = segments_from_frames(d, fs, 30, 0);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].label == 2);
}

TEST_CASE("proposals: the 150-frame rule") {
    CHECK(proposal_candidates(450, 150).size() == 3);
    const auto p = proposal_candidates(500, 150);
    REQUIRE(p.size() == 3); // 50-frame tail dropped
    CHECK(p[0] == std::pair<std::int64_t, std::int64_t>{0, 149});
    CHECK(p[2] == std::pair<std::int64_t, std::int64_t>{300, 449});
    CHECK(proposal_candidates(100, 150).empty());
}

TEST_CASE("detect_video: an always-negative model finds nothing") {
    const Model m = zeroed_model(3, 4.0f);
    DetectionConfig cfg;
    cfg.fusion = Fusion::gaussian;
    cfg.sigma = 2.0;
    cfg.min_segment_len = 10;
    CHECK(detect_video(m, gray_video(60), cfg).empty());

    cfg.proposal_mode = true;
    cfg.proposal_len = 20;
    CHECK(detect_video(m, gray_video(60), cfg).empty());
}

TEST_CASE("detect_video: no_window outside proposal mode is a config error") {
    const Model m = zeroed_model(3, 0.0f);
    DetectionConfig cfg;
    cfg.fusion = Fusion::no_window;
    CHECK_THROWS_AS(detect_video(m, gray_video(60), cfg), ConfigError);
}

TEST_CASE("detections csv round-trips through the class map") {
    ClassMap classes;
    classes.names = {"negative", "class1", "class2"};
    SegmentsByVideo segs;
    segs["va"] = {Segment{10, 60, 1, 0.75}, Segment{100, 170, 2, 0.5}};
    segs["vb"] = {Segment{0, 40, 1, 0.25}};
    const auto path = std::filesystem::temp_directory_path() / "stroke_dets_test.csv";
    write_detections_csv(path, segs, classes);
    const SegmentsByVideo back = read_detections_csv(path, classes);
    REQUIRE(back.size() == 2);
    REQUIRE(back.at("va").size() == 2);
    CHECK(back.at("va")[0].begin == 10);
    CHECK(back.at("va")[0].label == 1);
    CHECK(back.at("va")[1].confidence == doctest::Approx(0.5));
    CHECK(back.at("vb")[0].label == 1);
}
