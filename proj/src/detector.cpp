#include "stroke/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stroke/clips.hpp"
#include "stroke/kernels.hpp"

namespace stroke {

Fusion fusion_from_name(const std::string& name) {
    if (name == "no_window") return Fusion::no_window;
    if (name == "vote") return Fusion::vote;
    if (name == "mean") return Fusion::mean;
    if (name == "gaussian") return Fusion::gaussian;
    throw ConfigError("unknown fusion method '" + name + "'");
}

std::string fusion_name(Fusion f) {
    switch (f) {
    case Fusion::no_window: return "no_window";
    case Fusion::vote: return "vote";
    case Fusion::mean: return "mean";
    case Fusion::gaussian: return "gaussian";
    }
    return "?";
}

Decision decision_from_name(const std::string& name) {
    if (name == "neg_vs_all") return Decision::neg_vs_all;
    if (name == "neg_vs_sum") return Decision::neg_vs_sum;
    throw ConfigError("unknown decision approach '" + name + "'");
}

std::string decision_name(Decision d) {
    return d == Decision::neg_vs_all ? "neg_vs_all" : "neg_vs_sum";
}

void DetectionConfig::validate() const {
    if (sigma <= 0) {
        throw ConfigError("detect: sigma must be positive");
    }
    if (min_segment_len < 1) {
        throw ConfigError("detect: min_segment_len must be >= 1");
    }
    if (negative_class < 0) {
        throw ConfigError("detect: negative class index must be >= 0");
    }
    if (proposal_len < 1) {
        throw ConfigError("detect: proposal_len must be >= 1");
    }
    if (batch_windows < 1) {
        throw ConfigError("detect: batch_windows must be >= 1");
    }
}

namespace {

std::int64_t argmax_of(const std::vector<double>& v) {
    std::int64_t best = 0;
    for (std::int64_t i = 1; i < static_cast<std::int64_t>(v.size()); ++i) {
        if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return best;
}

// Softmax probabilities for windows starting at first..last (inclusive),
// evaluated in batches.
std::vector<std::vector<double>> window_probs(const Model& model, const RawVideo& video, std::int64_t first,
                                              std::int64_t last, std::int64_t batch_windows) {
    const std::int64_t L = model.spec.input_shape[1];
    const std::int64_t C = model.spec.input_shape[0];
    const std::int64_t H = model.spec.input_shape[2];
    const std::int64_t W = model.spec.input_shape[3];
    if (video.height != H || video.width != W) {
        throw DimensionError("detect: video " + std::to_string(video.width) + "x" + std::to_string(video.height) +
                             " does not match model input " + std::to_string(W) + "x" + std::to_string(H));
    }
    const std::int64_t count = last - first + 1;
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(count));

    for (std::int64_t at = 0; at < count; at += batch_windows) {
        const std::int64_t bs = std::min(batch_windows, count - at);
        Tensor batch({bs, C, L, H, W});
        for (std::int64_t i = 0; i < bs; ++i) {
            const std::int64_t start = first + at + i;
            const Clip clip = extract_clip(video, start, start + L - 1, L, 0);
            std::copy(clip.tensor.ptr(), clip.tensor.ptr() + clip.tensor.size(),
                      batch.ptr() + i * clip.tensor.size());
        }
        const Tensor logits = model.forward(batch);
        const Tensor probs = kernels::softmax_fwd(logits);
        const std::int64_t N = probs.shape[1];
        for (std::int64_t i = 0; i < bs; ++i) {
            std::vector<double> row(static_cast<std::size_t>(N));
            for (std::int64_t j = 0; j < N; ++j) {
                row[static_cast<std::size_t>(j)] = static_cast<double>(probs[i * N + j]);
            }
            out.push_back(std::move(row));
        }
    }
    return out;
}

} // namespace

ScoreTimeline slide_window_scores(const Model& model, const RawVideo& video, std::int64_t batch_windows) {
    const std::int64_t L = model.spec.input_shape[1];
    if (video.frame_count < L) {
        throw DimensionError("detect: video has " + std::to_string(video.frame_count) +
                             " frames, the window needs " + std::to_string(L));
    }
    ScoreTimeline tl;
    tl.window_length = L;
    tl.frame_count = video.frame_count;
    tl.num_classes = static_cast<int>(model.spec.num_classes);
    tl.scores = window_probs(model, video, 0, video.frame_count - L, batch_windows);
    tl.window_starts.resize(tl.scores.size());
    for (std::size_t i = 0; i < tl.window_starts.size(); ++i) {
        tl.window_starts[i] = static_cast<std::int64_t>(i);
    }
    return tl;
}

std::pair<int, double> classify_trimmed(const Model& model, const RawVideo& video, std::int64_t begin,
                                        std::int64_t end, Fusion method, double sigma,
                                        std::int64_t batch_windows) {
    const std::int64_t L = model.spec.input_shape[1];
    if (end - begin + 1 < L) {
        throw DimensionError("classify: region [" + std::to_string(begin) + "," + std::to_string(end) +
                             "] is shorter than the window length " + std::to_string(L));
    }

    if (method == Fusion::no_window) {
        const std::int64_t mid = (begin + end) / 2;
        const std::int64_t start = std::clamp(mid - (L / 2 - 1), begin, end - L + 1);
        const auto probs = window_probs(model, video, start, start, batch_windows);
        const std::int64_t label = argmax_of(probs[0]);
        return {static_cast<int>(label), probs[0][static_cast<std::size_t>(label)]};
    }

    const auto probs = window_probs(model, video, begin, end - L + 1, batch_windows);
    const std::size_t N = probs[0].size();

    if (method == Fusion::vote) {
        std::vector<double> hist(N, 0.0);
        for (const auto& p : probs) {
            hist[static_cast<std::size_t>(argmax_of(p))] += 1.0;
        }
        const std::int64_t label = argmax_of(hist);
        return {static_cast<int>(label), hist[static_cast<std::size_t>(label)] / static_cast<double>(probs.size())};
    }

    // mean and gaussian share the weighted-average path; mean is the
    // uniform-weight special case.
    const double centre = static_cast<double>(begin + end) / 2.0;
    std::vector<double> fused(N, 0.0);
    double total = 0.0;
    for (std::size_t w = 0; w < probs.size(); ++w) {
        double weight = 1.0;
        if (method == Fusion::gaussian) {
            const double c = static_cast<double>(begin + static_cast<std::int64_t>(w)) +
                             static_cast<double>(L - 1) / 2.0;
            const double d = c - centre;
            weight = std::exp(-d * d / (2.0 * sigma * sigma));
        }
        total += weight;
        for (std::size_t i = 0; i < N; ++i) {
            fused[i] += weight * probs[w][i];
        }
    }
    for (auto& v : fused) {
        v /= total;
    }
    const std::int64_t label = argmax_of(fused);
    return {static_cast<int>(label), fused[static_cast<std::size_t>(label)]};
}

FrameScores fuse_frame_scores(const ScoreTimeline& timeline, Fusion method, double sigma) {
    if (method == Fusion::no_window) {
        throw ConfigError("fuse: no_window is not a frame fusion method");
    }
    if (timeline.scores.empty()) {
        throw StateError("fuse: empty timeline");
    }
    const std::int64_t L = timeline.window_length;
    const std::int64_t F = timeline.frame_count;
    const std::size_t N = timeline.scores[0].size();
    const auto& starts = timeline.window_starts;
    const std::int64_t W = static_cast<std::int64_t>(starts.size());

    // Precompute argmaxes once for vote.
    std::vector<std::int64_t> args;
    if (method == Fusion::vote) {
        args.resize(static_cast<std::size_t>(W));
        for (std::int64_t w = 0; w < W; ++w) {
            args[static_cast<std::size_t>(w)] = argmax_of(timeline.scores[static_cast<std::size_t>(w)]);
        }
    }

    FrameScores out(static_cast<std::size_t>(F), std::vector<double>(N, 0.0));
    for (std::int64_t f = 0; f < F; ++f) {
        // Windows covering f: start in [f-L+1, f].
        const auto lo = std::lower_bound(starts.begin(), starts.end(), f - L + 1) - starts.begin();
        const auto hi = std::upper_bound(starts.begin(), starts.end(), f) - starts.begin();
        if (lo >= hi) {
            throw StateError("fuse: frame " + std::to_string(f) + " is covered by no window");
        }
        auto& frame = out[static_cast<std::size_t>(f)];
        if (method == Fusion::vote) {
            for (std::int64_t w = lo; w < hi; ++w) {
                frame[static_cast<std::size_t>(args[static_cast<std::size_t>(w)])] += 1.0;
            }
            const double total = static_cast<double>(hi - lo);
            for (auto& v : frame) {
                v /= total;
            }
        } else {
            double total = 0.0;
            for (std::int64_t w = lo; w < hi; ++w) {
                double weight = 1.0;
                if (method == Fusion::gaussian) {
                    const double c = static_cast<double>(starts[static_cast<std::size_t>(w)]) +
                                     static_cast<double>(L - 1) / 2.0;
                    const double d = static_cast<double>(f) - c;
                    weight = std::exp(-d * d / (2.0 * sigma * sigma));
                }
                total += weight;
                const auto& p = timeline.scores[static_cast<std::size_t>(w)];
                for (std::size_t i = 0; i < N; ++i) {
                    frame[i] += weight * p[i];
                }
            }
            for (auto& v : frame) {
                v /= total;
            }
        }
    }
    return out;
}

FrameDecision frame_decision(const FrameScores& frames, Decision approach, int negative_class) {
    if (frames.empty()) {
        throw StateError("decision: no frame scores");
    }
    if (negative_class < 0 || negative_class >= static_cast<int>(frames[0].size())) {
        throw ConfigError("decision: negative class " + std::to_string(negative_class) +
                          " out of range for " + std::to_string(frames[0].size()) + " classes");
    }
    FrameDecision out;
    out.stroke_mask.resize(frames.size());
    out.stroke_score.resize(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& p = frames[f];
        const double p_neg = p[static_cast<std::size_t>(negative_class)];
        out.stroke_score[f] = 1.0 - p_neg;
        bool stroke = false;
        if (approach == Decision::neg_vs_all) {
            stroke = argmax_of(p) != negative_class;
        } else {
            stroke = (1.0 - p_neg) > p_neg;
        }
        out.stroke_mask[f] = stroke ? 1 : 0;
    }
    return out;
}

std::vector<Segment> segments_from_frames(const FrameDecision& decision, const FrameScores& frames,
                                          std::int64_t min_len, int negative_class) {
    const std::int64_t F = static_cast<std::int64_t>(decision.stroke_mask.size());
    const int N = frames.empty() ? 0 : static_cast<int>(frames[0].size());
    std::vector<Segment> out;

    std::int64_t run_start = -1;
    for (std::int64_t f = 0; f <= F; ++f) {
        const bool stroke = f < F && decision.stroke_mask[static_cast<std::size_t>(f)] != 0;
        if (stroke && run_start < 0) {
            run_start = f;
        } else if (!stroke && run_start >= 0) {
            const std::int64_t run_end = f - 1;
            if (run_end - run_start + 1 >= min_len) {
                Segment seg;
                seg.begin = run_start;
                seg.end = run_end;

                double score_sum = 0.0;
                std::vector<double> class_sum(static_cast<std::size_t>(N), 0.0);
                for (std::int64_t i = run_start; i <= run_end; ++i) {
                    score_sum += decision.stroke_score[static_cast<std::size_t>(i)];
                    const auto& p = frames[static_cast<std::size_t>(i)];
                    for (int c = 0; c < N; ++c) {
                        class_sum[static_cast<std::size_t>(c)] += p[static_cast<std::size_t>(c)];
                    }
                }
                seg.confidence = score_sum / static_cast<double>(run_end - run_start + 1);

                int label = -1;
                double best = -1.0;
                for (int c = 0; c < N; ++c) {
                    if (c == negative_class) {
                        continue;
                    }
                    if (class_sum[static_cast<std::size_t>(c)] > best) {
                        best = class_sum[static_cast<std::size_t>(c)];
                        label = c;
                    }
                }
                seg.label = label;
                out.push_back(seg);
            }
            run_start = -1;
        }
    }
    return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> proposal_candidates(std::int64_t frame_count,
                                                                       std::int64_t proposal_len) {
    if (proposal_len < 1) {
        throw ConfigError("proposals: length must be >= 1");
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (std::int64_t begin = 0; begin + proposal_len <= frame_count; begin += proposal_len) {
        out.emplace_back(begin, begin + proposal_len - 1);
    }
    return out;
}

std::vector<Segment> detect_video(const Model& model, const RawVideo& video, const DetectionConfig& cfg) {
    cfg.validate();
    const std::int64_t L = model.spec.input_shape[1];

    if (cfg.proposal_mode) {
        if (cfg.proposal_len < L) {
            throw ConfigError("detect: proposal_len " + std::to_string(cfg.proposal_len) +
                              " is shorter than the window length " + std::to_string(L));
        }
        std::vector<Segment> out;
        for (const auto& [begin, end] : proposal_candidates(video.frame_count, cfg.proposal_len)) {
            const auto [label, conf] = classify_trimmed(model, video, begin, end, cfg.fusion, cfg.sigma,
                                                        cfg.batch_windows);
            if (label != cfg.negative_class) {
                out.push_back(Segment{begin, end, label, conf});
            }
        }
        return out;
    }

    if (cfg.fusion == Fusion::no_window) {
        throw ConfigError("detect: no_window fusion requires proposal mode");
    }
    const ScoreTimeline timeline = slide_window_scores(model, video, cfg.batch_windows);
    const FrameScores frames = fuse_frame_scores(timeline, cfg.fusion, cfg.sigma);
    const FrameDecision decision = frame_decision(frames, cfg.decision, cfg.negative_class);
    return segments_from_frames(decision, frames, cfg.min_segment_len, cfg.negative_class);
}

void write_detections_csv(const std::filesystem::path& path, const SegmentsByVideo& segments,
                          const ClassMap& classes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("detections: cannot write " + path.string());
    }
    os << "video_id,begin,end,label,score\n";
    char buf[64];
    for (const auto& [video_id, segs] : segments) {
        for (const Segment& s : segs) {
            if (s.label < 0 || s.label >= classes.size()) {
                throw ConfigError("detections: label " + std::to_string(s.label) + " outside the class map");
            }
            std::snprintf(buf, sizeof(buf), "%.9g", s.confidence);
            os << video_id << ',' << s.begin << ',' << s.end << ',' << classes.names[static_cast<std::size_t>(s.label)]
               << ',' << buf << '\n';
        }
    }
}

SegmentsByVideo read_detections_csv(const std::filesystem::path& path, const ClassMap& classes) {
    std::ifstream is(path);
    if (!is) {
        throw IoError("detections: cannot open " + path.string());
    }
    SegmentsByVideo out;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line_no == 1) { // header
            continue;
        }
        std::vector<std::string> fields;
        std::string cur;
        for (const char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        if (fields.size() != 5) {
            throw ParseError("detections: line " + std::to_string(line_no) + ": expected 5 fields");
        }
        try {
            Segment s;
            s.begin = std::stoll(fields[1]);
            s.end = std::stoll(fields[2]);
            s.label = classes.index_of(fields[3]);
            if (s.label < 0) {
                throw ParseError("detections: line " + std::to_string(line_no) + ": unknown class '" +
                                 fields[3] + "'");
            }
            s.confidence = std::stod(fields[4]);
            out[fields[0]].push_back(s);
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("detections: line " + std::to_string(line_no) + ": malformed numeric field");
        }
    }
    return out;
}

} // namespace stroke
