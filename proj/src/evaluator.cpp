#include "stroke/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace stroke {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (const auto c : counts) {
        t += c;
    }
    return t;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t t = 0;
    for (int i = 0; i < num_classes; ++i) {
        t += at(i, i);
    }
    return t;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& ground_truth) {
    if (predictions.size() != ground_truth.size()) {
        throw DimensionError("accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                             std::to_string(ground_truth.size()) + " ground truths");
    }
    if (predictions.empty()) {
        throw ConfigError("accuracy: empty input");
    }
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == ground_truth[i]) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions, const std::vector<int>& ground_truth,
                                 int num_classes, std::vector<std::string> class_names) {
    if (predictions.size() != ground_truth.size()) {
        throw DimensionError("confusion: prediction/truth length mismatch");
    }
    ConfusionMatrix cm;
    cm.num_classes = num_classes;
    cm.counts.assign(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0);
    if (class_names.empty()) {
        for (int i = 0; i < num_classes; ++i) {
            class_names.push_back("class" + std::to_string(i));
        }
    }
    cm.class_names = std::move(class_names);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int t = ground_truth[i];
        const int p = predictions[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
            throw DimensionError("confusion: label out of range at sample " + std::to_string(i));
        }
        ++cm.at(t, p);
    }
    return cm;
}

double temporal_iou(const Segment& a, const Segment& b) {
    const std::int64_t inter_lo = std::max(a.begin, b.begin);
    const std::int64_t inter_hi = std::min(a.end, b.end);
    const std::int64_t inter = std::max<std::int64_t>(0, inter_hi - inter_lo + 1);
    const std::int64_t uni = a.length() + b.length() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

ApResult match_and_ap(std::vector<VideoSegment> detections, const std::vector<VideoSegment>& ground_truths,
                      double iou_threshold) {
    ApResult result;
    const std::int64_t G = static_cast<std::int64_t>(ground_truths.size());
    if (G == 0) {
        result.ap = 0.0;
        result.fp = static_cast<std::int64_t>(detections.size());
        return result;
    }

    std::sort(detections.begin(), detections.end(), [](const VideoSegment& a, const VideoSegment& b) {
        if (a.seg.confidence != b.seg.confidence) {
            return a.seg.confidence > b.seg.confidence;
        }
        if (a.seg.begin != b.seg.begin) {
            return a.seg.begin < b.seg.begin;
        }
        return a.video_id < b.video_id;
    });

    std::vector<bool> matched(ground_truths.size(), false);
    std::vector<bool> is_tp(detections.size(), false);
    for (std::size_t d = 0; d < detections.size(); ++d) {
        double best_iou = 0.0;
        std::int64_t best_g = -1;
        for (std::size_t g = 0; g < ground_truths.size(); ++g) {
            if (matched[g] || ground_truths[g].video_id != detections[d].video_id) {
                continue;
            }
            const double iou = temporal_iou(detections[d].seg, ground_truths[g].seg);
            if (iou > best_iou ||
                (iou == best_iou && best_g >= 0 &&
                 ground_truths[g].seg.begin < ground_truths[static_cast<std::size_t>(best_g)].seg.begin)) {
                best_iou = iou;
                best_g = static_cast<std::int64_t>(g);
            }
        }
        if (best_g >= 0 && best_iou >= iou_threshold) {
            matched[static_cast<std::size_t>(best_g)] = true;
            is_tp[d] = true;
            ++result.tp;
        } else {
            ++result.fp;
        }
    }
    result.fn = G - result.tp;

    // Precision envelope over recall, all-point interpolation.
    const std::size_t D = detections.size();
    std::vector<double> precision(D), recall(D);
    std::int64_t tp_run = 0;
    for (std::size_t d = 0; d < D; ++d) {
        if (is_tp[d]) {
            ++tp_run;
        }
        precision[d] = static_cast<double>(tp_run) / static_cast<double>(d + 1);
        recall[d] = static_cast<double>(tp_run) / static_cast<double>(G);
    }
    double envelope = 0.0;
    double ap = 0.0;
    for (std::size_t di = D; di-- > 0;) {
        envelope = std::max(envelope, precision[di]);
        const double prev_recall = di > 0 ? recall[di - 1] : 0.0;
        if (recall[di] > prev_recall) {
            ap += (recall[di] - prev_recall) * envelope;
        }
    }
    result.ap = ap;
    return result;
}

DetectionScores evaluate_detections(const SegmentsByVideo& predictions, const SegmentsByVideo& ground_truth,
                                    double iou_threshold) {
    std::set<int> gt_classes;
    for (const auto& [vid, segs] : ground_truth) {
        for (const Segment& s : segs) {
            gt_classes.insert(s.label);
        }
    }
    if (gt_classes.empty()) {
        throw ConfigError("eval: no ground-truth segments");
    }

    DetectionScores out;
    double ap_sum = 0.0;
    for (const int cls : gt_classes) {
        std::vector<VideoSegment> dets, gts;
        for (const auto& [vid, segs] : predictions) {
            for (const Segment& s : segs) {
                if (s.label == cls) {
                    dets.push_back(VideoSegment{vid, s});
                }
            }
        }
        for (const auto& [vid, segs] : ground_truth) {
            for (const Segment& s : segs) {
                if (s.label == cls) {
                    gts.push_back(VideoSegment{vid, s});
                }
            }
        }
        const ApResult r = match_and_ap(std::move(dets), gts, iou_threshold);
        out.per_class_ap[cls] = r.ap;
        out.tp += r.tp;
        out.fp += r.fp;
        out.fn += r.fn;
        ap_sum += r.ap;
    }
    out.mean_ap = ap_sum / static_cast<double>(gt_classes.size());

    // Detections of classes absent from the ground truth still cost FPs.
    for (const auto& [vid, segs] : predictions) {
        for (const Segment& s : segs) {
            if (gt_classes.count(s.label) == 0) {
                ++out.fp;
            }
        }
    }
    return out;
}

double global_frame_iou(const SegmentsByVideo& predictions, const SegmentsByVideo& ground_truth) {
    std::set<std::string> videos;
    for (const auto& [vid, segs] : predictions) {
        videos.insert(vid);
    }
    for (const auto& [vid, segs] : ground_truth) {
        videos.insert(vid);
    }
    if (videos.empty()) {
        throw ConfigError("eval: no videos to score");
    }

    const auto frame_union = [](const std::vector<Segment>& segs) {
        std::vector<std::pair<std::int64_t, std::int64_t>> iv;
        for (const Segment& s : segs) {
            iv.emplace_back(s.begin, s.end);
        }
        std::sort(iv.begin(), iv.end());
        std::vector<std::pair<std::int64_t, std::int64_t>> merged;
        for (const auto& [b, e] : iv) {
            if (!merged.empty() && b <= merged.back().second + 1) {
                merged.back().second = std::max(merged.back().second, e);
            } else {
                merged.emplace_back(b, e);
            }
        }
        return merged;
    };

    double iou_sum = 0.0;
    static const std::vector<Segment> kNone;
    for (const std::string& vid : videos) {
        const auto pit = predictions.find(vid);
        const auto git = ground_truth.find(vid);
        const auto pred = frame_union(pit == predictions.end() ? kNone : pit->second);
        const auto gt = frame_union(git == ground_truth.end() ? kNone : git->second);

        std::int64_t inter = 0, pred_len = 0, gt_len = 0;
        for (const auto& [b, e] : pred) {
            pred_len += e - b + 1;
        }
        for (const auto& [b, e] : gt) {
            gt_len += e - b + 1;
        }
        for (const auto& [pb, pe] : pred) {
            for (const auto& [gb, ge] : gt) {
                inter += std::max<std::int64_t>(0, std::min(pe, ge) - std::max(pb, gb) + 1);
            }
        }
        const std::int64_t uni = pred_len + gt_len - inter;
        iou_sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    return iou_sum / static_cast<double>(videos.size());
}

namespace {

std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    {
        std::ofstream os(dir / "metrics.csv", std::ios::binary);
        if (!os) {
            throw IoError("report: cannot write " + (dir / "metrics.csv").string());
        }
        os << "metric,value\n";
        if (report.accuracy.has_value()) {
            os << "accuracy," << g9(*report.accuracy) << "\n";
        }
        if (report.mean_ap.has_value()) {
            os << "mAP," << g9(*report.mean_ap) << "\n";
        }
        if (report.global_iou.has_value()) {
            os << "global_iou," << g9(*report.global_iou) << "\n";
        }
        for (const auto& [cls, ap] : report.per_class_ap) {
            const std::string name = cls >= 0 && cls < static_cast<int>(report.class_names.size())
                                         ? report.class_names[static_cast<std::size_t>(cls)]
                                         : "class" + std::to_string(cls);
            os << "ap_" << name << "," << g9(ap) << "\n";
        }
        if (report.mean_ap.has_value() || report.tp + report.fp + report.fn > 0) {
            os << "tp," << report.tp << "\n";
            os << "fp," << report.fp << "\n";
            os << "fn," << report.fn << "\n";
        }
    }

    if (report.confusion.has_value()) {
        const ConfusionMatrix& cm = *report.confusion;
        {
            std::ofstream os(dir / "confusion.csv", std::ios::binary);
            if (!os) {
                throw IoError("report: cannot write " + (dir / "confusion.csv").string());
            }
            os << "truth\\pred";
            for (const auto& n : cm.class_names) {
                os << "," << n;
            }
            os << "\n";
            for (int t = 0; t < cm.num_classes; ++t) {
                os << cm.class_names[static_cast<std::size_t>(t)];
                for (int p = 0; p < cm.num_classes; ++p) {
                    os << "," << cm.at(t, p);
                }
                os << "\n";
            }
        }
        {
            std::ofstream os(dir / "confusion.txt", std::ios::binary);
            std::size_t width = 6;
            for (const auto& n : cm.class_names) {
                width = std::max(width, n.size() + 1);
            }
            os << std::string(width, ' ');
            for (const auto& n : cm.class_names) {
                os << std::string(width - n.size(), ' ') << n;
            }
            os << "\n";
            for (int t = 0; t < cm.num_classes; ++t) {
                const std::string& n = cm.class_names[static_cast<std::size_t>(t)];
                os << n << std::string(width - n.size(), ' ');
                for (int p = 0; p < cm.num_classes; ++p) {
                    const std::string v = std::to_string(cm.at(t, p));
                    os << std::string(width - v.size(), ' ') << v;
                }
                os << "\n";
            }
        }
    }
}

} // namespace stroke
