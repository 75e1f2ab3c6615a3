#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stroke/dataset.hpp"
#include "stroke/detector.hpp"

namespace stroke {

// Counts, rows = ground truth, columns = prediction.
struct ConfusionMatrix {
    int num_classes = 0;
    std::vector<std::int64_t> counts; // num_classes x num_classes
    std::vector<std::string> class_names;

    std::int64_t& at(int truth, int pred) { return counts[static_cast<std::size_t>(truth * num_classes + pred)]; }
    std::int64_t at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth * num_classes + pred)]; }
    std::int64_t total() const;
    std::int64_t trace() const;
};

double accuracy(const std::vector<int>& predictions, const std::vector<int>& ground_truth);

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions, const std::vector<int>& ground_truth,
                                 int num_classes, std::vector<std::string> class_names = {});

// Intersection over union of inclusive frame intervals.
double temporal_iou(const Segment& a, const Segment& b);

// A segment carrying its video, for cross-video matching.
struct VideoSegment {
    std::string video_id;
    Segment seg;
};

struct ApResult {
    double ap = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

// Greedy one-to-one matching in descending confidence order (ties broken by
// earlier begin): a detection matches the unmatched same-video ground truth
// of highest IoU when that IoU clears the threshold. AP is the area under
// the precision envelope over recall (all-point interpolation).
ApResult match_and_ap(std::vector<VideoSegment> detections, const std::vector<VideoSegment>& ground_truths,
                      double iou_threshold = 0.5);

struct DetectionScores {
    std::map<int, double> per_class_ap; // classes present in the ground truth
    double mean_ap = 0.0;
    std::int64_t tp = 0, fp = 0, fn = 0;
};

// Mean AP over classes present in the ground truth. Throws when the ground
// truth is empty.
DetectionScores evaluate_detections(const SegmentsByVideo& predictions, const SegmentsByVideo& ground_truth,
                                    double iou_threshold = 0.5);

// Per video, IoU between the union of predicted stroke frames and the union
// of ground-truth stroke frames; a video where both are empty scores 1.
// Returns the mean over videos.
double global_frame_iou(const SegmentsByVideo& predictions, const SegmentsByVideo& ground_truth);

struct EvalReport {
    std::optional<double> accuracy;
    std::map<int, double> per_class_ap;
    std::optional<double> mean_ap;
    std::optional<double> global_iou;
    std::int64_t tp = 0, fp = 0, fn = 0;
    std::optional<ConfusionMatrix> confusion;
    std::vector<std::string> class_names;
};

// metrics.csv (`metric,value`, 9 significant digits) plus, when a confusion
// matrix is present, confusion.csv and a plain-text rendering.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

} // namespace stroke
