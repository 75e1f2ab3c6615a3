#include "stroke/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "stroke/checkpoint.hpp"
#include "stroke/clips.hpp"
#include "stroke/config.hpp"
#include "stroke/evaluator.hpp"
#include "stroke/synth.hpp"

namespace stroke {

namespace {

constexpr const char* kToolVersion = "1.0.0";

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed_override = -1;

    ExperimentConfig load() const {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : parse_config(config_path);
        if (seed_override >= 0) {
            cfg.seed = static_cast<std::uint64_t>(seed_override);
        }
        return cfg;
    }
};

void write_manifest(const fs::path& out_dir, const std::string& subcommand, const ExperimentConfig& cfg) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream os(out_dir / "manifest.txt", std::ios::binary);
    if (!os) {
        throw IoError("manifest: cannot write " + (out_dir / "manifest.txt").string());
    }
    os << "# strokebench run manifest\n";
    os << "tool_version = " << kToolVersion << "\n";
    os << "subcommand = " << subcommand << "\n";
    os << "seed = " << cfg.seed << "\n\n";
    os << dump_config(cfg);
}

// Symmetrically widens an annotation to the window length, clamped to the
// video.
std::pair<std::int64_t, std::int64_t> expand_region(std::int64_t begin, std::int64_t end, std::int64_t length,
                                                    std::int64_t frame_count) {
    if (end - begin + 1 >= length) {
        return {begin, end};
    }
    const std::int64_t mid = (begin + end) / 2;
    std::int64_t start = std::clamp<std::int64_t>(mid - (length / 2 - 1), 0, frame_count - length);
    return {start, start + length - 1};
}

int cmd_synth(const CommonArgs& common) {
    const ExperimentConfig cfg = common.load();
    write_manifest(common.out_dir, "synth", cfg);
    const SynthDataset ds = synth_dataset(cfg.synth_config(), common.out_dir);
    std::cout << "dataset written to " << ds.root.string() << " (manifest " << ds.manifest.string() << ")\n";
    return 0;
}

int cmd_train(const CommonArgs& common, const std::string& data_manifest) {
    const ExperimentConfig cfg = common.load();
    write_manifest(common.out_dir, "train", cfg);

    const LoadedDataset ds = load_dataset(data_manifest);
    if (cfg.num_classes != ds.classes.size()) {
        throw ConfigError("train: config num_classes " + std::to_string(cfg.num_classes) + " but dataset has " +
                          std::to_string(ds.classes.size()) + " classes (including negative)");
    }
    Model model = build_model<float>(cfg.network_spec(), cfg.seed);
    const std::int64_t L = model.spec.input_shape[1];

    const SplitData train_split = build_split(ds, "train", L, cfg.negatives_per_video, cfg.seed);
    const SplitData val_split = build_split(ds, "validation", L, cfg.negatives_per_video, cfg.seed + 1);
    std::cout << "training on " << train_split.items.size() << " clips, validating on "
              << val_split.items.size() << "\n";

    const TrainConfig tc = cfg.train_config();
    TrainResult result = train(std::move(model), ds.store, train_split, val_split, tc);

    for (const EpochStats& s : result.stats) {
        if (s.epoch % 10 == 0 || s.epoch + 1 == static_cast<std::int64_t>(result.stats.size())) {
            std::printf("epoch %4lld  train %.4f/%.3f  val %.4f/%.3f  lr %.2e\n",
                        static_cast<long long>(s.epoch), s.train_loss, s.train_acc, s.val_loss, s.val_acc, s.lr);
        }
    }

    write_stats_csv(fs::path(common.out_dir) / "stats.csv", result.stats);
    save_checkpoint(result.best, fs::path(common.out_dir) / "model.stck");
    std::cout << "best epoch " << result.best_epoch << " (val loss " << result.best_val_loss << "), model saved\n";
    return 0;
}

int cmd_classify(const CommonArgs& common, const std::string& data_manifest, const std::string& checkpoint,
                 const std::string& split) {
    const ExperimentConfig cfg = common.load();
    write_manifest(common.out_dir, "classify", cfg);

    const LoadedDataset ds = load_dataset(data_manifest);
    const Model model = load_checkpoint(checkpoint);
    const std::int64_t L = model.spec.input_shape[1];
    const SplitData data = build_split(ds, split, L, cfg.negatives_per_video, cfg.seed + 2);

    std::ofstream os(fs::path(common.out_dir) / "predictions.csv", std::ios::binary);
    if (!os) {
        throw IoError("classify: cannot write predictions.csv");
    }
    os << "video_id,begin,end,truth,pred,confidence\n";
    char buf[64];
    for (const LabeledInterval& item : data.items) {
        const RawVideo& video = ds.store.get(item.video_id);
        const auto [begin, end] = expand_region(item.begin, item.end, L, video.frame_count);
        const auto [pred, conf] =
            classify_trimmed(model, video, begin, end, cfg.detect.fusion, cfg.detect.sigma,
                             cfg.detect.batch_windows);
        std::snprintf(buf, sizeof(buf), "%.9g", conf);
        os << item.video_id << ',' << item.begin << ',' << item.end << ','
           << ds.classes.names[static_cast<std::size_t>(item.label)] << ','
           << ds.classes.names[static_cast<std::size_t>(pred)] << ',' << buf << '\n';
    }
    std::cout << "predictions written for " << data.items.size() << " clips\n";
    return 0;
}

int cmd_detect(const CommonArgs& common, const std::string& data_manifest, const std::string& checkpoint,
               const std::string& split) {
    const ExperimentConfig cfg = common.load();
    write_manifest(common.out_dir, "detect", cfg);

    const LoadedDataset ds = load_dataset(data_manifest);
    const Model model = load_checkpoint(checkpoint);

    const auto it = ds.split_videos.find(split);
    if (it == ds.split_videos.end()) {
        throw ConfigError("detect: no videos in split '" + split + "'");
    }

    SegmentsByVideo all;
    std::error_code ec;
    fs::create_directories(fs::path(common.out_dir) / "xml", ec);
    for (const std::string& vid : it->second) {
        const std::vector<Segment> segments = detect_video(model, ds.store.get(vid), cfg.detect);
        std::vector<XmlAction> actions;
        for (const Segment& s : segments) {
            actions.push_back(XmlAction{s.begin, s.end, ds.classes.names[static_cast<std::size_t>(s.label)],
                                        s.confidence});
        }
        std::ofstream xml(fs::path(common.out_dir) / "xml" / (vid + ".xml"), std::ios::binary);
        xml << write_annotation_xml(vid, actions);
        std::cout << vid << ": " << segments.size() << " segments\n";
        all[vid] = segments;
    }
    write_detections_csv(fs::path(common.out_dir) / "detections.csv", all, ds.classes);
    return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

int cmd_eval_classify(const CommonArgs& common, const std::string& data_manifest, const std::string& pred_csv) {
    const ExperimentConfig cfg = common.load();
    write_manifest(common.out_dir, "eval-classify", cfg);

    const LoadedDataset ds = load_dataset(data_manifest);
    std::ifstream is(pred_csv);
    if (!is) {
        throw IoError("eval: cannot open " + pred_csv);
    }
    std::vector<int> truth, pred;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            throw ParseError("eval: predictions line " + std::to_string(line_no) + ": expected 6 fields");
        }
        const int t = ds.classes.index_of(fields[3]);
        const int p = ds.classes.index_of(fields[4]);
        if (t < 0 || p < 0) {
            throw ParseError("eval: predictions line " + std::to_string(line_no) + ": unknown class name");
        }
        truth.push_back(t);
        pred.push_back(p);
    }

    EvalReport report;
    report.class_names = ds.classes.names;
    report.accuracy = accuracy(pred, truth);
    report.confusion = confusion_matrix(pred, truth, ds.classes.size(), ds.classes.names);
    write_report(report, common.out_dir);
    std::cout << "accuracy " << *report.accuracy << " over " << truth.size() << " clips\n";
    return 0;
}

int cmd_eval_detect(const CommonArgs& common, const std::string& data_manifest, const std::string& pred_csv,
                    const std::string& split) {
    const ExperimentConfig cfg = common.load();
    write_manifest(common.out_dir, "eval-detect", cfg);

    const LoadedDataset ds = load_dataset(data_manifest);
    const SegmentsByVideo predictions = read_detections_csv(pred_csv, ds.classes);

    const auto it = ds.split_videos.find(split);
    if (it == ds.split_videos.end()) {
        throw ConfigError("eval: no videos in split '" + split + "'");
    }
    SegmentsByVideo ground_truth;
    for (const std::string& vid : it->second) {
        std::vector<Segment> segs;
        for (const StrokeAnnotation& a : ds.annotations.at(vid)) {
            const int label = ds.classes.index_of(a.label);
            segs.push_back(Segment{a.begin, a.end, label, 1.0});
        }
        ground_truth[vid] = std::move(segs);
    }

    const DetectionScores scores = evaluate_detections(predictions, ground_truth, 0.5);
    EvalReport report;
    report.class_names = ds.classes.names;
    report.per_class_ap = scores.per_class_ap;
    report.mean_ap = scores.mean_ap;
    report.global_iou = global_frame_iou(predictions, ground_truth);
    report.tp = scores.tp;
    report.fp = scores.fp;
    report.fn = scores.fn;
    write_report(report, common.out_dir);
    std::cout << "mAP " << scores.mean_ap << "  IoU " << *report.global_iou << "\n";
    return 0;
}

int cmd_shapes(const CommonArgs& common, const std::string& arch) {
    ExperimentConfig cfg = common.load();
    if (!arch.empty()) {
        cfg.arch = arch;
    }
    std::cout << shape_table(cfg.network_spec());
    return 0;
}

} // namespace

int run_command(const std::vector<std::string>& argv) {
    CLI::App app{"table-tennis stroke classification and detection pipeline"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string data_manifest, checkpoint, split = "test", pred_csv, arch;

    const auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", common.config_path, "INI experiment configuration");
        sub->add_option("--seed", common.seed_override, "override the experiment seed");
        auto* out = sub->add_option("--out", common.out_dir, "output directory");
        if (needs_out) {
            out->required();
        }
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(synth, true);

    auto* train_cmd = app.add_subcommand("train", "train a model on a dataset");
    add_common(train_cmd, true);
    train_cmd->add_option("--data", data_manifest, "split manifest (splits.tsv)")->required();

    auto* classify = app.add_subcommand("classify", "classify trimmed clips of a split");
    add_common(classify, true);
    classify->add_option("--data", data_manifest, "split manifest")->required();
    classify->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    classify->add_option("--split", split, "split to classify (default test)");

    auto* detect = app.add_subcommand("detect", "detect strokes in untrimmed videos");
    add_common(detect, true);
    detect->add_option("--data", data_manifest, "split manifest")->required();
    detect->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    detect->add_option("--split", split, "split to detect on (default test)");

    auto* evalc = app.add_subcommand("eval-classify", "score classification predictions");
    add_common(evalc, true);
    evalc->add_option("--data", data_manifest, "split manifest")->required();
    evalc->add_option("--pred", pred_csv, "predictions.csv from classify")->required();

    auto* evald = app.add_subcommand("eval-detect", "score detection segments");
    add_common(evald, true);
    evald->add_option("--data", data_manifest, "split manifest")->required();
    evald->add_option("--pred", pred_csv, "detections.csv from detect")->required();
    evald->add_option("--split", split, "split holding the ground truth (default test)");

    auto* shapes = app.add_subcommand("shapes", "print the per-layer shape table");
    shapes->add_option("--config", common.config_path, "INI experiment configuration");
    shapes->add_option("--model", arch, "architecture (v1|v2)");

    std::vector<const char*> cargv;
    cargv.reserve(argv.size());
    for (const auto& a : argv) {
        cargv.push_back(a.c_str());
    }

    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(common);
        }
        if (train_cmd->parsed()) {
            return cmd_train(common, data_manifest);
        }
        if (classify->parsed()) {
            return cmd_classify(common, data_manifest, checkpoint, split);
        }
        if (detect->parsed()) {
            return cmd_detect(common, data_manifest, checkpoint, split);
        }
        if (evalc->parsed()) {
            return cmd_eval_classify(common, data_manifest, pred_csv);
        }
        if (evald->parsed()) {
            return cmd_eval_detect(common, data_manifest, pred_csv, split);
        }
        if (shapes->parsed()) {
            return cmd_shapes(common, arch);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace stroke
