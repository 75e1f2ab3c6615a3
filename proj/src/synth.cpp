#include "stroke/synth.hpp"

#include <cmath>
#include <fstream>

#include "stroke/rng.hpp"

namespace stroke {

std::string synth_class_name(int k) {
    return "class" + std::to_string(k);
}

namespace {

struct BarParams {
    double nx, ny;   // movement normal
    double speed;    // pixels per frame
    double period;   // wrap length of the projected coordinate
    double half_w;
};

BarParams bar_for_class(int k, int classes, std::int64_t W, std::int64_t H) {
    const double angle = 3.14159265358979323846 * static_cast<double>(k - 1) / static_cast<double>(classes);
    BarParams p;
    p.nx = std::cos(angle);
    p.ny = std::sin(angle);
    p.speed = 1.0 + static_cast<double>((k - 1) % 2);
    // Range of the projected coordinate over the frame; wrapping over it
    // keeps the bar on screen for the whole stroke.
    p.period = std::abs(p.nx) * static_cast<double>(W) + std::abs(p.ny) * static_cast<double>(H);
    p.half_w = std::max(2.0, static_cast<double>(std::min(W, H)) / 8.0);
    return p;
}

void render_bar(RawVideo& v, std::int64_t t, const BarParams& p, double offset) {
    const double cx = (static_cast<double>(v.width) - 1.0) / 2.0;
    const double cy = (static_cast<double>(v.height) - 1.0) / 2.0;
    std::uint8_t* f = v.frame(t);
    for (std::int64_t y = 0; y < v.height; ++y) {
        for (std::int64_t x = 0; x < v.width; ++x) {
            double d = (static_cast<double>(x) - cx) * p.nx + (static_cast<double>(y) - cy) * p.ny - offset;
            d = std::remainder(d, p.period); // [-period/2, period/2)
            if (std::abs(d) <= p.half_w) {
                std::uint8_t* px = f + (y * v.width + x) * 3;
                px[0] = px[1] = px[2] = 235;
            }
        }
    }
}

} // namespace

std::pair<RawVideo, std::vector<StrokeAnnotation>> render_synth_video(const SynthConfig& cfg,
                                                                      std::uint64_t video_seed) {
    if (cfg.classes < 1 || cfg.strokes_per_video < 1 || cfg.width < 8 || cfg.height < 8 ||
        cfg.min_stroke < 1 || cfg.max_stroke < cfg.min_stroke || cfg.min_gap < 1 || cfg.max_gap < cfg.min_gap) {
        throw ConfigError("synth: invalid generator configuration");
    }
    Rng rng(video_seed);

    // Balanced labels, shuffled.
    std::vector<int> labels;
    for (int i = 0; i < cfg.strokes_per_video; ++i) {
        labels.push_back(1 + i % cfg.classes);
    }
    rng.shuffle(labels.begin(), labels.end());

    struct PlannedStroke {
        std::int64_t begin, end;
        int label;
        double phase;
    };
    std::vector<PlannedStroke> plan;
    std::int64_t t = cfg.min_gap + rng.uniform_int(cfg.max_gap - cfg.min_gap + 1);
    for (const int label : labels) {
        const std::int64_t len = cfg.min_stroke + rng.uniform_int(cfg.max_stroke - cfg.min_stroke + 1);
        const double phase = rng.uniform(0.0, 1.0);
        plan.push_back({t, t + len - 1, label, phase});
        t += len + cfg.min_gap + rng.uniform_int(cfg.max_gap - cfg.min_gap + 1);
    }
    const std::int64_t frames = t;

    RawVideo video = make_video(cfg.width, cfg.height, frames);
    for (std::int64_t fi = 0; fi < frames; ++fi) {
        std::uint8_t* f = video.frame(fi);
        for (std::int64_t i = 0; i < cfg.width * cfg.height; ++i) {
            const std::uint8_t noise = static_cast<std::uint8_t>(rng.uniform_int(61));
            f[i * 3 + 0] = noise;
            f[i * 3 + 1] = noise;
            f[i * 3 + 2] = noise;
        }
    }

    std::vector<StrokeAnnotation> annotations;
    for (const PlannedStroke& s : plan) {
        const BarParams bar = bar_for_class(s.label, cfg.classes, cfg.width, cfg.height);
        const double offset0 = s.phase * bar.period;
        for (std::int64_t fi = s.begin; fi <= s.end; ++fi) {
            render_bar(video, fi, bar, offset0 + bar.speed * static_cast<double>(fi - s.begin));
        }
        annotations.push_back(StrokeAnnotation{s.begin, s.end, synth_class_name(s.label)});
    }
    return {std::move(video), std::move(annotations)};
}

SynthDataset synth_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir / "videos", ec);
    fs::create_directories(out_dir / "annotations", ec);
    if (!fs::is_directory(out_dir / "videos") || !fs::is_directory(out_dir / "annotations")) {
        throw IoError("synth: cannot create output directories under " + out_dir.string());
    }

    const Rng root(cfg.seed);
    const char* splits[] = {"train", "validation", "test"};
    std::string manifest_text;

    for (int si = 0; si < 3; ++si) {
        for (int vi = 0; vi < cfg.videos_per_split; ++vi) {
            const std::string id = std::string(splits[si]) + "_" + std::to_string(vi);
            const auto [video, annotations] =
                render_synth_video(cfg, root.fork(static_cast<std::uint64_t>(si * 1000 + vi)).next_u64());

            const std::string video_rel = "videos/" + id + ".rvid";
            const std::string ann_rel = "annotations/" + id + ".xml";
            write_raw_video(video, out_dir / video_rel);

            std::vector<XmlAction> actions;
            for (const auto& a : annotations) {
                actions.push_back(XmlAction{a.begin, a.end, a.label, std::nullopt});
            }
            std::ofstream xml(out_dir / ann_rel, std::ios::binary);
            if (!xml) {
                throw IoError("synth: cannot write " + (out_dir / ann_rel).string());
            }
            xml << write_annotation_xml(id, actions);

            manifest_text += video_rel + "\t" + ann_rel + "\t" + splits[si] + "\n";
        }
    }

    const fs::path manifest = out_dir / "splits.tsv";
    std::ofstream mf(manifest, std::ios::binary);
    if (!mf) {
        throw IoError("synth: cannot write " + manifest.string());
    }
    mf << manifest_text;
    return SynthDataset{out_dir, manifest};
}

} // namespace stroke
