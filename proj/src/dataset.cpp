#include "stroke/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "stroke/clips.hpp"
#include "stroke/rng.hpp"

namespace stroke {

std::vector<ManifestEntry> read_split_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw IoError("manifest: cannot open " + path.string());
    }
    std::vector<ManifestEntry> out;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::string cur;
        for (const char c : line) {
            if (c == '\t') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        if (fields.size() != 3) {
            throw ParseError("manifest: line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
        }
        if (fields[2] != "train" && fields[2] != "validation" && fields[2] != "test") {
            throw ParseError("manifest: line " + std::to_string(line_no) + ": unknown split '" + fields[2] + "'");
        }
        out.push_back(ManifestEntry{fields[0], fields[1], fields[2]});
    }
    return out;
}

void write_split_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("manifest: cannot write " + path.string());
    }
    for (const auto& e : entries) {
        os << e.video_path << '\t' << e.annotation_path << '\t' << e.split << '\n';
    }
}

int ClassMap::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

ClassMap ClassMap::from_labels(const std::vector<std::string>& labels) {
    std::set<std::string> uniq(labels.begin(), labels.end());
    uniq.erase("negative");
    ClassMap cm;
    cm.names.push_back("negative");
    cm.names.insert(cm.names.end(), uniq.begin(), uniq.end());
    return cm;
}

void VideoStore::put(const std::string& id, RawVideo video) {
    videos_[id] = std::move(video);
}

const RawVideo& VideoStore::get(const std::string& id) const {
    const auto it = videos_.find(id);
    if (it == videos_.end()) {
        throw ConfigError("video store: unknown video '" + id + "'");
    }
    return it->second;
}

std::vector<std::string> VideoStore::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, v] : videos_) {
        out.push_back(id);
    }
    return out;
}

LoadedDataset load_dataset(const std::filesystem::path& manifest_path) {
    const auto entries = read_split_manifest(manifest_path);
    const std::filesystem::path root = manifest_path.parent_path();

    LoadedDataset ds;
    std::vector<std::string> labels;
    for (const auto& e : entries) {
        RawVideo video = read_raw_video(root / e.video_path);

        std::ifstream xml(root / e.annotation_path);
        if (!xml) {
            throw IoError("dataset: cannot open " + (root / e.annotation_path).string());
        }
        std::stringstream buf;
        buf << xml.rdbuf();
        VideoAnnotations ann = parse_annotation_xml(buf.str());

        if (ds.store.contains(ann.video_id)) {
            throw ParseError("dataset: duplicate video id '" + ann.video_id + "'");
        }
        for (const auto& s : ann.strokes) {
            if (s.end >= video.frame_count) {
                throw ParseError("dataset: video '" + ann.video_id + "': annotation [" +
                                 std::to_string(s.begin) + "," + std::to_string(s.end) +
                                 "] exceeds frame count " + std::to_string(video.frame_count));
            }
            labels.push_back(s.label);
        }
        ds.split_videos[e.split].push_back(ann.video_id);
        ds.annotations[ann.video_id] = std::move(ann.strokes);
        ds.store.put(ann.video_id, std::move(video));
    }
    ds.classes = ClassMap::from_labels(labels);
    return ds;
}

SplitData build_split(const LoadedDataset& ds, const std::string& split, std::int64_t clip_len,
                      std::int64_t negatives_per_video, std::uint64_t seed) {
    const auto it = ds.split_videos.find(split);
    if (it == ds.split_videos.end()) {
        throw ConfigError("dataset: no videos in split '" + split + "'");
    }
    SplitData out;
    Rng rng(seed);
    for (const std::string& id : it->second) {
        const auto ann_it = ds.annotations.find(id);
        const auto& strokes = ann_it->second;
        for (const auto& s : strokes) {
            const int label = ds.classes.index_of(s.label);
            if (label < 0) {
                throw ConfigError("dataset: label '" + s.label + "' missing from class map");
            }
            out.items.push_back(LabeledInterval{id, s.begin, s.end, label});
        }
        if (negatives_per_video > 0) {
            const auto negatives = mine_negative_segments(ds.store.get(id).frame_count, strokes,
                                                          negatives_per_video, clip_len, rng.next_u64());
            for (const auto& n : negatives) {
                out.items.push_back(LabeledInterval{id, n.begin, n.end, 0});
            }
        }
    }
    return out;
}

} // namespace stroke
