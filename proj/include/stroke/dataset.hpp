#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stroke/annotations.hpp"
#include "stroke/video.hpp"

namespace stroke {

// One line of the split manifest: video path, annotation path, split name.
// Paths are relative to the manifest's directory.
struct ManifestEntry {
    std::string video_path;
    std::string annotation_path;
    std::string split; // train | validation | test
};

std::vector<ManifestEntry> read_split_manifest(const std::filesystem::path& path);
void write_split_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

// Class name <-> index mapping. Index 0 is always "negative"; stroke classes
// follow in sorted name order.
struct ClassMap {
    std::vector<std::string> names;

    int index_of(const std::string& name) const;
    int size() const { return static_cast<int>(names.size()); }

    static ClassMap from_labels(const std::vector<std::string>& labels);
};

class VideoStore {
public:
    void put(const std::string& id, RawVideo video);
    const RawVideo& get(const std::string& id) const;
    bool contains(const std::string& id) const { return videos_.count(id) != 0; }
    std::vector<std::string> ids() const;

private:
    std::map<std::string, RawVideo> videos_;
};

// A clip source: a labeled interval of a stored video.
struct LabeledInterval {
    std::string video_id;
    std::int64_t begin = 0;
    std::int64_t end = 0;
    int label = 0;
};

struct SplitData {
    std::vector<LabeledInterval> items;
};

// Everything a manifest points at, loaded and validated (annotations must
// fit inside their videos).
struct LoadedDataset {
    VideoStore store;
    AnnotationSet annotations;
    std::map<std::string, std::vector<std::string>> split_videos;
    ClassMap classes;
};

LoadedDataset load_dataset(const std::filesystem::path& manifest_path);

// Labeled intervals for one split: each annotated stroke plus
// `negatives_per_video` mined negative windows of `clip_len` frames.
SplitData build_split(const LoadedDataset& ds, const std::string& split, std::int64_t clip_len,
                      std::int64_t negatives_per_video, std::uint64_t seed);

} // namespace stroke
