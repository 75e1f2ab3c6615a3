#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stroke/errors.hpp"

namespace stroke {

// One annotated stroke: inclusive frame interval plus a class name.
struct StrokeAnnotation {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    std::string label;

    bool operator==(const StrokeAnnotation&) const = default;
};

// video id -> strokes sorted by begin, pairwise non-overlapping.
using AnnotationSet = std::map<std::string, std::vector<StrokeAnnotation>>;

struct VideoAnnotations {
    std::string video_id;
    std::vector<StrokeAnnotation> strokes;
};

// Attribute names of the annotation schema; the defaults match the files
// this project writes.
struct XmlAttrNames {
    std::string begin = "begin";
    std::string end = "end";
    std::string label = "move";
};

// Parses `<video name=...><action begin=.. end=.. move=../></video>`.
// Actions come back sorted by begin; a missing label attribute maps to
// "stroke". Malformed documents, missing attributes, begin > end and
// overlapping actions raise ParseError with the line number.
VideoAnnotations parse_annotation_xml(const std::string& text, const XmlAttrNames& attrs = {});

// Entry for the writer; `score` adds a score="..." attribute (6 decimals).
struct XmlAction {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    std::string label;
    std::optional<double> score;
};

std::string write_annotation_xml(const std::string& video_id, const std::vector<XmlAction>& actions,
                                 const XmlAttrNames& attrs = {});

// Throws ParseError unless sorted by begin and pairwise non-overlapping with
// 0 <= begin <= end.
void validate_annotations(const std::vector<StrokeAnnotation>& strokes, const std::string& video_id);

} // namespace stroke
