#include "stroke/annotations.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace stroke {

namespace {

// Cursor over the document tracking line numbers for error context.
struct Scanner {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;

    explicit Scanner(const std::string& t) : text(t) {}

    bool done() const { return pos >= text.size(); }

    char peek() const { return done() ? '\0' : text[pos]; }

    char take() {
        const char c = text[pos++];
        if (c == '\n') {
            ++line;
        }
        return c;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("annotation xml: line " + std::to_string(line) + ": " + msg);
    }

    void skip_ws() {
        while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n')) {
            take();
        }
    }

    bool try_literal(const std::string& lit) {
        if (text.compare(pos, lit.size(), lit) != 0) {
            return false;
        }
        for (std::size_t i = 0; i < lit.size(); ++i) {
            take();
        }
        return true;
    }

    void expect_literal(const std::string& lit, const std::string& what) {
        if (!try_literal(lit)) {
            fail("expected " + what);
        }
    }

    // Skips whitespace, comments and (once, at the top) the XML prolog.
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (try_literal("<?")) {
                while (!done() && !try_literal("?>")) {
                    take();
                }
            } else if (try_literal("<!--")) {
                while (!done() && !try_literal("-->")) {
                    take();
                }
            } else {
                return;
            }
        }
    }

    std::string name_token() {
        std::string out;
        while (!done()) {
            const char c = peek();
            if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                c == '-' || c == ':') {
                out.push_back(take());
            } else {
                break;
            }
        }
        if (out.empty()) {
            fail("expected a name");
        }
        return out;
    }

    std::string attr_value() {
        const char quote = peek();
        if (quote != '"' && quote != '\'') {
            fail("expected a quoted attribute value");
        }
        take();
        std::string out;
        while (!done() && peek() != quote) {
            char c = take();
            if (c == '&') {
                std::string ent;
                while (!done() && peek() != ';') {
                    ent.push_back(take());
                }
                if (done()) {
                    fail("unterminated entity");
                }
                take();
                if (ent == "amp") c = '&';
                else if (ent == "lt") c = '<';
                else if (ent == "gt") c = '>';
                else if (ent == "quot") c = '"';
                else if (ent == "apos") c = '\'';
                else fail("unknown entity &" + ent + ";");
            }
            out.push_back(c);
        }
        if (done()) {
            fail("unterminated attribute value");
        }
        take();
        return out;
    }

    // Attributes up to (not including) '>' or '/>'.
    std::map<std::string, std::string> attributes() {
        std::map<std::string, std::string> out;
        for (;;) {
            skip_ws();
            if (peek() == '>' || peek() == '/' || done()) {
                return out;
            }
            const std::string key = name_token();
            skip_ws();
            expect_literal("=", "'=' after attribute name");
            skip_ws();
            if (!out.emplace(key, attr_value()).second) {
                fail("duplicate attribute '" + key + "'");
            }
        }
    }
};

std::int64_t attr_int(Scanner& sc, const std::map<std::string, std::string>& attrs, const std::string& key) {
    const auto it = attrs.find(key);
    if (it == attrs.end()) {
        sc.fail("action is missing the '" + key + "' attribute");
    }
    try {
        std::size_t consumed = 0;
        const std::int64_t v = std::stoll(it->second, &consumed);
        if (consumed != it->second.size()) {
            throw std::invalid_argument(it->second);
        }
        return v;
    } catch (const std::exception&) {
        sc.fail("attribute '" + key + "' is not an integer: '" + it->second + "'");
    }
}

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

} // namespace

void validate_annotations(const std::vector<StrokeAnnotation>& strokes, const std::string& video_id) {
    for (std::size_t i = 0; i < strokes.size(); ++i) {
        const auto& s = strokes[i];
        if (s.begin < 0 || s.begin > s.end) {
            throw ParseError("annotation xml: video '" + video_id + "': bad interval [" +
                             std::to_string(s.begin) + "," + std::to_string(s.end) + "]");
        }
        if (i > 0 && strokes[i - 1].end >= s.begin) {
            throw ParseError("annotation xml: video '" + video_id + "': actions [" +
                             std::to_string(strokes[i - 1].begin) + "," + std::to_string(strokes[i - 1].end) +
                             "] and [" + std::to_string(s.begin) + "," + std::to_string(s.end) + "] overlap");
        }
    }
}

VideoAnnotations parse_annotation_xml(const std::string& text, const XmlAttrNames& names) {
    Scanner sc(text);
    sc.skip_misc();
    sc.expect_literal("<video", "<video> root element");
    auto root_attrs = sc.attributes();
    const auto name_it = root_attrs.find("name");
    if (name_it == root_attrs.end()) {
        sc.fail("video element is missing the 'name' attribute");
    }

    VideoAnnotations out;
    out.video_id = name_it->second;

    sc.skip_ws();
    if (sc.try_literal("/>")) {
        return out;
    }
    sc.expect_literal(">", "'>' or '/>' closing the video tag");

    for (;;) {
        sc.skip_misc();
        if (sc.try_literal("</video")) {
            sc.skip_ws();
            sc.expect_literal(">", "'>' closing </video>");
            break;
        }
        if (sc.done()) {
            sc.fail("unexpected end of document inside <video>");
        }
        sc.expect_literal("<action", "<action> element");
        auto attrs = sc.attributes();
        StrokeAnnotation ann;
        ann.begin = attr_int(sc, attrs, names.begin);
        ann.end = attr_int(sc, attrs, names.end);
        const auto label_it = attrs.find(names.label);
        ann.label = label_it == attrs.end() ? "stroke" : label_it->second;
        if (ann.begin < 0 || ann.begin > ann.end) {
            sc.fail("action has begin " + std::to_string(ann.begin) + " > end " + std::to_string(ann.end) +
                    " or a negative frame");
        }
        out.strokes.push_back(std::move(ann));
        sc.skip_ws();
        if (sc.try_literal("/>")) {
            continue;
        }
        sc.expect_literal(">", "'>' or '/>' closing the action tag");
        sc.skip_ws();
        sc.expect_literal("</action", "</action>");
        sc.skip_ws();
        sc.expect_literal(">", "'>' closing </action>");
    }

    sc.skip_misc();
    if (!sc.done()) {
        sc.fail("content after </video>");
    }

    std::stable_sort(out.strokes.begin(), out.strokes.end(),
                     [](const StrokeAnnotation& a, const StrokeAnnotation& b) { return a.begin < b.begin; });
    validate_annotations(out.strokes, out.video_id);
    return out;
}

std::string write_annotation_xml(const std::string& video_id, const std::vector<XmlAction>& actions,
                                 const XmlAttrNames& names) {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (actions.empty()) {
        os << "<video name=\"" << escape(video_id) << "\"/>\n";
        return os.str();
    }
    os << "<video name=\"" << escape(video_id) << "\">\n";
    for (const XmlAction& a : actions) {
        os << "  <action " << names.begin << "=\"" << a.begin << "\" " << names.end << "=\"" << a.end << "\" "
           << names.label << "=\"" << escape(a.label) << "\"";
        if (a.score.has_value()) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6f", *a.score);
            os << " score=\"" << buf << "\"";
        }
        os << "/>\n";
    }
    os << "</video>\n";
    return os.str();
}

} // namespace stroke
