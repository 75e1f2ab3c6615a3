#include <doctest.h>

#include "stroke/annotations.hpp"
#include "stroke/rng.hpp"

using namespace stroke;

TEST_CASE("empty video element parses to an empty list") {
    const auto a = parse_annotation_xml("<video name=\"v1\"></video>");
    CHECK(a.video_id == "v1");
    CHECK(a.strokes.empty());
    const auto b = parse_annotation_xml("<video name=\"v1\"/>");
    CHECK(b.strokes.empty());
}

TEST_CASE("single action maps attributes directly") {
    const auto a = parse_annotation_xml(R"(<video name="v1"><action begin="120" end="240" move="serve"/></video>)");
    REQUIRE(a.strokes.size() == 1);
    CHECK(a.strokes[0].begin == 120);
    CHECK(a.strokes[0].end == 240);
    CHECK(a.strokes[0].label == "serve");
}

TEST_CASE("missing move attribute defaults to 'stroke'") {
    const auto a = parse_annotation_xml(R"(<video name="v"><action begin="0" end="5"/></video>)");
    CHECK(a.strokes[0].label == "stroke");
}

TEST_CASE("prolog, comments and unsorted actions are handled") {
    const std::string doc = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                            "<!-- ground truth -->\n"
                            "<video name=\"v2\">\n"
                            "  <action begin=\"50\" end=\"80\" move=\"b\"/>\n"
                            "  <action begin=\"10\" end=\"20\" move=\"a\"/>\n"
                            "</video>\n";
    const auto a = parse_annotation_xml(doc);
    REQUIRE(a.strokes.size() == 2);
    CHECK(a.strokes[0].begin == 10); // sorted by begin
    CHECK(a.strokes[1].begin == 50);
}

TEST_CASE("overlapping actions are a parse error") {
    const std::string doc = R"(<video name="v"><action begin="10" end="20"/><action begin="15" end="30"/></video>)";
    CHECK_THROWS_AS(parse_annotation_xml(doc), ParseError);
}

TEST_CASE("begin > end and malformed documents carry line context") {
    CHECK_THROWS_WITH_AS(parse_annotation_xml("<video name=\"v\">\n<action begin=\"9\" end=\"3\"/>\n</video>"),
                         doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_AS(parse_annotation_xml("<video name=\"v\"><action end=\"3\"/></video>"), ParseError);
    CHECK_THROWS_AS(parse_annotation_xml("<video name=\"v\"><action begin=\"x\" end=\"3\"/></video>"), ParseError);
    CHECK_THROWS_AS(parse_annotation_xml("<vid name=\"v\"/>"), ParseError);
    CHECK_THROWS_AS(parse_annotation_xml("<video name=\"v\"><action begin=\"1\" end=\"3\"/>"), ParseError);
    CHECK_THROWS_AS(parse_annotation_xml("<video/>"), ParseError); // no name
}

TEST_CASE("writer emits a self-closing element for an empty list") {
    const std::string text = write_annotation_xml("v9", {});
    CHECK(text.find("<video name=\"v9\"/>") != std::string::npos);
    const auto back = parse_annotation_xml(text);
    CHECK(back.video_id == "v9");
    CHECK(back.strokes.empty());
}

TEST_CASE("scores serialize with six decimals") {
    const std::string text = write_annotation_xml("v", {XmlAction{3, 40, "serve", 0.5}});
    CHECK(text.find("score=\"0.500000\"") != std::string::npos);
}

TEST_CASE("parse(write(x)) == x for random valid action lists") {
    Rng rng(77);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<XmlAction> actions;
        std::int64_t t = rng.uniform_int(30);
        const int n = static_cast<int>(rng.uniform_int(8));
        for (int i = 0; i < n; ++i) {
            const std::int64_t len = 1 + rng.uniform_int(200);
            actions.push_back(XmlAction{t, t + len - 1, "class" + std::to_string(rng.uniform_int(5)),
                                        rng.coin() ? std::optional<double>(rng.uniform()) : std::nullopt});
            t += len + 1 + rng.uniform_int(50);
        }
        const auto back = parse_annotation_xml(write_annotation_xml("vid", actions));
        REQUIRE(back.strokes.size() == actions.size());
        for (std::size_t i = 0; i < actions.size(); ++i) {
            CHECK(back.strokes[i].begin == actions[i].begin);
            CHECK(back.strokes[i].end == actions[i].end);
            CHECK(back.strokes[i].label == actions[i].label);
        }
    }
}

TEST_CASE("escaped characters survive the round trip") {
    const std::string text = write_annotation_xml("a&b<c>\"d\"", {XmlAction{0, 1, "x&y", std::nullopt}});
    const auto back = parse_annotation_xml(text);
    CHECK(back.video_id == "a&b<c>\"d\"");
    CHECK(back.strokes[0].label == "x&y");
}

TEST_CASE("configurable attribute names") {
    XmlAttrNames names;
    names.begin = "start";
    names.end = "stop";
    names.label = "cls";
    const auto a = parse_annotation_xml(R"(<video name="v"><action start="1" stop="9" cls="k"/></video>)", names);
    CHECK(a.strokes[0].begin == 1);
    CHECK(a.strokes[0].end == 9);
    CHECK(a.strokes[0].label == "k");
    const std::string text = write_annotation_xml("v", {XmlAction{1, 9, "k", std::nullopt}}, names);
    CHECK(text.find("start=\"1\"") != std::string::npos);
}
