#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vtcav/detections.hpp"

using namespace vtcav;
namespace fs = std::filesystem;

namespace {

std::string write_file(const std::string& name, const std::string& content) {
    auto dir = fs::temp_directory_path() / "vtcav_det_test";
    fs::create_directories(dir);
    auto path = (dir / name).string();
    std::ofstream os(path, std::ios::trunc);
    os << content;
    return path;
}

}  // namespace

TEST_CASE("happy path: three frames with one box each") {
    auto path = write_file("ok.json", R"({
        "video_id": "v1", "width": 100, "height": 80,
        "frames": [
            {"frame_index": 0, "detections": [{"label": "tennis racket", "confidence": 0.9, "bbox": [10, 10, 30, 40]}]},
            {"frame_index": 1, "detections": [{"label": "tennis racket", "confidence": 0.8, "bbox": [12, 10, 32, 40]}]},
            {"frame_index": 2, "detections": [{"label": "tennis racket", "confidence": 0.85, "bbox": [14, 10, 34, 40]}]}
        ]})");
    auto f = ingest_detections(path);
    CHECK(f.video_id == "v1");
    CHECK(f.width == 100);
    CHECK(f.height == 80);
    REQUIRE(f.frames.size() == 3);
    CHECK(f.frames[1].detections.at(0).class_label == "tennis racket");
    CHECK(f.frames[1].detections.at(0).x1 == 12);
    CHECK(f.frames[1].detections.at(0).confidence == doctest::Approx(0.8));
}

TEST_CASE("inverted bbox names the offending frame") {
    auto path = write_file("inverted.json", R"({
        "video_id": "v2", "width": 100, "height": 80,
        "frames": [{"frame_index": 0, "detections": [{"label": "x", "confidence": 0.5, "bbox": [10, 10, 5, 20]}]}]})");
    CHECK_THROWS_WITH_AS(ingest_detections(path), doctest::Contains("inverted bbox at frame 0"),
                         std::runtime_error);
}

TEST_CASE("bbox outside the frame bounds is rejected with its frame index") {
    auto path = write_file("outside.json", R"({
        "video_id": "v3", "width": 100, "height": 80,
        "frames": [
            {"frame_index": 0, "detections": []},
            {"frame_index": 1, "detections": [{"label": "x", "confidence": 0.5, "bbox": [90, 10, 120, 20]}]}
        ]})");
    CHECK_THROWS_WITH_AS(ingest_detections(path), doctest::Contains("frame 1"), std::runtime_error);
}

TEST_CASE("empty per-frame detection lists are valid") {
    auto path = write_file("empty.json", R"({
        "video_id": "v4", "width": 10, "height": 10,
        "frames": [{"frame_index": 0, "detections": []}, {"frame_index": 1, "detections": []}]})");
    auto f = ingest_detections(path);
    REQUIRE(f.frames.size() == 2);
    CHECK(f.frames[0].detections.empty());
}

TEST_CASE("frames are sorted by index on ingest") {
    auto path = write_file("unsorted.json", R"({
        "video_id": "v5", "width": 10, "height": 10,
        "frames": [
            {"frame_index": 2, "detections": []},
            {"frame_index": 0, "detections": []},
            {"frame_index": 1, "detections": []}
        ]})");
    auto f = ingest_detections(path);
    CHECK(f.frames[0].frame_index == 0);
    CHECK(f.frames[1].frame_index == 1);
    CHECK(f.frames[2].frame_index == 2);
}

TEST_CASE("malformed JSON and missing files are loud errors") {
    auto path = write_file("garbage.json", "{not json");
    CHECK_THROWS(ingest_detections(path));
    CHECK_THROWS(ingest_detections("/nonexistent/nope.json"));
}

TEST_CASE("missing required keys are errors") {
    auto path = write_file("nokeys.json", R"({"video_id": "v6", "frames": []})");
    CHECK_THROWS(ingest_detections(path));
}
