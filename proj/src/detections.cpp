#include "vtcav/detections.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace vtcav {

DetectionFile ingest_detections(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open detections file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed detections JSON in " + path + ": " + e.what());
    }

    DetectionFile out;
    try {
        out.video_id = j.at("video_id").get<std::string>();
        out.width = j.at("width").get<int>();
        out.height = j.at("height").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("detections header error in " + path + ": " + e.what());
    }
    if (out.width < 1 || out.height < 1)
        throw std::runtime_error("detections: non-positive frame size in " + path);

    for (const auto& jf : j.at("frames")) {
        DetectionFrame frame;
        frame.frame_index = jf.at("frame_index").get<int>();
        const std::string where = "frame " + std::to_string(frame.frame_index) + " in " + path;
        if (frame.frame_index < 0) throw std::runtime_error("negative frame index at " + where);
        for (const auto& jd : jf.at("detections")) {
            Detection d;
            d.class_label = jd.at("label").get<std::string>();
            d.confidence = jd.at("confidence").get<double>();
            auto bbox = jd.at("bbox").get<std::vector<double>>();
            if (bbox.size() != 4) throw std::runtime_error("bbox must have 4 values at " + where);
            d.x1 = bbox[0];
            d.y1 = bbox[1];
            d.x2 = bbox[2];
            d.y2 = bbox[3];
            if (!std::isfinite(d.confidence) || d.confidence < 0.0 || d.confidence > 1.0)
                throw std::runtime_error("confidence out of [0,1] at " + where);
            if (d.x1 >= d.x2 || d.y1 >= d.y2)
                throw std::runtime_error("inverted bbox at " + where);
            if (d.x1 < 0 || d.y1 < 0 || d.x2 > out.width || d.y2 > out.height)
                throw std::runtime_error("bbox outside frame bounds at " + where);
            frame.detections.push_back(std::move(d));
        }
        out.frames.push_back(std::move(frame));
    }
    std::sort(out.frames.begin(), out.frames.end(),
              [](const DetectionFrame& a, const DetectionFrame& b) {
                  return a.frame_index < b.frame_index;
              });
    return out;
}

}  // namespace vtcav
