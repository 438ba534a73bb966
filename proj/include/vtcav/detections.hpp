#pragma once

#include <string>
#include <vector>

namespace vtcav {

struct Detection {
    std::string class_label;
    double confidence = 0.0;
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

struct DetectionFrame {
    int frame_index = 0;
    std::vector<Detection> detections;
};

struct DetectionFile {
    std::string video_id;
    int width = 0;
    int height = 0;
    std::vector<DetectionFrame> frames;  // sorted by frame_index
};

// Parses the detection JSON schema:
//   {"video_id": str, "width": int, "height": int,
//    "frames": [{"frame_index": int,
//                "detections": [{"label": str, "confidence": float,
//                                "bbox": [x1,y1,x2,y2]}]}]}
// Boxes are validated against the frame bounds; errors name the frame.
DetectionFile ingest_detections(const std::string& path);

}  // namespace vtcav
