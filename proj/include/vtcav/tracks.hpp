#pragma once

#include <string>
#include <vector>

#include "vtcav/detections.hpp"

namespace vtcav {

struct TrackBox {
    int frame_index = 0;
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

struct Track {
    std::string track_id;
    std::string class_label;
    std::vector<TrackBox> boxes;  // frame indices strictly increasing

    int length() const { return static_cast<int>(boxes.size()); }
    // Per-axis maximum over member boxes.
    double max_width() const;
    double max_height() const;
};

double box_iou(double ax1, double ay1, double ax2, double ay2, double bx1, double by1, double bx2,
               double by2);

// Greedy IoU association of same-class detections across frames.
// Per frame, (track, detection) pairs are matched in descending IoU order
// subject to IoU >= iou_threshold; ties break toward the lower detection x1.
// Unmatched detections seed new tracks in descending confidence order.
// A track ends after max_gap consecutive unmatched frames.
std::vector<Track> build_tracks(const std::vector<DetectionFrame>& frames,
                                const std::string& class_label, double iou_threshold, int max_gap);

}  // namespace vtcav
