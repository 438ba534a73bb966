#include "vtcav/tracks.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace vtcav {

double Track::max_width() const {
    double m = 0.0;
    for (const auto& b : boxes) m = std::max(m, b.x2 - b.x1);
    return m;
}

double Track::max_height() const {
    double m = 0.0;
    for (const auto& b : boxes) m = std::max(m, b.y2 - b.y1);
    return m;
}

double box_iou(double ax1, double ay1, double ax2, double ay2, double bx1, double by1, double bx2,
               double by2) {
    const double ix = std::max(0.0, std::min(ax2, bx2) - std::max(ax1, bx1));
    const double iy = std::max(0.0, std::min(ay2, by2) - std::max(ay1, by1));
    const double inter = ix * iy;
    const double uni = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Track> build_tracks(const std::vector<DetectionFrame>& frames,
                                const std::string& class_label, double iou_threshold,
                                int max_gap) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
        throw std::invalid_argument("iou_threshold must be in (0,1)");
    if (max_gap < 0) throw std::invalid_argument("max_gap must be >= 0");

    struct Active {
        Track track;
        int last_frame = 0;
    };
    std::vector<Active> active;
    std::vector<Track> done;
    int next_id = 0;

    for (const auto& frame : frames) {
        const int fi = frame.frame_index;

        // retire tracks whose gap would exceed max_gap
        for (auto it = active.begin(); it != active.end();) {
            if (fi - it->last_frame - 1 > max_gap) {
                done.push_back(std::move(it->track));
                it = active.erase(it);
            } else {
                ++it;
            }
        }

        std::vector<const Detection*> dets;
        for (const auto& d : frame.detections)
            if (d.class_label == class_label) dets.push_back(&d);

        // candidate (track, detection) pairs above threshold, best IoU first
        struct Pair {
            size_t track, det;
            double iou;
        };
        std::vector<Pair> pairs;
        for (size_t ti = 0; ti < active.size(); ++ti) {
            const TrackBox& last = active[ti].track.boxes.back();
            for (size_t di = 0; di < dets.size(); ++di) {
                double iou = box_iou(last.x1, last.y1, last.x2, last.y2, dets[di]->x1,
                                     dets[di]->y1, dets[di]->x2, dets[di]->y2);
                if (iou >= iou_threshold) pairs.push_back({ti, di, iou});
            }
        }
        std::stable_sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
            if (a.iou != b.iou) return a.iou > b.iou;
            return dets[a.det]->x1 < dets[b.det]->x1;
        });

        std::vector<bool> track_used(active.size(), false), det_used(dets.size(), false);
        for (const Pair& p : pairs) {
            if (track_used[p.track] || det_used[p.det]) continue;
            track_used[p.track] = true;
            det_used[p.det] = true;
            const Detection& d = *dets[p.det];
            active[p.track].track.boxes.push_back({fi, d.x1, d.y1, d.x2, d.y2});
            active[p.track].last_frame = fi;
        }

        // unmatched detections seed new tracks, highest confidence first
        std::vector<size_t> unmatched;
        for (size_t di = 0; di < dets.size(); ++di)
            if (!det_used[di]) unmatched.push_back(di);
        std::stable_sort(unmatched.begin(), unmatched.end(), [&](size_t a, size_t b) {
            if (dets[a]->confidence != dets[b]->confidence)
                return dets[a]->confidence > dets[b]->confidence;
            return dets[a]->x1 < dets[b]->x1;
        });
        for (size_t di : unmatched) {
            const Detection& d = *dets[di];
            Active a;
            char idbuf[16];
            std::snprintf(idbuf, sizeof idbuf, "%04d", next_id++);
            a.track.track_id = "trk_" + class_label + "_" + idbuf;
            a.track.class_label = class_label;
            a.track.boxes.push_back({fi, d.x1, d.y1, d.x2, d.y2});
            a.last_frame = fi;
            active.push_back(std::move(a));
        }
    }
    for (auto& a : active) done.push_back(std::move(a.track));
    std::stable_sort(done.begin(), done.end(),
                     [](const Track& a, const Track& b) { return a.track_id < b.track_id; });
    return done;
}

}  // namespace vtcav
