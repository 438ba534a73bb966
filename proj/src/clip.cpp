#include "vtcav/clip.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "vtcav/container.hpp"

namespace vtcav {

std::vector<std::string> validate_clip(const VideoClip& clip) {
    std::vector<std::string> violations;
    if (clip.frames.shape.size() != 4) {
        violations.push_back("frames tensor rank != 4");
        return violations;
    }
    if (clip.T() < 1 || clip.H() < 1 || clip.W() < 1 || clip.C() < 1)
        violations.push_back("empty dimension");
    if (clip.C() != 3) violations.push_back("channel count != 3");
    if (!(clip.fps > 0.0f)) violations.push_back("fps not positive");

    bool out_of_range = false, non_finite = false;
    for (float v : clip.frames.data) {
        if (!std::isfinite(v)) non_finite = true;
        else if (v < 0.0f || v > 1.0f) out_of_range = true;
    }
    if (non_finite) violations.push_back("non-finite pixel");
    if (out_of_range) violations.push_back("pixel out of range");
    return violations;
}

VideoClip reverse_clip(const VideoClip& clip) {
    VideoClip out = clip;
    out.clip_id = clip.clip_id + "_rev";
    out.source = clip.source + "#reversed";
    const int64_t frame_sz = clip.H() * clip.W() * clip.C();
    for (int64_t t = 0; t < clip.T(); ++t) {
        std::copy_n(clip.frames.data.begin() + (clip.T() - 1 - t) * frame_sz, frame_sz,
                    out.frames.data.begin() + t * frame_sz);
    }
    return out;
}

Tensor resize_frame_bilinear(const Tensor& frame, int64_t out_h, int64_t out_w) {
    if (frame.shape.size() != 3) throw std::invalid_argument("resize: frame rank != 3");
    const int64_t in_h = frame.shape[0], in_w = frame.shape[1], c = frame.shape[2];
    if (in_h < 1 || in_w < 1) throw std::invalid_argument("resize: empty frame");
    Tensor out({out_h, out_w, c});
    const double sy = static_cast<double>(in_h) / out_h;
    const double sx = static_cast<double>(in_w) / out_w;
    for (int64_t oy = 0; oy < out_h; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(in_h - 1));
        int64_t y0 = static_cast<int64_t>(fy);
        int64_t y1 = std::min(y0 + 1, in_h - 1);
        double wy = fy - y0;
        for (int64_t ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(in_w - 1));
            int64_t x0 = static_cast<int64_t>(fx);
            int64_t x1 = std::min(x0 + 1, in_w - 1);
            double wx = fx - x0;
            for (int64_t ch = 0; ch < c; ++ch) {
                auto px = [&](int64_t y, int64_t x) {
                    return static_cast<double>(frame.data[(y * in_w + x) * c + ch]);
                };
                double v = (1 - wy) * ((1 - wx) * px(y0, x0) + wx * px(y0, x1)) +
                           wy * ((1 - wx) * px(y1, x0) + wx * px(y1, x1));
                out.data[(oy * out_w + ox) * c + ch] = static_cast<float>(v);
            }
        }
    }
    return out;
}

VideoClip resize_clip(const VideoClip& clip, int64_t out_h, int64_t out_w) {
    VideoClip out;
    out.clip_id = clip.clip_id;
    out.fps = clip.fps;
    out.source = clip.source;
    out.frames = Tensor({clip.T(), out_h, out_w, clip.C()});
    const int64_t in_frame = clip.H() * clip.W() * clip.C();
    const int64_t out_frame = out_h * out_w * clip.C();
    for (int64_t t = 0; t < clip.T(); ++t) {
        Tensor frame({clip.H(), clip.W(), clip.C()});
        std::copy_n(clip.frames.data.begin() + t * in_frame, in_frame, frame.data.begin());
        Tensor resized = resize_frame_bilinear(frame, out_h, out_w);
        std::copy_n(resized.data.begin(), out_frame, out.frames.data.begin() + t * out_frame);
    }
    return out;
}

void write_corpus_manifest(const std::string& path, const std::vector<CorpusEntry>& entries) {
    nlohmann::json j = nlohmann::json::array();
    std::vector<std::string> seen;
    for (const auto& e : entries) {
        if (std::find(seen.begin(), seen.end(), e.clip_id) != seen.end())
            throw std::runtime_error("duplicate clip_id in corpus manifest: " + e.clip_id);
        seen.push_back(e.clip_id);
        j.push_back({{"clip_id", e.clip_id}, {"path", e.path}, {"label", e.label}, {"split", e.split}});
    }
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write corpus manifest: " + path);
    os << j.dump(1) << "\n";
}

std::vector<CorpusEntry> read_corpus_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read corpus manifest: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("corpus manifest parse error in " + path + ": " + e.what());
    }
    if (!j.is_array()) throw std::runtime_error("corpus manifest is not a list: " + path);
    std::vector<CorpusEntry> out;
    std::vector<std::string> seen_ids;
    for (const auto& e : j) {
        CorpusEntry c;
        c.clip_id = e.at("clip_id").get<std::string>();
        c.path = e.at("path").get<std::string>();
        c.label = e.at("label").get<int>();
        c.split = e.at("split").get<std::string>();
        if (std::find(seen_ids.begin(), seen_ids.end(), c.clip_id) != seen_ids.end())
            throw std::runtime_error("duplicate clip_id in corpus manifest: " + c.clip_id);
        seen_ids.push_back(c.clip_id);
        out.push_back(std::move(c));
    }
    return out;
}

void save_clip(const std::string& path, const VideoClip& clip) {
    write_tensor_container(path, {{"frames", clip.frames}});
}

VideoClip load_clip(const std::string& path, const std::string& clip_id) {
    auto entries = read_tensor_container(path);
    auto it = entries.find("frames");
    if (it == entries.end()) throw std::runtime_error("clip file missing 'frames' entry: " + path);
    VideoClip clip;
    clip.clip_id = clip_id;
    clip.frames = std::move(it->second);
    clip.source = path;
    return clip;
}

}  // namespace vtcav
