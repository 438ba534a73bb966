#pragma once

#include <string>
#include <vector>

#include "vtcav/tensor.hpp"

namespace vtcav {

// A fixed-length stack of frames, shape T x H x W x 3, float32 pixels in [0,1].
struct VideoClip {
    std::string clip_id;
    Tensor frames;
    float fps = 25.0f;
    std::string source;

    int64_t T() const { return frames.shape.size() == 4 ? frames.shape[0] : 0; }
    int64_t H() const { return frames.shape.size() == 4 ? frames.shape[1] : 0; }
    int64_t W() const { return frames.shape.size() == 4 ? frames.shape[2] : 0; }
    int64_t C() const { return frames.shape.size() == 4 ? frames.shape[3] : 0; }

    float& at(int64_t t, int64_t y, int64_t x, int64_t c) {
        return frames.data[static_cast<size_t>(((t * H() + y) * W() + x) * C() + c)];
    }
    float at(int64_t t, int64_t y, int64_t x, int64_t c) const {
        return frames.data[static_cast<size_t>(((t * H() + y) * W() + x) * C() + c)];
    }
};

// Returns every violated invariant as a human-readable string; empty means valid.
std::vector<std::string> validate_clip(const VideoClip& clip);

VideoClip reverse_clip(const VideoClip& clip);

// Stretch-resize, bilinear. frame shape H x W x 3.
Tensor resize_frame_bilinear(const Tensor& frame, int64_t out_h, int64_t out_w);
VideoClip resize_clip(const VideoClip& clip, int64_t out_h, int64_t out_w);

// Corpus manifest: JSON list of {clip_id, path, label, split}.
struct CorpusEntry {
    std::string clip_id;
    std::string path;  // relative to the manifest's directory
    int label = 0;
    std::string split;  // "train" | "test"
};

void write_corpus_manifest(const std::string& path, const std::vector<CorpusEntry>& entries);
std::vector<CorpusEntry> read_corpus_manifest(const std::string& path);

// Clip files are tensor containers with a single "frames" entry.
void save_clip(const std::string& path, const VideoClip& clip);
VideoClip load_clip(const std::string& path, const std::string& clip_id);

}  // namespace vtcav
