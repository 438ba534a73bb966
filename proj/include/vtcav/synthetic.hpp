#pragma once

#include <cstdint>
#include <vector>

#include "vtcav/clip.hpp"

namespace vtcav {

enum class SyntheticTask { direction_lr, presence };

struct SyntheticSpec {
    SyntheticTask task = SyntheticTask::direction_lr;
    int T = 8;
    int H = 32;
    int W = 32;
    int shape_size = 6;   // square edge, pixels
    int speed = 2;        // pixels per frame
    double noise_std = 0.02;
    int n_train = 200;
    int n_test = 60;
    uint64_t seed = 0;
};

struct Box {
    int x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // half-open pixel bounds
    int width() const { return x2 - x1; }
    int height() const { return y2 - y1; }
};

struct SyntheticClip {
    VideoClip clip;
    int label = 0;                 // direction_lr: 0 = left, 1 = right; presence: 0 = blank, 1 = shape
    std::vector<Box> boxes;        // ground-truth shape box per frame (empty boxes for blanks)
};

struct SyntheticCorpus {
    SyntheticSpec spec;
    std::vector<SyntheticClip> train;
    std::vector<SyntheticClip> test;
    std::vector<std::string> class_names() const;
};

// Deterministic given spec.seed. Throws on degenerate specs (speed 0 for
// direction_lr, shape leaving the frame, non-positive counts).
SyntheticCorpus generate_synthetic_dataset(const SyntheticSpec& spec);

// True iff the shape's x coordinate strictly decreases frame over frame.
bool is_leftward(const std::vector<Box>& boxes);

}  // namespace vtcav
