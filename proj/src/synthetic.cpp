#include "vtcav/synthetic.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace vtcav {

std::vector<std::string> SyntheticCorpus::class_names() const {
    if (spec.task == SyntheticTask::direction_lr) return {"left", "right"};
    return {"blank", "shape"};
}

bool is_leftward(const std::vector<Box>& boxes) {
    if (boxes.size() < 2) return false;
    for (size_t i = 1; i < boxes.size(); ++i)
        if (boxes[i].x1 >= boxes[i - 1].x1) return false;
    return true;
}

namespace {

SyntheticClip make_clip(const SyntheticSpec& spec, std::mt19937_64& rng, int index,
                        const std::string& split) {
    const int ss = spec.shape_size;
    const int travel = (spec.T - 1) * spec.speed;

    SyntheticClip sc;
    sc.label = static_cast<int>(rng() & 1);

    std::uniform_int_distribution<int> ydist(0, spec.H - ss);
    const int y0 = ydist(rng);
    std::uniform_real_distribution<double> bdist(0.6, 1.0);
    const double brightness = bdist(rng);

    int x0 = 0;
    bool moving = spec.task == SyntheticTask::direction_lr;
    bool present = true;
    int dir = 0;
    if (moving) {
        dir = sc.label == 1 ? 1 : -1;
        const int lo = dir > 0 ? 0 : travel;
        const int hi = dir > 0 ? spec.W - ss - travel : spec.W - ss;
        std::uniform_int_distribution<int> xdist(lo, hi);
        x0 = xdist(rng);
    } else {
        present = sc.label == 1;
        std::uniform_int_distribution<int> xdist(0, spec.W - ss);
        x0 = xdist(rng);
    }

    VideoClip& clip = sc.clip;
    clip.clip_id = "synth_" + split + "_" + std::to_string(index);
    clip.source = "synthetic:" + std::string(spec.task == SyntheticTask::direction_lr
                                                 ? "direction_lr"
                                                 : "presence") +
                  ":seed" + std::to_string(spec.seed);
    clip.frames = Tensor({spec.T, spec.H, spec.W, 3});

    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (int t = 0; t < spec.T; ++t) {
        const int x = x0 + dir * spec.speed * t;
        if (present) sc.boxes.push_back(Box{x, y0, x + ss, y0 + ss});
        for (int yy = 0; yy < spec.H; ++yy) {
            for (int xx = 0; xx < spec.W; ++xx) {
                const bool inside =
                    present && yy >= y0 && yy < y0 + ss && xx >= x && xx < x + ss;
                double v = inside ? brightness : 0.0;
                if (spec.noise_std > 0.0) v += noise(rng);
                v = std::clamp(v, 0.0, 1.0);
                for (int c = 0; c < 3; ++c) clip.at(t, yy, xx, c) = static_cast<float>(v);
            }
        }
    }
    return sc;
}

}  // namespace

SyntheticCorpus generate_synthetic_dataset(const SyntheticSpec& spec) {
    if (spec.T < 2 || spec.H < 1 || spec.W < 1)
        throw std::invalid_argument("synthetic spec: T must be >= 2 and H,W >= 1");
    if (spec.shape_size < 1 || spec.shape_size > spec.W || spec.shape_size > spec.H)
        throw std::invalid_argument("synthetic spec: shape_size does not fit the frame");
    if (spec.n_train < 1 || spec.n_test < 1)
        throw std::invalid_argument("synthetic spec: n_train and n_test must be >= 1");
    if (spec.task == SyntheticTask::direction_lr) {
        if (spec.speed == 0) throw std::invalid_argument("synthetic spec: degenerate motion (speed 0)");
        if (spec.speed < 0) throw std::invalid_argument("synthetic spec: speed must be positive");
        const int travel = (spec.T - 1) * spec.speed;
        if (travel + spec.shape_size > spec.W)
            throw std::invalid_argument("synthetic spec: shape exits frame (reduce speed, T, or shape_size)");
    }

    SyntheticCorpus corpus;
    corpus.spec = spec;
    std::mt19937_64 rng(spec.seed);
    for (int i = 0; i < spec.n_train; ++i) corpus.train.push_back(make_clip(spec, rng, i, "train"));
    for (int i = 0; i < spec.n_test; ++i) corpus.test.push_back(make_clip(spec, rng, i, "test"));
    return corpus;
}

}  // namespace vtcav
