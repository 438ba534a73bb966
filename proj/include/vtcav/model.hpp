#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vtcav/clip.hpp"
#include "vtcav/synthetic.hpp"
#include "vtcav/tensor.hpp"

namespace vtcav {

struct ModelConfig {
    int T = 8, H = 32, W = 32;
    std::vector<int> channels = {8, 16, 16};
    std::vector<std::array<int, 3>> pools = {{1, 2, 2}, {2, 2, 2}, {2, 2, 2}};
    std::vector<std::string> class_names = {"left", "right"};
};

// Three stages of (3d conv -> tanh -> average pool), global average pool,
// linear head. Probe layers are the post-pool stage outputs.
struct ReferenceModel {
    ModelConfig cfg;
    std::string model_id;
    std::vector<std::vector<double>> conv_w;  // per stage, [co][3][3][3][ci]
    std::vector<std::vector<double>> conv_b;  // per stage, [co]
    std::vector<double> head_w;               // [n_classes][c_last]
    std::vector<double> head_b;               // [n_classes]

    int n_stages() const { return static_cast<int>(cfg.channels.size()); }
    int n_classes() const { return static_cast<int>(cfg.class_names.size()); }

    std::vector<std::string> probe_layers() const;
    // Throws "unknown probe layer" for names outside probe_layers().
    int layer_index(const std::string& name) const;

    // Post-pool output shape of a stage: {T', H', W', C}.
    std::vector<int64_t> stage_out_shape(int stage) const;
    // Input shape of a stage ({T,H,W,3} for stage 0).
    std::vector<int64_t> stage_in_shape(int stage) const;

    int class_index(const std::string& name_or_index) const;

    // FNV-1a over the float32 serialization of all weights; part of cache keys.
    uint64_t weight_hash() const;
};

ReferenceModel build_reference_model(uint64_t seed, ModelConfig cfg = {});

struct LabeledClip {
    VideoClip clip;
    int label = 0;
};

std::vector<double> forward_logits(const ReferenceModel& model, const VideoClip& clip);
std::vector<std::vector<double>> forward_logits_batch(const ReferenceModel& model,
                                                      const std::vector<VideoClip>& clips);

std::map<std::string, DTensor> capture_activations(const ReferenceModel& model,
                                                   const VideoClip& clip,
                                                   const std::vector<std::string>& layers);

DTensor gradient_wrt_activation(const ReferenceModel& model, const VideoClip& clip,
                                const std::string& layer, int class_index);

std::vector<double> forward_from_activation(const ReferenceModel& model, const std::string& layer,
                                            const DTensor& activation);

struct TrainReport {
    double test_accuracy = 0.0;
    double final_train_loss = 0.0;
    int epochs = 0;
};

// SGD with momentum on softmax cross-entropy. Deterministic given seed.
// Throws if the loss goes non-finite.
TrainReport train_reference_model(ReferenceModel& model, const std::vector<LabeledClip>& train,
                                  const std::vector<LabeledClip>& test, int epochs, double lr,
                                  uint64_t seed);

double evaluate_accuracy(const ReferenceModel& model, const std::vector<LabeledClip>& clips);

int predict_class(const ReferenceModel& model, const VideoClip& clip);

// Weights as a float32 tensor container plus a JSON architecture sidecar.
void save_model(const std::string& dir, const ReferenceModel& model);
ReferenceModel load_model(const std::string& dir);

}  // namespace vtcav
