#include "vtcav/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "vtcav/container.hpp"
#include "vtcav/kernels.hpp"

namespace vtcav {

namespace {

int64_t numel(const std::vector<int64_t>& s) { return Tensor::numel_of(s); }

struct StageDims {
    int t, h, w;       // conv extent (== stage input extent)
    int cin, cout;
    int pt, py, px;
    int ot, oh, ow;    // post-pool extent
};

StageDims stage_dims(const ReferenceModel& m, int s) {
    auto in = m.stage_in_shape(s);
    StageDims d;
    d.t = static_cast<int>(in[0]);
    d.h = static_cast<int>(in[1]);
    d.w = static_cast<int>(in[2]);
    d.cin = static_cast<int>(in[3]);
    d.cout = m.cfg.channels[s];
    d.pt = m.cfg.pools[s][0];
    d.py = m.cfg.pools[s][1];
    d.px = m.cfg.pools[s][2];
    d.ot = d.t / d.pt;
    d.oh = d.h / d.py;
    d.ow = d.w / d.px;
    return d;
}

struct ForwardTrace {
    std::vector<std::vector<double>> activated;  // per stage, post-tanh, conv extent
    std::vector<std::vector<double>> pooled;     // per stage, post-pool
    std::vector<double> gap;
    std::vector<double> logits;
};

void run_stage(const ReferenceModel& m, int s, const double* in, std::vector<double>& activated,
               std::vector<double>& pooled) {
    StageDims d = stage_dims(m, s);
    const int64_t conv_n = static_cast<int64_t>(d.t) * d.h * d.w * d.cout;
    std::vector<double> z(conv_n);
    kernels::ConvDims cd{d.t, d.h, d.w, d.cin, d.cout};
    kernels::conv3d_forward(in, m.conv_w[s].data(), m.conv_b[s].data(), z.data(), cd, true);
    activated.resize(conv_n);
    kernels::tanh_forward(z.data(), activated.data(), conv_n, true);
    pooled.resize(static_cast<int64_t>(d.ot) * d.oh * d.ow * d.cout);
    kernels::avgpool3d_forward(activated.data(), pooled.data(), d.t, d.h, d.w, d.cout, d.pt, d.py,
                               d.px, true);
}

void head_forward(const ReferenceModel& m, const std::vector<double>& last_pooled,
                  std::vector<double>& gap, std::vector<double>& logits) {
    const int c = m.cfg.channels.back();
    const int64_t n_pos = static_cast<int64_t>(last_pooled.size()) / c;
    gap.assign(c, 0.0);
    for (int64_t p = 0; p < n_pos; ++p)
        for (int ch = 0; ch < c; ++ch) gap[ch] += last_pooled[p * c + ch];
    for (int ch = 0; ch < c; ++ch) gap[ch] /= static_cast<double>(n_pos);
    logits.assign(m.n_classes(), 0.0);
    for (int k = 0; k < m.n_classes(); ++k) {
        double acc = m.head_b[k];
        for (int ch = 0; ch < c; ++ch) acc += m.head_w[k * c + ch] * gap[ch];
        logits[k] = acc;
    }
}

// Runs stages [from_stage, n) starting from `in` (the input of from_stage).
ForwardTrace forward_from(const ReferenceModel& m, int from_stage, const std::vector<double>& in) {
    ForwardTrace tr;
    tr.activated.resize(m.n_stages());
    tr.pooled.resize(m.n_stages());
    const std::vector<double>* cur = &in;
    for (int s = from_stage; s < m.n_stages(); ++s) {
        run_stage(m, s, cur->data(), tr.activated[s], tr.pooled[s]);
        cur = &tr.pooled[s];
    }
    head_forward(m, *cur, tr.gap, tr.logits);
    return tr;
}

std::vector<double> clip_to_buffer(const ReferenceModel& m, const VideoClip& clip) {
    if (clip.T() != m.cfg.T || clip.H() != m.cfg.H || clip.W() != m.cfg.W || clip.C() != 3)
        throw std::invalid_argument("clip shape " + shape_str(clip.frames.shape) +
                                    " does not match model input " +
                                    shape_str({m.cfg.T, m.cfg.H, m.cfg.W, 3}));
    return std::vector<double>(clip.frames.data.begin(), clip.frames.data.end());
}

// Backprop a gradient at the last stage's pooled output down to stage
// `to_stage`'s pooled output. `grad` enters as d/d pooled[last].
std::vector<double> backprop_pooled(const ReferenceModel& m, const ForwardTrace& tr,
                                    std::vector<double> grad, int to_stage) {
    for (int s = m.n_stages() - 1; s > to_stage; --s) {
        StageDims d = stage_dims(m, s);
        const int64_t conv_n = static_cast<int64_t>(d.t) * d.h * d.w * d.cout;
        std::vector<double> ga(conv_n);
        kernels::avgpool3d_backward(grad.data(), ga.data(), d.t, d.h, d.w, d.cout, d.pt, d.py,
                                    d.px, true);
        std::vector<double> gz(conv_n);
        kernels::tanh_backward(ga.data(), tr.activated[s].data(), gz.data(), conv_n, true);
        std::vector<double> gin(static_cast<int64_t>(d.t) * d.h * d.w * d.cin);
        kernels::ConvDims cd{d.t, d.h, d.w, d.cin, d.cout};
        kernels::conv3d_backward_data(gz.data(), m.conv_w[s].data(), gin.data(), cd, true);
        grad = std::move(gin);
    }
    return grad;
}

std::vector<double> head_backward_to_pooled(const ReferenceModel& m,
                                            const std::vector<double>& dlogits) {
    const int c = m.cfg.channels.back();
    auto out_shape = m.stage_out_shape(m.n_stages() - 1);
    const int64_t n_pos = numel(out_shape) / c;
    std::vector<double> dgap(c, 0.0);
    for (int k = 0; k < m.n_classes(); ++k)
        for (int ch = 0; ch < c; ++ch) dgap[ch] += dlogits[k] * m.head_w[k * c + ch];
    std::vector<double> dpool(n_pos * c);
    for (int64_t p = 0; p < n_pos; ++p)
        for (int ch = 0; ch < c; ++ch) dpool[p * c + ch] = dgap[ch] / static_cast<double>(n_pos);
    return dpool;
}

struct ParamGrads {
    std::vector<std::vector<double>> conv_w, conv_b;
    std::vector<double> head_w, head_b;

    explicit ParamGrads(const ReferenceModel& m) {
        conv_w.resize(m.n_stages());
        conv_b.resize(m.n_stages());
        for (int s = 0; s < m.n_stages(); ++s) {
            conv_w[s].assign(m.conv_w[s].size(), 0.0);
            conv_b[s].assign(m.conv_b[s].size(), 0.0);
        }
        head_w.assign(m.head_w.size(), 0.0);
        head_b.assign(m.head_b.size(), 0.0);
    }

    void accumulate(const ParamGrads& o) {
        for (size_t s = 0; s < conv_w.size(); ++s) {
            for (size_t i = 0; i < conv_w[s].size(); ++i) conv_w[s][i] += o.conv_w[s][i];
            for (size_t i = 0; i < conv_b[s].size(); ++i) conv_b[s][i] += o.conv_b[s][i];
        }
        for (size_t i = 0; i < head_w.size(); ++i) head_w[i] += o.head_w[i];
        for (size_t i = 0; i < head_b.size(); ++i) head_b[i] += o.head_b[i];
    }

    void scale(double f) {
        for (auto& v : conv_w)
            for (double& x : v) x *= f;
        for (auto& v : conv_b)
            for (double& x : v) x *= f;
        for (double& x : head_w) x *= f;
        for (double& x : head_b) x *= f;
    }
};

// Cross-entropy loss and full parameter gradient for one clip.
double backward_clip(const ReferenceModel& m, const std::vector<double>& input, int label,
                     ParamGrads& grads) {
    ForwardTrace tr = forward_from(m, 0, input);

    // softmax CE
    double mx = *std::max_element(tr.logits.begin(), tr.logits.end());
    double z = 0.0;
    for (double l : tr.logits) z += std::exp(l - mx);
    double loss = -(tr.logits[label] - mx - std::log(z));

    std::vector<double> dlogits(m.n_classes());
    for (int k = 0; k < m.n_classes(); ++k)
        dlogits[k] = std::exp(tr.logits[k] - mx) / z - (k == label ? 1.0 : 0.0);

    const int c = m.cfg.channels.back();
    for (int k = 0; k < m.n_classes(); ++k) {
        grads.head_b[k] += dlogits[k];
        for (int ch = 0; ch < c; ++ch) grads.head_w[k * c + ch] += dlogits[k] * tr.gap[ch];
    }

    std::vector<double> grad = head_backward_to_pooled(m, dlogits);
    for (int s = m.n_stages() - 1; s >= 0; --s) {
        StageDims d = stage_dims(m, s);
        const int64_t conv_n = static_cast<int64_t>(d.t) * d.h * d.w * d.cout;
        std::vector<double> ga(conv_n);
        kernels::avgpool3d_backward(grad.data(), ga.data(), d.t, d.h, d.w, d.cout, d.pt, d.py,
                                    d.px, true);
        std::vector<double> gz(conv_n);
        kernels::tanh_backward(ga.data(), tr.activated[s].data(), gz.data(), conv_n, true);

        const double* stage_in = s == 0 ? input.data() : tr.pooled[s - 1].data();
        kernels::ConvDims cd{d.t, d.h, d.w, d.cin, d.cout};
        std::vector<double> gw(m.conv_w[s].size()), gb(m.conv_b[s].size());
        kernels::conv3d_backward_weights(stage_in, gz.data(), gw.data(), gb.data(), cd, true);
        for (size_t i = 0; i < gw.size(); ++i) grads.conv_w[s][i] += gw[i];
        for (size_t i = 0; i < gb.size(); ++i) grads.conv_b[s][i] += gb[i];

        if (s > 0) {
            std::vector<double> gin(static_cast<int64_t>(d.t) * d.h * d.w * d.cin);
            kernels::conv3d_backward_data(gz.data(), m.conv_w[s].data(), gin.data(), cd, true);
            grad = std::move(gin);
        }
    }
    return loss;
}

}  // namespace

std::vector<std::string> ReferenceModel::probe_layers() const {
    std::vector<std::string> out;
    for (int s = 0; s < n_stages(); ++s) out.push_back("stage" + std::to_string(s + 1));
    return out;
}

int ReferenceModel::layer_index(const std::string& name) const {
    auto layers = probe_layers();
    for (int i = 0; i < static_cast<int>(layers.size()); ++i)
        if (layers[i] == name) return i;
    throw std::invalid_argument("unknown probe layer: " + name);
}

std::vector<int64_t> ReferenceModel::stage_in_shape(int stage) const {
    int t = cfg.T, h = cfg.H, w = cfg.W, c = 3;
    for (int s = 0; s < stage; ++s) {
        t /= cfg.pools[s][0];
        h /= cfg.pools[s][1];
        w /= cfg.pools[s][2];
        c = cfg.channels[s];
    }
    return {t, h, w, c};
}

std::vector<int64_t> ReferenceModel::stage_out_shape(int stage) const {
    auto in = stage_in_shape(stage);
    return {in[0] / cfg.pools[stage][0], in[1] / cfg.pools[stage][1], in[2] / cfg.pools[stage][2],
            cfg.channels[stage]};
}

int ReferenceModel::class_index(const std::string& name_or_index) const {
    for (int k = 0; k < n_classes(); ++k)
        if (cfg.class_names[k] == name_or_index) return k;
    try {
        size_t pos = 0;
        int k = std::stoi(name_or_index, &pos);
        if (pos == name_or_index.size() && k >= 0 && k < n_classes()) return k;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("unknown class: " + name_or_index);
}

uint64_t ReferenceModel::weight_hash() const {
    uint64_t h = 1469598103934665603ull;
    auto feed = [&h](const std::vector<double>& v) {
        for (double d : v) {
            float f = static_cast<float>(d);
            unsigned char bytes[4];
            std::memcpy(bytes, &f, 4);
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 1099511628211ull;
            }
        }
    };
    for (const auto& v : conv_w) feed(v);
    for (const auto& v : conv_b) feed(v);
    feed(head_w);
    feed(head_b);
    return h;
}

ReferenceModel build_reference_model(uint64_t seed, ModelConfig cfg) {
    if (cfg.channels.size() != cfg.pools.size() || cfg.channels.empty())
        throw std::invalid_argument("model config: channels/pools mismatch");
    ReferenceModel m;
    m.cfg = std::move(cfg);
    m.model_id = "ref-" + std::to_string(seed);

    // pool divisibility
    {
        int t = m.cfg.T, h = m.cfg.H, w = m.cfg.W;
        for (int s = 0; s < m.n_stages(); ++s) {
            if (t % m.cfg.pools[s][0] || h % m.cfg.pools[s][1] || w % m.cfg.pools[s][2])
                throw std::invalid_argument("model config: input extent not divisible by pools");
            t /= m.cfg.pools[s][0];
            h /= m.cfg.pools[s][1];
            w /= m.cfg.pools[s][2];
        }
    }

    std::mt19937_64 rng(seed);
    int cin = 3;
    for (int s = 0; s < m.n_stages(); ++s) {
        const int cout = m.cfg.channels[s];
        // 3x the Xavier range: with plain Xavier the tanh units stay in their
        // linear regime, and a linear net behind global pooling cannot tell
        // motion direction apart, so training plateaus at chance.
        const double scale = 3.0 * std::sqrt(6.0 / (27.0 * cin + 27.0 * cout));
        std::uniform_real_distribution<double> dist(-scale, scale);
        std::vector<double> w(static_cast<size_t>(cout) * 27 * cin);
        for (double& x : w) x = dist(rng);
        m.conv_w.push_back(std::move(w));
        m.conv_b.push_back(std::vector<double>(cout, 0.0));
        cin = cout;
    }
    // zero-initialized head: untrained model emits all-zero logits
    m.head_w.assign(static_cast<size_t>(m.n_classes()) * m.cfg.channels.back(), 0.0);
    m.head_b.assign(m.n_classes(), 0.0);
    return m;
}

std::vector<double> forward_logits(const ReferenceModel& model, const VideoClip& clip) {
    auto buf = clip_to_buffer(model, clip);
    ForwardTrace tr = forward_from(model, 0, buf);
    for (double l : tr.logits)
        if (!std::isfinite(l)) throw std::runtime_error("non-finite logits for clip " + clip.clip_id);
    return tr.logits;
}

std::vector<std::vector<double>> forward_logits_batch(const ReferenceModel& model,
                                                      const std::vector<VideoClip>& clips) {
    std::vector<std::vector<double>> out;
    out.reserve(clips.size());
    for (const auto& c : clips) out.push_back(forward_logits(model, c));
    return out;
}

std::map<std::string, DTensor> capture_activations(const ReferenceModel& model,
                                                   const VideoClip& clip,
                                                   const std::vector<std::string>& layers) {
    std::map<std::string, DTensor> out;
    if (layers.empty()) return out;
    for (const auto& l : layers) model.layer_index(l);  // reject unknown layers up front
    auto buf = clip_to_buffer(model, clip);
    ForwardTrace tr = forward_from(model, 0, buf);
    for (const auto& l : layers) {
        int s = model.layer_index(l);
        DTensor t;
        t.shape = model.stage_out_shape(s);
        t.data = tr.pooled[s];
        out.emplace(l, std::move(t));
    }
    return out;
}

DTensor gradient_wrt_activation(const ReferenceModel& model, const VideoClip& clip,
                                const std::string& layer, int class_index) {
    const int s = model.layer_index(layer);
    if (class_index < 0 || class_index >= model.n_classes())
        throw std::invalid_argument("class index out of range: " + std::to_string(class_index));
    auto buf = clip_to_buffer(model, clip);
    ForwardTrace tr = forward_from(model, 0, buf);

    std::vector<double> dlogits(model.n_classes(), 0.0);
    dlogits[class_index] = 1.0;  // gradient of the pre-softmax logit
    std::vector<double> grad = head_backward_to_pooled(model, dlogits);
    grad = backprop_pooled(model, tr, std::move(grad), s);

    DTensor out;
    out.shape = model.stage_out_shape(s);
    out.data = std::move(grad);
    for (double v : out.data)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite activation gradient");
    return out;
}

std::vector<double> forward_from_activation(const ReferenceModel& model, const std::string& layer,
                                            const DTensor& activation) {
    const int s = model.layer_index(layer);
    if (activation.shape != model.stage_out_shape(s))
        throw std::invalid_argument("activation shape " + shape_str(activation.shape) +
                                    " does not match layer shape " +
                                    shape_str(model.stage_out_shape(s)));
    ForwardTrace tr = forward_from(model, s + 1, activation.data);
    return tr.logits;
}

double evaluate_accuracy(const ReferenceModel& model, const std::vector<LabeledClip>& clips) {
    if (clips.empty()) throw std::invalid_argument("evaluate_accuracy: empty set");
    int correct = 0;
    for (const auto& lc : clips)
        if (predict_class(model, lc.clip) == lc.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(clips.size());
}

int predict_class(const ReferenceModel& model, const VideoClip& clip) {
    auto logits = forward_logits(model, clip);
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

TrainReport train_reference_model(ReferenceModel& model, const std::vector<LabeledClip>& train,
                                  const std::vector<LabeledClip>& test, int epochs, double lr,
                                  uint64_t seed) {
    for (const auto& lc : train)
        if (lc.label < 0 || lc.label >= model.n_classes())
            throw std::invalid_argument("training label out of class range");

    std::vector<std::vector<double>> inputs;
    inputs.reserve(train.size());
    for (const auto& lc : train) inputs.push_back(clip_to_buffer(model, lc.clip));

    const int batch_size = 16;
    const double momentum = 0.9;
    ParamGrads velocity(model);
    velocity.scale(0.0);

    std::mt19937_64 rng(seed);
    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainReport report;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        // step decay: momentum-SGD at a flat rate oscillates once the loss
        // drops, so halve the rate every 8 epochs
        const double lr_e = lr * std::pow(0.5, epoch / 8);
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += batch_size) {
            const size_t end = std::min(order.size(), start + batch_size);
            ParamGrads grads(model);
            double batch_loss = 0.0;
            for (size_t i = start; i < end; ++i)
                batch_loss += backward_clip(model, inputs[order[i]], train[order[i]].label, grads);
            const double inv = 1.0 / static_cast<double>(end - start);
            batch_loss *= inv;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("training diverged: non-finite loss");
            // tanh keeps features bounded, so a blown-up run shows as a huge
            // (still finite) loss rather than NaN; treat both as divergence
            if (batch_loss > 1e4)
                throw std::runtime_error("training diverged: loss exploded");
            grads.scale(inv);

            auto step = [&](std::vector<double>& w, std::vector<double>& v,
                            const std::vector<double>& g) {
                for (size_t i = 0; i < w.size(); ++i) {
                    v[i] = momentum * v[i] - lr_e * g[i];
                    w[i] += v[i];
                }
            };
            for (int s = 0; s < model.n_stages(); ++s) {
                step(model.conv_w[s], velocity.conv_w[s], grads.conv_w[s]);
                step(model.conv_b[s], velocity.conv_b[s], grads.conv_b[s]);
            }
            step(model.head_w, velocity.head_w, grads.head_w);
            step(model.head_b, velocity.head_b, grads.head_b);
            epoch_loss += batch_loss * static_cast<double>(end - start);
        }
        report.final_train_loss = epoch_loss / static_cast<double>(train.size());
        if (!std::isfinite(report.final_train_loss))
            throw std::runtime_error("training diverged: non-finite loss");
    }
    report.epochs = epochs;
    report.test_accuracy = test.empty() ? 0.0 : evaluate_accuracy(model, test);
    return report;
}

void save_model(const std::string& dir, const ReferenceModel& model) {
    std::filesystem::create_directories(dir);
    std::map<std::string, Tensor> entries;
    for (int s = 0; s < model.n_stages(); ++s) {
        auto in = model.stage_in_shape(s);
        Tensor w({model.cfg.channels[s], 3, 3, 3, in[3]});
        for (size_t i = 0; i < model.conv_w[s].size(); ++i)
            w.data[i] = static_cast<float>(model.conv_w[s][i]);
        entries["stage" + std::to_string(s) + "_w"] = std::move(w);
        Tensor b({model.cfg.channels[s]});
        for (size_t i = 0; i < model.conv_b[s].size(); ++i)
            b.data[i] = static_cast<float>(model.conv_b[s][i]);
        entries["stage" + std::to_string(s) + "_b"] = std::move(b);
    }
    Tensor hw({model.n_classes(), model.cfg.channels.back()});
    for (size_t i = 0; i < model.head_w.size(); ++i) hw.data[i] = static_cast<float>(model.head_w[i]);
    entries["head_w"] = std::move(hw);
    Tensor hb({model.n_classes()});
    for (size_t i = 0; i < model.head_b.size(); ++i) hb.data[i] = static_cast<float>(model.head_b[i]);
    entries["head_b"] = std::move(hb);
    write_tensor_container(dir + "/weights.vtn", entries);

    nlohmann::json arch = {{"model_id", model.model_id},
                           {"input", {model.cfg.T, model.cfg.H, model.cfg.W, 3}},
                           {"channels", model.cfg.channels},
                           {"pools", nlohmann::json::array()},
                           {"class_names", model.cfg.class_names}};
    for (const auto& p : model.cfg.pools) arch["pools"].push_back({p[0], p[1], p[2]});
    std::ofstream os(dir + "/arch.json", std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write model sidecar: " + dir + "/arch.json");
    os << arch.dump(1) << "\n";
}

ReferenceModel load_model(const std::string& dir) {
    std::ifstream is(dir + "/arch.json");
    if (!is) throw std::runtime_error("cannot read model sidecar: " + dir + "/arch.json");
    nlohmann::json arch;
    is >> arch;

    ModelConfig cfg;
    auto input = arch.at("input").get<std::vector<int>>();
    cfg.T = input[0];
    cfg.H = input[1];
    cfg.W = input[2];
    cfg.channels = arch.at("channels").get<std::vector<int>>();
    cfg.pools.clear();
    for (const auto& p : arch.at("pools")) {
        auto v = p.get<std::vector<int>>();
        cfg.pools.push_back({v[0], v[1], v[2]});
    }
    cfg.class_names = arch.at("class_names").get<std::vector<std::string>>();

    ReferenceModel m = build_reference_model(0, cfg);
    m.model_id = arch.at("model_id").get<std::string>();

    auto entries = read_tensor_container(dir + "/weights.vtn");
    auto take = [&entries, &dir](const std::string& name) -> Tensor& {
        auto it = entries.find(name);
        if (it == entries.end())
            throw std::runtime_error("model weights missing entry '" + name + "' in " + dir);
        return it->second;
    };
    for (int s = 0; s < m.n_stages(); ++s) {
        Tensor& w = take("stage" + std::to_string(s) + "_w");
        if (w.data.size() != m.conv_w[s].size())
            throw std::runtime_error("model weights shape mismatch for stage " + std::to_string(s));
        m.conv_w[s].assign(w.data.begin(), w.data.end());
        Tensor& b = take("stage" + std::to_string(s) + "_b");
        m.conv_b[s].assign(b.data.begin(), b.data.end());
    }
    Tensor& hw = take("head_w");
    if (hw.data.size() != m.head_w.size()) throw std::runtime_error("model head shape mismatch");
    m.head_w.assign(hw.data.begin(), hw.data.end());
    Tensor& hb = take("head_b");
    m.head_b.assign(hb.data.begin(), hb.data.end());
    return m;
}

}  // namespace vtcav
