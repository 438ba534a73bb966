#include "vtcav/gradcam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vtcav {

namespace {

// Simple blue->cyan->yellow->red colormap over [0,1].
void colormap(float h, float rgb[3]) {
    h = std::clamp(h, 0.0f, 1.0f);
    if (h < 0.25f) {
        float u = h / 0.25f;
        rgb[0] = 0.0f, rgb[1] = u, rgb[2] = 1.0f;
    } else if (h < 0.5f) {
        float u = (h - 0.25f) / 0.25f;
        rgb[0] = 0.0f, rgb[1] = 1.0f, rgb[2] = 1.0f - u;
    } else if (h < 0.75f) {
        float u = (h - 0.5f) / 0.25f;
        rgb[0] = u, rgb[1] = 1.0f, rgb[2] = 0.0f;
    } else {
        float u = (h - 0.75f) / 0.25f;
        rgb[0] = 1.0f, rgb[1] = 1.0f - u, rgb[2] = 0.0f;
    }
}

Tensor upsample_volume(const Tensor& vol, int out_t, int out_h, int out_w, UpsampleMode mode) {
    const int64_t it = vol.shape[0], ih = vol.shape[1], iw = vol.shape[2];
    Tensor out({out_t, out_h, out_w});
    auto src = [&](int64_t t, int64_t y, int64_t x) {
        return vol.data[(t * ih + y) * iw + x];
    };
    const double st = static_cast<double>(it) / out_t;
    const double sy = static_cast<double>(ih) / out_h;
    const double sx = static_cast<double>(iw) / out_w;
    for (int64_t t = 0; t < out_t; ++t) {
        for (int64_t y = 0; y < out_h; ++y) {
            for (int64_t x = 0; x < out_w; ++x) {
                float v;
                if (mode == UpsampleMode::nearest) {
                    int64_t t0 = std::min<int64_t>(static_cast<int64_t>(t * st), it - 1);
                    int64_t y0 = std::min<int64_t>(static_cast<int64_t>(y * sy), ih - 1);
                    int64_t x0 = std::min<int64_t>(static_cast<int64_t>(x * sx), iw - 1);
                    v = src(t0, y0, x0);
                } else {
                    double ft = std::clamp((t + 0.5) * st - 0.5, 0.0, static_cast<double>(it - 1));
                    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(ih - 1));
                    double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(iw - 1));
                    int64_t t0 = static_cast<int64_t>(ft), y0 = static_cast<int64_t>(fy),
                            x0 = static_cast<int64_t>(fx);
                    int64_t t1 = std::min(t0 + 1, it - 1), y1 = std::min(y0 + 1, ih - 1),
                            x1 = std::min(x0 + 1, iw - 1);
                    double wt = ft - t0, wy = fy - y0, wx = fx - x0;
                    double v00 = (1 - wx) * src(t0, y0, x0) + wx * src(t0, y0, x1);
                    double v01 = (1 - wx) * src(t0, y1, x0) + wx * src(t0, y1, x1);
                    double v10 = (1 - wx) * src(t1, y0, x0) + wx * src(t1, y0, x1);
                    double v11 = (1 - wx) * src(t1, y1, x0) + wx * src(t1, y1, x1);
                    double a = (1 - wy) * v00 + wy * v01;
                    double b = (1 - wy) * v10 + wy * v11;
                    v = static_cast<float>((1 - wt) * a + wt * b);
                }
                out.data[(t * out_h + y) * out_w + x] = v;
            }
        }
    }
    return out;
}

}  // namespace

HeatmapVolume gradcam_from_tensors(const DTensor& activation, const DTensor& gradient,
                                   const std::string& layer, int class_index, int out_t, int out_h,
                                   int out_w, UpsampleMode mode) {
    if (activation.shape != gradient.shape || activation.shape.size() != 4)
        throw std::invalid_argument("gradcam: activation/gradient shape mismatch");
    const int64_t t = activation.shape[0], h = activation.shape[1], w = activation.shape[2],
                  c = activation.shape[3];
    const int64_t n_pos = t * h * w;

    // per-channel weight: gradient averaged over all spatiotemporal positions
    std::vector<double> weights(c, 0.0);
    for (int64_t p = 0; p < n_pos; ++p)
        for (int64_t ch = 0; ch < c; ++ch) weights[ch] += gradient.data[p * c + ch];
    for (int64_t ch = 0; ch < c; ++ch) weights[ch] /= static_cast<double>(n_pos);

    HeatmapVolume vol;
    vol.layer = layer;
    vol.class_index = class_index;
    vol.values = Tensor({t, h, w});
    double mx = 0.0;
    for (int64_t p = 0; p < n_pos; ++p) {
        double acc = 0.0;
        for (int64_t ch = 0; ch < c; ++ch) acc += weights[ch] * activation.data[p * c + ch];
        acc = std::max(acc, 0.0);  // rectification
        vol.values.data[p] = static_cast<float>(acc);
        mx = std::max(mx, acc);
    }
    if (mx > 0.0)
        for (float& v : vol.values.data) v = static_cast<float>(v / mx);

    vol.upsampled = upsample_volume(vol.values, out_t, out_h, out_w, mode);
    return vol;
}

HeatmapVolume compute_gradcam(const ReferenceModel& model, const VideoClip& clip,
                              const std::string& layer, int class_index, UpsampleMode mode) {
    auto acts = capture_activations(model, clip, {layer});
    DTensor grad = gradient_wrt_activation(model, clip, layer, class_index);
    return gradcam_from_tensors(acts.at(layer), grad, layer, class_index,
                                static_cast<int>(clip.T()), static_cast<int>(clip.H()),
                                static_cast<int>(clip.W()), mode);
}

VideoClip overlay_heatmap(const VideoClip& clip, const HeatmapVolume& volume, float alpha) {
    if (alpha < 0.0f || alpha > 1.0f) throw std::invalid_argument("overlay alpha out of [0,1]");
    if (volume.upsampled.shape != std::vector<int64_t>{clip.T(), clip.H(), clip.W()})
        throw std::invalid_argument("overlay: heatmap not aligned with clip");
    VideoClip out = clip;
    out.clip_id = clip.clip_id + "_gradcam";
    const int64_t n = clip.T() * clip.H() * clip.W();
    for (int64_t p = 0; p < n; ++p) {
        float h = volume.upsampled.data[p];
        float rgb[3];
        colormap(h, rgb);
        for (int c = 0; c < 3; ++c) {
            float v = (1.0f - alpha * h) * clip.frames.data[p * 3 + c] + alpha * h * rgb[c];
            out.frames.data[p * 3 + c] = std::clamp(v, 0.0f, 1.0f);
        }
    }
    return out;
}

double heatmap_mass_in_tube(const HeatmapVolume& volume, const std::vector<Box>& boxes,
                            int dilation) {
    const int64_t t = volume.upsampled.shape[0], h = volume.upsampled.shape[1],
                  w = volume.upsampled.shape[2];
    if (static_cast<int64_t>(boxes.size()) != t)
        throw std::invalid_argument("heatmap_mass_in_tube: one box per frame required");
    double total = 0.0, inside = 0.0;
    for (int64_t ft = 0; ft < t; ++ft) {
        const Box& b = boxes[ft];
        const int x1 = b.x1 - dilation, x2 = b.x2 + dilation;
        const int y1 = b.y1 - dilation, y2 = b.y2 + dilation;
        for (int64_t y = 0; y < h; ++y) {
            for (int64_t x = 0; x < w; ++x) {
                double v = volume.upsampled.data[(ft * h + y) * w + x];
                total += v;
                if (x >= x1 && x < x2 && y >= y1 && y < y2) inside += v;
            }
        }
    }
    return total > 0.0 ? inside / total : 0.0;
}

}  // namespace vtcav
