#pragma once

#include <string>

#include "vtcav/clip.hpp"
#include "vtcav/model.hpp"
#include "vtcav/tensor.hpp"

namespace vtcav {

enum class UpsampleMode { trilinear, nearest };

struct HeatmapVolume {
    Tensor values;     // T' x H' x W', rectified and max-normalized
    Tensor upsampled;  // T x H x W, aligned to the input clip
    std::string layer;
    int class_index = 0;
};

// Channel weights are the gradient averaged over the full spatiotemporal grid;
// the weighted activation sum is rectified and normalized by its max
// (identically-zero volumes stay zero), then upsampled to input resolution.
HeatmapVolume compute_gradcam(const ReferenceModel& model, const VideoClip& clip,
                              const std::string& layer, int class_index,
                              UpsampleMode mode = UpsampleMode::trilinear);

// Variant over precomputed raw activation/gradient tensors (shape T'xH'xW'xC).
HeatmapVolume gradcam_from_tensors(const DTensor& activation, const DTensor& gradient,
                                   const std::string& layer, int class_index, int out_t, int out_h,
                                   int out_w, UpsampleMode mode);

VideoClip overlay_heatmap(const VideoClip& clip, const HeatmapVolume& volume, float alpha);

// Fraction of total upsampled heatmap mass inside the per-frame boxes dilated
// by `dilation` pixels on every side.
double heatmap_mass_in_tube(const HeatmapVolume& volume, const std::vector<Box>& boxes,
                            int dilation);

}  // namespace vtcav
