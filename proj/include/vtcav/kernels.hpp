#pragma once

#include <cstdint>

namespace vtcav::kernels {

// All kernels use channels-last layout [t][y][x][c] and double precision.
// Conv weights are [co][kt][ky][kx][ci], kernel 3x3x3, stride 1, pad 1.
//
// Each kernel has a serial reference path and an OpenMP path; both produce
// bit-identical output (the inner accumulation order is the same, parallelism
// is only over independent output elements).

struct ConvDims {
    int t, h, w;   // spatial extent (same for input and output)
    int cin, cout;
};

void conv3d_forward(const double* in, const double* weights, const double* bias, double* out,
                    const ConvDims& d, bool parallel);

void conv3d_backward_data(const double* grad_out, const double* weights, double* grad_in,
                          const ConvDims& d, bool parallel);

void conv3d_backward_weights(const double* in, const double* grad_out, double* grad_w,
                             double* grad_b, const ConvDims& d, bool parallel);

// Non-overlapping average pooling; input t*h*w must be divisible by the pool dims.
void avgpool3d_forward(const double* in, double* out, int t, int h, int w, int c,
                       int pt, int py, int px, bool parallel);

void avgpool3d_backward(const double* grad_out, double* grad_in, int t, int h, int w, int c,
                        int pt, int py, int px, bool parallel);

void tanh_forward(const double* in, double* out, int64_t n, bool parallel);

// grad_in = grad_out * (1 - a^2) where a is the tanh output.
void tanh_backward(const double* grad_out, const double* activated, double* grad_in, int64_t n,
                   bool parallel);

// Whether the OpenMP paths are compiled in.
bool openmp_enabled();

}  // namespace vtcav::kernels
