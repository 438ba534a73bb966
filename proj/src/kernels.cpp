#include "vtcav/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef VTCAV_USE_OPENMP
#include <omp.h>
#endif

namespace vtcav::kernels {

bool openmp_enabled() {
#ifdef VTCAV_USE_OPENMP
    return true;
#else
    return false;
#endif
}

namespace {

inline int64_t idx4(int t, int y, int x, int c, int h, int w, int ch) {
    return ((static_cast<int64_t>(t) * h + y) * w + x) * ch + c;
}

}  // namespace

void conv3d_forward(const double* in, const double* weights, const double* bias, double* out,
                    const ConvDims& d, bool parallel) {
    const int64_t n_pos = static_cast<int64_t>(d.t) * d.h * d.w;
#ifdef VTCAV_USE_OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#else
    (void)parallel;
#endif
    for (int64_t pos = 0; pos < n_pos; ++pos) {
        const int t = static_cast<int>(pos / (d.h * d.w));
        const int y = static_cast<int>((pos / d.w) % d.h);
        const int x = static_cast<int>(pos % d.w);
        for (int co = 0; co < d.cout; ++co) {
            double acc = bias[co];
            const double* wco = weights + static_cast<int64_t>(co) * 27 * d.cin;
            for (int kt = 0; kt < 3; ++kt) {
                const int it = t + kt - 1;
                if (it < 0 || it >= d.t) continue;
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = y + ky - 1;
                    if (iy < 0 || iy >= d.h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = x + kx - 1;
                        if (ix < 0 || ix >= d.w) continue;
                        const double* ip = in + idx4(it, iy, ix, 0, d.h, d.w, d.cin);
                        const double* wp = wco + ((kt * 3 + ky) * 3 + kx) * d.cin;
                        for (int ci = 0; ci < d.cin; ++ci) acc += wp[ci] * ip[ci];
                    }
                }
            }
            out[pos * d.cout + co] = acc;
        }
    }
}

void conv3d_backward_data(const double* grad_out, const double* weights, double* grad_in,
                          const ConvDims& d, bool parallel) {
    const int64_t n_pos = static_cast<int64_t>(d.t) * d.h * d.w;
    // grad_in[it,iy,ix,ci] = sum over output positions that read it; flipping the
    // kernel turns this into a gather, so each input element is written once.
#ifdef VTCAV_USE_OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#else
    (void)parallel;
#endif
    for (int64_t pos = 0; pos < n_pos; ++pos) {
        const int it = static_cast<int>(pos / (d.h * d.w));
        const int iy = static_cast<int>((pos / d.w) % d.h);
        const int ix = static_cast<int>(pos % d.w);
        for (int ci = 0; ci < d.cin; ++ci) {
            double acc = 0.0;
            for (int kt = 0; kt < 3; ++kt) {
                const int ot = it - (kt - 1);
                if (ot < 0 || ot >= d.t) continue;
                for (int ky = 0; ky < 3; ++ky) {
                    const int oy = iy - (ky - 1);
                    if (oy < 0 || oy >= d.h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ox = ix - (kx - 1);
                        if (ox < 0 || ox >= d.w) continue;
                        const double* gp = grad_out + idx4(ot, oy, ox, 0, d.h, d.w, d.cout);
                        for (int co = 0; co < d.cout; ++co) {
                            const double wv =
                                weights[(static_cast<int64_t>(co) * 27 + (kt * 3 + ky) * 3 + kx) *
                                            d.cin +
                                        ci];
                            acc += gp[co] * wv;
                        }
                    }
                }
            }
            grad_in[pos * d.cin + ci] = acc;
        }
    }
}

void conv3d_backward_weights(const double* in, const double* grad_out, double* grad_w,
                             double* grad_b, const ConvDims& d, bool parallel) {
    std::memset(grad_w, 0, sizeof(double) * static_cast<size_t>(d.cout) * 27 * d.cin);
    std::memset(grad_b, 0, sizeof(double) * static_cast<size_t>(d.cout));
#ifdef VTCAV_USE_OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#else
    (void)parallel;
#endif
    for (int co = 0; co < d.cout; ++co) {
        double* gw = grad_w + static_cast<int64_t>(co) * 27 * d.cin;
        double gb = 0.0;
        for (int t = 0; t < d.t; ++t) {
            for (int y = 0; y < d.h; ++y) {
                for (int x = 0; x < d.w; ++x) {
                    const double g = grad_out[idx4(t, y, x, co, d.h, d.w, d.cout)];
                    gb += g;
                    for (int kt = 0; kt < 3; ++kt) {
                        const int it = t + kt - 1;
                        if (it < 0 || it >= d.t) continue;
                        for (int ky = 0; ky < 3; ++ky) {
                            const int iy = y + ky - 1;
                            if (iy < 0 || iy >= d.h) continue;
                            for (int kx = 0; kx < 3; ++kx) {
                                const int ix = x + kx - 1;
                                if (ix < 0 || ix >= d.w) continue;
                                const double* ip = in + idx4(it, iy, ix, 0, d.h, d.w, d.cin);
                                double* wp = gw + ((kt * 3 + ky) * 3 + kx) * d.cin;
                                for (int ci = 0; ci < d.cin; ++ci) wp[ci] += g * ip[ci];
                            }
                        }
                    }
                }
            }
        }
        grad_b[co] = gb;
    }
}

void avgpool3d_forward(const double* in, double* out, int t, int h, int w, int c, int pt, int py,
                       int px, bool parallel) {
    const int ot = t / pt, oh = h / py, ow = w / px;
    const double inv = 1.0 / (pt * py * px);
    const int64_t n_pos = static_cast<int64_t>(ot) * oh * ow;
#ifdef VTCAV_USE_OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#else
    (void)parallel;
#endif
    for (int64_t pos = 0; pos < n_pos; ++pos) {
        const int zt = static_cast<int>(pos / (oh * ow));
        const int zy = static_cast<int>((pos / ow) % oh);
        const int zx = static_cast<int>(pos % ow);
        for (int ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (int dt = 0; dt < pt; ++dt)
                for (int dy = 0; dy < py; ++dy)
                    for (int dx = 0; dx < px; ++dx)
                        acc += in[idx4(zt * pt + dt, zy * py + dy, zx * px + dx, ch, h, w, c)];
            out[pos * c + ch] = acc * inv;
        }
    }
}

void avgpool3d_backward(const double* grad_out, double* grad_in, int t, int h, int w, int c,
                        int pt, int py, int px, bool parallel) {
    const int ot = t / pt, oh = h / py, ow = w / px;
    const double inv = 1.0 / (pt * py * px);
    const int64_t n_pos = static_cast<int64_t>(ot) * oh * ow;
#ifdef VTCAV_USE_OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#else
    (void)parallel;
#endif
    for (int64_t pos = 0; pos < n_pos; ++pos) {
        const int zt = static_cast<int>(pos / (oh * ow));
        const int zy = static_cast<int>((pos / ow) % oh);
        const int zx = static_cast<int>(pos % ow);
        for (int ch = 0; ch < c; ++ch) {
            const double g = grad_out[pos * c + ch] * inv;
            for (int dt = 0; dt < pt; ++dt)
                for (int dy = 0; dy < py; ++dy)
                    for (int dx = 0; dx < px; ++dx)
                        grad_in[idx4(zt * pt + dt, zy * py + dy, zx * px + dx, ch, h, w, c)] = g;
        }
    }
}

void tanh_forward(const double* in, double* out, int64_t n, bool parallel) {
#ifdef VTCAV_USE_OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#else
    (void)parallel;
#endif
    for (int64_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
}

void tanh_backward(const double* grad_out, const double* activated, double* grad_in, int64_t n,
                   bool parallel) {
#ifdef VTCAV_USE_OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#else
    (void)parallel;
#endif
    for (int64_t i = 0; i < n; ++i) grad_in[i] = grad_out[i] * (1.0 - activated[i] * activated[i]);
}

}  // namespace vtcav::kernels
