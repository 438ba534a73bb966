// Times the conv/pool kernels with and without OpenMP to confirm the parallel
// path is worth keeping and matches the serial one bit for bit.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "vtcav/kernels.hpp"

using namespace vtcav::kernels;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
    fn();  // warm up
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    std::printf("openmp compiled in: %s\n", openmp_enabled() ? "yes" : "no");

    const ConvDims d{8, 32, 32, 8, 16};
    const size_t n_in = static_cast<size_t>(d.t) * d.h * d.w * d.cin;
    const size_t n_out = static_cast<size_t>(d.t) * d.h * d.w * d.cout;

    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> in(n_in), weights(static_cast<size_t>(d.cout) * 27 * d.cin),
        bias(d.cout), out_s(n_out), out_p(n_out);
    for (auto& v : in) v = u(rng);
    for (auto& v : weights) v = u(rng);
    for (auto& v : bias) v = u(rng);

    const double t_fs = time_ms(3, [&] { conv3d_forward(in.data(), weights.data(), bias.data(),
                                                        out_s.data(), d, false); });
    const double t_fp = time_ms(3, [&] { conv3d_forward(in.data(), weights.data(), bias.data(),
                                                        out_p.data(), d, true); });
    bool ok = out_s == out_p;
    std::printf("conv3d forward          : serial %8.2f ms  parallel %8.2f ms  speedup %.2fx  %s\n",
                t_fs, t_fp, t_fs / t_fp, ok ? "bit-identical" : "MISMATCH");

    std::vector<double> gin_s(n_in), gin_p(n_in);
    const double t_bs = time_ms(3, [&] { conv3d_backward_data(out_s.data(), weights.data(),
                                                              gin_s.data(), d, false); });
    const double t_bp = time_ms(3, [&] { conv3d_backward_data(out_s.data(), weights.data(),
                                                              gin_p.data(), d, true); });
    ok = ok && gin_s == gin_p;
    std::printf("conv3d backward-data    : serial %8.2f ms  parallel %8.2f ms  speedup %.2fx  %s\n",
                t_bs, t_bp, t_bs / t_bp, gin_s == gin_p ? "bit-identical" : "MISMATCH");

    std::vector<double> gw_s(weights.size()), gw_p(weights.size()), gb_s(d.cout), gb_p(d.cout);
    const double t_ws = time_ms(3, [&] { conv3d_backward_weights(in.data(), out_s.data(),
                                                                 gw_s.data(), gb_s.data(), d,
                                                                 false); });
    const double t_wp = time_ms(3, [&] { conv3d_backward_weights(in.data(), out_s.data(),
                                                                 gw_p.data(), gb_p.data(), d,
                                                                 true); });
    ok = ok && gw_s == gw_p && gb_s == gb_p;
    std::printf("conv3d backward-weights : serial %8.2f ms  parallel %8.2f ms  speedup %.2fx  %s\n",
                t_ws, t_wp, t_ws / t_wp,
                gw_s == gw_p && gb_s == gb_p ? "bit-identical" : "MISMATCH");

    std::vector<double> pool_s(n_out / 4), pool_p(n_out / 4);
    const double t_ps = time_ms(10, [&] { avgpool3d_forward(out_s.data(), pool_s.data(), d.t, d.h,
                                                            d.w, d.cout, 1, 2, 2, false); });
    const double t_pp = time_ms(10, [&] { avgpool3d_forward(out_s.data(), pool_p.data(), d.t, d.h,
                                                            d.w, d.cout, 1, 2, 2, true); });
    ok = ok && pool_s == pool_p;
    std::printf("avgpool3d 1x2x2         : serial %8.2f ms  parallel %8.2f ms  speedup %.2fx  %s\n",
                t_ps, t_pp, t_ps / t_pp, pool_s == pool_p ? "bit-identical" : "MISMATCH");

    return ok ? 0 : 1;
}
