// Timing comparison of the OpenMP kernels against the serial reference
// implementation, with a max-|difference| column as a cross-check. Run the
// binary with no arguments; one optional argument repeats each measurement
// that many times (default 3, best-of).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "naima/kernels.hpp"
#include "naima/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
  naima::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

double max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - b[i]));
  return m;
}

void report(const char* name, const char* dims, double ref_ms, double omp_ms,
            double diff) {
  std::printf("%-22s %-20s %10.3f %10.3f %8.2fx   %.3e\n", name, dims, ref_ms,
              omp_ms, ref_ms / omp_ms, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#endif
  std::printf("%-22s %-20s %10s %10s %9s   %s\n", "kernel", "size", "ref ms",
              "omp ms", "speedup", "max|diff|");

  namespace K = naima::kernels;

  {  // conv2d forward, the model's dominant op
    const int c = 64, h = 112, w = 112, k = 3;
    const auto in = random_vec(static_cast<std::size_t>(c) * h * w, 1);
    const auto wts = random_vec(static_cast<std::size_t>(c) * c * k * k, 2);
    const auto bias = random_vec(c, 3);
    std::vector<float> y_ref(in.size()), y_omp(in.size());
    const double t_ref = best_of(reps, [&] {
      K::ref::conv2d_forward(in.data(), c, h, w, wts.data(), bias.data(), c, k,
                             y_ref.data());
    });
    const double t_omp = best_of(reps, [&] {
      K::conv2d_forward(in.data(), c, h, w, wts.data(), bias.data(), c, k,
                        y_omp.data());
    });
    report("conv2d_forward", "64x112x112 k3", t_ref, t_omp,
           max_abs_diff(y_ref, y_omp));
  }

  {  // conv2d backward (params + input)
    const int c = 64, h = 56, w = 56, k = 3;
    const std::size_t n = static_cast<std::size_t>(c) * h * w;
    const auto in = random_vec(n, 4);
    const auto wts = random_vec(static_cast<std::size_t>(c) * c * k * k, 5);
    const auto dy = random_vec(n, 6);
    std::vector<float> dw_ref(wts.size()), db_ref(c), dx_ref(n);
    std::vector<float> dw_omp(wts.size()), db_omp(c), dx_omp(n);
    const double t_ref = best_of(reps, [&] {
      std::fill(dx_ref.begin(), dx_ref.end(), 0.f);
      std::fill(dw_ref.begin(), dw_ref.end(), 0.f);
      std::fill(db_ref.begin(), db_ref.end(), 0.f);
      K::ref::conv2d_backward_input(wts.data(), dy.data(), c, h, w, c, k, dx_ref.data());
      K::ref::conv2d_backward_params(in.data(), dy.data(), c, h, w, c, k,
                                     dw_ref.data(), db_ref.data());
    });
    const double t_omp = best_of(reps, [&] {
      std::fill(dx_omp.begin(), dx_omp.end(), 0.f);
      std::fill(dw_omp.begin(), dw_omp.end(), 0.f);
      std::fill(db_omp.begin(), db_omp.end(), 0.f);
      K::conv2d_backward_input(wts.data(), dy.data(), c, h, w, c, k, dx_omp.data());
      K::conv2d_backward_params(in.data(), dy.data(), c, h, w, c, k,
                                dw_omp.data(), db_omp.data());
    });
    report("conv2d_backward", "64x56x56 k3", t_ref, t_omp,
           max_abs_diff(dx_ref, dx_omp));
  }

  {  // attention forward at the overfit-test size
    const int n = 56 * 56, dk = 64, cv = 64;
    const auto q = random_vec(static_cast<std::size_t>(n) * dk, 7);
    const auto kt = random_vec(static_cast<std::size_t>(dk) * n, 8);
    const auto vt = random_vec(static_cast<std::size_t>(cv) * n, 9);
    std::vector<float> y_ref(static_cast<std::size_t>(n) * cv),
        y_omp(y_ref.size());
    float* no_attn = nullptr;
    const double t_ref = best_of(reps, [&] {
      K::ref::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv,
                                no_attn, y_ref.data());
    });
    const double t_omp = best_of(reps, [&] {
      K::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv, no_attn,
                           y_omp.data());
    });
    report("attention_forward", "N=3136 dk=64", t_ref, t_omp,
           max_abs_diff(y_ref, y_omp));
  }

  {  // attention backward
    const int n = 1024, dk = 32, cv = 32;
    const auto q = random_vec(static_cast<std::size_t>(n) * dk, 10);
    const auto kt = random_vec(static_cast<std::size_t>(dk) * n, 11);
    const auto vt = random_vec(static_cast<std::size_t>(cv) * n, 12);
    const auto dy = random_vec(static_cast<std::size_t>(n) * cv, 13);
    std::vector<float> attn(static_cast<std::size_t>(n) * n),
        y(static_cast<std::size_t>(n) * cv);
    K::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv, attn.data(),
                         y.data());
    std::vector<float> dq_ref(q.size()), dkt_ref(kt.size()), dvt_ref(vt.size());
    std::vector<float> dq_omp(q.size()), dkt_omp(kt.size()), dvt_omp(vt.size());
    const double t_ref = best_of(reps, [&] {
      std::fill(dq_ref.begin(), dq_ref.end(), 0.f);
      std::fill(dkt_ref.begin(), dkt_ref.end(), 0.f);
      std::fill(dvt_ref.begin(), dvt_ref.end(), 0.f);
      K::ref::attention_backward(q.data(), kt.data(), vt.data(), attn.data(),
                                 dy.data(), n, dk, cv, dq_ref.data(),
                                 dkt_ref.data(), dvt_ref.data());
    });
    const double t_omp = best_of(reps, [&] {
      std::fill(dq_omp.begin(), dq_omp.end(), 0.f);
      std::fill(dkt_omp.begin(), dkt_omp.end(), 0.f);
      std::fill(dvt_omp.begin(), dvt_omp.end(), 0.f);
      K::attention_backward(q.data(), kt.data(), vt.data(), attn.data(),
                            dy.data(), n, dk, cv, dq_omp.data(),
                            dkt_omp.data(), dvt_omp.data());
    });
    report("attention_backward", "N=1024 dk=32", t_ref, t_omp,
           max_abs_diff(dq_ref, dq_omp));
  }

  {  // gemm_nn, the token-projection workhorse
    const int m = 384, k = 384, n = 1024;
    const auto a = random_vec(static_cast<std::size_t>(m) * k, 14);
    const auto b = random_vec(static_cast<std::size_t>(k) * n, 15);
    std::vector<float> c_ref(static_cast<std::size_t>(m) * n),
        c_omp(c_ref.size());
    const double t_ref = best_of(reps, [&] {
      std::fill(c_ref.begin(), c_ref.end(), 0.f);
      K::ref::gemm_nn(m, k, n, a.data(), b.data(), c_ref.data());
    });
    const double t_omp = best_of(reps, [&] {
      std::fill(c_omp.begin(), c_omp.end(), 0.f);
      K::gemm_nn(m, k, n, a.data(), b.data(), c_omp.data());
    });
    report("gemm_nn", "384x384x1024", t_ref, t_omp, max_abs_diff(c_ref, c_omp));
  }

  {  // exp_array vs serial
    const std::size_t n = 1 << 22;
    auto x = random_vec(n, 16);
    for (auto& v : x) v *= 20.f;
    std::vector<float> y_ref(n), y_omp(n);
    const double t_ref =
        best_of(reps, [&] { K::ref::exp_array(x.data(), y_ref.data(), n); });
    const double t_omp =
        best_of(reps, [&] { K::exp_array(x.data(), y_omp.data(), n); });
    double rel = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      rel = std::max(rel, std::fabs(static_cast<double>(y_omp[i]) - y_ref[i]) /
                              std::max(1e-30, static_cast<double>(y_ref[i])));
    report("exp_array", "4M", t_ref, t_omp, rel);
  }

  {  // bilinear resize
    const int c = 64, h = 56, w = 56, oh = 112, ow = 112;
    const auto in = random_vec(static_cast<std::size_t>(c) * h * w, 17);
    std::vector<float> y_ref(static_cast<std::size_t>(c) * oh * ow),
        y_omp(y_ref.size());
    const double t_ref = best_of(reps, [&] {
      K::ref::bilinear_resize_forward(in.data(), c, h, w, oh, ow, y_ref.data());
    });
    const double t_omp = best_of(reps, [&] {
      K::bilinear_resize_forward(in.data(), c, h, w, oh, ow, y_omp.data());
    });
    report("bilinear_resize", "64: 56->112", t_ref, t_omp,
           max_abs_diff(y_ref, y_omp));
  }

  return 0;
}
