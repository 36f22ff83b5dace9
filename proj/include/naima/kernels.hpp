#pragma once

#include <cstddef>

// Numeric kernels, two builds of the same contracts:
//
//   naima::kernels       OpenMP-parallel, omp-simd inner loops. Used by the
//                        model. Parallel loops write disjoint outputs and
//                        cross-row reductions go through a fixed chunk count,
//                        so results do not depend on the thread count.
//   naima::kernels::ref  Straightforward serial loops in naive order. Kept as
//                        the comparison baseline for tests and benchmarks.
//
// Backward kernels accumulate (+=) into their gradient outputs; callers zero
// the buffers once per backward pass. Reassociated reductions mean the two
// backends agree to roundoff, not bit-for-bit; tests compare at 1e-12.

namespace naima::kernels {

// y[i] = exp(x[i]), branch-free polynomial form that auto-vectorizes.
// Relative error < 4 ulp on [-708, 709]; inputs below -708 underflow to 0.
template <typename T>
void exp_array(const T* x, T* y, std::size_t n);

template <typename T>
T dot(const T* a, const T* b, std::size_t n);
template <typename T>
T sum(const T* a, std::size_t n);
template <typename T>
T sum_abs(const T* a, std::size_t n);
template <typename T>
T max_value(const T* a, std::size_t n);
template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n);  // y += alpha * x
template <typename T>
void scale(T alpha, T* x, std::size_t n);

template <typename T>
void relu_forward(const T* x, T* y, std::size_t n);
// dx += dy where x > 0
template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n);
template <typename T>
void sigmoid_forward(const T* x, T* y, std::size_t n);

// Dense 2D convolution, kernel k x k (k odd), stride 1, zero padding k/2.
// in: ci x h x w, weights: co x ci x k x k, bias: co, out: co x h x w.
template <typename T>
void conv2d_forward(const T* in, int ci, int h, int w, const T* weights,
                    const T* bias, int co, int k, T* out);
// din += correlation of dout with flipped weights.
template <typename T>
void conv2d_backward_input(const T* weights, const T* dout, int ci, int h,
                           int w, int co, int k, T* din);
// dweights/dbias += gradients given the stored forward input.
template <typename T>
void conv2d_backward_params(const T* in, const T* dout, int ci, int h, int w,
                            int co, int k, T* dweights, T* dbias);

// C[m x n] += A[m x k] * B[k x n]
template <typename T>
void gemm_nn(int m, int k, int n, const T* a, const T* b, T* c);
// C[m x n] += A[m x k] * B^T, B stored [n x k]
template <typename T>
void gemm_nt(int m, int k, int n, const T* a, const T* b, T* c);
// C[m x n] += A^T * B, A stored [k x m], B stored [k x n]
template <typename T>
void gemm_tn(int m, int k, int n, const T* a, const T* b, T* c);

template <typename T>
void transpose(const T* in, int rows, int cols, T* out);

// Row-wise softmax in place on an m x n matrix.
template <typename T>
void softmax_rows(T* x, int m, int n);

// Scaled dot-product attention over n positions.
//   q: n x dk, kt: dk x n, vt: cv x n (keys/values stored transposed)
//   y: n x cv = softmax(q kt / sqrt(dk)) v
// attn, if non-null, receives the n x n post-softmax matrix (needed for the
// backward pass). Rows are processed independently; a row never leaves cache
// between logits, softmax, and the value reduction.
// Returns the number of rows whose logits were non-finite; such rows are
// skipped (their y entries zeroed) so the caller can report the failure with
// context instead of propagating NaN.
template <typename T>
int attention_forward(const T* q, const T* kt, const T* vt, int n, int dk,
                      int cv, T* attn, T* y);
// Accumulates dq (n x dk), dkt (dk x n), dvt (cv x n) given the stored
// post-softmax matrix.
template <typename T>
void attention_backward(const T* q, const T* kt, const T* vt, const T* attn,
                        const T* dy, int n, int dk, int cv, T* dq, T* dkt,
                        T* dvt);

// Bilinear resize with half-pixel centers and clamp-to-edge sampling.
// in: c x h x w -> out: c x oh x ow.
template <typename T>
void bilinear_resize_forward(const T* in, int c, int h, int w, int oh, int ow,
                             T* out);
template <typename T>
void bilinear_resize_backward(const T* dout, int c, int h, int w, int oh,
                              int ow, T* din);

// out[c, y*r+dy, x*r+dx] = in[c*r*r + dy*r + dx, y, x]
// in: (c*r*r) x h x w -> out: c x h*r x w*r.
template <typename T>
void pixel_shuffle_forward(const T* in, int c_out, int h, int w, int r, T* out);
template <typename T>
void pixel_shuffle_backward(const T* dout, int c_out, int h, int w, int r,
                            T* din);

// Per-channel spatial mean: in c x h x w -> out[c].
template <typename T>
void channel_mean(const T* in, int c, int h, int w, T* out);
// din += dmean[c] / (h*w)
template <typename T>
void channel_mean_backward(const T* dmean, int c, int h, int w, T* din);

namespace ref {

template <typename T>
void exp_array(const T* x, T* y, std::size_t n);
template <typename T>
T dot(const T* a, const T* b, std::size_t n);
template <typename T>
T sum(const T* a, std::size_t n);
template <typename T>
T sum_abs(const T* a, std::size_t n);
template <typename T>
T max_value(const T* a, std::size_t n);
template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n);
template <typename T>
void scale(T alpha, T* x, std::size_t n);
template <typename T>
void relu_forward(const T* x, T* y, std::size_t n);
template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n);
template <typename T>
void sigmoid_forward(const T* x, T* y, std::size_t n);
template <typename T>
void conv2d_forward(const T* in, int ci, int h, int w, const T* weights,
                    const T* bias, int co, int k, T* out);
template <typename T>
void conv2d_backward_input(const T* weights, const T* dout, int ci, int h,
                           int w, int co, int k, T* din);
template <typename T>
void conv2d_backward_params(const T* in, const T* dout, int ci, int h, int w,
                            int co, int k, T* dweights, T* dbias);
template <typename T>
void gemm_nn(int m, int k, int n, const T* a, const T* b, T* c);
template <typename T>
void gemm_nt(int m, int k, int n, const T* a, const T* b, T* c);
template <typename T>
void gemm_tn(int m, int k, int n, const T* a, const T* b, T* c);
template <typename T>
void transpose(const T* in, int rows, int cols, T* out);
template <typename T>
void softmax_rows(T* x, int m, int n);
template <typename T>
int attention_forward(const T* q, const T* kt, const T* vt, int n, int dk,
                      int cv, T* attn, T* y);
template <typename T>
void attention_backward(const T* q, const T* kt, const T* vt, const T* attn,
                        const T* dy, int n, int dk, int cv, T* dq, T* dkt,
                        T* dvt);
template <typename T>
void bilinear_resize_forward(const T* in, int c, int h, int w, int oh, int ow,
                             T* out);
template <typename T>
void bilinear_resize_backward(const T* dout, int c, int h, int w, int oh,
                              int ow, T* din);
template <typename T>
void pixel_shuffle_forward(const T* in, int c_out, int h, int w, int r, T* out);
template <typename T>
void pixel_shuffle_backward(const T* dout, int c_out, int h, int w, int r,
                            T* din);
template <typename T>
void channel_mean(const T* in, int c, int h, int w, T* out);
template <typename T>
void channel_mean_backward(const T* dmean, int c, int h, int w, T* din);

}  // namespace ref

}  // namespace naima::kernels
