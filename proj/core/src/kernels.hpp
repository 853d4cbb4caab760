#pragma once

// Internal dense kernels behind the tape ops. All loops accumulate each
// output element in a fixed sequential order, so results are bit-identical
// across runs and thread counts.

#include <vector>

#include "introspect/tensor.hpp"

namespace introspect::detail {

// c[m,n] = a[m,k] * b[k,n]          (accumulate: add into c)
void gemm_nn(int m, int k, int n, const float* a, const float* b, float* c, bool accumulate);
// c[m,n] = a[m,k] * b[n,k]^T        (b stored row-major [n,k])
void gemm_nt(int m, int k, int n, const float* a, const float* b, float* c, bool accumulate);
// c[m,n] = a[k,m]^T * b[k,n]        (a stored row-major [k,m])
void gemm_tn(int m, int k, int n, const float* a, const float* b, float* c, bool accumulate);

enum class Padding { kValid, kSame };

struct Conv2dDims {
  int batch = 1;
  int in_h = 0, in_w = 0, in_c = 0;
  int kh = 0, kw = 0, out_c = 0;
  int stride = 1;
  int pad_top = 0, pad_left = 0;
  int out_h = 0, out_w = 0;

  int patch_size() const { return kh * kw * in_c; }
  std::size_t cols_rows() const {
    return static_cast<std::size_t>(batch) * out_h * out_w;
  }
};

// Validates shapes and resolves output geometry. `input_shape` is HxWxC or
// NxHxWxC; `kernel_shape` is khxkwxCxD. Throws kDimension naming the
// offending axis.
Conv2dDims conv2d_dims(const std::vector<int>& input_shape,
                       const std::vector<int>& kernel_shape, int stride,
                       Padding padding);

// cols is [batch*out_h*out_w, kh*kw*in_c] row-major; zero-fill for padding.
void im2col(const float* x, const Conv2dDims& d, float* cols);
// Scatter-add of column gradients back onto the (padded) input layout.
void col2im_acc(const float* cols, const Conv2dDims& d, float* dx);

// 2x2/stride-2 max pooling over [batch,h,w,c]; trailing odd row/col ignored.
// argmax stores the flat input index chosen per output element.
void maxpool2x2_forward(const float* x, int batch, int h, int w, int c, float* y,
                        std::vector<std::size_t>& argmax);
void maxpool2x2_backward(const float* dy, const std::vector<std::size_t>& argmax,
                         float* dx);

}  // namespace introspect::detail
