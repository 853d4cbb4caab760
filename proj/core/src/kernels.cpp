#include "kernels.hpp"

#include <cstring>

#include "introspect/error.hpp"

namespace introspect::detail {

namespace {
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr long long kParallelFlopThreshold = 1 << 20;
}  // namespace

void gemm_nn(int m, int k, int n, const float* a, const float* b, float* c,
             bool accumulate) {
  const long long work = static_cast<long long>(m) * k * n;
#pragma omp parallel for schedule(static) if (work > kParallelFlopThreshold)
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) std::memset(crow, 0, sizeof(float) * n);
    const float* arow = a + static_cast<std::size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const float av = arow[kk];
      if (av == 0.0f) continue;
      const float* brow = b + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(int m, int k, int n, const float* a, const float* b, float* c,
             bool accumulate) {
  const long long work = static_cast<long long>(m) * k * n;
#pragma omp parallel for schedule(static) if (work > kParallelFlopThreshold)
  for (int i = 0; i < m; ++i) {
    const float* arow = a + static_cast<std::size_t>(i) * k;
    float* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const float* brow = b + static_cast<std::size_t>(j) * k;
      float acc = 0.0f;
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      crow[j] = accumulate ? crow[j] + acc : acc;
    }
  }
}

void gemm_tn(int m, int k, int n, const float* a, const float* b, float* c,
             bool accumulate) {
  const long long work = static_cast<long long>(m) * k * n;
#pragma omp parallel for schedule(static) if (work > kParallelFlopThreshold)
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) std::memset(crow, 0, sizeof(float) * n);
    for (int kk = 0; kk < k; ++kk) {
      const float av = a[static_cast<std::size_t>(kk) * m + i];
      if (av == 0.0f) continue;
      const float* brow = b + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Conv2dDims conv2d_dims(const std::vector<int>& input_shape,
                       const std::vector<int>& kernel_shape, int stride,
                       Padding padding) {
  Conv2dDims d;
  if (input_shape.size() == 3) {
    d.batch = 1;
    d.in_h = input_shape[0];
    d.in_w = input_shape[1];
    d.in_c = input_shape[2];
  } else if (input_shape.size() == 4) {
    d.batch = input_shape[0];
    d.in_h = input_shape[1];
    d.in_w = input_shape[2];
    d.in_c = input_shape[3];
  } else {
    raise(ErrorCode::kDimension,
          "conv2d: input must be HxWxC or NxHxWxC, got " + shape_to_string(input_shape));
  }
  if (kernel_shape.size() != 4) {
    raise(ErrorCode::kDimension,
          "conv2d: kernels must be khxkwxCxD, got " + shape_to_string(kernel_shape));
  }
  d.kh = kernel_shape[0];
  d.kw = kernel_shape[1];
  d.out_c = kernel_shape[3];
  if (kernel_shape[2] != d.in_c) {
    raise(ErrorCode::kDimension,
          "conv2d: kernel channel axis (axis 2) is " + std::to_string(kernel_shape[2]) +
              " but input has " + std::to_string(d.in_c) + " channels");
  }
  if (stride < 1) raise(ErrorCode::kDimension, "conv2d: stride must be >= 1");
  d.stride = stride;

  if (padding == Padding::kSame) {
    if (stride != 1) {
      raise(ErrorCode::kConfig, "conv2d: same padding is only supported at stride 1");
    }
    d.pad_top = (d.kh - 1) / 2;
    d.pad_left = (d.kw - 1) / 2;
    d.out_h = d.in_h;
    d.out_w = d.in_w;
  } else {
    d.pad_top = 0;
    d.pad_left = 0;
    if (d.kh > d.in_h) {
      raise(ErrorCode::kDimension, "conv2d: kernel height " + std::to_string(d.kh) +
                                       " exceeds input height " + std::to_string(d.in_h) +
                                       " (axis 0)");
    }
    if (d.kw > d.in_w) {
      raise(ErrorCode::kDimension, "conv2d: kernel width " + std::to_string(d.kw) +
                                       " exceeds input width " + std::to_string(d.in_w) +
                                       " (axis 1)");
    }
    d.out_h = (d.in_h - d.kh) / stride + 1;
    d.out_w = (d.in_w - d.kw) / stride + 1;
  }
  return d;
}

void im2col(const float* x, const Conv2dDims& d, float* cols) {
  const int patch = d.patch_size();
  const std::size_t in_plane = static_cast<std::size_t>(d.in_h) * d.in_w * d.in_c;
#pragma omp parallel for schedule(static) if (d.batch > 1)
  for (int n = 0; n < d.batch; ++n) {
    const float* xn = x + n * in_plane;
    float* out = cols + static_cast<std::size_t>(n) * d.out_h * d.out_w * patch;
    for (int oy = 0; oy < d.out_h; ++oy) {
      for (int ox = 0; ox < d.out_w; ++ox) {
        float* row = out + (static_cast<std::size_t>(oy) * d.out_w + ox) * patch;
        const int y0 = oy * d.stride - d.pad_top;
        const int x0 = ox * d.stride - d.pad_left;
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = y0 + ky;
          float* dst = row + static_cast<std::size_t>(ky) * d.kw * d.in_c;
          if (iy < 0 || iy >= d.in_h) {
            std::memset(dst, 0, sizeof(float) * d.kw * d.in_c);
            continue;
          }
          for (int kx = 0; kx < d.kw; ++kx) {
            const int ix = x0 + kx;
            if (ix < 0 || ix >= d.in_w) {
              std::memset(dst + kx * d.in_c, 0, sizeof(float) * d.in_c);
            } else {
              std::memcpy(dst + kx * d.in_c,
                          xn + (static_cast<std::size_t>(iy) * d.in_w + ix) * d.in_c,
                          sizeof(float) * d.in_c);
            }
          }
        }
      }
    }
  }
}

void col2im_acc(const float* cols, const Conv2dDims& d, float* dx) {
  const int patch = d.patch_size();
  const std::size_t in_plane = static_cast<std::size_t>(d.in_h) * d.in_w * d.in_c;
#pragma omp parallel for schedule(static) if (d.batch > 1)
  for (int n = 0; n < d.batch; ++n) {
    float* xn = dx + n * in_plane;
    const float* in = cols + static_cast<std::size_t>(n) * d.out_h * d.out_w * patch;
    for (int oy = 0; oy < d.out_h; ++oy) {
      for (int ox = 0; ox < d.out_w; ++ox) {
        const float* row = in + (static_cast<std::size_t>(oy) * d.out_w + ox) * patch;
        const int y0 = oy * d.stride - d.pad_top;
        const int x0 = ox * d.stride - d.pad_left;
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = y0 + ky;
          if (iy < 0 || iy >= d.in_h) continue;
          const float* src = row + static_cast<std::size_t>(ky) * d.kw * d.in_c;
          for (int kx = 0; kx < d.kw; ++kx) {
            const int ix = x0 + kx;
            if (ix < 0 || ix >= d.in_w) continue;
            float* dst = xn + (static_cast<std::size_t>(iy) * d.in_w + ix) * d.in_c;
            const float* s = src + kx * d.in_c;
            for (int cc = 0; cc < d.in_c; ++cc) dst[cc] += s[cc];
          }
        }
      }
    }
  }
}

void maxpool2x2_forward(const float* x, int batch, int h, int w, int c, float* y,
                        std::vector<std::size_t>& argmax) {
  const int oh = h / 2, ow = w / 2;
  argmax.assign(static_cast<std::size_t>(batch) * oh * ow * c, 0);
  const std::size_t in_plane = static_cast<std::size_t>(h) * w * c;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow * c;
  for (int n = 0; n < batch; ++n) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int cc = 0; cc < c; ++cc) {
          const std::size_t base = n * in_plane;
          std::size_t best_idx =
              base + (static_cast<std::size_t>(2 * oy) * w + 2 * ox) * c + cc;
          float best = x[best_idx];
          const int dys[3] = {0, 1, 1};
          const int dxs[3] = {1, 0, 1};
          for (int t = 0; t < 3; ++t) {
            const std::size_t idx =
                base + (static_cast<std::size_t>(2 * oy + dys[t]) * w + 2 * ox + dxs[t]) * c + cc;
            if (x[idx] > best) {
              best = x[idx];
              best_idx = idx;
            }
          }
          const std::size_t out_idx =
              n * out_plane + (static_cast<std::size_t>(oy) * ow + ox) * c + cc;
          y[out_idx] = best;
          argmax[out_idx] = best_idx;
        }
      }
    }
  }
}

void maxpool2x2_backward(const float* dy, const std::vector<std::size_t>& argmax,
                         float* dx) {
  for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += dy[i];
}

}  // namespace introspect::detail
