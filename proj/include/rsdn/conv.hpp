#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rsdn/tensor.hpp"

namespace rsdn {

enum class PadMode { zeros, reflect };

template <typename T>
struct ConvParams {
  TensorT<T> weight;        // (out_c, in_c, kh, kw)
  std::vector<T> bias;      // length out_c
  int stride = 1;
  int padding = 0;
  PadMode padding_mode = PadMode::zeros;
};

namespace detail {

// Mirror without repeating the edge sample (a b c d -> c b | a b c d | c b).
// Bounces until the index lands in range, so it is safe for any pad size.
inline int64_t reflect_index(int64_t i, int64_t size) {
  if (size == 1) return 0;
  const int64_t period = 2 * (size - 1);
  i = ((i % period) + period) % period;
  return i < size ? i : period - i;
}

// -1 encodes an out-of-range (zero) sample.
inline int64_t pad_index(int64_t i, int64_t size, PadMode mode) {
  if (i >= 0 && i < size) return i;
  if (mode == PadMode::zeros) return -1;
  return reflect_index(i, size);
}

template <typename T>
using MatRM =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
void im2col(const TensorT<T>& x, int64_t in, int64_t kh, int64_t kw,
            int64_t stride, int64_t pad, PadMode mode, int64_t oh, int64_t ow,
            MatRM<T>& col) {
  // col is (in_c*kh*kw) x (oh*ow)
  col.setZero(x.c * kh * kw, oh * ow);
  for (int64_t ic = 0; ic < x.c; ++ic)
    for (int64_t ky = 0; ky < kh; ++ky)
      for (int64_t kx = 0; kx < kw; ++kx) {
        const int64_t row = (ic * kh + ky) * kw + kx;
        for (int64_t oy = 0; oy < oh; ++oy) {
          const int64_t sy = pad_index(oy * stride - pad + ky, x.h, mode);
          if (sy < 0) continue;
          for (int64_t ox = 0; ox < ow; ++ox) {
            const int64_t sx = pad_index(ox * stride - pad + kx, x.w, mode);
            if (sx < 0) continue;
            col(row, oy * ow + ox) = x.at(in, ic, sy, sx);
          }
        }
      }
}

}  // namespace detail

template <typename T>
void conv2d_check(const TensorT<T>& x, const TensorT<T>& weight, int stride,
                  int padding) {
  if (x.c != weight.c)
    throw DimensionError("conv2d: input channels " + x.shape_str() +
                         " do not match weight " + weight.shape_str());
  if (stride <= 0) throw ArgumentError("conv2d: stride must be positive");
  if (padding < 0) throw ArgumentError("conv2d: padding must be >= 0");
  const int64_t oh = (x.h + 2 * padding - weight.h) / stride + 1;
  const int64_t ow = (x.w + 2 * padding - weight.w) / stride + 1;
  if (x.h + 2 * padding < weight.h || x.w + 2 * padding < weight.w || oh <= 0 ||
      ow <= 0)
    throw DimensionError("conv2d: kernel " + weight.shape_str() +
                         " larger than padded input " + x.shape_str());
}

// Convolution as im2col + GEMM. bias may be null; if given it has one value
// per output channel, laid out as a (1, out_c, 1, 1) tensor.
template <typename T>
TensorT<T> conv2d(const TensorT<T>& x, const TensorT<T>& weight,
                  const TensorT<T>* bias, int stride = 1, int padding = 0,
                  PadMode mode = PadMode::zeros) {
  conv2d_check(x, weight, stride, padding);
  const int64_t oc = weight.n, kh = weight.h, kw = weight.w;
  if (bias && bias->numel() != oc)
    throw DimensionError("conv2d: bias size " + std::to_string(bias->numel()) +
                         " does not match out_c " + std::to_string(oc));
  const int64_t oh = (x.h + 2 * padding - kh) / stride + 1;
  const int64_t ow = (x.w + 2 * padding - kw) / stride + 1;

  TensorT<T> out(x.n, oc, oh, ow);
  Eigen::Map<const detail::MatRM<T>> wmat(weight.data.data(), oc,
                                          x.c * kh * kw);
  detail::MatRM<T> col;
  for (int64_t in = 0; in < x.n; ++in) {
    detail::im2col(x, in, kh, kw, stride, padding, mode, oh, ow, col);
    Eigen::Map<detail::MatRM<T>> omat(&out.at(in, 0, 0, 0), oc, oh * ow);
    omat.noalias() = wmat * col;
  }
  if (bias)
    for (int64_t in = 0; in < x.n; ++in)
      for (int64_t o = 0; o < oc; ++o) {
        const T b = bias->data[static_cast<size_t>(o)];
        T* p = &out.at(in, o, 0, 0);
        for (int64_t i = 0; i < oh * ow; ++i) p[i] += b;
      }
  return out;
}

template <typename T>
TensorT<T> conv2d(const TensorT<T>& x, const ConvParams<T>& p) {
  TensorT<T> bias;
  const TensorT<T>* bp = nullptr;
  if (!p.bias.empty()) {
    bias = TensorT<T>(1, static_cast<int64_t>(p.bias.size()), 1, 1);
    bias.data = p.bias;
    bp = &bias;
  }
  return conv2d(x, p.weight, bp, p.stride, p.padding, p.padding_mode);
}

// Gradients of conv2d wrt input, weight and bias given upstream grad_out.
template <typename T>
void conv2d_backward(const TensorT<T>& x, const TensorT<T>& weight,
                     const TensorT<T>& grad_out, int stride, int padding,
                     PadMode mode, TensorT<T>* grad_x, TensorT<T>* grad_w,
                     TensorT<T>* grad_bias) {
  const int64_t oc = weight.n, kh = weight.h, kw = weight.w;
  const int64_t oh = grad_out.h, ow = grad_out.w;

  if (grad_bias) {
    *grad_bias = TensorT<T>(1, oc, 1, 1);
    for (int64_t in = 0; in < x.n; ++in)
      for (int64_t o = 0; o < oc; ++o) {
        T s = T(0);
        const T* p = &grad_out.at(in, o, 0, 0);
        for (int64_t i = 0; i < oh * ow; ++i) s += p[i];
        grad_bias->data[static_cast<size_t>(o)] += s;
      }
  }

  Eigen::Map<const detail::MatRM<T>> wmat(weight.data.data(), oc,
                                          x.c * kh * kw);
  detail::MatRM<T> col, gw_acc, gcol;
  if (grad_w) gw_acc.setZero(oc, x.c * kh * kw);
  if (grad_x) *grad_x = TensorT<T>(x.n, x.c, x.h, x.w);

  for (int64_t in = 0; in < x.n; ++in) {
    Eigen::Map<const detail::MatRM<T>> gmat(&grad_out.at(in, 0, 0, 0), oc,
                                            oh * ow);
    if (grad_w) {
      detail::im2col(x, in, kh, kw, stride, padding, mode, oh, ow, col);
      gw_acc.noalias() += gmat * col.transpose();
    }
    if (grad_x) {
      gcol.noalias() = wmat.transpose() * gmat;
      // col2im scatter; reflect padding folds edge gradients back in
      for (int64_t ic = 0; ic < x.c; ++ic)
        for (int64_t ky = 0; ky < kh; ++ky)
          for (int64_t kx = 0; kx < kw; ++kx) {
            const int64_t row = (ic * kh + ky) * kw + kx;
            for (int64_t oy = 0; oy < oh; ++oy) {
              const int64_t sy =
                  detail::pad_index(oy * stride - padding + ky, x.h, mode);
              if (sy < 0) continue;
              for (int64_t ox = 0; ox < ow; ++ox) {
                const int64_t sx =
                    detail::pad_index(ox * stride - padding + kx, x.w, mode);
                if (sx < 0) continue;
                grad_x->at(in, ic, sy, sx) += gcol(row, oy * ow + ox);
              }
            }
          }
    }
  }
  if (grad_w) {
    *grad_w = TensorT<T>(oc, x.c, kh, kw);
    Eigen::Map<detail::MatRM<T>>(grad_w->data.data(), oc, x.c * kh * kw) =
        gw_acc;
  }
}

// ---- spatially-variant filtering ----
// One k×k filter per spatial position, shared across all hidden channels.
// filters has k*k channels ordered (u*k + v) over the window offsets, with
// u and v running over [-k/2, k/2] row-major. Out-of-bounds samples are zero.

template <typename T>
void svf_check(const TensorT<T>& hidden, const TensorT<T>& filters, int k) {
  if (k <= 0 || k % 2 == 0)
    throw ArgumentError("spatially_variant_filter: k must be odd, got " +
                        std::to_string(k));
  if (filters.c != static_cast<int64_t>(k) * k)
    throw DimensionError("spatially_variant_filter: filter channels " +
                         filters.shape_str() + " != k^2 for k=" +
                         std::to_string(k));
  if (filters.n != hidden.n || filters.h != hidden.h || filters.w != hidden.w)
    throw DimensionError("spatially_variant_filter: spatial shape mismatch " +
                         hidden.shape_str() + " vs " + filters.shape_str());
}

template <typename T>
TensorT<T> spatially_variant_filter(const TensorT<T>& hidden,
                                    const TensorT<T>& filters, int k) {
  svf_check(hidden, filters, k);
  const int64_t rad = k / 2;
  TensorT<T> out(hidden.n, hidden.c, hidden.h, hidden.w);
  for (int64_t in = 0; in < hidden.n; ++in)
    for (int64_t ic = 0; ic < hidden.c; ++ic)
      for (int64_t y = 0; y < hidden.h; ++y)
        for (int64_t x = 0; x < hidden.w; ++x) {
          T acc = T(0);
          for (int64_t u = -rad; u <= rad; ++u) {
            const int64_t sy = y + u;
            if (sy < 0 || sy >= hidden.h) continue;
            for (int64_t v = -rad; v <= rad; ++v) {
              const int64_t sx = x + v;
              if (sx < 0 || sx >= hidden.w) continue;
              const int64_t f = (u + rad) * k + (v + rad);
              acc += filters.at(in, f, y, x) * hidden.at(in, ic, sy, sx);
            }
          }
          out.at(in, ic, y, x) = acc;
        }
  return out;
}

template <typename T>
void svf_backward(const TensorT<T>& hidden, const TensorT<T>& filters, int k,
                  const TensorT<T>& grad_out, TensorT<T>* grad_hidden,
                  TensorT<T>* grad_filters) {
  const int64_t rad = k / 2;
  if (grad_hidden) *grad_hidden = TensorT<T>(hidden.n, hidden.c, hidden.h, hidden.w);
  if (grad_filters)
    *grad_filters = TensorT<T>(filters.n, filters.c, filters.h, filters.w);
  for (int64_t in = 0; in < hidden.n; ++in)
    for (int64_t ic = 0; ic < hidden.c; ++ic)
      for (int64_t y = 0; y < hidden.h; ++y)
        for (int64_t x = 0; x < hidden.w; ++x) {
          const T g = grad_out.at(in, ic, y, x);
          for (int64_t u = -rad; u <= rad; ++u) {
            const int64_t sy = y + u;
            if (sy < 0 || sy >= hidden.h) continue;
            for (int64_t v = -rad; v <= rad; ++v) {
              const int64_t sx = x + v;
              if (sx < 0 || sx >= hidden.w) continue;
              const int64_t f = (u + rad) * k + (v + rad);
              if (grad_hidden)
                grad_hidden->at(in, ic, sy, sx) += filters.at(in, f, y, x) * g;
              if (grad_filters)
                grad_filters->at(in, f, y, x) += hidden.at(in, ic, sy, sx) * g;
            }
          }
        }
}

}  // namespace rsdn
