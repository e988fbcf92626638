#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "rsdn/common.hpp"
#include "rsdn/rng.hpp"

namespace rsdn {

// Dense rank-4 tensor in row-major (n, c, h, w) layout. Scalar type is a
// template parameter: float for training/inference, double for gradient
// checking. Values are immutable by convention once an op has produced them;
// only the optimizer writes into parameter tensors in place.
template <typename T>
struct TensorT {
  int64_t n = 0, c = 0, h = 0, w = 0;
  bool requires_grad = false;
  std::vector<T> data;

  TensorT() = default;
  TensorT(int64_t n_, int64_t c_, int64_t h_, int64_t w_)
      : n(n_), c(c_), h(h_), w(w_) {
    if (n < 0 || c < 0 || h < 0 || w < 0)
      throw DimensionError("negative tensor dimension");
    data.assign(static_cast<size_t>(n * c * h * w), T(0));
  }

  static TensorT zeros(int64_t n_, int64_t c_, int64_t h_, int64_t w_) {
    return TensorT(n_, c_, h_, w_);
  }

  static TensorT full(int64_t n_, int64_t c_, int64_t h_, int64_t w_, T v) {
    TensorT t(n_, c_, h_, w_);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  static TensorT scalar(T v) { return full(1, 1, 1, 1, v); }

  static TensorT uniform(int64_t n_, int64_t c_, int64_t h_, int64_t w_,
                         Rng& rng, T lo = T(0), T hi = T(1)) {
    TensorT t(n_, c_, h_, w_);
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
  }

  int64_t numel() const { return n * c * h * w; }

  T& at(int64_t in, int64_t ic, int64_t iy, int64_t ix) {
    return data[static_cast<size_t>(((in * c + ic) * h + iy) * w + ix)];
  }
  const T& at(int64_t in, int64_t ic, int64_t iy, int64_t ix) const {
    return data[static_cast<size_t>(((in * c + ic) * h + iy) * w + ix)];
  }

  bool same_shape(const TensorT& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(" << n << "," << c << "," << h << "," << w << ")";
    return os.str();
  }

  bool all_finite() const {
    for (const T& v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool is_scalar_shape() const { return n == 1 && c == 1 && h == 1 && w == 1; }
};

using Tensor4 = TensorT<float>;

namespace detail {
template <typename T>
inline void require_same_shape(const TensorT<T>& a, const TensorT<T>& b,
                               const char* op) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         a.shape_str() + " vs " + b.shape_str());
}
}  // namespace detail

// ---- elementwise suite (no broadcasting: exact shape match required) ----

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "add");
  TensorT<T> out = a;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "sub");
  TensorT<T> out = a;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "mul");
  TensorT<T> out = a;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
  return out;
}

template <typename T>
TensorT<T> scale(const TensorT<T>& a, T s) {
  TensorT<T> out = a;
  for (auto& v : out.data) v *= s;
  return out;
}

template <typename T>
TensorT<T> relu(const TensorT<T>& a) {
  TensorT<T> out = a;
  for (auto& v : out.data) v = v > T(0) ? v : T(0);
  return out;
}

template <typename T>
inline T sigmoid_scalar(T x) {
  if (x >= T(0)) {
    T e = std::exp(-x);
    return T(1) / (T(1) + e);
  }
  T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& a) {
  TensorT<T> out = a;
  for (auto& v : out.data) v = sigmoid_scalar(v);
  return out;
}

template <typename T>
T sum(const TensorT<T>& a) {
  T s = T(0);
  for (const T& v : a.data) s += v;
  return s;
}

template <typename T>
double max_abs_diff(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "max_abs_diff");
  double m = 0;
  for (size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.data[i]) -
                             static_cast<double>(b.data[i])));
  return m;
}

// ---- channel concat / crop / flips / rotation ----

template <typename T>
TensorT<T> concat_channels(const std::vector<const TensorT<T>*>& parts) {
  if (parts.empty()) throw ArgumentError("concat_channels: empty input list");
  int64_t total_c = 0;
  for (const auto* p : parts) {
    if (p->n != parts[0]->n || p->h != parts[0]->h || p->w != parts[0]->w)
      throw DimensionError("concat_channels: mismatched shapes " +
                           parts[0]->shape_str() + " vs " + p->shape_str());
    total_c += p->c;
  }
  TensorT<T> out(parts[0]->n, total_c, parts[0]->h, parts[0]->w);
  const int64_t hw = parts[0]->h * parts[0]->w;
  for (int64_t in = 0; in < out.n; ++in) {
    int64_t co = 0;
    for (const auto* p : parts) {
      std::copy(p->data.begin() + in * p->c * hw,
                p->data.begin() + (in + 1) * p->c * hw,
                out.data.begin() + (in * total_c + co) * hw);
      co += p->c;
    }
  }
  return out;
}

template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
  return concat_channels<T>({&a, &b});
}

// channels [c0, c0+len) of the input
template <typename T>
TensorT<T> slice_channels(const TensorT<T>& a, int64_t c0, int64_t len) {
  if (c0 < 0 || len < 0 || c0 + len > a.c)
    throw DimensionError("slice_channels: range out of bounds for " +
                         a.shape_str());
  TensorT<T> out(a.n, len, a.h, a.w);
  const int64_t hw = a.h * a.w;
  for (int64_t in = 0; in < a.n; ++in)
    std::copy(a.data.begin() + (in * a.c + c0) * hw,
              a.data.begin() + (in * a.c + c0 + len) * hw,
              out.data.begin() + in * len * hw);
  return out;
}

template <typename T>
TensorT<T> crop(const TensorT<T>& a, int64_t top, int64_t left, int64_t ch,
                int64_t cw) {
  if (top < 0 || left < 0 || ch <= 0 || cw <= 0 || top + ch > a.h ||
      left + cw > a.w)
    throw DimensionError("crop: window out of bounds for " + a.shape_str());
  TensorT<T> out(a.n, a.c, ch, cw);
  for (int64_t in = 0; in < a.n; ++in)
    for (int64_t ic = 0; ic < a.c; ++ic)
      for (int64_t y = 0; y < ch; ++y)
        std::copy(&a.at(in, ic, top + y, left),
                  &a.at(in, ic, top + y, left) + cw, &out.at(in, ic, y, 0));
  return out;
}

template <typename T>
TensorT<T> flip_h(const TensorT<T>& a) {
  TensorT<T> out(a.n, a.c, a.h, a.w);
  for (int64_t in = 0; in < a.n; ++in)
    for (int64_t ic = 0; ic < a.c; ++ic)
      for (int64_t y = 0; y < a.h; ++y)
        for (int64_t x = 0; x < a.w; ++x)
          out.at(in, ic, y, x) = a.at(in, ic, y, a.w - 1 - x);
  return out;
}

template <typename T>
TensorT<T> flip_v(const TensorT<T>& a) {
  TensorT<T> out(a.n, a.c, a.h, a.w);
  for (int64_t in = 0; in < a.n; ++in)
    for (int64_t ic = 0; ic < a.c; ++ic)
      for (int64_t y = 0; y < a.h; ++y)
        std::copy(&a.at(in, ic, a.h - 1 - y, 0),
                  &a.at(in, ic, a.h - 1 - y, 0) + a.w, &out.at(in, ic, y, 0));
  return out;
}

// counter-clockwise quarter turns
template <typename T>
TensorT<T> rot90(const TensorT<T>& a, int k) {
  k = ((k % 4) + 4) % 4;
  if (k == 0) return a;
  TensorT<T> r = a;
  for (int t = 0; t < k; ++t) {
    TensorT<T> out(r.n, r.c, r.w, r.h);
    for (int64_t in = 0; in < r.n; ++in)
      for (int64_t ic = 0; ic < r.c; ++ic)
        for (int64_t y = 0; y < r.h; ++y)
          for (int64_t x = 0; x < r.w; ++x)
            out.at(in, ic, r.w - 1 - x, y) = r.at(in, ic, y, x);
    r = std::move(out);
  }
  return r;
}

// ---- pixel shuffle / unshuffle (space-to-depth pair, factor r) ----
// Channel ordering is channel-major over the r×r offsets: input channel
// c = oc*r*r + dy*r + dx lands at output (oc, y*r+dy, x*r+dx).

template <typename T>
TensorT<T> pixel_shuffle(const TensorT<T>& a, int r) {
  if (r <= 0) throw ArgumentError("pixel_shuffle: r must be positive");
  const int64_t r2 = static_cast<int64_t>(r) * r;
  if (a.c % r2 != 0)
    throw DimensionError("pixel_shuffle: channels " + std::to_string(a.c) +
                         " not divisible by r^2=" + std::to_string(r2));
  TensorT<T> out(a.n, a.c / r2, a.h * r, a.w * r);
  for (int64_t in = 0; in < a.n; ++in)
    for (int64_t oc = 0; oc < out.c; ++oc)
      for (int64_t dy = 0; dy < r; ++dy)
        for (int64_t dx = 0; dx < r; ++dx) {
          const int64_t ic = oc * r2 + dy * r + dx;
          for (int64_t y = 0; y < a.h; ++y)
            for (int64_t x = 0; x < a.w; ++x)
              out.at(in, oc, y * r + dy, x * r + dx) = a.at(in, ic, y, x);
        }
  return out;
}

template <typename T>
TensorT<T> pixel_unshuffle(const TensorT<T>& a, int r) {
  if (r <= 0) throw ArgumentError("pixel_unshuffle: r must be positive");
  if (a.h % r != 0 || a.w % r != 0)
    throw DimensionError("pixel_unshuffle: spatial dims of " + a.shape_str() +
                         " not divisible by r=" + std::to_string(r));
  const int64_t r2 = static_cast<int64_t>(r) * r;
  TensorT<T> out(a.n, a.c * r2, a.h / r, a.w / r);
  for (int64_t in = 0; in < a.n; ++in)
    for (int64_t ic = 0; ic < a.c; ++ic)
      for (int64_t dy = 0; dy < r; ++dy)
        for (int64_t dx = 0; dx < r; ++dx) {
          const int64_t oc = ic * r2 + dy * r + dx;
          for (int64_t y = 0; y < out.h; ++y)
            for (int64_t x = 0; x < out.w; ++x)
              out.at(in, oc, y, x) = a.at(in, ic, y * r + dy, x * r + dx);
        }
  return out;
}

template <typename T>
TensorT<T> cast_to(const TensorT<T>& a) {
  return a;
}

template <typename To, typename From>
TensorT<To> cast(const TensorT<From>& a) {
  TensorT<To> out(a.n, a.c, a.h, a.w);
  for (size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = static_cast<To>(a.data[i]);
  return out;
}

}  // namespace rsdn
