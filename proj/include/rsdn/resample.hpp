#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rsdn/tensor.hpp"

namespace rsdn {

// Cubic convolution kernel, a = -0.5 (the common reference-resizer choice).
inline double cubic_weight(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

namespace detail {

// 1-D resampling plan: for each output coordinate, a run of clamped source
// indices and normalized weights. The anchor is the heaviest tap; outputs are
// evaluated as x[anchor] + sum_i w_i * (x[i] - x[anchor]) so that constant
// signals pass through bit-exactly.
template <typename T>
struct ResamplePlan {
  int64_t in_size = 0, out_size = 0;
  std::vector<int32_t> start;    // first tap offset into idx/w per output
  std::vector<int32_t> count;    // taps per output
  std::vector<int32_t> idx;      // clamped source indices
  std::vector<T> w;              // normalized weights
  std::vector<int32_t> anchor;   // tap number of the anchor per output
  std::vector<T> leak;           // 1 - sum(w) per output (for the adjoint)
};

template <typename T>
ResamplePlan<T> make_plan(int64_t in_size, int64_t out_size, bool antialias) {
  ResamplePlan<T> plan;
  plan.in_size = in_size;
  plan.out_size = out_size;
  const double scale = static_cast<double>(out_size) / in_size;
  const bool aa = antialias && scale < 1.0;
  const double filter_scale = aa ? scale : 1.0;
  const double radius = 2.0 / filter_scale;

  for (int64_t o = 0; o < out_size; ++o) {
    const double src = (o + 0.5) / scale - 0.5;
    int64_t lo = static_cast<int64_t>(std::ceil(src - radius));
    int64_t hi = static_cast<int64_t>(std::floor(src + radius));
    std::vector<double> wd;
    wd.reserve(static_cast<size_t>(hi - lo + 1));
    double wsum = 0.0;
    for (int64_t i = lo; i <= hi; ++i) {
      const double wv = cubic_weight((i - src) * filter_scale) * filter_scale;
      wd.push_back(wv);
      wsum += wv;
    }
    // drop zero-weight edge taps
    while (!wd.empty() && wd.front() == 0.0) { wd.erase(wd.begin()); ++lo; }
    while (!wd.empty() && wd.back() == 0.0) { wd.pop_back(); --hi; }
    if (wd.empty()) { wd.push_back(1.0); lo = hi = std::llround(src); wsum = 1.0; }

    plan.start.push_back(static_cast<int32_t>(plan.idx.size()));
    plan.count.push_back(static_cast<int32_t>(wd.size()));
    int best = 0;
    T wsum_t = T(0);
    for (size_t t = 0; t < wd.size(); ++t) {
      int64_t i = lo + static_cast<int64_t>(t);
      i = i < 0 ? 0 : (i >= in_size ? in_size - 1 : i);
      plan.idx.push_back(static_cast<int32_t>(i));
      const T wt = static_cast<T>(wd[t] / wsum);
      plan.w.push_back(wt);
      wsum_t += wt;
      if (std::abs(wd[t]) > std::abs(wd[static_cast<size_t>(best)])) best = static_cast<int>(t);
    }
    plan.anchor.push_back(best);
    plan.leak.push_back(T(1) - wsum_t);
  }
  return plan;
}

// Apply a plan along the H axis (per n, c; all columns).
template <typename T>
TensorT<T> apply_plan_h(const TensorT<T>& x, const ResamplePlan<T>& p) {
  TensorT<T> out(x.n, x.c, p.out_size, x.w);
  for (int64_t in = 0; in < x.n; ++in)
    for (int64_t ic = 0; ic < x.c; ++ic)
      for (int64_t o = 0; o < p.out_size; ++o) {
        const int32_t s = p.start[static_cast<size_t>(o)];
        const int32_t cnt = p.count[static_cast<size_t>(o)];
        const int32_t a = p.idx[static_cast<size_t>(s + p.anchor[static_cast<size_t>(o)])];
        for (int64_t xcol = 0; xcol < x.w; ++xcol) {
          const T xa = x.at(in, ic, a, xcol);
          T acc = T(0);
          for (int32_t t = 0; t < cnt; ++t)
            acc += p.w[static_cast<size_t>(s + t)] *
                   (x.at(in, ic, p.idx[static_cast<size_t>(s + t)], xcol) - xa);
          out.at(in, ic, o, xcol) = xa + acc;
        }
      }
  return out;
}

template <typename T>
TensorT<T> apply_plan_w(const TensorT<T>& x, const ResamplePlan<T>& p) {
  TensorT<T> out(x.n, x.c, x.h, p.out_size);
  for (int64_t in = 0; in < x.n; ++in)
    for (int64_t ic = 0; ic < x.c; ++ic)
      for (int64_t y = 0; y < x.h; ++y)
        for (int64_t o = 0; o < p.out_size; ++o) {
          const int32_t s = p.start[static_cast<size_t>(o)];
          const int32_t cnt = p.count[static_cast<size_t>(o)];
          const int32_t a = p.idx[static_cast<size_t>(s + p.anchor[static_cast<size_t>(o)])];
          const T xa = x.at(in, ic, y, a);
          T acc = T(0);
          for (int32_t t = 0; t < cnt; ++t)
            acc += p.w[static_cast<size_t>(s + t)] *
                   (x.at(in, ic, y, p.idx[static_cast<size_t>(s + t)]) - xa);
          out.at(in, ic, y, o) = xa + acc;
        }
  return out;
}

// Adjoint of apply_plan_h: scatter grads back to the input rows.
template <typename T>
TensorT<T> adjoint_plan_h(const TensorT<T>& g, const ResamplePlan<T>& p,
                          int64_t in_h) {
  TensorT<T> out(g.n, g.c, in_h, g.w);
  for (int64_t in = 0; in < g.n; ++in)
    for (int64_t ic = 0; ic < g.c; ++ic)
      for (int64_t o = 0; o < p.out_size; ++o) {
        const int32_t s = p.start[static_cast<size_t>(o)];
        const int32_t cnt = p.count[static_cast<size_t>(o)];
        const int32_t a = p.idx[static_cast<size_t>(s + p.anchor[static_cast<size_t>(o)])];
        const T leak = p.leak[static_cast<size_t>(o)];
        for (int64_t xcol = 0; xcol < g.w; ++xcol) {
          const T gv = g.at(in, ic, o, xcol);
          for (int32_t t = 0; t < cnt; ++t)
            out.at(in, ic, p.idx[static_cast<size_t>(s + t)], xcol) +=
                p.w[static_cast<size_t>(s + t)] * gv;
          out.at(in, ic, a, xcol) += leak * gv;
        }
      }
  return out;
}

template <typename T>
TensorT<T> adjoint_plan_w(const TensorT<T>& g, const ResamplePlan<T>& p,
                          int64_t in_w) {
  TensorT<T> out(g.n, g.c, g.h, in_w);
  for (int64_t in = 0; in < g.n; ++in)
    for (int64_t ic = 0; ic < g.c; ++ic)
      for (int64_t y = 0; y < g.h; ++y)
        for (int64_t o = 0; o < p.out_size; ++o) {
          const int32_t s = p.start[static_cast<size_t>(o)];
          const int32_t cnt = p.count[static_cast<size_t>(o)];
          const int32_t a = p.idx[static_cast<size_t>(s + p.anchor[static_cast<size_t>(o)])];
          const T gv = g.at(in, ic, y, o);
          for (int32_t t = 0; t < cnt; ++t)
            out.at(in, ic, y, p.idx[static_cast<size_t>(s + t)]) +=
                p.w[static_cast<size_t>(s + t)] * gv;
          out.at(in, ic, y, a) += p.leak[static_cast<size_t>(o)] * gv;
        }
  return out;
}

}  // namespace detail

template <typename T>
TensorT<T> bicubic_resize_to(const TensorT<T>& x, int64_t oh, int64_t ow,
                             bool antialias) {
  if (oh <= 0 || ow <= 0)
    throw ArgumentError("bicubic_resize: zero-sized output");
  if (x.h <= 0 || x.w <= 0)
    throw ArgumentError("bicubic_resize: empty input " + x.shape_str());
  const auto ph = detail::make_plan<T>(x.h, oh, antialias);
  const auto pw = detail::make_plan<T>(x.w, ow, antialias);
  return detail::apply_plan_w(detail::apply_plan_h(x, ph), pw);
}

template <typename T>
TensorT<T> bicubic_resize(const TensorT<T>& x, double scale, bool antialias) {
  if (scale <= 0.0) throw ArgumentError("bicubic_resize: scale must be > 0");
  const int64_t oh = std::llround(x.h * scale);
  const int64_t ow = std::llround(x.w * scale);
  if (oh <= 0 || ow <= 0)
    throw ArgumentError("bicubic_resize: zero-sized output at scale " +
                        std::to_string(scale));
  return bicubic_resize_to(x, oh, ow, antialias);
}

// Adjoint of bicubic_resize_to, for backprop through the upsample path.
template <typename T>
TensorT<T> bicubic_resize_adjoint(const TensorT<T>& grad_out, int64_t in_h,
                                  int64_t in_w, bool antialias) {
  const auto ph = detail::make_plan<T>(in_h, grad_out.h, antialias);
  const auto pw = detail::make_plan<T>(in_w, grad_out.w, antialias);
  return detail::adjoint_plan_h(detail::adjoint_plan_w(grad_out, pw, in_w), ph,
                                in_h);
}

// ---- Gaussian blur ----

// Kernel radius follows the usual 4-sigma truncation (rounded), which gives
// 13 taps at sigma = 1.6. Weights are normalized to sum 1.
inline std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) throw ArgumentError("gaussian_blur: sigma must be > 0");
  const int64_t rad = static_cast<int64_t>(4.0 * sigma + 0.5);
  std::vector<double> k(static_cast<size_t>(2 * rad + 1));
  double s = 0.0;
  for (int64_t i = -rad; i <= rad; ++i) {
    const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    k[static_cast<size_t>(i + rad)] = v;
    s += v;
  }
  for (auto& v : k) v /= s;
  return k;
}

// Separable blur with reflect padding, per channel. Same anchored-correction
// trick as the resizer: constants map to themselves bit-exactly.
template <typename T>
TensorT<T> gaussian_blur(const TensorT<T>& x, double sigma) {
  const auto kd = gaussian_kernel(sigma);
  const int64_t rad = static_cast<int64_t>(kd.size()) / 2;
  std::vector<T> k(kd.size());
  for (size_t i = 0; i < kd.size(); ++i) k[i] = static_cast<T>(kd[i]);

  auto reflect = [](int64_t i, int64_t size) {
    if (size == 1) return int64_t(0);
    const int64_t period = 2 * (size - 1);
    i = ((i % period) + period) % period;
    return i < size ? i : period - i;
  };

  TensorT<T> tmp(x.n, x.c, x.h, x.w);
  for (int64_t in = 0; in < x.n; ++in)
    for (int64_t ic = 0; ic < x.c; ++ic)
      for (int64_t y = 0; y < x.h; ++y)
        for (int64_t xx = 0; xx < x.w; ++xx) {
          const T xc = x.at(in, ic, reflect(y, x.h), xx);
          T acc = T(0);
          for (int64_t t = -rad; t <= rad; ++t)
            acc += k[static_cast<size_t>(t + rad)] *
                   (x.at(in, ic, reflect(y + t, x.h), xx) - xc);
          tmp.at(in, ic, y, xx) = xc + acc;
        }
  TensorT<T> out(x.n, x.c, x.h, x.w);
  for (int64_t in = 0; in < x.n; ++in)
    for (int64_t ic = 0; ic < x.c; ++ic)
      for (int64_t y = 0; y < x.h; ++y)
        for (int64_t xx = 0; xx < x.w; ++xx) {
          const T xc = tmp.at(in, ic, y, reflect(xx, x.w));
          T acc = T(0);
          for (int64_t t = -rad; t <= rad; ++t)
            acc += k[static_cast<size_t>(t + rad)] *
                   (tmp.at(in, ic, y, reflect(xx + t, x.w)) - xc);
          out.at(in, ic, y, xx) = xc + acc;
        }
  return out;
}

}  // namespace rsdn
