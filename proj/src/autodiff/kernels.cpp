// Copyright 2026 The planret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kernels.hpp"

#include <algorithm>

#include "planret/error.hpp"

namespace planret::ad::kernels {
namespace {

struct Range {
  std::int64_t lo;
  std::int64_t hi;
};

// Output positions o whose tap o*stride - padding + k falls inside [0, in).
Range valid_outputs(std::int64_t k, int stride, int padding, std::int64_t in, std::int64_t out) {
  const std::int64_t num = padding - k;
  std::int64_t lo = num <= 0 ? 0 : (num + stride - 1) / stride;
  const std::int64_t top = in - 1 + padding - k;
  std::int64_t hi = top < 0 ? 0 : top / stride + 1;
  lo = std::clamp<std::int64_t>(lo, 0, out);
  hi = std::clamp<std::int64_t>(hi, lo, out);
  return {lo, hi};
}

struct ConvDims {
  std::int64_t n, cin, cout;
  std::int64_t id, ih, iw;
  std::int64_t od, oh, ow;
  std::int64_t kd, kh, kw;
};

void require(bool ok, const std::string& op, const std::string& msg) {
  if (!ok) throw ShapeError(op + ": " + msg);
}

// Visits every (input, output, weight) triple of a dense 3-D convolution and
// hands contiguous w-rows to `row(out_offset, in_offset, weight_offset, lo, hi, kw)`.
template <typename RowFn>
void for_each_row(const ConvDims& d, int stride, int padding, RowFn&& row) {
  const std::int64_t in_c = d.id * d.ih * d.iw;
  const std::int64_t out_c = d.od * d.oh * d.ow;
  const std::int64_t k_vol = d.kd * d.kh * d.kw;
  for (std::int64_t n = 0; n < d.n; ++n) {
    for (std::int64_t co = 0; co < d.cout; ++co) {
      for (std::int64_t ci = 0; ci < d.cin; ++ci) {
        const std::int64_t x_base = (n * d.cin + ci) * in_c;
        const std::int64_t y_base = (n * d.cout + co) * out_c;
        const std::int64_t w_base = (co * d.cin + ci) * k_vol;
        for (std::int64_t a = 0; a < d.kd; ++a) {
          const Range rd = valid_outputs(a, stride, padding, d.id, d.od);
          for (std::int64_t b = 0; b < d.kh; ++b) {
            const Range rh = valid_outputs(b, stride, padding, d.ih, d.oh);
            for (std::int64_t c = 0; c < d.kw; ++c) {
              const Range rw = valid_outputs(c, stride, padding, d.iw, d.ow);
              if (rw.lo >= rw.hi) continue;
              const std::int64_t w_off = w_base + (a * d.kh + b) * d.kw + c;
              for (std::int64_t o1 = rd.lo; o1 < rd.hi; ++o1) {
                const std::int64_t i1 = o1 * stride - padding + a;
                for (std::int64_t o2 = rh.lo; o2 < rh.hi; ++o2) {
                  const std::int64_t i2 = o2 * stride - padding + b;
                  row(y_base + (o1 * d.oh + o2) * d.ow, x_base + (i1 * d.ih + i2) * d.iw, w_off,
                      rw.lo, rw.hi, c);
                }
              }
            }
          }
        }
      }
    }
  }
}

ConvDims conv_dims(const Shape& x, const Shape& w, int stride, int padding, const char* op) {
  require(x.size() == 5, op, "input must be rank 5, got " + shape_to_string(x));
  require(w.size() == 5, op, "weight must be rank 5, got " + shape_to_string(w));
  require(x[1] == w[1], op,
          "input channels " + std::to_string(x[1]) + " do not match weight " +
              shape_to_string(w));
  require(stride >= 1 && padding >= 0, op, "stride must be >= 1 and padding >= 0");
  ConvDims d{};
  d.n = x[0];
  d.cin = x[1];
  d.cout = w[0];
  d.id = x[2];
  d.ih = x[3];
  d.iw = x[4];
  d.kd = w[2];
  d.kh = w[3];
  d.kw = w[4];
  d.od = conv_output_extent(d.id, d.kd, stride, padding);
  d.oh = conv_output_extent(d.ih, d.kh, stride, padding);
  d.ow = conv_output_extent(d.iw, d.kw, stride, padding);
  require(d.od >= 1 && d.oh >= 1 && d.ow >= 1, op,
          "kernel " + shape_to_string(w) + " larger than padded input " + shape_to_string(x));
  return d;
}

}  // namespace

std::int64_t conv_output_extent(std::int64_t in, std::int64_t kernel, int stride, int padding) {
  const std::int64_t span = in + 2 * padding - kernel;
  if (span < 0) return 0;
  return span / stride + 1;
}

std::int64_t conv_transpose_output_extent(std::int64_t in, std::int64_t kernel, int stride,
                                          int padding) {
  return (in - 1) * stride - 2 * padding + kernel;
}

template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Tensor<T>& w, int stride, int padding) {
  const ConvDims d = conv_dims(x.shape(), w.shape(), stride, padding, "conv3d");
  Tensor<T> y(Shape{d.n, d.cout, d.od, d.oh, d.ow});
  T* yp = y.data().data();
  const T* xp = x.data().data();
  const T* wp = w.data().data();
  for_each_row(d, stride, padding,
               [&](std::int64_t yo, std::int64_t xo, std::int64_t wo, std::int64_t lo,
                   std::int64_t hi, std::int64_t c) {
                 const T wv = wp[wo];
                 T* yr = yp + yo;
                 const std::int64_t xb = xo - padding + c;
                 for (std::int64_t o = lo; o < hi; ++o) yr[o] += wv * xp[xb + o * stride];
               });
  return y;
}

template <typename T>
Tensor<T> conv3d_backward_input(const Tensor<T>& grad_out, const Tensor<T>& w,
                                const Shape& input_shape, int stride, int padding) {
  const ConvDims d = conv_dims(input_shape, w.shape(), stride, padding, "conv3d_backward_input");
  require(grad_out.shape() == Shape({d.n, d.cout, d.od, d.oh, d.ow}), "conv3d_backward_input",
          "gradient shape " + shape_to_string(grad_out.shape()) + " does not match output");
  Tensor<T> gx(input_shape);
  T* gxp = gx.data().data();
  const T* gyp = grad_out.data().data();
  const T* wp = w.data().data();
  for_each_row(d, stride, padding,
               [&](std::int64_t yo, std::int64_t xo, std::int64_t wo, std::int64_t lo,
                   std::int64_t hi, std::int64_t c) {
                 const T wv = wp[wo];
                 const T* gr = gyp + yo;
                 const std::int64_t xb = xo - padding + c;
                 for (std::int64_t o = lo; o < hi; ++o) gxp[xb + o * stride] += wv * gr[o];
               });
  return gx;
}

template <typename T>
Tensor<T> conv3d_backward_weight(const Tensor<T>& x, const Tensor<T>& grad_out,
                                 const Shape& weight_shape, int stride, int padding) {
  const ConvDims d = conv_dims(x.shape(), weight_shape, stride, padding, "conv3d_backward_weight");
  require(grad_out.shape() == Shape({d.n, d.cout, d.od, d.oh, d.ow}), "conv3d_backward_weight",
          "gradient shape " + shape_to_string(grad_out.shape()) + " does not match output");
  Tensor<T> gw(weight_shape);
  T* gwp = gw.data().data();
  const T* gyp = grad_out.data().data();
  const T* xp = x.data().data();
  for_each_row(d, stride, padding,
               [&](std::int64_t yo, std::int64_t xo, std::int64_t wo, std::int64_t lo,
                   std::int64_t hi, std::int64_t c) {
                 const T* gr = gyp + yo;
                 const std::int64_t xb = xo - padding + c;
                 T acc{0};
                 for (std::int64_t o = lo; o < hi; ++o) acc += gr[o] * xp[xb + o * stride];
                 gwp[wo] += acc;
               });
  return gw;
}

template <typename T>
void add_channel_bias(Tensor<T>& y, const Tensor<T>& bias) {
  const auto& s = y.shape();
  require(bias.size() == static_cast<std::size_t>(s[1]), "bias",
          "bias " + shape_to_string(bias.shape()) + " does not match channels of " +
              shape_to_string(s));
  const std::size_t inner = y.size() / static_cast<std::size_t>(s[0] * s[1]);
  T* p = y.data().data();
  for (std::int64_t n = 0; n < s[0]; ++n) {
    for (std::int64_t c = 0; c < s[1]; ++c) {
      const T b = bias[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < inner; ++i) *p++ += b;
    }
  }
}

template <typename T>
Tensor<T> channel_sum(const Tensor<T>& grad_out) {
  const auto& s = grad_out.shape();
  Tensor<T> out(Shape{s[1]});
  const std::size_t inner = grad_out.size() / static_cast<std::size_t>(s[0] * s[1]);
  const T* p = grad_out.data().data();
  for (std::int64_t n = 0; n < s[0]; ++n) {
    for (std::int64_t c = 0; c < s[1]; ++c) {
      T acc{0};
      for (std::size_t i = 0; i < inner; ++i) acc += *p++;
      out[static_cast<std::size_t>(c)] += acc;
    }
  }
  return out;
}

#define PLANRET_INSTANTIATE(T)                                                               \
  template Tensor<T> conv3d_forward(const Tensor<T>&, const Tensor<T>&, int, int);            \
  template Tensor<T> conv3d_backward_input(const Tensor<T>&, const Tensor<T>&, const Shape&, \
                                           int, int);                                         \
  template Tensor<T> conv3d_backward_weight(const Tensor<T>&, const Tensor<T>&, const Shape&, \
                                            int, int);                                        \
  template void add_channel_bias(Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> channel_sum(const Tensor<T>&);

PLANRET_INSTANTIATE(float)
PLANRET_INSTANTIATE(double)
#undef PLANRET_INSTANTIATE

}  // namespace planret::ad::kernels
