#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "moodnet/errors.hpp"
#include "moodnet/rng.hpp"
#include "moodnet/tensor.hpp"

// Layer forward/backward kernels. Activations are rank-3 [h, w, c] for the
// convolutional path and rank-1 for the dense path. Convolution here is
// cross-correlation (no kernel flip) with zero same-padding, so spatial
// extents are preserved. Pooling is non-overlapping with floor semantics:
// trailing rows/cols that do not fill a window are dropped.

namespace moodnet {

/// Kernel is [kh, kw, cin, cout]; odd spatial extents only. Bias is [cout].
template <typename T>
struct ConvLayer {
  Tensor<T> kernel;
  Tensor<T> bias;
};

struct PoolSpec {
  Index ph = 1;
  Index pw = 1;
};

/// Weights are [in, out]: y = W^T x + b.
template <typename T>
struct DenseLayer {
  Tensor<T> weights;
  Tensor<T> bias;
};

enum class DropoutMode { kTrain, kEval };

struct DropoutSpec {
  double rate = 0.0;  // in [0, 1)
  DropoutMode mode = DropoutMode::kEval;
};

/// Glorot-style uniform bound for a layer with the given fan counts.
inline double glorot_limit(Index fan_in, Index fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// Seeded conv layer: uniform Glorot kernel (fans scaled by the receptive
/// field), zero bias.
template <typename T>
ConvLayer<T> make_conv_layer(Index kh, Index kw, Index cin, Index cout, std::uint64_t seed) {
  const double a = glorot_limit(kh * kw * cin, kh * kw * cout);
  return ConvLayer<T>{Tensor<T>::uniform({kh, kw, cin, cout}, static_cast<T>(-a), static_cast<T>(a), seed),
                      Tensor<T>::zeros({cout})};
}

template <typename T>
DenseLayer<T> make_dense_layer(Index in, Index out, std::uint64_t seed) {
  const double a = glorot_limit(in, out);
  return DenseLayer<T>{Tensor<T>::uniform({in, out}, static_cast<T>(-a), static_cast<T>(a), seed),
                       Tensor<T>::zeros({out})};
}

namespace detail {

template <typename T>
void require_rank3(const Tensor<T>& x, const char* op) {
  if (x.rank() != 3) {
    throw ShapeError(std::string(op) + " requires a rank-3 [h,w,c] input, got " +
                     shape_str(x.shape()));
  }
}

template <typename T>
void check_conv_args(const Tensor<T>& x, const Tensor<T>& kernel) {
  require_rank3(x, "conv2d");
  if (kernel.rank() != 4) {
    throw ShapeError("conv2d kernel must be rank-4 [kh,kw,cin,cout], got " +
                     shape_str(kernel.shape()));
  }
  if (kernel.shape()[0] % 2 == 0 || kernel.shape()[1] % 2 == 0) {
    throw ShapeError("conv2d same-padding requires odd kernel extents, got " +
                     shape_str(kernel.shape()));
  }
  if (x.shape()[2] != kernel.shape()[2]) {
    throw ShapeError("conv2d channel mismatch: input has " + std::to_string(x.shape()[2]) +
                     " channels, kernel expects " + std::to_string(kernel.shape()[2]));
  }
}

}  // namespace detail

/// out[i,j,o] = bias[o] + sum_{di,dj,c} x~[i+di-ph, j+dj-pw, c] * kernel[di,dj,c,o]
/// with x~ zero outside bounds and (ph, pw) the half-kernel offsets.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& bias) {
  detail::check_conv_args(x, kernel);
  const Index h = x.shape()[0], w = x.shape()[1], cin = x.shape()[2];
  const Index kh = kernel.shape()[0], kw = kernel.shape()[1], cout = kernel.shape()[3];
  if (bias.rank() != 1 || bias.shape()[0] != cout) {
    throw ShapeError("conv2d bias must be [cout=" + std::to_string(cout) + "], got " +
                     detail::shape_str(bias.shape()));
  }
  const Index ph = (kh - 1) / 2, pw = (kw - 1) / 2;

  Tensor<T> out({h, w, cout});
  const T* kdata = kernel.data();
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      T* op = out.data() + (i * w + j) * cout;
      for (Index o = 0; o < cout; ++o) op[o] = bias[o];
      for (Index di = 0; di < kh; ++di) {
        const Index ii = i + di - ph;
        if (ii < 0 || ii >= h) continue;
        for (Index dj = 0; dj < kw; ++dj) {
          const Index jj = j + dj - pw;
          if (jj < 0 || jj >= w) continue;
          const T* xp = x.data() + (ii * w + jj) * cin;
          const T* kp = kdata + (di * kw + dj) * cin * cout;
          for (Index c = 0; c < cin; ++c) {
            const T xv = xp[c];
            const T* kc = kp + c * cout;
            for (Index o = 0; o < cout; ++o) op[o] += xv * kc[o];
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const ConvLayer<T>& layer) {
  return conv2d_forward(x, layer.kernel, layer.bias);
}

template <typename T>
struct ConvGrads {
  Tensor<T> dx;
  Tensor<T> dkernel;
  Tensor<T> dbias;
};

/// Exact gradients of conv2d_forward. dBias[o] = sum_{i,j} dOut[i,j,o].
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& dout) {
  detail::check_conv_args(x, kernel);
  const Index h = x.shape()[0], w = x.shape()[1], cin = x.shape()[2];
  const Index kh = kernel.shape()[0], kw = kernel.shape()[1], cout = kernel.shape()[3];
  const Index ph = (kh - 1) / 2, pw = (kw - 1) / 2;
  if (dout.shape() != Shape{h, w, cout}) {
    throw ShapeError("conv2d_backward dOut shape " + detail::shape_str(dout.shape()) +
                     " does not match forward output [" + std::to_string(h) + ", " +
                     std::to_string(w) + ", " + std::to_string(cout) + "]");
  }

  ConvGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(kernel.shape()), Tensor<T>({cout})};
  const T* kdata = kernel.data();
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      const T* gp = dout.data() + (i * w + j) * cout;
      for (Index o = 0; o < cout; ++o) g.dbias[o] += gp[o];
      for (Index di = 0; di < kh; ++di) {
        const Index ii = i + di - ph;
        if (ii < 0 || ii >= h) continue;
        for (Index dj = 0; dj < kw; ++dj) {
          const Index jj = j + dj - pw;
          if (jj < 0 || jj >= w) continue;
          const T* xp = x.data() + (ii * w + jj) * cin;
          T* dxp = g.dx.data() + (ii * w + jj) * cin;
          const Index koff = (di * kw + dj) * cin * cout;
          for (Index c = 0; c < cin; ++c) {
            const T xv = xp[c];
            const T* kc = kdata + koff + c * cout;
            T* dkc = g.dkernel.data() + koff + c * cout;
            T acc{};
            for (Index o = 0; o < cout; ++o) {
              dkc[o] += xv * gp[o];
              acc += kc[o] * gp[o];
            }
            dxp[c] += acc;
          }
        }
      }
    }
  }
  return g;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const ConvLayer<T>& layer, const Tensor<T>& dout) {
  return conv2d_backward(x, layer.kernel, dout);
}

namespace detail {

inline void check_pool_spec(const PoolSpec& spec) {
  if (spec.ph < 1 || spec.pw < 1) {
    throw ConfigError("pool extents must be >= 1, got (" + std::to_string(spec.ph) + ", " +
                      std::to_string(spec.pw) + ")");
  }
}

}  // namespace detail

inline Shape maxpool2d_out_shape(const Shape& in, const PoolSpec& spec) {
  detail::check_pool_spec(spec);
  if (in.size() != 3) throw ShapeError("maxpool2d requires a rank-3 input, got " + detail::shape_str(in));
  const Index oh = in[0] / spec.ph, ow = in[1] / spec.pw;
  if (oh < 1 || ow < 1) {
    throw ShapeError("maxpool2d " + detail::shape_str(in) + " with (" + std::to_string(spec.ph) +
                     ", " + std::to_string(spec.pw) + ") yields an empty output; zero-pad upstream");
  }
  return {oh, ow, in[2]};
}

template <typename T>
Tensor<T> maxpool2d_forward(const Tensor<T>& x, const PoolSpec& spec) {
  detail::require_rank3(x, "maxpool2d");
  const Shape os = maxpool2d_out_shape(x.shape(), spec);
  const Index w = x.shape()[1], c = x.shape()[2];
  const Index oh = os[0], ow = os[1];

  Tensor<T> out(os);
  for (Index oi = 0; oi < oh; ++oi) {
    for (Index oj = 0; oj < ow; ++oj) {
      T* op = out.data() + (oi * ow + oj) * c;
      for (Index ch = 0; ch < c; ++ch) {
        T best = -std::numeric_limits<T>::infinity();
        for (Index wi = 0; wi < spec.ph; ++wi) {
          const T* row = x.data() + ((oi * spec.ph + wi) * w + oj * spec.pw) * c + ch;
          for (Index wj = 0; wj < spec.pw; ++wj) {
            const T v = row[wj * c];
            if (v > best) best = v;
          }
        }
        op[ch] = best;
      }
    }
  }
  return out;
}

/// Routes each dOut value to the argmax of its window; ties go to the first
/// position in row-major scan order. Dropped trailing cells get zero gradient.
template <typename T>
Tensor<T> maxpool2d_backward(const Tensor<T>& x, const PoolSpec& spec, const Tensor<T>& dout) {
  detail::require_rank3(x, "maxpool2d");
  const Shape os = maxpool2d_out_shape(x.shape(), spec);
  if (dout.shape() != os) {
    throw ShapeError("maxpool2d_backward dOut shape " + detail::shape_str(dout.shape()) +
                     " does not match pooled shape " + detail::shape_str(os));
  }
  const Index w = x.shape()[1], c = x.shape()[2];
  const Index oh = os[0], ow = os[1];

  Tensor<T> dx(x.shape());
  for (Index oi = 0; oi < oh; ++oi) {
    for (Index oj = 0; oj < ow; ++oj) {
      const T* gp = dout.data() + (oi * ow + oj) * c;
      for (Index ch = 0; ch < c; ++ch) {
        T best = -std::numeric_limits<T>::infinity();
        Index best_off = -1;
        for (Index wi = 0; wi < spec.ph; ++wi) {
          for (Index wj = 0; wj < spec.pw; ++wj) {
            const Index off = ((oi * spec.ph + wi) * w + (oj * spec.pw + wj)) * c + ch;
            if (x[off] > best) {
              best = x[off];
              best_off = off;
            }
          }
        }
        dx[best_off] += gp[ch];
      }
    }
  }
  return dx;
}

/// Zero-pads the bottom/right spatial edges to [th, tw, c]. Used ahead of a
/// pool whose window exceeds the remaining extent.
template <typename T>
Tensor<T> zero_pad_hw(const Tensor<T>& x, Index th, Index tw) {
  detail::require_rank3(x, "zero_pad_hw");
  const Index h = x.shape()[0], w = x.shape()[1], c = x.shape()[2];
  if (th < h || tw < w) {
    throw ShapeError("zero_pad_hw target " + std::to_string(th) + "x" + std::to_string(tw) +
                     " is smaller than input " + detail::shape_str(x.shape()));
  }
  Tensor<T> out({th, tw, c});
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      const T* xp = x.data() + (i * w + j) * c;
      T* op = out.data() + (i * tw + j) * c;
      for (Index ch = 0; ch < c; ++ch) op[ch] = xp[ch];
    }
  }
  return out;
}

/// Gradient of zero_pad_hw: crop back to [h, w, c].
template <typename T>
Tensor<T> crop_hw(const Tensor<T>& g, Index h, Index w) {
  detail::require_rank3(g, "crop_hw");
  const Index th = g.shape()[0], tw = g.shape()[1], c = g.shape()[2];
  if (h > th || w > tw) {
    throw ShapeError("crop_hw target exceeds input " + detail::shape_str(g.shape()));
  }
  Tensor<T> out({h, w, c});
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      const T* gp = g.data() + (i * tw + j) * c;
      T* op = out.data() + (i * w + j) * c;
      for (Index ch = 0; ch < c; ++ch) op[ch] = gp[ch];
    }
  }
  return out;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> out(x.shape());
  for (Index i = 0; i < x.size(); ++i) out[i] = x[i] > T{} ? x[i] : T{};
  return out;
}

/// Subgradient at 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& dout) {
  detail::require_same_shape(x, dout, "relu_backward");
  Tensor<T> dx(x.shape());
  for (Index i = 0; i < x.size(); ++i) dx[i] = x[i] > T{} ? dout[i] : T{};
  return dx;
}

/// y = W^T x + b with W stored [in, out] row-major.
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias) {
  if (x.rank() != 1) {
    throw ShapeError("dense requires a rank-1 input, got " + detail::shape_str(x.shape()));
  }
  if (weights.rank() != 2) {
    throw ShapeError("dense weights must be rank-2 [in,out], got " +
                     detail::shape_str(weights.shape()));
  }
  if (weights.shape()[0] != x.size()) {
    throw ShapeError("dense input extent " + std::to_string(x.size()) +
                     " does not match weights " + detail::shape_str(weights.shape()));
  }
  if (bias.rank() != 1 || bias.shape()[0] != weights.shape()[1]) {
    throw ShapeError("dense bias shape " + detail::shape_str(bias.shape()) +
                     " does not match weights " + detail::shape_str(weights.shape()));
  }
  const Index in = weights.shape()[0], out_n = weights.shape()[1];
  Tensor<T> y({out_n});
  for (Index j = 0; j < out_n; ++j) y[j] = bias[j];
  for (Index i = 0; i < in; ++i) {
    const T xv = x[i];
    const T* wrow = weights.data() + i * out_n;
    for (Index j = 0; j < out_n; ++j) y[j] += xv * wrow[j];
  }
  return y;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const DenseLayer<T>& layer) {
  return dense_forward(x, layer.weights, layer.bias);
}

template <typename T>
struct DenseGrads {
  Tensor<T> dx;
  Tensor<T> dweights;
  Tensor<T> dbias;
};

/// dX = W dOut, dW = x (outer) dOut, dB = dOut.
template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& dout) {
  if (x.rank() != 1 || weights.rank() != 2 || weights.shape()[0] != x.size()) {
    throw ShapeError("dense_backward input " + detail::shape_str(x.shape()) +
                     " does not match weights " + detail::shape_str(weights.shape()));
  }
  const Index in = weights.shape()[0], out_n = weights.shape()[1];
  if (dout.rank() != 1 || dout.size() != out_n) {
    throw ShapeError("dense_backward dOut shape " + detail::shape_str(dout.shape()) +
                     " does not match output extent " + std::to_string(out_n));
  }
  DenseGrads<T> g{Tensor<T>({in}), Tensor<T>({in, out_n}), dout};
  for (Index i = 0; i < in; ++i) {
    const T xv = x[i];
    const T* wrow = weights.data() + i * out_n;
    T* dwrow = g.dweights.data() + i * out_n;
    T acc{};
    for (Index j = 0; j < out_n; ++j) {
      dwrow[j] = xv * dout[j];
      acc += wrow[j] * dout[j];
    }
    g.dx[i] = acc;
  }
  return g;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const DenseLayer<T>& layer, const Tensor<T>& dout) {
  return dense_backward(x, layer.weights, dout);
}

template <typename T>
struct DropoutResult {
  Tensor<T> y;
  Tensor<T> mask;  // 0 for dropped units, 1/(1-rate) for kept ones
};

/// Inverted dropout: units survive with probability 1-rate and are scaled by
/// 1/(1-rate), so eval mode is the identity with an all-ones mask.
template <typename T>
DropoutResult<T> dropout(const Tensor<T>& x, const DropoutSpec& spec, std::uint64_t seed) {
  if (spec.rate < 0.0 || spec.rate >= 1.0) {
    throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(spec.rate));
  }
  if (spec.mode == DropoutMode::kEval || spec.rate == 0.0) {
    return DropoutResult<T>{x, Tensor<T>::constant(x.shape(), T{1})};
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - spec.rate));
  DropoutResult<T> r{Tensor<T>(x.shape()), Tensor<T>(x.shape())};
  Rng rng(seed);
  for (Index i = 0; i < x.size(); ++i) {
    if (rng.u01() >= spec.rate) {
      r.mask[i] = keep_scale;
      r.y[i] = x[i] * keep_scale;
    }
  }
  return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& dout) {
  return hadamard(mask, dout);
}

/// Max-shifted exponentials, so arbitrarily large logits stay finite.
template <typename T>
Tensor<T> softmax(const Tensor<T>& z) {
  if (z.rank() != 1 || z.size() < 1) {
    throw ShapeError("softmax requires a nonempty rank-1 input, got " + detail::shape_str(z.shape()));
  }
  const T zmax = max_value(z);
  Tensor<T> p(z.shape());
  double total = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    const double e = std::exp(static_cast<double>(z[i] - zmax));
    p[i] = static_cast<T>(e);
    total += e;
  }
  for (Index i = 0; i < z.size(); ++i) p[i] = static_cast<T>(static_cast<double>(p[i]) / total);
  return p;
}

}  // namespace moodnet
