#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "moodnet/errors.hpp"
#include "moodnet/rng.hpp"

namespace moodnet {

using Index = std::int64_t;
using Shape = std::vector<Index>;

namespace detail {

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

/// Validates extents and returns their product. Rejects zero/negative extents
/// and products that would overflow a signed 64-bit count.
inline Index checked_numel(const Shape& shape) {
  Index n = 1;
  for (Index e : shape) {
    if (e < 1) {
      throw ShapeError("tensor extent must be >= 1, got shape " + shape_str(shape));
    }
    if (n > std::numeric_limits<Index>::max() / e) {
      throw ShapeError("tensor shape " + shape_str(shape) + " overflows element count");
    }
    n *= e;
  }
  return n;
}

}  // namespace detail

/// Dense N-dimensional array of reals, row-major, immutable shape. All tensor
/// ops return new tensors; inputs are never mutated.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape)
      : shape_(std::move(shape)),
        data_(static_cast<std::size_t>(detail::checked_numel(shape_)), T{}) {}

  Tensor(Shape shape, T fill)
      : shape_(std::move(shape)),
        data_(static_cast<std::size_t>(detail::checked_numel(shape_)), fill) {}

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  static Tensor constant(Shape shape, T value) { return Tensor(std::move(shape), value); }

  static Tensor uniform(Shape shape, T lo, T hi, std::uint64_t seed) {
    Tensor t(std::move(shape));
    Rng rng(seed);
    for (auto& v : t.data_) v = static_cast<T>(rng.uniform(static_cast<double>(lo), static_cast<double>(hi)));
    return t;
  }

  static Tensor gaussian(Shape shape, T sigma, std::uint64_t seed) {
    Tensor t(std::move(shape));
    Rng rng(seed);
    for (auto& v : t.data_) v = static_cast<T>(rng.gaussian(static_cast<double>(sigma)));
    return t;
  }

  const Shape& shape() const noexcept { return shape_; }
  Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
  Index size() const noexcept { return static_cast<Index>(data_.size()); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  T& operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](Index i) const { return data_[static_cast<std::size_t>(i)]; }

  /// Bounds-checked multi-dimensional access.
  T& at(std::initializer_list<Index> idx) { return data_[offset_of(idx)]; }
  const T& at(std::initializer_list<Index> idx) const {
    return data_[const_cast<Tensor*>(this)->offset_of(idx)];
  }

  /// Same data, new shape metadata. Element counts must match.
  Tensor reshape(Shape new_shape) const {
    if (detail::checked_numel(new_shape) != size()) {
      throw ShapeError("reshape from " + detail::shape_str(shape_) + " to " +
                       detail::shape_str(new_shape) + " changes element count");
    }
    Tensor out;
    out.shape_ = std::move(new_shape);
    out.data_ = data_;
    return out;
  }

  /// Rank-1 view of the data in row-major order.
  Tensor flatten() const { return reshape({size()}); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (Index i = 0; i < size(); ++i) out[i] = static_cast<U>(data_[static_cast<std::size_t>(i)]);
    return out;
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t offset_of(std::initializer_list<Index> idx) {
    if (static_cast<Index>(idx.size()) != rank()) {
      throw ShapeError("index rank " + std::to_string(idx.size()) + " does not match tensor rank " +
                       std::to_string(rank()));
    }
    Index off = 0;
    Index d = 0;
    for (Index i : idx) {
      if (i < 0 || i >= shape_[static_cast<std::size_t>(d)]) {
        throw ShapeError("index " + std::to_string(i) + " out of bounds for axis " +
                         std::to_string(d) + " of " + detail::shape_str(shape_));
      }
      off = off * shape_[static_cast<std::size_t>(d)] + i;
      ++d;
    }
    return static_cast<std::size_t>(off);
  }

  Shape shape_;
  std::vector<T> data_;
};

/// C[i,j] = sum_t A[i,t] * B[t,j] for rank-2 operands.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul requires rank-2 tensors, got " + detail::shape_str(a.shape()) +
                     " and " + detail::shape_str(b.shape()));
  }
  const Index m = a.shape()[0], k = a.shape()[1];
  const Index k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2) {
    throw ShapeError("matmul inner extents differ: " + detail::shape_str(a.shape()) + " vs " +
                     detail::shape_str(b.shape()));
  }
  Tensor<T> c({m, n});
  for (Index i = 0; i < m; ++i) {
    T* crow = c.data() + i * n;
    for (Index t = 0; t < k; ++t) {
      const T av = a[i * k + t];
      const T* brow = b.data() + t * n;
      for (Index j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

/// Rank-1 concatenation: A's entries followed by B's.
template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 1 || b.rank() != 1) {
    throw ShapeError("concat requires rank-1 tensors, got " + detail::shape_str(a.shape()) +
                     " and " + detail::shape_str(b.shape()));
  }
  Tensor<T> out({a.size() + b.size()});
  for (Index i = 0; i < a.size(); ++i) out[i] = a[i];
  for (Index i = 0; i < b.size(); ++i) out[a.size() + i] = b[i];
  return out;
}

namespace detail {
template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + " requires identical shapes, got " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()));
  }
}
}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "add");
  Tensor<T> out(a.shape());
  for (Index i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "sub");
  Tensor<T> out(a.shape());
  for (Index i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

/// Elementwise product.
template <typename T>
Tensor<T> hadamard(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "hadamard");
  Tensor<T> out(a.shape());
  for (Index i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  Tensor<T> out(a.shape());
  for (Index i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

template <typename T>
double sum(const Tensor<T>& a) {
  double acc = 0.0;
  for (Index i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]);
  return acc;
}

template <typename T>
double mean(const Tensor<T>& a) {
  return sum(a) / static_cast<double>(a.size());
}

template <typename T>
T max_value(const Tensor<T>& a) {
  T best = a[0];
  for (Index i = 1; i < a.size(); ++i) best = a[i] > best ? a[i] : best;
  return best;
}

template <typename T>
T min_value(const Tensor<T>& a) {
  T best = a[0];
  for (Index i = 1; i < a.size(); ++i) best = a[i] < best ? a[i] : best;
  return best;
}

template <typename T>
bool all_finite(const Tensor<T>& a) {
  for (Index i = 0; i < a.size(); ++i) {
    if (!std::isfinite(static_cast<double>(a[i]))) return false;
  }
  return true;
}

}  // namespace moodnet
