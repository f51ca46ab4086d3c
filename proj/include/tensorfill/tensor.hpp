#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tensorfill/errors.hpp"

namespace tensorfill {

using Index = std::ptrdiff_t;

/// Dense rank-3 array with C layout: the last index varies fastest in memory.
template <typename T>
class Tensor3T {
 public:
  Tensor3T() = default;

  Tensor3T(Index n1, Index n2, Index n3, T init = T{})
      : n1_(n1), n2_(n2), n3_(n3) {
    if (n1 < 0 || n2 < 0 || n3 < 0) {
      throw ShapeError("Tensor3: negative dimension");
    }
    data_.assign(static_cast<std::size_t>(n1 * n2 * n3), init);
  }

  Index dim1() const { return n1_; }
  Index dim2() const { return n2_; }
  Index dim3() const { return n3_; }
  Index dim(int axis) const {
    contract(axis >= 1 && axis <= 3, "Tensor3::dim axis in {1,2,3}");
    return axis == 1 ? n1_ : (axis == 2 ? n2_ : n3_);
  }
  Index size() const { return n1_ * n2_ * n3_; }

  T& operator()(Index i, Index j, Index k) { return data_[flat(i, j, k)]; }
  const T& operator()(Index i, Index j, Index k) const {
    return data_[flat(i, j, k)];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(T v) { data_.assign(data_.size(), v); }

  bool same_shape(const Tensor3T& other) const {
    return n1_ == other.n1_ && n2_ == other.n2_ && n3_ == other.n3_;
  }

  friend bool operator==(const Tensor3T& a, const Tensor3T& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  std::size_t flat(Index i, Index j, Index k) const {
    return static_cast<std::size_t>((i * n2_ + j) * n3_ + k);
  }

  Index n1_ = 0;
  Index n2_ = 0;
  Index n3_ = 0;
  std::vector<T> data_;
};

using Tensor3 = Tensor3T<double>;
using Mask3 = Tensor3T<std::uint8_t>;

inline double frobenius_norm(const Tensor3& x) {
  double s = 0.0;
  const double* p = x.data();
  for (Index i = 0; i < x.size(); ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

inline double frobenius_distance(const Tensor3& a, const Tensor3& b) {
  contract(a.same_shape(b), "frobenius_distance: shapes match");
  double s = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (Index i = 0; i < a.size(); ++i) {
    const double d = pa[i] - pb[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(const Tensor3& x) {
  const double* p = x.data();
  for (Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

inline Index count_true(const Mask3& m) {
  Index n = 0;
  const std::uint8_t* p = m.data();
  for (Index i = 0; i < m.size(); ++i) n += (p[i] != 0);
  return n;
}

}  // namespace tensorfill
