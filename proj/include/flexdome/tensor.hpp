#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace flexdome {

// Dense row-major tables. Index order follows the math throughout:
// (step, state), (step, state, action), (step, state, action, next state).

class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(int n0, int n1, double fill = 0.0)
      : n0_(n0), n1_(n1), v_(static_cast<std::size_t>(n0) * n1, fill) {}

  double& operator()(int i, int j) {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_);
    return v_[static_cast<std::size_t>(i) * n1_ + j];
  }
  double operator()(int i, int j) const {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_);
    return v_[static_cast<std::size_t>(i) * n1_ + j];
  }

  const double* row(int i) const { return &v_[static_cast<std::size_t>(i) * n1_]; }
  double* row(int i) { return &v_[static_cast<std::size_t>(i) * n1_]; }

  int dim0() const { return n0_; }
  int dim1() const { return n1_; }
  std::size_t size() const { return v_.size(); }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  void fill(double x) { v_.assign(v_.size(), x); }
  bool operator==(const Tensor2& o) const = default;

 private:
  int n0_ = 0, n1_ = 0;
  std::vector<double> v_;
};

class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int n0, int n1, int n2, double fill = 0.0)
      : n0_(n0), n1_(n1), n2_(n2),
        v_(static_cast<std::size_t>(n0) * n1 * n2, fill) {}

  double& operator()(int i, int j, int k) {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_ && k >= 0 && k < n2_);
    return v_[(static_cast<std::size_t>(i) * n1_ + j) * n2_ + k];
  }
  double operator()(int i, int j, int k) const {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_ && k >= 0 && k < n2_);
    return v_[(static_cast<std::size_t>(i) * n1_ + j) * n2_ + k];
  }

  const double* row(int i, int j) const {
    return &v_[(static_cast<std::size_t>(i) * n1_ + j) * n2_];
  }
  double* row(int i, int j) {
    return &v_[(static_cast<std::size_t>(i) * n1_ + j) * n2_];
  }

  int dim0() const { return n0_; }
  int dim1() const { return n1_; }
  int dim2() const { return n2_; }
  std::size_t size() const { return v_.size(); }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  void fill(double x) { v_.assign(v_.size(), x); }
  bool same_shape(const Tensor3& o) const {
    return n0_ == o.n0_ && n1_ == o.n1_ && n2_ == o.n2_;
  }
  bool operator==(const Tensor3& o) const = default;

 private:
  int n0_ = 0, n1_ = 0, n2_ = 0;
  std::vector<double> v_;
};

class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int n0, int n1, int n2, int n3, double fill = 0.0)
      : n0_(n0), n1_(n1), n2_(n2), n3_(n3),
        v_(static_cast<std::size_t>(n0) * n1 * n2 * n3, fill) {}

  double& operator()(int i, int j, int k, int l) {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_ && k >= 0 && k < n2_ &&
           l >= 0 && l < n3_);
    return v_[((static_cast<std::size_t>(i) * n1_ + j) * n2_ + k) * n3_ + l];
  }
  double operator()(int i, int j, int k, int l) const {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_ && k >= 0 && k < n2_ &&
           l >= 0 && l < n3_);
    return v_[((static_cast<std::size_t>(i) * n1_ + j) * n2_ + k) * n3_ + l];
  }

  // Pointer to the row over the last index; the hot loops walk these directly.
  const double* row(int i, int j, int k) const {
    return &v_[((static_cast<std::size_t>(i) * n1_ + j) * n2_ + k) * n3_];
  }
  double* row(int i, int j, int k) {
    return &v_[((static_cast<std::size_t>(i) * n1_ + j) * n2_ + k) * n3_];
  }

  int dim0() const { return n0_; }
  int dim1() const { return n1_; }
  int dim2() const { return n2_; }
  int dim3() const { return n3_; }
  std::size_t size() const { return v_.size(); }
  void fill(double x) { v_.assign(v_.size(), x); }
  bool operator==(const Tensor4& o) const = default;

 private:
  int n0_ = 0, n1_ = 0, n2_ = 0, n3_ = 0;
  std::vector<double> v_;
};

}  // namespace flexdome
