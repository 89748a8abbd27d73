#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace evlogic {

// Dense 1-D tensor of doubles. Fixed shape: construct with the final size
// and never resize.
struct Vec {
  std::vector<double> data;

  Vec() = default;
  explicit Vec(std::size_t n, double fill = 0.0) : data(n, fill) {}
  static Vec of(std::vector<double> values) {
    Vec v;
    v.data = std::move(values);
    return v;
  }

  std::size_t size() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  double* begin() { return data.data(); }
  double* end() { return data.data() + data.size(); }
  const double* begin() const { return data.data(); }
  const double* end() const { return data.data() + data.size(); }
};

// Dense row-major 2-D tensor.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }

  Vec row_vec(std::size_t r) const {
    Vec v(cols);
    for (std::size_t c = 0; c < cols; ++c) v[c] = (*this)(r, c);
    return v;
  }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const Vec& v) {
  for (double x : v.data)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const Mat& m) {
  for (double x : m.data)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double dot(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
  require(x.size() == y.size(), "axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec add(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "add: size mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vec sub(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "sub: size mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vec scaled(const Vec& a, double s) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

// out = M * x
inline Vec matvec(const Mat& m, const Vec& x) {
  require(m.cols == x.size(), "matvec: shape mismatch");
  Vec out(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double s = 0.0;
    const double* mr = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) s += mr[c] * x[c];
    out[r] = s;
  }
  return out;
}

// out = M^T * x
inline Vec matvec_t(const Mat& m, const Vec& x) {
  require(m.rows == x.size(), "matvec_t: shape mismatch");
  Vec out(m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* mr = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += mr[c] * x[r];
  }
  return out;
}

// accum += a * b^T
inline void add_outer(Mat& accum, const Vec& a, const Vec& b) {
  require(accum.rows == a.size() && accum.cols == b.size(),
          "add_outer: shape mismatch");
  for (std::size_t r = 0; r < a.size(); ++r) {
    double* row = accum.row(r);
    for (std::size_t c = 0; c < b.size(); ++c) row[c] += a[r] * b[c];
  }
}

// Cosine similarity; by convention 0 when either vector has zero norm
// (callers that care flag that case separately).
inline double cosine(const Vec& a, const Vec& b, bool* degenerate = nullptr) {
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  if (degenerate) *degenerate = false;
  return dot(a, b) / (na * nb);
}

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Vec concat(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[a.size() + i] = b[i];
  return out;
}

inline Vec concat(const Vec& a, const Vec& b, const Vec& c) {
  return concat(concat(a, b), c);
}

}  // namespace evlogic
