#ifndef COEFSYS_MATRIX_HPP
#define COEFSYS_MATRIX_HPP

#include <algorithm>
#include <cassert>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ring.hpp"

namespace coefsys {

/// Dense matrix over Z/p^e.  Entries are kept as canonical residues 0..p^e-1.
class Mat {
public:
  Mat() = default;
  Mat(RingSpec ring, std::size_t rows, std::size_t cols)
  : ring_(ring), rows_(rows), cols_(cols), data_(rows * cols, 0)
  {}

  static Mat identity(RingSpec ring, std::size_t n)
  {
    Mat m(ring, n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = 1;
    return m;
  }

  static Mat from_rows(RingSpec ring, std::size_t cols, const std::vector<Vec>& rows)
  {
    Mat m(ring, rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols)
        throw Error("from_rows: row length mismatch");
      for (std::size_t j = 0; j < cols; ++j)
        m(i, j) = ring.reduce(rows[i][j]);
    }
    return m;
  }

  const RingSpec& ring() const { return ring_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  Elem& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  Elem operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const Elem> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<Elem> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  Vec row_vec(std::size_t i) const { return Vec(row(i).begin(), row(i).end()); }
  Vec col_vec(std::size_t j) const
  {
    Vec v(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      v[i] = (*this)(i, j);
    return v;
  }

  std::vector<Vec> row_list() const
  {
    std::vector<Vec> out;
    out.reserve(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      out.push_back(row_vec(i));
    return out;
  }

  const std::vector<Elem>& data() const { return data_; }

  bool is_zero() const
  {
    return std::all_of(data_.begin(), data_.end(), [](Elem x) { return x == 0; });
  }

  Mat transpose() const
  {
    Mat t(ring_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        t(j, i) = (*this)(i, j);
    return t;
  }

  friend Mat operator*(const Mat& a, const Mat& b)
  {
    if (a.cols_ != b.rows_)
      throw Error("matrix product: dimension mismatch");
    const RingSpec& r = a.ring_;
    Mat c(r, a.rows_, b.cols_);
    const Elem q = r.modulus();
    for (std::size_t i = 0; i < a.rows_; ++i) {
      Elem* out = c.data_.data() + i * c.cols_;
      for (std::size_t k = 0; k < a.cols_; ++k) {
        Elem x = a(i, k);
        if (x == 0)
          continue;
        const Elem* brow = b.data_.data() + k * b.cols_;
        for (std::size_t j = 0; j < b.cols_; ++j)
          out[j] += x * brow[j];
      }
      for (std::size_t j = 0; j < c.cols_; ++j)
        out[j] %= q;
    }
    return c;
  }

  friend Mat operator+(const Mat& a, const Mat& b)
  {
    check_same_shape(a, b);
    Mat c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i)
      c.data_[i] = a.ring_.add(a.data_[i], b.data_[i]);
    return c;
  }

  friend Mat operator-(const Mat& a, const Mat& b)
  {
    check_same_shape(a, b);
    Mat c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i)
      c.data_[i] = a.ring_.sub(a.data_[i], b.data_[i]);
    return c;
  }

  Mat scaled(Elem s) const
  {
    Mat c = *this;
    for (auto& x : c.data_)
      x = ring_.mul(x, ring_.reduce(s));
    return c;
  }

  /// Matrix acting on a column vector.
  Vec apply(std::span<const Elem> v) const
  {
    if (v.size() != cols_)
      throw Error("apply: dimension mismatch");
    Vec out(rows_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
      Elem acc = 0;
      const Elem* r = data_.data() + i * cols_;
      for (std::size_t j = 0; j < cols_; ++j)
        acc += r[j] * v[j];
      out[i] = acc % ring_.modulus();
    }
    return out;
  }

  /// Row vector times matrix.
  Vec left_apply(std::span<const Elem> v) const
  {
    if (v.size() != rows_)
      throw Error("left_apply: dimension mismatch");
    Vec out(cols_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (v[i] == 0)
        continue;
      const Elem* r = data_.data() + i * cols_;
      for (std::size_t j = 0; j < cols_; ++j)
        out[j] += v[i] * r[j];
    }
    for (auto& x : out)
      x %= ring_.modulus();
    return out;
  }

  Mat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const
  {
    Mat b(ring_, nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j)
        b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  void set_block(std::size_t r0, std::size_t c0, const Mat& b)
  {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j)
        (*this)(r0 + i, c0 + j) = b(i, j);
  }

  static Mat hstack(const Mat& a, const Mat& b)
  {
    if (a.rows_ != b.rows_)
      throw Error("hstack: row mismatch");
    Mat c(a.ring_, a.rows_, a.cols_ + b.cols_);
    c.set_block(0, 0, a);
    c.set_block(0, a.cols_, b);
    return c;
  }

  static Mat vstack(const Mat& a, const Mat& b)
  {
    if (a.cols_ != b.cols_ && !(a.rows_ == 0 || b.rows_ == 0))
      throw Error("vstack: column mismatch");
    std::size_t cols = a.rows_ ? a.cols_ : b.cols_;
    Mat c(a.rows_ ? a.ring_ : b.ring_, a.rows_ + b.rows_, cols);
    if (a.rows_)
      c.set_block(0, 0, a);
    if (b.rows_)
      c.set_block(a.rows_, 0, b);
    return c;
  }

  Mat pow(std::uint64_t k) const
  {
    if (rows_ != cols_)
      throw Error("pow: matrix not square");
    Mat r = identity(ring_, rows_), a = *this;
    while (k) {
      if (k & 1)
        r = r * a;
      a = a * a;
      k >>= 1;
    }
    return r;
  }

  friend bool operator==(const Mat& a, const Mat& b)
  {
    return a.ring_ == b.ring_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  std::string to_string() const
  {
    std::ostringstream os;
    for (std::size_t i = 0; i < rows_; ++i) {
      os << '[';
      for (std::size_t j = 0; j < cols_; ++j)
        os << (j ? " " : "") << (*this)(i, j);
      os << "]\n";
    }
    return os.str();
  }

private:
  static void check_same_shape(const Mat& a, const Mat& b)
  {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw Error("shape mismatch");
  }

  RingSpec ring_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Elem> data_;
};

inline Vec vec_add(const RingSpec& r, std::span<const Elem> a, std::span<const Elem> b)
{
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = r.add(a[i], b[i]);
  return out;
}

inline Vec vec_sub(const RingSpec& r, std::span<const Elem> a, std::span<const Elem> b)
{
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = r.sub(a[i], b[i]);
  return out;
}

inline Vec vec_scale(const RingSpec& r, std::span<const Elem> a, Elem s)
{
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = r.mul(a[i], r.reduce(s));
  return out;
}

inline bool vec_is_zero(std::span<const Elem> a)
{
  return std::all_of(a.begin(), a.end(), [](Elem x) { return x == 0; });
}

inline Vec unit_vec(std::size_t n, std::size_t i)
{
  Vec v(n, 0);
  v[i] = 1;
  return v;
}

} // namespace coefsys

#endif
