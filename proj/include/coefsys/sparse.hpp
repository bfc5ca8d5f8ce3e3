#ifndef COEFSYS_SPARSE_HPP
#define COEFSYS_SPARSE_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "howell.hpp"

namespace coefsys::linalg {

/// Sparse vector: (index, value) pairs with strictly increasing index and
/// nonzero values.
using SparseVec = std::vector<std::pair<std::uint32_t, Elem>>;

inline SparseVec to_sparse(std::span<const Elem> v)
{
  SparseVec s;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i])
      s.emplace_back(static_cast<std::uint32_t>(i), v[i]);
  return s;
}

inline Vec to_dense(const SparseVec& s, std::size_t n)
{
  Vec v(n, 0);
  for (auto [i, x] : s)
    v[i] = x;
  return v;
}

/// a + f * b modulo q.
inline SparseVec axpy(const SparseVec& a, Elem f, const SparseVec& b, Elem q)
{
  SparseVec out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      Elem x = (f * b[j].second) % q;
      if (x)
        out.emplace_back(b[j].first, x);
      ++j;
    } else {
      Elem x = (a[i].second + f * b[j].second) % q;
      if (x)
        out.emplace_back(a[i].first, x);
      ++i;
      ++j;
    }
  }
  return out;
}

/// Sparse column-major matrix used for linear maps given column by column
/// (f(e_j) = column j).
class SparseMat {
public:
  SparseMat() = default;
  SparseMat(RingSpec ring, std::size_t rows, std::size_t cols) : ring_(ring), rows_(rows), cols_(cols)
  {
    data_.resize(cols);
  }

  const RingSpec& ring() const { return ring_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const SparseVec& column(std::size_t j) const { return data_[j]; }
  SparseVec& column(std::size_t j) { return data_[j]; }

  /// Adds x to entry (i, j); the column is kept sorted.
  void add(std::size_t i, std::size_t j, Elem x)
  {
    x = ring_.reduce(x);
    if (!x)
      return;
    SparseVec single{{static_cast<std::uint32_t>(i), x}};
    data_[j] = axpy(data_[j], 1, single, ring_.modulus());
  }

  Vec apply(std::span<const Elem> v) const
  {
    Vec out(rows_, 0);
    const Elem q = ring_.modulus();
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!v[j])
        continue;
      for (auto [i, x] : data_[j])
        out[i] = (out[i] + x * v[j]) % q;
    }
    return out;
  }

  SparseVec apply_sparse(const SparseVec& v) const
  {
    Vec dense(rows_, 0);
    const Elem q = ring_.modulus();
    for (auto [j, c] : v)
      for (auto [i, x] : data_[j])
        dense[i] = (dense[i] + x * c) % q;
    return to_sparse(dense);
  }

  Mat to_dense() const
  {
    Mat m(ring_, rows_, cols_);
    for (std::size_t j = 0; j < cols_; ++j)
      for (auto [i, x] : data_[j])
        m(i, j) = x;
    return m;
  }

  std::size_t nnz() const
  {
    std::size_t n = 0;
    for (const auto& c : data_)
      n += c.size();
    return n;
  }

private:
  RingSpec ring_;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<SparseVec> data_;
};

/// Incremental row echelon form over F_p for sparse rows.
///
/// Columns are eliminated in a caller-chosen order (rank, span membership and
/// solutions do not depend on it, fill-in does).  Optionally records for each
/// pivot row the combination of inserted rows producing it, which makes
/// solve() available.
class SparseEchelon {
public:
  SparseEchelon(RingSpec ring, std::size_t ncols, bool track = false,
                std::vector<std::uint32_t> order = {})
  : ring_(ring), n_(ncols), track_(track), pivot_of_(ncols, -1)
  {
    if (!ring.is_field())
      throw Error("SparseEchelon: sparse elimination is only available over a field");
    if (order.empty()) {
      pos_.resize(ncols);
      std::iota(pos_.begin(), pos_.end(), 0u);
    } else {
      if (order.size() != ncols)
        throw Error("SparseEchelon: order size mismatch");
      pos_ = std::move(order);
    }
    col_of_.assign(ncols, 0);
    for (std::size_t c = 0; c < ncols; ++c)
      col_of_[pos_[c]] = static_cast<std::uint32_t>(c);
  }

  std::size_t ncols() const { return n_; }
  std::size_t rank() const { return rows_.size(); }
  std::size_t inserted() const { return count_; }

  /// Returns true when the row was independent of the rows inserted so far.
  bool insert(const SparseVec& row)
  {
    const std::size_t tag = count_++;
    SparseVec r = to_pos(row);
    SparseVec comb;
    if (track_)
      comb.emplace_back(static_cast<std::uint32_t>(tag), 1);
    const Elem q = ring_.modulus();
    while (!r.empty()) {
      const std::uint32_t lead = r.front().first;
      const int piv = pivot_of_[lead];
      if (piv < 0) {
        const Elem inv = ring_.inverse(r.front().second);
        for (auto& [i, x] : r)
          x = (x * inv) % q;
        if (track_)
          for (auto& [i, x] : comb)
            x = (x * inv) % q;
        pivot_of_[lead] = static_cast<int>(rows_.size());
        rows_.push_back(std::move(r));
        combs_.push_back(std::move(comb));
        return true;
      }
      const Elem f = q - r.front().second;
      r = axpy(r, f, rows_[static_cast<std::size_t>(piv)], q);
      if (track_)
        comb = axpy(comb, f, combs_[static_cast<std::size_t>(piv)], q);
    }
    if (track_)
      last_relation_ = std::move(comb);
    return false;
  }

  /// With tracking: after insert() returned false, the combination of
  /// inserted rows (including the last one) that vanishes.
  const SparseVec& last_relation() const { return last_relation_; }

  bool insert_dense(std::span<const Elem> row) { return insert(to_sparse(row)); }

  /// Drops the recorded combinations; later inserts are untracked.
  void disable_tracking()
  {
    track_ = false;
    combs_.clear();
    combs_.shrink_to_fit();
    last_relation_.clear();
  }

  bool contains(const SparseVec& v) const { return reduce(v).first.empty(); }

  /// Normal form of v modulo the row space: supported on non-pivot columns
  /// only, in the original column coordinates.
  SparseVec residual(const SparseVec& v) const
  {
    SparseVec r;
    for (auto [pos, x] : reduce(v).first)
      r.emplace_back(col_of_[pos], x);
    std::sort(r.begin(), r.end());
    return r;
  }

  bool is_pivot_column(std::size_t col) const { return pivot_of_[pos_[col]] >= 0; }

  /// Coefficients x (indexed by insertion order) with sum x_i row_i == b.
  std::optional<Vec> solve(const SparseVec& b) const
  {
    if (!track_)
      throw Error("SparseEchelon::solve requires tracking");
    auto [res, x] = reduce(b);
    if (!res.empty())
      return std::nullopt;
    return to_dense(x, count_);
  }

  /// Reduced row echelon form in elimination-position order, returned in the
  /// original column coordinates.  With the identity order this equals the
  /// dense Howell form over F_p.
  std::vector<Vec> rref() const
  {
    std::vector<std::uint32_t> leads;
    for (std::size_t c = 0; c < n_; ++c)
      if (pivot_of_[c] >= 0)
        leads.push_back(static_cast<std::uint32_t>(c));
    std::vector<SparseVec> red(leads.size());
    const Elem q = ring_.modulus();
    for (std::size_t k = leads.size(); k-- > 0;) {
      SparseVec r = rows_[static_cast<std::size_t>(pivot_of_[leads[k]])];
      // eliminate entries sitting on later pivot columns
      for (std::size_t t = 1; t < r.size();) {
        const std::uint32_t c = r[t].first;
        const int piv = pivot_of_[c];
        if (piv < 0) {
          ++t;
          continue;
        }
        const auto kk = static_cast<std::size_t>(
          std::lower_bound(leads.begin(), leads.end(), c) - leads.begin());
        const Elem f = q - r[t].second;
        r = axpy(r, f, red[kk], q);
        t = 1;
        while (t < r.size() && r[t].first <= c)
          ++t;
      }
      red[k] = std::move(r);
    }
    std::vector<Vec> out;
    for (const auto& r : red) {
      Vec v(n_, 0);
      for (auto [pos, x] : r)
        v[col_of_[pos]] = x;
      out.push_back(std::move(v));
    }
    return out;
  }

private:
  SparseVec to_pos(const SparseVec& row) const
  {
    SparseVec r;
    r.reserve(row.size());
    for (auto [c, x] : row) {
      Elem y = ring_.reduce(x);
      if (y)
        r.emplace_back(pos_[c], y);
    }
    std::sort(r.begin(), r.end());
    return r;
  }

  std::pair<SparseVec, SparseVec> reduce(const SparseVec& b) const
  {
    SparseVec r = to_pos(b);
    SparseVec x;
    const Elem q = ring_.modulus();
    std::size_t t = 0;
    while (t < r.size()) {
      const std::uint32_t lead = r[t].first;
      const int piv = pivot_of_[lead];
      if (piv < 0) {
        ++t;
        continue;
      }
      const Elem f = r[t].second;
      r = axpy(r, q - f, rows_[static_cast<std::size_t>(piv)], q);
      if (track_)
        x = axpy(x, f, combs_[static_cast<std::size_t>(piv)], q);
      t = 0;
      while (t < r.size() && r[t].first <= lead)
        ++t;
    }
    return {r, x};
  }

  RingSpec ring_;
  std::size_t n_;
  bool track_;
  std::size_t count_ = 0;
  std::vector<std::uint32_t> pos_;
  std::vector<std::uint32_t> col_of_;
  std::vector<int> pivot_of_;
  std::vector<SparseVec> rows_;
  std::vector<SparseVec> combs_;
  SparseVec last_relation_;
};

/// Sparse-path canonical form over F_p; identical to howell_form() there.
inline CanonicalBasis howell_form_sparse(const Mat& m)
{
  SparseEchelon se(m.ring(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    se.insert_dense(m.row(i));
  return CanonicalBasis::from_reduced_rows(m.ring(), m.cols(), se.rref());
}

} // namespace coefsys::linalg

#endif
