#ifndef COEFSYS_HOWELL_HPP
#define COEFSYS_HOWELL_HPP

#include <optional>
#include <vector>

#include "matrix.hpp"

namespace coefsys::linalg {

/// Incremental construction of the Howell form of a row span over Z/p^e.
///
/// Rows are kept in echelon position indexed by their leading column with the
/// leading entry normalized to p^v.  Whenever a row with leading valuation
/// v > 0 enters, the annihilated multiple p^(e-v) * row is fed back in; this
/// maintains the Howell property (every span vector vanishing on the first k
/// columns is a combination of rows leading after column k).
class HowellBuilder {
public:
  HowellBuilder(RingSpec ring, std::size_t ncols) : ring_(ring), n_(ncols), slot_(ncols) {}

  void insert(Vec row)
  {
    if (row.size() != n_)
      throw Error("HowellBuilder: row length mismatch");
    for (auto& x : row)
      x = ring_.reduce(x);
    pending_.push_back(std::move(row));
    drain();
  }

  void insert(std::span<const Elem> row) { insert(Vec(row.begin(), row.end())); }

  std::size_t ncols() const { return n_; }

  std::size_t length() const
  {
    std::size_t total = 0;
    for (std::size_t j = 0; j < n_; ++j)
      if (slot_[j])
        total += static_cast<std::size_t>(ring_.e() - ring_.valuation((*slot_[j])[j]));
    return total;
  }

  /// Span membership by forward reduction through the echelon slots.
  bool contains(std::span<const Elem> v) const
  {
    Vec r(v.begin(), v.end());
    for (auto& x : r)
      x = ring_.reduce(x);
    const Elem q = ring_.modulus();
    for (std::size_t j = 0; j < n_; ++j) {
      if (r[j] == 0)
        continue;
      if (!slot_[j] || r[j] % (*slot_[j])[j] != 0)
        return false;
      const Vec& p = *slot_[j];
      const Elem f = r[j] / p[j];
      for (std::size_t c = j; c < n_; ++c)
        if (p[c])
          r[c] = ((r[c] - f * p[c]) % q + q) % q;
    }
    return true;
  }

  /// Inserts the row if it enlarges the span; returns whether it did.
  bool extend(std::span<const Elem> row)
  {
    if (contains(row))
      return false;
    insert(row);
    return true;
  }

  /// Reduced rows in leading-column order; entries above each pivot p^u
  /// lie in [0, p^u).
  std::vector<Vec> finish() const
  {
    std::vector<std::size_t> leads;
    std::vector<Vec> rows;
    for (std::size_t j = 0; j < n_; ++j)
      if (slot_[j]) {
        leads.push_back(j);
        rows.push_back(*slot_[j]);
      }
    const Elem q = ring_.modulus();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const std::size_t j = leads[k];
      const Elem piv = rows[k][j];
      const Vec& prow = rows[k];
      for (std::size_t i = 0; i < k; ++i) {
        Elem x = rows[i][j];
        if (x < piv)
          continue;
        Elem f = x / piv;
        Vec& r = rows[i];
        for (std::size_t c = j; c < n_; ++c)
          if (prow[c])
            r[c] = ((r[c] - f * prow[c]) % q + q) % q;
      }
    }
    return rows;
  }

private:
  void drain()
  {
    const Elem q = ring_.modulus();
    const int e = ring_.e();
    while (!pending_.empty()) {
      Vec row = std::move(pending_.back());
      pending_.pop_back();
      std::size_t j = 0;
      for (;;) {
        while (j < n_ && row[j] == 0)
          ++j;
        if (j == n_)
          break;
        const int v = ring_.valuation(row[j]);
        auto& piv = slot_[j];
        if (!piv) {
          normalize(row, j);
          if (v > 0)
            pending_.push_back(vec_scale(ring_, row, ring_.ppow(e - v)));
          piv = std::move(row);
          break;
        }
        const Elem pivval = (*piv)[j];
        if (row[j] % pivval == 0) {
          const Elem f = row[j] / pivval;
          const Vec& p = *piv;
          for (std::size_t c = j; c < n_; ++c)
            if (p[c])
              row[c] = ((row[c] - f * p[c]) % q + q) % q;
          continue;
        }
        // row has strictly smaller valuation at j: it becomes the pivot and
        // the old pivot row is reduced against it.
        normalize(row, j);
        if (v > 0)
          pending_.push_back(vec_scale(ring_, row, ring_.ppow(e - v)));
        std::swap(row, *piv);
      }
    }
  }

  void normalize(Vec& row, std::size_t j) const
  {
    const Elem u = ring_.unit_normalizer(row[j]);
    if (u != 1)
      for (std::size_t c = j; c < n_; ++c)
        row[c] = ring_.mul(row[c], u);
  }

  RingSpec ring_;
  std::size_t n_;
  std::vector<std::optional<Vec>> slot_;
  std::vector<Vec> pending_;
};

/// Canonical generating set (Howell form) of a submodule of Lambda^n.  Two
/// submodules are equal iff their canonical bases compare equal.
class CanonicalBasis {
public:
  CanonicalBasis() = default;
  CanonicalBasis(RingSpec ring, std::size_t n) : ring_(ring), n_(n) {}

  static CanonicalBasis from_builder(const HowellBuilder& b, RingSpec ring)
  {
    CanonicalBasis cb(ring, b.ncols());
    cb.rows_ = b.finish();
    return cb;
  }

  static CanonicalBasis span(RingSpec ring, std::size_t n, const std::vector<Vec>& gens)
  {
    HowellBuilder b(ring, n);
    for (const auto& g : gens)
      b.insert(g);
    return from_builder(b, ring);
  }

  /// Wraps rows that are already in reduced canonical form (no re-reduction).
  static CanonicalBasis from_reduced_rows(RingSpec ring, std::size_t n, std::vector<Vec> rows)
  {
    CanonicalBasis cb(ring, n);
    cb.rows_ = std::move(rows);
    return cb;
  }

  static CanonicalBasis full(RingSpec ring, std::size_t n)
  {
    CanonicalBasis cb(ring, n);
    for (std::size_t i = 0; i < n; ++i)
      cb.rows_.push_back(unit_vec(n, i));
    return cb;
  }

  const RingSpec& ring() const { return ring_; }
  std::size_t ambient() const { return n_; }
  std::size_t size() const { return rows_.size(); }
  bool is_zero() const { return rows_.empty(); }
  const std::vector<Vec>& rows() const { return rows_; }
  const Vec& row(std::size_t i) const { return rows_.at(i); }
  Mat matrix() const { return Mat::from_rows(ring_, n_, rows_); }

  std::size_t lead(std::size_t i) const
  {
    const Vec& r = rows_.at(i);
    for (std::size_t j = 0; j < n_; ++j)
      if (r[j])
        return j;
    return n_;
  }

  /// Composition length as a Lambda-module (log_p of the cardinality).
  /// Equals the dimension when e == 1.
  std::size_t length() const
  {
    std::size_t total = 0;
    for (std::size_t i = 0; i < rows_.size(); ++i)
      total += static_cast<std::size_t>(ring_.e() - ring_.valuation(rows_[i][lead(i)]));
    return total;
  }

  bool is_full() const { return length() == n_ * static_cast<std::size_t>(ring_.e()); }

  /// Greedy reduction against the canonical rows; zero iff v is in the span.
  Vec residual(std::span<const Elem> v) const
  {
    Vec r(v.begin(), v.end());
    for (auto& x : r)
      x = ring_.reduce(x);
    const Elem q = ring_.modulus();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const std::size_t j = lead(i);
      const Elem piv = rows_[i][j];
      if (r[j] == 0 || r[j] % piv != 0)
        continue;
      const Elem f = r[j] / piv;
      for (std::size_t c = j; c < n_; ++c)
        if (rows_[i][c])
          r[c] = ((r[c] - f * rows_[i][c]) % q + q) % q;
    }
    return r;
  }

  bool contains(std::span<const Elem> v) const { return vec_is_zero(residual(v)); }

  bool contains(const CanonicalBasis& other) const
  {
    for (const auto& r : other.rows_)
      if (!contains(r))
        return false;
    return true;
  }

  friend bool operator==(const CanonicalBasis& a, const CanonicalBasis& b)
  {
    return a.ring_ == b.ring_ && a.n_ == b.n_ && a.rows_ == b.rows_;
  }

private:
  RingSpec ring_;
  std::size_t n_ = 0;
  std::vector<Vec> rows_;
};

inline CanonicalBasis howell_form(const Mat& m)
{
  HowellBuilder b(m.ring(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    b.insert(m.row(i));
  return CanonicalBasis::from_builder(b, m.ring());
}

inline CanonicalBasis sum(const CanonicalBasis& a, const CanonicalBasis& b)
{
  if (a.ambient() != b.ambient())
    throw Error("sum: ambient mismatch");
  HowellBuilder hb(a.ring(), a.ambient());
  for (const auto& r : a.rows())
    hb.insert(r);
  for (const auto& r : b.rows())
    hb.insert(r);
  return CanonicalBasis::from_builder(hb, a.ring());
}

inline CanonicalBasis add_vectors(const CanonicalBasis& a, const std::vector<Vec>& vs)
{
  HowellBuilder hb(a.ring(), a.ambient());
  for (const auto& r : a.rows())
    hb.insert(r);
  for (const auto& r : vs)
    hb.insert(r);
  return CanonicalBasis::from_builder(hb, a.ring());
}

/// Left kernel {x : x * m == 0}, computed from the Howell form of [m | I].
inline CanonicalBasis kernel(const Mat& m)
{
  const RingSpec& ring = m.ring();
  const std::size_t r = m.rows(), c = m.cols();
  HowellBuilder hb(ring, c + r);
  for (std::size_t i = 0; i < r; ++i) {
    Vec row(c + r, 0);
    for (std::size_t j = 0; j < c; ++j)
      row[j] = m(i, j);
    row[c + i] = 1;
    hb.insert(std::move(row));
  }
  std::vector<Vec> ker;
  for (const auto& row : hb.finish()) {
    bool left_zero = true;
    for (std::size_t j = 0; j < c && left_zero; ++j)
      left_zero = row[j] == 0;
    if (left_zero)
      ker.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(c), row.end());
  }
  return CanonicalBasis::span(ring, r, ker);
}

/// Some x with x * a == b, or nullopt.  The choice is deterministic: greedy
/// back-substitution through the Howell form of [a | I] with quotients taken
/// in [0, p^(e-v)).
inline std::optional<Vec> solve(const Mat& a, std::span<const Elem> b)
{
  const RingSpec& ring = a.ring();
  const std::size_t r = a.rows(), c = a.cols();
  if (b.size() != c)
    throw Error("solve: dimension mismatch");
  HowellBuilder hb(ring, c + r);
  for (std::size_t i = 0; i < r; ++i) {
    Vec row(c + r, 0);
    for (std::size_t j = 0; j < c; ++j)
      row[j] = a(i, j);
    row[c + i] = 1;
    hb.insert(std::move(row));
  }
  const Elem q = ring.modulus();
  Vec res(b.begin(), b.end());
  for (auto& x : res)
    x = ring.reduce(x);
  Vec x(r, 0);
  for (const auto& row : hb.finish()) {
    std::size_t j = 0;
    while (j < c + r && row[j] == 0)
      ++j;
    if (j >= c)
      break;
    const Elem piv = row[j];
    if (res[j] % piv != 0)
      return std::nullopt;
    const Elem f = res[j] / piv;
    if (f == 0)
      continue;
    for (std::size_t k = j; k < c; ++k)
      res[k] = ((res[k] - f * row[k]) % q + q) % q;
    for (std::size_t k = 0; k < r; ++k)
      x[k] = (x[k] + f * row[c + k]) % q;
  }
  if (!vec_is_zero(res))
    return std::nullopt;
  return x;
}

inline CanonicalBasis intersect(const CanonicalBasis& a, const CanonicalBasis& b)
{
  if (a.ambient() != b.ambient())
    throw Error("intersect: ambient mismatch");
  const RingSpec& ring = a.ring();
  if (a.is_zero() || b.is_zero())
    return CanonicalBasis(ring, a.ambient());
  // x*A == y*B  <=>  (x, -y) in the left kernel of [A; B].
  Mat stacked = Mat::vstack(a.matrix(), b.matrix());
  CanonicalBasis k = kernel(stacked);
  Mat am = a.matrix();
  std::vector<Vec> out;
  for (const auto& row : k.rows()) {
    Vec xa(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(a.size()));
    out.push_back(am.left_apply(xa));
  }
  return CanonicalBasis::span(ring, a.ambient(), out);
}

/// Image of a submodule under x -> x * f (row convention).
inline CanonicalBasis image(const CanonicalBasis& s, const Mat& f)
{
  std::vector<Vec> out;
  for (const auto& r : s.rows())
    out.push_back(f.left_apply(r));
  return CanonicalBasis::span(f.ring(), f.cols(), out);
}

/// Preimage {x : x * f in target} of a submodule of the codomain.
inline CanonicalBasis preimage(const Mat& f, const CanonicalBasis& target)
{
  if (target.is_zero())
    return kernel(f);
  Mat stacked = Mat::vstack(f, target.matrix());
  CanonicalBasis k = kernel(stacked);
  std::vector<Vec> out;
  for (const auto& row : k.rows())
    out.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(f.rows()));
  return CanonicalBasis::span(f.ring(), f.rows(), out);
}

/// Rank over a field.
inline std::size_t rank(const Mat& m)
{
  if (!m.ring().is_field())
    throw Error("rank: only defined here over a field; use howell_form(...).length()");
  return howell_form(m).size();
}

} // namespace coefsys::linalg

#endif
