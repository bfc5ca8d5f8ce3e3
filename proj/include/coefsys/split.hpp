#ifndef COEFSYS_SPLIT_HPP
#define COEFSYS_SPLIT_HPP

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "howell.hpp"

namespace coefsys::linalg {

/// Sparse linear system sum_k coef_k * x_k == rhs over Z/p^e, solved by
/// stacking it into x * A == b and calling solve().
class LinearSystem {
public:
  LinearSystem(RingSpec ring, std::size_t unknowns) : ring_(ring), n_(unknowns) {}

  void add_equation(std::vector<std::pair<std::size_t, Elem>> terms, Elem rhs)
  {
    std::map<std::size_t, Elem> merged;
    for (auto [k, c] : terms) {
      if (k >= n_)
        throw Error("LinearSystem: unknown index out of range");
      merged[k] = ring_.add(merged[k], ring_.reduce(c));
    }
    std::vector<std::pair<std::size_t, Elem>> clean;
    for (auto [k, c] : merged)
      if (c)
        clean.emplace_back(k, c);
    rhs = ring_.reduce(rhs);
    if (clean.empty() && rhs == 0)
      return;
    eqs_.push_back({std::move(clean), rhs});
  }

  std::size_t unknowns() const { return n_; }
  std::size_t equations() const { return eqs_.size(); }

  std::optional<Vec> solve() const
  {
    Mat a(ring_, n_, eqs_.size());
    Vec b(eqs_.size(), 0);
    for (std::size_t j = 0; j < eqs_.size(); ++j) {
      for (auto [k, c] : eqs_[j].terms)
        a(k, j) = c;
      b[j] = eqs_[j].rhs;
    }
    if (n_ == 0)
      return vec_is_zero(b) ? std::optional<Vec>(Vec{}) : std::nullopt;
    return linalg::solve(a, b);
  }

  /// Exact check of a candidate assignment.
  bool satisfied_by(std::span<const Elem> x) const
  {
    for (const auto& eq : eqs_) {
      Elem acc = 0;
      for (auto [k, c] : eq.terms)
        acc = ring_.add(acc, ring_.mul(c, x[k]));
      if (acc != eq.rhs)
        return false;
    }
    return true;
  }

private:
  struct Equation {
    std::vector<std::pair<std::size_t, Elem>> terms;
    Elem rhs;
  };
  RingSpec ring_;
  std::size_t n_;
  std::vector<Equation> eqs_;
};

/// Intertwining requirement L * s == s * R for a section s.
struct Intertwiner {
  Mat target_op;  ///< L, acting on the target (m x m)
  Mat source_op;  ///< R, acting on the source (n x n)
};

/// Search for a Lambda-linear section of a surjection.
///
/// Row-vector convention: pi is n x m and maps x to x * pi; the target is
/// Lambda^m / span(target_relations).  A section is an m x n matrix s with
/// relations * s == 0, s * pi == I modulo the relations and L * s == s * R for
/// every constraint.  Existence is decided exactly.
inline std::optional<Mat> split_test(const Mat& pi, const std::vector<Intertwiner>& constraints,
                                     const Mat* target_relations = nullptr)
{
  const RingSpec& ring = pi.ring();
  const std::size_t n = pi.rows(), m = pi.cols();
  const std::size_t nrel = target_relations ? target_relations->rows() : 0;

  {
    HowellBuilder hb(ring, m);
    for (std::size_t i = 0; i < n; ++i)
      hb.insert(pi.row(i));
    for (std::size_t i = 0; i < nrel; ++i)
      hb.insert(target_relations->row(i));
    if (!CanonicalBasis::from_builder(hb, ring).is_full())
      throw Error("not a surjection");
  }

  auto s_idx = [n](std::size_t a, std::size_t k) { return a * n + k; };
  auto y_idx = [m, n, nrel](std::size_t a, std::size_t l) { return m * n + a * nrel + l; };
  LinearSystem sys(ring, m * n + m * nrel);

  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t c = 0; c < m; ++c) {
      std::vector<std::pair<std::size_t, Elem>> terms;
      for (std::size_t k = 0; k < n; ++k)
        if (pi(k, c))
          terms.emplace_back(s_idx(a, k), pi(k, c));
      for (std::size_t l = 0; l < nrel; ++l)
        if ((*target_relations)(l, c))
          terms.emplace_back(y_idx(a, l), ring.neg((*target_relations)(l, c)));
      sys.add_equation(std::move(terms), a == c ? 1 : 0);
    }

  for (std::size_t l = 0; l < nrel; ++l)
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<std::pair<std::size_t, Elem>> terms;
      for (std::size_t a = 0; a < m; ++a)
        if ((*target_relations)(l, a))
          terms.emplace_back(s_idx(a, k), (*target_relations)(l, a));
      sys.add_equation(std::move(terms), 0);
    }

  for (const auto& c : constraints) {
    const Mat& L = c.target_op;
    const Mat& R = c.source_op;
    if (L.rows() != m || L.cols() != m || R.rows() != n || R.cols() != n)
      throw Error("split_test: constraint shape mismatch");
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<std::pair<std::size_t, Elem>> terms;
        for (std::size_t b = 0; b < m; ++b)
          if (L(a, b))
            terms.emplace_back(s_idx(b, k), L(a, b));
        for (std::size_t l = 0; l < n; ++l)
          if (R(l, k))
            terms.emplace_back(s_idx(a, l), ring.neg(R(l, k)));
        sys.add_equation(std::move(terms), 0);
      }
  }

  auto sol = sys.solve();
  if (!sol)
    return std::nullopt;
  Mat s(ring, m, n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t k = 0; k < n; ++k)
      s(a, k) = (*sol)[s_idx(a, k)];
  return s;
}

} // namespace coefsys::linalg

#endif
