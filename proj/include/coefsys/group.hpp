#ifndef COEFSYS_GROUP_HPP
#define COEFSYS_GROUP_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "ring.hpp"

namespace coefsys {

/// 2x2 matrix over F_p, entries in [0, p).
struct Mat2 {
  int a = 1, b = 0, c = 0, d = 1;
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

enum class GroupKind { SL2, GL2 };

inline std::string to_string(GroupKind k) { return k == GroupKind::SL2 ? "SL2" : "GL2"; }

inline GroupKind parse_group_kind(const std::string& s)
{
  if (s == "SL2")
    return GroupKind::SL2;
  if (s == "GL2")
    return GroupKind::GL2;
  throw Error("unknown group kind '" + s + "'");
}

/// Smallest primitive root mod p.
inline int primitive_root(int p)
{
  for (int g = 1; g < p; ++g) {
    int x = 1, ord = 0;
    do {
      x = x * g % p;
      ++ord;
    } while (x != 1);
    if (ord == p - 1)
      return g;
  }
  return 1;
}

/// SL2(F_p) or GL2(F_p) with full element enumeration.
///
/// Elements are referred to by index.  Generators: nbar, nbar' and, for GL2,
/// diag(zeta, 1) with zeta the smallest primitive root.  Every element carries
/// a word in the generators (breadth-first, so words are short).
class FiniteGroup {
public:
  using Elt = std::uint32_t;

  FiniteGroup(GroupKind kind, int p) : kind_(kind), p_(p)
  {
    if (!is_prime(p) || p > 7)
      throw Error("unsupported prime p=" + std::to_string(p) + " (need p in {2,3,5,7})");
    zeta_ = primitive_root(p);
    index_.assign(static_cast<std::size_t>(p * p * p * p), -1);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        for (int c = 0; c < p; ++c)
          for (int d = 0; d < p; ++d) {
            int det = ((a * d - b * c) % p + p) % p;
            if (det == 0 || (kind == GroupKind::SL2 && det != 1))
              continue;
            Mat2 m{a, b, c, d};
            index_[code(m)] = static_cast<int>(elts_.size());
            elts_.push_back(m);
          }
    identity_ = find({1, 0, 0, 1});
    nbar_ = find({1, 1, 0, 1});
    nbar_prime_ = find({1, 0, 1, 1});
    w0_ = find({0, 1, p - 1, 0});
    gens_ = {nbar_, nbar_prime_};
    if (kind == GroupKind::GL2 && p > 2)
      gens_.push_back(find({zeta_, 0, 0, 1}));
    build_words();
  }

  GroupKind kind() const { return kind_; }
  int p() const { return p_; }
  std::size_t order() const { return elts_.size(); }
  const Mat2& element(Elt i) const { return elts_.at(i); }
  const std::vector<Mat2>& elements() const { return elts_; }

  Elt find(const Mat2& m) const
  {
    Mat2 r{mod(m.a), mod(m.b), mod(m.c), mod(m.d)};
    int i = index_.at(code(r));
    if (i < 0)
      throw Error("matrix is not an element of " + name());
    return static_cast<Elt>(i);
  }

  bool contains(const Mat2& m) const
  {
    Mat2 r{mod(m.a), mod(m.b), mod(m.c), mod(m.d)};
    return index_[code(r)] >= 0;
  }

  Mat2 mul(const Mat2& x, const Mat2& y) const
  {
    return {mod(x.a * y.a + x.b * y.c), mod(x.a * y.b + x.b * y.d), mod(x.c * y.a + x.d * y.c),
            mod(x.c * y.b + x.d * y.d)};
  }

  Mat2 inv(const Mat2& x) const
  {
    int det = mod(x.a * x.d - x.b * x.c);
    int di = inv_mod(det);
    return {mod(x.d * di), mod(-x.b * di), mod(-x.c * di), mod(x.a * di)};
  }

  Elt mul(Elt x, Elt y) const { return find(mul(elts_[x], elts_[y])); }
  Elt inv(Elt x) const { return find(inv(elts_[x])); }
  Elt conj(Elt x, Elt y) const { return mul(mul(x, y), inv(x)); }  // x y x^-1

  Elt pow(Elt x, long long k) const
  {
    k %= static_cast<long long>(elt_order(x));
    if (k < 0)
      k += static_cast<long long>(elt_order(x));
    Elt r = identity_;
    for (long long i = 0; i < k; ++i)
      r = mul(r, x);
    return r;
  }

  std::size_t elt_order(Elt x) const
  {
    std::size_t n = 1;
    for (Elt y = x; y != identity_; y = mul(y, x))
      ++n;
    return n;
  }

  Elt identity() const { return identity_; }
  Elt nbar() const { return nbar_; }
  Elt nbar_prime() const { return nbar_prime_; }
  Elt w0() const { return w0_; }
  int zeta() const { return zeta_; }

  /// Generating set used for module actions.
  const std::vector<Elt>& generators() const { return gens_; }

  /// Generator positions g_1..g_k with element == g_1 * ... * g_k.
  const std::vector<std::uint8_t>& word(Elt x) const { return words_.at(x); }

  // Subgroups are handed around as generator lists.
  std::vector<Elt> Nbar() const { return {nbar_}; }
  std::vector<Elt> Nbar_prime() const { return {nbar_prime_}; }

  std::vector<Elt> torus() const
  {
    if (p_ == 2)
      return {};
    if (kind_ == GroupKind::SL2)
      return {find({zeta_, 0, 0, inv_mod(zeta_)})};
    return {find({zeta_, 0, 0, 1}), find({1, 0, 0, zeta_})};
  }

  std::vector<Elt> borel() const
  {
    auto b = torus();
    b.push_back(nbar_);
    return b;
  }

  std::vector<Elt> all() const { return gens_; }

  /// The p unipotent radicals different from Nbar, each given by a generator
  /// nbar^j nbar' nbar^-j.
  std::vector<Elt> other_radicals() const
  {
    std::vector<Elt> out;
    for (int j = 0; j < p_; ++j)
      out.push_back(conj(pow(nbar_, j), nbar_prime_));
    return out;
  }

  /// All elements of the subgroup generated by gens.
  std::vector<Elt> closure(const std::vector<Elt>& gens) const
  {
    std::vector<char> seen(order(), 0);
    std::vector<Elt> out{identity_};
    seen[identity_] = 1;
    for (std::size_t i = 0; i < out.size(); ++i)
      for (Elt g : gens) {
        Elt y = mul(out[i], g);
        if (!seen[y]) {
          seen[y] = 1;
          out.push_back(y);
        }
      }
    return out;
  }

  std::string name() const { return to_string(kind_) + "(F_" + std::to_string(p_) + ")"; }

  int mod(int x) const { return ((x % p_) + p_) % p_; }

  int inv_mod(int x) const
  {
    x = mod(x);
    for (int y = 1; y < p_; ++y)
      if (x * y % p_ == 1)
        return y;
    throw Error("not invertible mod p");
  }

private:
  std::size_t code(const Mat2& m) const
  {
    return static_cast<std::size_t>(((m.a * p_ + m.b) * p_ + m.c) * p_ + m.d);
  }

  void build_words()
  {
    words_.assign(order(), {});
    std::vector<char> seen(order(), 0);
    std::deque<Elt> queue{identity_};
    seen[identity_] = 1;
    while (!queue.empty()) {
      Elt x = queue.front();
      queue.pop_front();
      for (std::size_t k = 0; k < gens_.size(); ++k) {
        Elt y = mul(x, gens_[k]);
        if (seen[y])
          continue;
        seen[y] = 1;
        words_[y] = words_[x];
        words_[y].push_back(static_cast<std::uint8_t>(k));
        queue.push_back(y);
      }
    }
    for (char s : seen)
      if (!s)
        throw Error("generators do not generate " + name());
  }

  GroupKind kind_;
  int p_;
  int zeta_ = 1;
  std::vector<Mat2> elts_;
  std::vector<int> index_;
  Elt identity_ = 0, nbar_ = 0, nbar_prime_ = 0, w0_ = 0;
  std::vector<Elt> gens_;
  std::vector<std::vector<std::uint8_t>> words_;
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

inline GroupPtr build_group(GroupKind kind, int p) { return std::make_shared<const FiniteGroup>(kind, p); }

} // namespace coefsys

#endif
