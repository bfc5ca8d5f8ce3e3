#ifndef COEFSYS_RING_HPP
#define COEFSYS_RING_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coefsys {

using Elem = std::int64_t;
using Vec = std::vector<Elem>;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline bool is_prime(int n)
{
  if (n < 2)
    return false;
  for (int d = 2; d * d <= n; ++d)
    if (n % d == 0)
      return false;
  return true;
}

/// The coefficient ring Z/p^e.  e == 1 is the residue field F_p.
class RingSpec {
public:
  RingSpec() = default;

  RingSpec(int p, int e) : p_(p), e_(e)
  {
    if (!is_prime(p) || p > 7)
      throw Error("unsupported prime p=" + std::to_string(p) + " (need 2 <= p <= 7)");
    if (e < 1 || e > 4)
      throw Error("unsupported exponent e=" + std::to_string(e));
    q_ = 1;
    pow_.assign(1, 1);
    for (int i = 0; i < e; ++i) {
      q_ *= p;
      pow_.push_back(q_);
    }
  }

  int p() const { return p_; }
  int e() const { return e_; }
  Elem modulus() const { return q_; }
  bool is_field() const { return e_ == 1; }
  Elem ppow(int k) const { return pow_.at(static_cast<std::size_t>(k)); }

  Elem reduce(Elem x) const
  {
    x %= q_;
    return x < 0 ? x + q_ : x;
  }
  Elem add(Elem a, Elem b) const { return reduce(a + b); }
  Elem sub(Elem a, Elem b) const { return reduce(a - b); }
  Elem mul(Elem a, Elem b) const { return (a * b) % q_; }
  Elem neg(Elem a) const { return a == 0 ? 0 : q_ - a; }

  /// p-adic valuation of a residue; valuation(0) == e.
  int valuation(Elem x) const
  {
    x = reduce(x);
    if (x == 0)
      return e_;
    int v = 0;
    while (x % p_ == 0) {
      x /= p_;
      ++v;
    }
    return v;
  }

  bool is_unit(Elem x) const { return reduce(x) % p_ != 0; }

  Elem inverse(Elem u) const
  {
    u = reduce(u);
    if (u % p_ == 0)
      throw Error("element " + std::to_string(u) + " is not a unit mod " + std::to_string(q_));
    Elem r0 = q_, r1 = u, s0 = 0, s1 = 1;
    while (r1 != 0) {
      Elem t = r0 / r1;
      Elem r2 = r0 - t * r1;
      r0 = r1;
      r1 = r2;
      Elem s2 = s0 - t * s1;
      s0 = s1;
      s1 = s2;
    }
    return reduce(s0);
  }

  /// Unit u with x == p^valuation(x) * u.  Chosen canonically as the
  /// inverse-normalizing factor: x * unit_normalizer(x) == p^valuation(x).
  Elem unit_normalizer(Elem x) const
  {
    int v = valuation(x);
    if (v == e_)
      return 1;
    // x = p^v * u with u a unit mod p^(e-v); lift u^{-1} to Z/p^e.
    Elem u = reduce(x) / pow_[static_cast<std::size_t>(v)];
    Elem mod = pow_[static_cast<std::size_t>(e_ - v)];
    Elem r0 = mod, r1 = u % mod, s0 = 0, s1 = 1;
    while (r1 != 0) {
      Elem t = r0 / r1;
      Elem r2 = r0 - t * r1;
      r0 = r1;
      r1 = r2;
      Elem s2 = s0 - t * s1;
      s0 = s1;
      s1 = s2;
    }
    Elem inv = ((s0 % mod) + mod) % mod;
    return inv == 0 ? 1 : inv;
  }

  Elem pow(Elem a, std::uint64_t k) const
  {
    Elem r = 1 % q_;
    a = reduce(a);
    while (k) {
      if (k & 1)
        r = mul(r, a);
      a = mul(a, a);
      k >>= 1;
    }
    return r;
  }

  friend bool operator==(const RingSpec& a, const RingSpec& b) { return a.p_ == b.p_ && a.e_ == b.e_; }

  std::string to_string() const { return "Z/" + std::to_string(p_) + "^" + std::to_string(e_); }

private:
  int p_ = 2;
  int e_ = 1;
  Elem q_ = 2;
  std::vector<Elem> pow_{1, 2};
};

} // namespace coefsys

#endif
