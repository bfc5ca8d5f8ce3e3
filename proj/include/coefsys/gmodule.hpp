#ifndef COEFSYS_GMODULE_HPP
#define COEFSYS_GMODULE_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "group.hpp"
#include "howell.hpp"

namespace coefsys {

using linalg::CanonicalBasis;
using Elt = FiniteGroup::Elt;

/// The module Lambda^n / R with a group acting through matrices on column
/// vectors (rho(g) rho(h) == rho(gh)).  Submodules are always represented by
/// their preimage in Lambda^n, so the zero submodule is R itself.
class GModule {
public:
  GModule() = default;

  GModule(GroupPtr group, RingSpec ring, std::size_t rank, std::vector<Mat> gen_action,
          CanonicalBasis relations = {}, std::string name = {})
  : group_(std::move(group)), ring_(ring), n_(rank), gens_(std::move(gen_action)),
    rel_(relations.ambient() == rank ? std::move(relations) : CanonicalBasis(ring, rank)),
    name_(std::move(name))
  {
    if (gens_.size() != group_->generators().size())
      throw Error("GModule: need one action matrix per group generator");
    for (const auto& m : gens_)
      if (m.rows() != n_ || m.cols() != n_ || !(m.ring() == ring_))
        throw Error("GModule: action matrix shape mismatch");
  }

  const GroupPtr& group() const { return group_; }
  const FiniteGroup& grp() const { return *group_; }
  const RingSpec& ring() const { return ring_; }
  std::size_t rank() const { return n_; }
  const std::vector<Mat>& gen_action() const { return gens_; }
  const CanonicalBasis& relations() const { return rel_; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  bool is_free() const { return rel_.is_zero(); }

  /// Composition length of the module (its dimension over k when e == 1).
  std::size_t length() const { return n_ * static_cast<std::size_t>(ring_.e()) - rel_.length(); }
  /// Length of a submodule given by its preimage.
  std::size_t length_of(const CanonicalBasis& s) const { return s.length() - rel_.length(); }

  CanonicalBasis zero() const { return rel_; }
  CanonicalBasis whole() const { return CanonicalBasis::full(ring_, n_); }

  Mat act(Elt g) const
  {
    Mat m = Mat::identity(ring_, n_);
    for (auto k : group_->word(g))
      m = m * gens_[k];
    return m;
  }

  Vec act_vec(Elt g, std::span<const Elem> v) const
  {
    const auto& w = group_->word(g);
    Vec out(v.begin(), v.end());
    for (auto it = w.rbegin(); it != w.rend(); ++it)
      out = gens_[*it].apply(out);
    return out;
  }

  bool equal_mod(std::span<const Elem> a, std::span<const Elem> b) const
  {
    return rel_.contains(vec_sub(ring_, a, b));
  }

private:
  GroupPtr group_;
  RingSpec ring_;
  std::size_t n_ = 0;
  std::vector<Mat> gens_;
  CanonicalBasis rel_;
  std::string name_;
};

/// Lambda^n / R with a single designated operator (a module over a cyclic
/// group or over Z_p through a finite quotient).
struct OpModule {
  RingSpec ring;
  std::size_t rank = 0;
  Mat op;
  CanonicalBasis relations;

  OpModule() = default;
  OpModule(Mat c, CanonicalBasis rel = {})
  : ring(c.ring()), rank(c.rows()), op(std::move(c)),
    relations(rel.ambient() == rank ? std::move(rel) : CanonicalBasis(ring, rank))
  {
  }
};

/// Lambda^n / sub, presented by the submodule.
struct Quotient {
  CanonicalBasis sub;

  std::size_t ambient() const { return sub.ambient(); }
  std::size_t length() const
  {
    return sub.ambient() * static_cast<std::size_t>(sub.ring().e()) - sub.length();
  }

  /// Unit vectors generating the quotient: columns whose pivot is not a unit.
  std::vector<Vec> section() const
  {
    std::vector<char> unit_lead(ambient(), 0);
    for (std::size_t i = 0; i < sub.size(); ++i) {
      std::size_t j = sub.lead(i);
      if (sub.ring().is_unit(sub.row(i)[j]))
        unit_lead[j] = 1;
    }
    std::vector<Vec> out;
    for (std::size_t j = 0; j < ambient(); ++j)
      if (!unit_lead[j])
        out.push_back(unit_vec(ambient(), j));
    return out;
  }
};

/// Behaviour of a map Lambda^n/S1 -> Lambda^m/S2 given by F on column vectors.
struct MapVerdict {
  bool well_defined = false;
  bool injective = false;
  bool surjective = false;
  std::size_t source_length = 0;
  std::size_t target_length = 0;
  std::size_t image_length = 0;
  bool bijective() const { return well_defined && injective && surjective; }
};

inline MapVerdict analyze_map(const Mat& f, const CanonicalBasis& s1, const CanonicalBasis& s2)
{
  const RingSpec& ring = f.ring();
  MapVerdict v;
  Mat ft = f.transpose();
  v.source_length = Quotient{s1}.length();
  v.target_length = Quotient{s2}.length();
  v.well_defined = s2.contains(linalg::image(s1, ft));
  CanonicalBasis img = linalg::sum(linalg::image(CanonicalBasis::full(ring, f.cols()), ft), s2);
  v.image_length = img.length() - s2.length();
  v.surjective = img.is_full();
  if (v.well_defined)
    v.injective = linalg::preimage(ft, s2) == s1;
  return v;
}

// ---------------------------------------------------------------------------
// constructions

inline GModule trivial_module(GroupPtr g, RingSpec ring)
{
  std::vector<Mat> gens(g->generators().size(), Mat::identity(ring, 1));
  return GModule(std::move(g), ring, 1, std::move(gens), {}, "trivial");
}

/// Right cosets Nbar x, keyed by bottom row and determinant.
class CosetSpace {
public:
  explicit CosetSpace(const FiniteGroup& g) : p_(g.p())
  {
    slot_.assign(static_cast<std::size_t>(p_ * p_ * p_), -1);
    of_elt_.resize(g.order());
    for (Elt x = 0; x < g.order(); ++x) {
      std::size_t k = key(g.element(x), g);
      if (slot_[k] < 0) {
        slot_[k] = static_cast<int>(reps_.size());
        reps_.push_back(x);
      }
      of_elt_[x] = static_cast<std::uint32_t>(slot_[k]);
    }
  }

  std::size_t size() const { return reps_.size(); }
  Elt rep(std::size_t i) const { return reps_.at(i); }
  std::size_t coset_of(Elt x) const { return of_elt_.at(x); }

private:
  std::size_t key(const Mat2& m, const FiniteGroup& g) const
  {
    int det = g.mod(m.a * m.d - m.b * m.c);
    return static_cast<std::size_t>((m.c * p_ + m.d) * p_ + det);
  }

  int p_;
  std::vector<int> slot_;
  std::vector<Elt> reps_;
  std::vector<std::uint32_t> of_elt_;
};

/// Permutation matrix of x -> x g^-1 on Nbar-cosets (basis e_{Nbar x}).
inline Mat coset_action(const FiniteGroup& g, const CosetSpace& cs, Elt h, RingSpec ring)
{
  Mat m(ring, cs.size(), cs.size());
  Elt hi = g.inv(h);
  for (std::size_t i = 0; i < cs.size(); ++i)
    m(cs.coset_of(g.mul(cs.rep(i), hi)), i) = 1;
  return m;
}

/// The permutation module on Nbar \ G.  The basis vector of the coset Nbar
/// is the distinguished vector phi.
inline GModule jbar(GroupPtr g, RingSpec ring)
{
  CosetSpace cs(*g);
  std::vector<Mat> gens;
  for (Elt h : g->generators())
    gens.push_back(coset_action(*g, cs, h, ring));
  return GModule(g, ring, cs.size(), std::move(gens), {}, "jbar");
}

inline std::size_t jbar_phi_index(const FiniteGroup& g) { return CosetSpace(g).coset_of(g.identity()); }

inline GModule direct_sum(const GModule& a, const GModule& b)
{
  if (a.group() != b.group() || !(a.ring() == b.ring()))
    throw Error("direct_sum: incompatible modules");
  const std::size_t n = a.rank() + b.rank();
  std::vector<Mat> gens;
  for (std::size_t k = 0; k < a.gen_action().size(); ++k) {
    Mat m(a.ring(), n, n);
    m.set_block(0, 0, a.gen_action()[k]);
    m.set_block(a.rank(), a.rank(), b.gen_action()[k]);
    gens.push_back(std::move(m));
  }
  std::vector<Vec> rel;
  for (const auto& r : a.relations().rows()) {
    Vec v(n, 0);
    std::copy(r.begin(), r.end(), v.begin());
    rel.push_back(std::move(v));
  }
  for (const auto& r : b.relations().rows()) {
    Vec v(n, 0);
    std::copy(r.begin(), r.end(), v.begin() + static_cast<std::ptrdiff_t>(a.rank()));
    rel.push_back(std::move(v));
  }
  return GModule(a.group(), a.ring(), n, std::move(gens), CanonicalBasis::span(a.ring(), n, rel),
                 a.name() + "+" + b.name());
}

inline GModule power(const GModule& m, std::size_t r)
{
  if (r == 0)
    throw Error("power: r must be positive");
  GModule out = m;
  for (std::size_t i = 1; i < r; ++i)
    out = direct_sum(out, m);
  out.set_name(m.name() + "^" + std::to_string(r));
  return out;
}

/// Same carrier with the relations enlarged to the (stable) submodule s.
inline GModule quotient(const GModule& m, const CanonicalBasis& s, std::string name = {})
{
  return GModule(m.group(), m.ring(), m.rank(), m.gen_action(), linalg::sum(s, m.relations()),
                 name.empty() ? m.name() + "/S" : std::move(name));
}

// ---------------------------------------------------------------------------
// invariants and generation

/// Preimage of the H-fixed submodule: {v : rho(h) v - v in R for h in H}.
inline CanonicalBasis invariants(const GModule& m, const std::vector<Elt>& h)
{
  const RingSpec& ring = m.ring();
  const std::size_t n = m.rank();
  if (h.empty())
    return m.whole();
  Mat f(ring, n, n * h.size());
  for (std::size_t k = 0; k < h.size(); ++k)
    f.set_block(0, k * n, (m.act(h[k]) - Mat::identity(ring, n)).transpose());
  if (m.is_free())
    return linalg::kernel(f);
  std::vector<Vec> target;
  for (std::size_t k = 0; k < h.size(); ++k)
    for (const auto& r : m.relations().rows()) {
      Vec v(n * h.size(), 0);
      std::copy(r.begin(), r.end(), v.begin() + static_cast<std::ptrdiff_t>(k * n));
      target.push_back(std::move(v));
    }
  return linalg::preimage(f, CanonicalBasis::span(ring, n * h.size(), target));
}

/// R + span{(rho(h) - 1) v}: the module of H-coinvariants is Lambda^n / result.
inline CanonicalBasis coinvariants(const GModule& m, const std::vector<Elt>& h)
{
  linalg::HowellBuilder hb(m.ring(), m.rank());
  for (const auto& r : m.relations().rows())
    hb.insert(r);
  for (Elt x : h) {
    Mat d = m.act(x) - Mat::identity(m.ring(), m.rank());
    for (std::size_t j = 0; j < m.rank(); ++j)
      hb.insert(d.col_vec(j));
  }
  return CanonicalBasis::from_builder(hb, m.ring());
}

/// Smallest submodule stable under the given elements containing the vectors
/// (and R).  With gens = group generators this is the Lambda[G]-span.
inline CanonicalBasis generated_submodule(const GModule& m, const std::vector<Vec>& vectors,
                                          const std::vector<Elt>& gens)
{
  linalg::HowellBuilder hb(m.ring(), m.rank());
  for (const auto& r : m.relations().rows())
    hb.insert(r);
  std::vector<Mat> ops;
  for (Elt g : gens)
    ops.push_back(m.act(g));
  std::vector<Vec> queue;
  for (const auto& v : vectors)
    if (hb.extend(v))
      queue.push_back(v);
  while (!queue.empty()) {
    Vec v = std::move(queue.back());
    queue.pop_back();
    for (const auto& op : ops) {
      Vec w = op.apply(v);
      if (hb.extend(w))
        queue.push_back(std::move(w));
    }
  }
  return CanonicalBasis::from_builder(hb, m.ring());
}

inline CanonicalBasis generated_submodule(const GModule& m, const std::vector<Vec>& vectors)
{
  return generated_submodule(m, vectors, m.grp().generators());
}

inline bool is_stable(const GModule& m, const CanonicalBasis& s)
{
  for (const auto& g : m.gen_action())
    for (const auto& r : s.rows())
      if (!s.contains(g.apply(r)))
        return false;
  return true;
}

/// Whether every action matrix is invertible and the relations are stable.
inline bool is_valid_module(const GModule& m)
{
  for (const auto& g : m.gen_action())
    if (!linalg::howell_form(g).is_full())
      return false;
  return is_stable(m, m.relations());
}

// ---------------------------------------------------------------------------
// change of presentation (requires unit pivots, i.e. free summands)

/// Coordinates of v in the canonical basis s, all of whose pivots are units.
inline Vec coordinates(const CanonicalBasis& s, std::span<const Elem> v)
{
  Vec c(s.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i)
    c[i] = s.ring().reduce(v[s.lead(i)]);
  return c;
}

inline bool has_unit_pivots(const CanonicalBasis& s)
{
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.row(i)[s.lead(i)] != 1)
      return false;
  return true;
}

/// A free module isomorphic to m, valid when R is a free direct summand
/// (always the case over k).  Coordinates are the non-pivot columns of R.
struct FreeQuotient {
  GModule module;
  std::vector<std::size_t> columns;  ///< non-pivot columns of R
  Mat projection;                    ///< rank' x rank, v -> coordinates

  Vec project(std::span<const Elem> v) const { return projection.apply(v); }
};

inline FreeQuotient to_free(const GModule& m)
{
  const RingSpec& ring = m.ring();
  const CanonicalBasis& r = m.relations();
  if (!has_unit_pivots(r))
    throw Error("to_free: relations are not a free summand");
  std::vector<char> piv(m.rank(), 0);
  for (std::size_t i = 0; i < r.size(); ++i)
    piv[r.lead(i)] = 1;
  FreeQuotient fq;
  for (std::size_t j = 0; j < m.rank(); ++j)
    if (!piv[j])
      fq.columns.push_back(j);
  const std::size_t d = fq.columns.size();
  fq.projection = Mat(ring, d, m.rank());
  for (std::size_t j = 0; j < m.rank(); ++j) {
    Vec red = r.residual(unit_vec(m.rank(), j));
    for (std::size_t a = 0; a < d; ++a)
      fq.projection(a, j) = red[fq.columns[a]];
  }
  std::vector<Mat> gens;
  for (const auto& g : m.gen_action()) {
    Mat h(ring, d, d);
    for (std::size_t b = 0; b < d; ++b) {
      Vec img = fq.project(g.col_vec(fq.columns[b]));
      for (std::size_t a = 0; a < d; ++a)
        h(a, b) = img[a];
    }
    gens.push_back(std::move(h));
  }
  fq.module = GModule(m.group(), ring, d, std::move(gens), {}, m.name());
  return fq;
}

/// The stable submodule s of a free module as a module in its own right;
/// s must be a free summand (unit pivots).
struct SubModule {
  GModule module;
  Mat embedding;  ///< rank x dim, columns are the basis vectors of s
};

inline SubModule submodule_as_module(const GModule& m, const CanonicalBasis& s, std::string name = {})
{
  if (!m.is_free() || !has_unit_pivots(s))
    throw Error("submodule_as_module: need a free summand of a free module");
  const RingSpec& ring = m.ring();
  const std::size_t d = s.size();
  SubModule out;
  out.embedding = s.matrix().transpose();
  std::vector<Mat> gens;
  for (const auto& g : m.gen_action()) {
    Mat h(ring, d, d);
    for (std::size_t b = 0; b < d; ++b) {
      Vec img = g.apply(s.row(b));
      if (!s.contains(img))
        throw Error("submodule_as_module: submodule is not stable");
      Vec c = coordinates(s, img);
      for (std::size_t a = 0; a < d; ++a)
        h(a, b) = c[a];
    }
    gens.push_back(std::move(h));
  }
  out.module = GModule(m.group(), ring, d, std::move(gens), {}, name.empty() ? m.name() + "_sub" : name);
  return out;
}

// ---------------------------------------------------------------------------
// procyclic H^1 and cyclic induction

struct ProcyclicH1 {
  Quotient quotient;  ///< M / ((c - 1) M + R)
  std::size_t length() const { return quotient.length(); }
  std::vector<Vec> section() const { return quotient.section(); }
};

inline bool has_p_power_order(const OpModule& m)
{
  const RingSpec& ring = m.ring;
  Mat a = m.op;
  // the p-part of the order of an invertible n x n matrix over Z/p^e is
  // bounded by p^(e + ceil(log_p n))
  int bound = ring.e() + 1;
  for (std::size_t s = 1; s < m.rank; s *= static_cast<std::size_t>(ring.p()))
    ++bound;
  for (int k = 0; k <= bound; ++k) {
    Mat d = a - Mat::identity(ring, m.rank);
    bool fixed = true;
    for (std::size_t j = 0; j < m.rank && fixed; ++j)
      fixed = m.relations.contains(d.col_vec(j));
    if (fixed)
      return true;
    a = a.pow(static_cast<std::uint64_t>(ring.p()));
  }
  return false;
}

inline ProcyclicH1 h1_procyclic(const OpModule& m)
{
  if (!linalg::howell_form(m.op).is_full())
    throw Error("h1_procyclic: operator is not invertible");
  if (!has_p_power_order(m))
    throw Error("h1_procyclic: operator does not have p-power order");
  linalg::HowellBuilder hb(m.ring, m.rank);
  for (const auto& r : m.relations.rows())
    hb.insert(r);
  Mat d = m.op - Mat::identity(m.ring, m.rank);
  for (std::size_t j = 0; j < m.rank; ++j)
    hb.insert(d.col_vec(j));
  return {Quotient{CanonicalBasis::from_builder(hb, m.ring)}};
}

/// Map of H^1 values induced by a module map F (column convention).
inline MapVerdict h1_map(const ProcyclicH1& src, const ProcyclicH1& dst, const Mat& f)
{
  return analyze_map(f, src.quotient.sub, dst.quotient.sub);
}

/// Induction to Z/p^depth from its subgroup of index p^level, acting on m
/// through c.  Basis (a, v), a < p^level, at index a * rank + i.
inline OpModule induce_cyclic(const OpModule& m, int level, int depth)
{
  if (level < 0 || level > depth)
    throw Error("induce_cyclic: level " + std::to_string(level) + " exceeds depth " +
                std::to_string(depth));
  const RingSpec& ring = m.ring;
  std::size_t pm = 1;
  for (int i = 0; i < level; ++i)
    pm *= static_cast<std::size_t>(ring.p());
  const std::size_t n = m.rank, big = pm * n;
  Mat g(ring, big, big);
  for (std::size_t a = 0; a + 1 < pm; ++a)
    for (std::size_t i = 0; i < n; ++i)
      g((a + 1) * n + i, a * n + i) = 1;
  g.set_block(0, (pm - 1) * n, m.op);
  std::vector<Vec> rel;
  for (std::size_t a = 0; a < pm; ++a)
    for (const auto& r : m.relations.rows()) {
      Vec v(big, 0);
      std::copy(r.begin(), r.end(), v.begin() + static_cast<std::ptrdiff_t>(a * n));
      rel.push_back(std::move(v));
    }
  return OpModule(std::move(g), CanonicalBasis::span(ring, big, rel));
}

// ---------------------------------------------------------------------------
// principal series decomposition

/// Teichmueller lift of a unit of F_p to Z/p^e.
inline Elem teichmuller(const RingSpec& ring, Elem a)
{
  return ring.pow(a, static_cast<std::uint64_t>(ring.ppow(ring.e() - 1)));
}

struct PrincipalSeries {
  int character = 0;  ///< eigenvalue of tau is teichmuller(zeta)^character
  CanonicalBasis span;
  SubModule summand;
};

/// Projector onto the eigenspace of the left translation by
/// tau = diag(zeta, zeta^-1) (e_{Nbar x} -> e_{Nbar tau x}) with eigenvalue
/// teichmuller(zeta)^k.  Commutes with the action.
inline Mat jbar_eigen_projector(const FiniteGroup& g, RingSpec ring, int k)
{
  if (g.kind() != GroupKind::SL2)
    throw Error("jbar_eigen_projector: only for SL2");
  const int p = g.p();
  CosetSpace cs(g);
  const std::size_t n = cs.size();
  if (p == 2)
    return Mat::identity(ring, n);
  const Elt tau = g.torus().front();
  std::vector<std::size_t> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = cs.coset_of(g.mul(tau, cs.rep(i)));
  const Elem lam = teichmuller(ring, g.zeta());
  const Elem base = ring.inverse(ring.pow(lam, static_cast<std::uint64_t>(k)));
  Mat proj(ring, n, n);
  // column s: sum_i lam^{-k i} T^i e_s / (p - 1)
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t pos = s;
    Elem coef = ring.inverse(p - 1);
    for (int i = 0; i < p - 1; ++i) {
      proj(pos, s) = ring.add(proj(pos, s), coef);
      pos = t[pos];
      coef = ring.mul(coef, base);
    }
  }
  return proj;
}

/// Eigenspaces of the left torus translation; the summand with character 0
/// contains the constants.
inline std::vector<PrincipalSeries> decompose_jbar(GroupPtr g, RingSpec ring)
{
  if (g->kind() != GroupKind::SL2)
    throw Error("decompose_jbar: only for SL2");
  GModule j = jbar(g, ring);
  std::vector<PrincipalSeries> out;
  const int count = g->p() == 2 ? 1 : g->p() - 1;
  for (int k = 0; k < count; ++k) {
    Mat proj = jbar_eigen_projector(*g, ring, k);
    PrincipalSeries ps;
    ps.character = k;
    ps.span = CanonicalBasis::span(ring, j.rank(), proj.transpose().row_list());
    ps.summand = submodule_as_module(j, ps.span, "ps:" + std::to_string(k));
    out.push_back(std::move(ps));
  }
  return out;
}

/// The other eigen-summands plus the constants: jbar modulo this is the
/// irreducible nontrivial constituent of the character-0 summand.
inline CanonicalBasis steinberg_relations(GroupPtr g, RingSpec ring)
{
  if (g->kind() != GroupKind::SL2 && g->p() > 2)
    throw Error("steinberg: only built for SL2");
  const std::size_t n = CosetSpace(*g).size();
  std::vector<Vec> rel;
  if (g->p() > 2) {
    auto parts = decompose_jbar(g, ring);
    for (std::size_t k = 1; k < parts.size(); ++k)
      for (const auto& r : parts[k].span.rows())
        rel.push_back(r);
  }
  rel.push_back(Vec(n, 1));
  return CanonicalBasis::span(ring, n, rel);
}

inline GModule steinberg(GroupPtr g, RingSpec ring)
{
  GModule q = quotient(jbar(g, ring), steinberg_relations(g, ring), "steinberg");
  GModule f = to_free(q).module;
  f.set_name("steinberg");
  return f;
}

/// k[G] with g e_x = e_{gx}.
inline GModule regular_module(GroupPtr g, RingSpec ring)
{
  std::vector<Mat> gens;
  for (Elt h : g->generators()) {
    Mat m(ring, g->order(), g->order());
    for (Elt x = 0; x < g->order(); ++x)
      m(g->mul(h, x), x) = 1;
    gens.push_back(std::move(m));
  }
  return GModule(g, ring, g->order(), std::move(gens), {}, "regular");
}

// ---------------------------------------------------------------------------
// composition length over k

namespace detail {

/// Basis of x modulo r (r contained in x): rows of x whose lead is not a
/// lead of r.  Field only.
inline std::vector<Vec> complement_rows(const CanonicalBasis& x, const CanonicalBasis& r)
{
  std::vector<char> taken(x.ambient(), 0);
  for (std::size_t i = 0; i < r.size(); ++i)
    taken[r.lead(i)] = 1;
  std::vector<Vec> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!taken[x.lead(i)])
      out.push_back(x.row(i));
  return out;
}

/// All normalized coefficient vectors of lines in F_p^d, unit vectors first.
inline std::vector<Vec> line_coefficients(int p, std::size_t d)
{
  std::vector<Vec> out;
  for (std::size_t i = 0; i < d; ++i)
    out.push_back(unit_vec(d, i));
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i)
    total *= static_cast<std::size_t>(p);
  for (std::size_t code = 1; code < total; ++code) {
    Vec c(d, 0);
    std::size_t x = code, nz = 0;
    for (std::size_t i = 0; i < d; ++i) {
      c[i] = static_cast<Elem>(x % static_cast<std::size_t>(p));
      x /= static_cast<std::size_t>(p);
      nz += c[i] != 0;
    }
    std::size_t first = 0;
    while (c[first] == 0)
      ++first;
    if (c[first] != 1 || nz == 1)
      continue;
    out.push_back(std::move(c));
  }
  return out;
}

inline Vec combine(const RingSpec& ring, const std::vector<Vec>& basis, const Vec& coef, std::size_t n)
{
  Vec v(n, 0);
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (coef[i])
      v = vec_add(ring, v, vec_scale(ring, basis[i], coef[i]));
  return v;
}

} // namespace detail

struct CompositionSeries {
  std::size_t length = 0;
  std::vector<std::size_t> factor_dims;
};

/// A submodule s (preimage, containing r) is simple modulo r iff every line of
/// Nbar-fixed vectors in s/r generates s.  Returns a fixed vector generating a
/// strictly smaller nonzero submodule, or nothing when simple.
inline std::optional<Vec> find_proper_fixed_generator(const GModule& m, const CanonicalBasis& s,
                                                      std::mt19937_64* rng = nullptr)
{
  const RingSpec& ring = m.ring();
  const CanonicalBasis fixed = linalg::intersect(invariants(m, m.grp().Nbar()), s);
  std::vector<Vec> basis = detail::complement_rows(fixed, m.relations());
  if (rng)
    std::shuffle(basis.begin(), basis.end(), *rng);
  auto lines = detail::line_coefficients(ring.p(), basis.size());
  if (rng && lines.size() > basis.size())
    std::shuffle(lines.begin() + static_cast<std::ptrdiff_t>(basis.size()), lines.end(), *rng);
  for (const auto& c : lines) {
    Vec v = detail::combine(ring, basis, c, m.rank());
    if (!(generated_submodule(m, {v}) == s))
      return v;
  }
  return std::nullopt;
}

inline bool is_irreducible(const GModule& m)
{
  if (!m.ring().is_field())
    throw Error("is_irreducible: only over the residue field");
  if (m.length() == 0)
    return false;
  return !find_proper_fixed_generator(m, m.whole()).has_value();
}

/// Composition series by repeatedly splitting off a simple submodule
/// generated by an Nbar-fixed vector.  A nonzero choice_seed permutes the
/// fixed-vector choices.
inline CompositionSeries composition_length(const GModule& m0, std::uint64_t choice_seed = 0)
{
  if (!m0.ring().is_field())
    throw Error("composition_length: only over the residue field");
  std::mt19937_64 rng(choice_seed);
  std::mt19937_64* prng = choice_seed ? &rng : nullptr;
  CompositionSeries out;
  GModule m = m0;
  while (m.length() > 0) {
    CanonicalBasis fixed = invariants(m, m.grp().Nbar());
    std::vector<Vec> cand = detail::complement_rows(fixed, m.relations());
    if (cand.empty())
      throw Error("composition_length: nonzero module without Nbar-fixed vectors");
    if (prng)
      std::shuffle(cand.begin(), cand.end(), rng);
    CanonicalBasis s = generated_submodule(m, {cand.front()});
    while (auto v = find_proper_fixed_generator(m, s, prng))
      s = generated_submodule(m, {*v});
    out.factor_dims.push_back(m.length_of(s));
    ++out.length;
    m = quotient(m, s, m.name());
  }
  return out;
}

} // namespace coefsys

#endif
