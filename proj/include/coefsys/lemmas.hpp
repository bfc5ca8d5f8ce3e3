#ifndef COEFSYS_LEMMAS_HPP
#define COEFSYS_LEMMAS_HPP

#include <random>
#include <string>
#include <vector>

#include "gmodule.hpp"
#include "report.hpp"

namespace coefsys {

inline bool generated_by_invariants(const GModule& m, const std::vector<Elt>& h)
{
  return generated_submodule(m, invariants(m, h).rows()).is_full();
}

/// Basis of the H-fixed vectors of m modulo R (residue field only).
inline std::vector<Vec> fixed_basis(const GModule& m, const std::vector<Elt>& h)
{
  return detail::complement_rows(invariants(m, h), m.relations());
}

/// The maps eta, epsilon out of k[Nbar] (x) W^{Nbar'}.  Source basis index
/// j * d + i stands for nbar^j (x) w_i.
struct EtaMap {
  std::size_t d = 0;
  std::vector<Vec> fixed;  ///< w_i
  Mat eta;                 ///< rank x p d
  Mat eps;                 ///< d x p d

  /// Action of nbar^u on the source (regular on the first factor).
  Mat shift(int u, int p) const
  {
    const std::size_t n = static_cast<std::size_t>(p) * d;
    Mat s(eta.ring(), n, n);
    for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j)
      for (std::size_t i = 0; i < d; ++i)
        s(((j + static_cast<std::size_t>(u)) % static_cast<std::size_t>(p)) * d + i, j * d + i) = 1;
    return s;
  }
};

inline EtaMap build_eta(const GModule& w)
{
  const RingSpec& ring = w.ring();
  const int p = w.grp().p();
  EtaMap em;
  em.fixed = fixed_basis(w, w.grp().Nbar_prime());
  em.d = em.fixed.size();
  const std::size_t cols = static_cast<std::size_t>(p) * em.d;
  em.eta = Mat(ring, w.rank(), cols);
  em.eps = Mat(ring, em.d, cols);
  const Mat n = w.act(w.grp().nbar());
  for (std::size_t i = 0; i < em.d; ++i) {
    Vec v = em.fixed[i];
    for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j) {
      for (std::size_t r = 0; r < w.rank(); ++r)
        em.eta(r, j * em.d + i) = v[r];
      em.eps(i, j * em.d + i) = 1;
      v = n.apply(v);
    }
  }
  return em;
}

namespace detail {

inline LemmaReport make_report(std::string lemma, const GModule& w)
{
  LemmaReport r;
  r.lemma = std::move(lemma);
  r.instance = w.name();
  r.p = w.grp().p();
  r.e = w.ring().e();
  return r;
}

} // namespace detail

/// eta surjective, ker(eta) in ker(eps), the H^1 map bijective for every
/// generator nbar^u, and W^{Nbar'} -> W_{Nbar} bijective.
inline LemmaReport check_herzjesu(const GModule& w)
{
  Stopwatch sw;
  LemmaReport rep = detail::make_report("lemma21", w);
  const FiniteGroup& g = w.grp();
  const RingSpec& ring = w.ring();
  const int p = g.p();
  if (!ring.is_field()) {
    rep.reject("module is not over the residue field");
    return rep;
  }
  if (!generated_by_invariants(w, g.Nbar_prime())) {
    rep.reject("module not generated by Nbar'-invariants");
    return rep;
  }
  EtaMap em = build_eta(w);
  const std::size_t src = static_cast<std::size_t>(p) * em.d;
  const CanonicalBasis zero_src(ring, src);

  MapVerdict ev = analyze_map(em.eta, zero_src, w.relations());
  rep.claim("eta_surjective", ev.surjective);

  CanonicalBasis ker_eta = linalg::preimage(em.eta.transpose(), w.relations());
  CanonicalBasis ker_eps = linalg::kernel(em.eps.transpose());
  const bool contained = ker_eps.contains(ker_eta);
  rep.claim("ker_eta_in_ker_eps", contained);
  if (contained && !(ker_eta == ker_eps))
    for (const auto& v : ker_eps.rows())
      if (!ker_eta.contains(v)) {
        rep.witnesses.emplace_back("in_ker_eps_not_ker_eta", v);
        break;
      }
  if (!contained)
    for (const auto& v : ker_eta.rows())
      if (!ker_eps.contains(v)) {
        rep.witnesses.emplace_back("in_ker_eta_not_ker_eps", v);
        break;
      }

  bool equivariant = true, all_bij = true;
  std::string per_unit;
  std::vector<bool> verdicts;
  Mat nu = Mat::identity(ring, w.rank());
  const Mat n = w.act(g.nbar());
  for (int u = 1; u < p; ++u) {
    nu = nu * n;
    Mat s = em.shift(u, p);
    Mat diff = em.eta * s - nu * em.eta;
    for (std::size_t c = 0; c < diff.cols() && equivariant; ++c)
      equivariant = w.relations().contains(diff.col_vec(c));
    auto h_src = h1_procyclic(OpModule(s));
    auto h_dst = h1_procyclic(OpModule(nu, w.relations()));
    bool bij = h1_map(h_src, h_dst, em.eta).bijective();
    verdicts.push_back(bij);
    all_bij = all_bij && bij;
    per_unit += (per_unit.empty() ? "" : ",") + std::to_string(u) + (bij ? ":ok" : ":no");
    if (u == 1) {
      rep.dims["h1_source"] = static_cast<long long>(h_src.length());
      rep.dims["h1_target"] = static_cast<long long>(h_dst.length());
    }
  }
  rep.claim("eta_equivariant", equivariant);
  rep.claim("h1_bijective_all_units", all_bij, per_unit);
  bool same = true;
  for (bool b : verdicts)
    same = same && b == verdicts.front();
  rep.claim("h1_twist_invariant", same);

  Mat incl = Mat::from_rows(ring, w.rank(), em.fixed).transpose();
  CanonicalBasis coinv = coinvariants(w, g.Nbar());
  rep.claim("remark_composite_bijective",
            analyze_map(incl, CanonicalBasis(ring, em.d), coinv).bijective());

  rep.dims["source"] = static_cast<long long>(src);
  rep.dims["target"] = static_cast<long long>(w.length());
  rep.dims["inv_nbar_prime"] = static_cast<long long>(em.d);
  rep.dims["coinv_nbar"] = static_cast<long long>(Quotient{coinv}.length());
  rep.dims["ker_eta"] = static_cast<long long>(ker_eta.size());
  rep.dims["ker_eps"] = static_cast<long long>(ker_eps.size());
  rep.elapsed_ms = sw.ms();
  return rep;
}

/// Minimal number of k[Nbar]-generators (dim of Nbar-coinvariants) equals
/// dim W^{Nbar'}.
inline LemmaReport check_minimal_generators(const GModule& w)
{
  Stopwatch sw;
  LemmaReport rep = detail::make_report("lemma21_mingen", w);
  const FiniteGroup& g = w.grp();
  if (!w.ring().is_field()) {
    rep.reject("module is not over the residue field");
    return rep;
  }
  if (!generated_by_invariants(w, g.Nbar_prime())) {
    rep.reject("module not generated by Nbar'-invariants");
    return rep;
  }
  const std::size_t gens = Quotient{coinvariants(w, g.Nbar())}.length();
  const std::size_t fixed = w.length_of(invariants(w, g.Nbar_prime()));
  rep.dims["min_generators"] = static_cast<long long>(gens);
  rep.dims["inv_nbar_prime"] = static_cast<long long>(fixed);
  rep.claim("min_generators_eq_inv_dim", gens == fixed);
  rep.elapsed_ms = sw.ms();
  return rep;
}

/// Whether f (column convention, target rank x source rank) is a
/// well-defined equivariant map v -> w.
inline bool is_module_map(const GModule& v, const GModule& w, const Mat& f)
{
  if (f.rows() != w.rank() || f.cols() != v.rank())
    return false;
  if (!w.relations().contains(linalg::image(v.relations(), f.transpose())))
    return false;
  for (std::size_t k = 0; k < v.gen_action().size(); ++k) {
    Mat diff = f * v.gen_action()[k] - w.gen_action()[k] * f;
    for (std::size_t c = 0; c < diff.cols(); ++c)
      if (!w.relations().contains(diff.col_vec(c)))
        return false;
  }
  return true;
}

/// f: V -> W surjective, both generated by Nbar-invariants: V^Nbar -> W^Nbar
/// is surjective.
inline LemmaReport check_qpfpspec_i(const GModule& v, const GModule& w, const Mat& f)
{
  Stopwatch sw;
  LemmaReport rep = detail::make_report("lemma22_i", w);
  rep.instance = v.name() + " -> " + w.name();
  const FiniteGroup& g = w.grp();
  if (!is_module_map(v, w, f)) {
    rep.reject("map is not a module map");
    return rep;
  }
  if (!analyze_map(f, v.relations(), w.relations()).surjective) {
    rep.reject("map is not surjective");
    return rep;
  }
  if (!generated_by_invariants(v, g.Nbar()) || !generated_by_invariants(w, g.Nbar())) {
    rep.reject("module not generated by Nbar-invariants");
    return rep;
  }
  CanonicalBasis inv_v = invariants(v, g.Nbar());
  CanonicalBasis inv_w = invariants(w, g.Nbar());
  CanonicalBasis img = linalg::sum(linalg::image(inv_v, f.transpose()), w.relations());
  rep.claim("invariants_surjective", img == inv_w);
  rep.dims["inv_source"] = static_cast<long long>(v.length_of(inv_v));
  rep.dims["inv_target"] = static_cast<long long>(w.length_of(inv_w));
  rep.dims["source"] = static_cast<long long>(v.length());
  rep.dims["target"] = static_cast<long long>(w.length());
  rep.elapsed_ms = sw.ms();
  return rep;
}

/// V = s/R inside W = Lambda^n/R with W generated by Nbar-invariants: V is
/// generated by its own Nbar-invariants V^Nbar = V cap W^Nbar.
inline LemmaReport check_qpfpspec_ii(const GModule& w, const CanonicalBasis& s)
{
  Stopwatch sw;
  LemmaReport rep = detail::make_report("lemma22_ii", w);
  rep.instance = "sub of " + w.name();
  const FiniteGroup& g = w.grp();
  if (!s.contains(w.relations()) || !is_stable(w, s)) {
    rep.reject("not a submodule");
    return rep;
  }
  if (!generated_by_invariants(w, g.Nbar())) {
    rep.reject("module not generated by Nbar-invariants");
    return rep;
  }
  CanonicalBasis inv_s = linalg::intersect(invariants(w, g.Nbar()), s);
  rep.claim("sub_generated_by_invariants", generated_submodule(w, inv_s.rows()) == s);
  rep.dims["sub"] = static_cast<long long>(w.length_of(s));
  rep.dims["inv_sub"] = static_cast<long long>(w.length_of(inv_s));
  rep.dims["ambient"] = static_cast<long long>(w.length());
  rep.elapsed_ms = sw.ms();
  return rep;
}

// ---------------------------------------------------------------------------
// random instances

/// W = jbar^r / R1 with R1 generated by random torus-eigenvectors (scaled by
/// a random power of p), a larger quotient target R2 and a submodule S, both
/// obtained by adding one more random generator.
struct RandomInstance {
  std::size_t id = 0;
  std::size_t r = 1;
  GModule module;     ///< jbar^r / R1
  CanonicalBasis larger;  ///< R2 containing R1
  CanonicalBasis sub;     ///< S containing R1
  std::string description;
};

class InstanceStream {
public:
  InstanceStream(std::uint64_t seed, int p, int e, std::size_t r_max = 3,
                 GroupKind kind = GroupKind::SL2)
  : rng_(seed), ring_(p, e), group_(build_group(kind, p)), r_max_(r_max == 0 ? 1 : r_max)
  {
    base_ = jbar(group_, ring_);
    if (kind == GroupKind::SL2)
      for (int k = 0; k < (p == 2 ? 1 : p - 1); ++k)
        projectors_.push_back(jbar_eigen_projector(*group_, ring_, k));
  }

  const GroupPtr& group() const { return group_; }

  RandomInstance next()
  {
    for (;;) {
      RandomInstance ri;
      ri.id = count_++;
      ri.r = 1 + rng_() % r_max_;
      GModule big = power(base_, ri.r);
      const std::size_t ngen = 1 + rng_() % 2;
      std::vector<Vec> gens;
      for (std::size_t i = 0; i < ngen; ++i)
        gens.push_back(random_vector(ri.r));
      CanonicalBasis r1 = generated_submodule(big, gens);
      GModule w = quotient(big, r1, "rand:" + std::to_string(ri.id));
      if (w.length() == 0)
        continue;
      ri.larger = generated_submodule(w, {random_vector(ri.r)});
      ri.sub = generated_submodule(w, {random_vector(ri.r)});
      ri.description = "jbar^" + std::to_string(ri.r) + " / <" + std::to_string(ngen) + " gens>";
      ri.module = std::move(w);
      return ri;
    }
  }

private:
  Vec random_vector(std::size_t r)
  {
    const std::size_t n = base_.rank();
    Vec v(n * r);
    for (auto& x : v)
      x = static_cast<Elem>(rng_() % static_cast<std::uint64_t>(ring_.modulus()));
    if (!projectors_.empty()) {
      const Mat& pr = projectors_[rng_() % projectors_.size()];
      for (std::size_t b = 0; b < r; ++b) {
        Vec part(v.begin() + static_cast<std::ptrdiff_t>(b * n), v.begin() + static_cast<std::ptrdiff_t>((b + 1) * n));
        part = pr.apply(part);
        std::copy(part.begin(), part.end(), v.begin() + static_cast<std::ptrdiff_t>(b * n));
      }
    }
    const int t = static_cast<int>(rng_() % static_cast<std::uint64_t>(ring_.e()));
    return vec_scale(ring_, v, ring_.ppow(t));
  }

  std::mt19937_64 rng_;
  RingSpec ring_;
  GroupPtr group_;
  std::size_t r_max_;
  std::size_t count_ = 0;
  GModule base_;
  std::vector<Mat> projectors_;
};

/// The free k-module isomorphic to a quotient over the residue field, keeping
/// the name.
inline GModule freed(const GModule& m)
{
  if (m.is_free())
    return m;
  GModule f = to_free(m).module;
  f.set_name(m.name());
  return f;
}

} // namespace coefsys

#endif
