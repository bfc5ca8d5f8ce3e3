#include <gtest/gtest.h>

#include <random>
#include <set>

#include "coefsys/gmodule.hpp"

using namespace coefsys;

namespace {

std::size_t count_matrices(int p, bool det_one)
{
  std::size_t n = 0;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int c = 0; c < p; ++c)
        for (int d = 0; d < p; ++d) {
          int det = ((a * d - b * c) % p + p) % p;
          n += det_one ? det == 1 : det != 0;
        }
  return n;
}

// every vector of (Z/q)^n, n small
std::vector<Vec> all_vectors(const RingSpec& r, std::size_t n)
{
  std::vector<Vec> out{Vec(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Vec> next;
    for (const auto& v : out)
      for (Elem x = 0; x < r.modulus(); ++x) {
        Vec w = v;
        w[i] = x;
        next.push_back(std::move(w));
      }
    out = std::move(next);
  }
  return out;
}

std::size_t ilog(std::size_t x, std::size_t base)
{
  std::size_t k = 0;
  while (x > 1) {
    EXPECT_EQ(x % base, 0u);
    x /= base;
    ++k;
  }
  return k;
}

Mat cyclic_shift(const RingSpec& r, std::size_t n)
{
  Mat m(r, n, n);
  for (std::size_t i = 0; i < n; ++i)
    m((i + 1) % n, i) = 1;
  return m;
}

} // namespace

TEST(Group, OrdersMatchEnumeration)
{
  for (int p : {2, 3, 5, 7}) {
    EXPECT_EQ(build_group(GroupKind::SL2, p)->order(), count_matrices(p, true));
    EXPECT_EQ(build_group(GroupKind::GL2, p)->order(), count_matrices(p, false));
  }
  EXPECT_EQ(build_group(GroupKind::SL2, 2)->order(), 6u);
  EXPECT_EQ(build_group(GroupKind::SL2, 3)->order(), 24u);
  EXPECT_EQ(build_group(GroupKind::GL2, 3)->order(), 48u);
}

TEST(Group, UnsupportedPrime)
{
  EXPECT_THROW(build_group(GroupKind::SL2, 11), Error);
  EXPECT_THROW(build_group(GroupKind::SL2, 4), Error);
}

TEST(Group, DistinguishedSubgroups)
{
  for (auto kind : {GroupKind::SL2, GroupKind::GL2})
    for (int p : {2, 3, 5}) {
      auto g = build_group(kind, p);
      auto nbar = g->closure(g->Nbar());
      EXPECT_EQ(nbar.size(), static_cast<std::size_t>(p));
      // w0 nbar' w0^-1 lies in Nbar
      Elt c = g->conj(g->w0(), g->nbar_prime());
      EXPECT_NE(std::find(nbar.begin(), nbar.end(), c), nbar.end());
      EXPECT_NE(c, g->identity());
      // the p other unipotent radicals are distinct and differ from Nbar
      std::set<std::vector<Elt>> radicals;
      std::vector<Elt> ns = nbar;
      std::sort(ns.begin(), ns.end());
      for (Elt x : g->other_radicals()) {
        auto s = g->closure({x});
        std::sort(s.begin(), s.end());
        EXPECT_NE(s, ns);
        radicals.insert(s);
      }
      EXPECT_EQ(radicals.size(), static_cast<std::size_t>(p));
      EXPECT_EQ(g->closure(g->all()).size(), g->order());
    }
}

TEST(Group, WordsEvaluateToElements)
{
  auto g = build_group(GroupKind::GL2, 5);
  for (Elt x = 0; x < g->order(); ++x) {
    Elt y = g->identity();
    for (auto k : g->word(x))
      y = g->mul(y, g->generators()[k]);
    EXPECT_EQ(x, y);
  }
}

TEST(Jbar, Ranks)
{
  EXPECT_EQ(jbar(build_group(GroupKind::SL2, 3), RingSpec(3, 1)).rank(), 8u);
  EXPECT_EQ(jbar(build_group(GroupKind::SL2, 2), RingSpec(2, 1)).rank(), 3u);
  EXPECT_EQ(jbar(build_group(GroupKind::GL2, 3), RingSpec(3, 1)).rank(), 16u);
  for (int p : {2, 3, 5, 7}) {
    auto g = build_group(GroupKind::GL2, p);
    EXPECT_EQ(jbar(g, RingSpec(p, 1)).rank(), g->order() / static_cast<std::size_t>(p));
  }
}

TEST(Jbar, ActionLaw)
{
  std::mt19937_64 rng(11);
  for (auto kind : {GroupKind::SL2, GroupKind::GL2}) {
    auto g = build_group(kind, 3);
    RingSpec r(3, 2);
    GModule j = jbar(g, r);
    EXPECT_TRUE(is_valid_module(j));
    EXPECT_EQ(j.act(g->identity()), Mat::identity(r, j.rank()));
    for (int t = 0; t < 120; ++t) {
      Elt a = static_cast<Elt>(rng() % g->order()), b = static_cast<Elt>(rng() % g->order());
      Vec v(j.rank());
      for (auto& x : v)
        x = static_cast<Elem>(rng() % 9);
      EXPECT_EQ(j.act_vec(a, j.act_vec(b, v)), j.act_vec(g->mul(a, b), v));
    }
  }
}

TEST(Invariants, JbarSL2p3)
{
  auto g = build_group(GroupKind::SL2, 3);
  RingSpec r(3, 1);
  GModule j = jbar(g, r);
  EXPECT_EQ(invariants(j, g->Nbar()).size(), 4u);
  EXPECT_EQ(invariants(j, g->all()).size(), 1u);
  EXPECT_EQ(invariants(j, g->Nbar_prime()).size(), 4u);

  // oracle: count fixed vectors among all 3^8
  Mat n = j.act(g->nbar());
  std::size_t fixed = 0;
  std::set<Vec> image;
  for (const auto& v : all_vectors(r, 8)) {
    Vec w = n.apply(v);
    fixed += w == v;
    image.insert(vec_sub(r, w, v));
  }
  EXPECT_EQ(ilog(fixed, 3), 4u);
  // coinvariants: 3^8 / |(n - 1) image|
  EXPECT_EQ(8 - ilog(image.size(), 3), 4u);
  EXPECT_EQ(Quotient{coinvariants(j, g->Nbar())}.length(), 4u);
}

TEST(Invariants, TrivialModule)
{
  auto g = build_group(GroupKind::SL2, 5);
  GModule t = trivial_module(g, RingSpec(5, 2));
  EXPECT_TRUE(invariants(t, g->Nbar()).is_full());
  EXPECT_EQ(Quotient{coinvariants(t, g->Nbar())}.length(), 2u);
}

TEST(Invariants, ConjugateSubgroupsAgree)
{
  for (int p : {2, 3, 5}) {
    auto g = build_group(GroupKind::SL2, p);
    RingSpec r(p, 1);
    std::vector<GModule> mods{trivial_module(g, r), jbar(g, r), steinberg(g, r)};
    for (const auto& ps : decompose_jbar(g, r))
      mods.push_back(ps.summand.module);
    for (const auto& m : mods)
      EXPECT_EQ(m.length_of(invariants(m, g->Nbar())), m.length_of(invariants(m, g->Nbar_prime())))
        << m.name();
  }
}

TEST(Invariants, QuotientModuleOverZ4)
{
  // jbar / 2 jbar over Z/4 behaves like jbar over F_2
  auto g = build_group(GroupKind::SL2, 2);
  RingSpec r(2, 2);
  GModule j = jbar(g, r);
  std::vector<Vec> rel;
  for (std::size_t i = 0; i < j.rank(); ++i)
    rel.push_back(vec_scale(r, unit_vec(j.rank(), i), 2));
  GModule q = quotient(j, CanonicalBasis::span(r, j.rank(), rel));
  GModule f = jbar(g, RingSpec(2, 1));
  EXPECT_EQ(q.length_of(invariants(q, g->Nbar())), f.length_of(invariants(f, g->Nbar())));
  EXPECT_EQ(q.length_of(invariants(q, g->all())), 1u);
}

TEST(Generated, Examples)
{
  auto g = build_group(GroupKind::SL2, 3);
  RingSpec r(3, 1);
  GModule j = jbar(g, r);
  std::size_t phi = jbar_phi_index(*g);
  EXPECT_TRUE(generated_submodule(j, {unit_vec(j.rank(), phi)}).is_full());
  EXPECT_TRUE(generated_submodule(j, {Vec(j.rank(), 0)}).is_zero());
  auto inv = invariants(j, g->Nbar_prime());
  EXPECT_TRUE(generated_submodule(j, inv.rows(), g->Nbar()).is_full());
  // the constants are a submodule
  EXPECT_EQ(generated_submodule(j, {Vec(j.rank(), 1)}).size(), 1u);
}

TEST(Generated, ClosureIsFixedPoint)
{
  std::mt19937_64 rng(5);
  auto g = build_group(GroupKind::SL2, 5);
  RingSpec r(5, 2);
  GModule j = jbar(g, r);
  for (int t = 0; t < 5; ++t) {
    Vec v(j.rank());
    for (auto& x : v)
      x = static_cast<Elem>(rng() % 25) * (t % 2 ? 5 : 1);
    auto s = generated_submodule(j, {v});
    EXPECT_TRUE(is_stable(j, s));
    EXPECT_TRUE(s.contains(v));
    std::vector<Vec> more = s.rows();
    for (const auto& a : j.gen_action())
      for (const auto& row : s.rows())
        more.push_back(a.apply(row));
    EXPECT_EQ(CanonicalBasis::span(r, j.rank(), more), s);
  }
}

TEST(H1, Examples)
{
  RingSpec r(3, 2);
  auto h = h1_procyclic(OpModule(Mat::identity(r, 1)));
  EXPECT_EQ(h.length(), 2u);  // all of Z/9

  RingSpec k(3, 1);
  EXPECT_EQ(h1_procyclic(OpModule(cyclic_shift(k, 3))).length(), 1u);

  // k[Nbar] (x) W^{Nbar'} for W = jbar(SL2, 3)
  auto g = build_group(GroupKind::SL2, 3);
  GModule j = jbar(g, k);
  std::size_t d = invariants(j, g->Nbar_prime()).size();
  Mat c(k, 3 * d, 3 * d);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t i = 0; i < d; ++i)
      c(((a + 1) % 3) * d + i, a * d + i) = 1;
  EXPECT_EQ(h1_procyclic(OpModule(c)).length(), 4u);
}

TEST(H1, Errors)
{
  RingSpec r(3, 1);
  Mat z(r, 1, 1);
  EXPECT_THROW(h1_procyclic(OpModule(z)), Error);
  Mat two(r, 1, 1);
  two(0, 0) = 2;  // order 2
  EXPECT_THROW(h1_procyclic(OpModule(two)), Error);
}

TEST(H1, EulerCharacteristicBalance)
{
  std::mt19937_64 rng(17);
  for (int p : {2, 3, 5}) {
    RingSpec r(p, 1);
    for (int t = 0; t < 20; ++t) {
      std::size_t n = 1 + rng() % 7;
      // unipotent upper-triangular, conjugated by a random invertible matrix
      Mat u = Mat::identity(r, n), a(r, n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          u(i, j) = static_cast<Elem>(rng() % static_cast<unsigned>(p));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          a(i, j) = i <= j ? (i == j ? 1 : static_cast<Elem>(rng() % static_cast<unsigned>(p))) : 0;
      Mat al = a.transpose();  // lower unitriangular
      Mat c = al * u;
      if (!has_p_power_order(OpModule(c)))
        c = u;
      auto h = h1_procyclic(OpModule(c));
      std::size_t kd = linalg::kernel((c - Mat::identity(r, n)).transpose()).size();
      EXPECT_EQ(h.length(), kd);
    }
  }
}

TEST(H1, Functorial)
{
  // the augmentation k[Z/3] -> k induces a bijection on H^1
  RingSpec k(3, 1);
  auto src = h1_procyclic(OpModule(cyclic_shift(k, 3)));
  auto dst = h1_procyclic(OpModule(Mat::identity(k, 1)));
  Mat eps(k, 1, 3);
  for (std::size_t i = 0; i < 3; ++i)
    eps(0, i) = 1;
  EXPECT_TRUE(h1_map(src, dst, eps).bijective());
  // the zero map is well defined but not injective
  auto v = h1_map(src, dst, Mat(k, 1, 3));
  EXPECT_TRUE(v.well_defined);
  EXPECT_FALSE(v.injective);
}

TEST(Induce, Examples)
{
  RingSpec k(3, 1);
  OpModule triv(Mat::identity(k, 1));
  EXPECT_EQ(induce_cyclic(triv, 0, 2).op, triv.op);
  EXPECT_EQ(induce_cyclic(triv, 1, 2).op, cyclic_shift(k, 3));
  EXPECT_THROW(induce_cyclic(triv, 3, 2), Error);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    std::size_t n = 1 + rng() % 4;
    Mat c = Mat::identity(k, n);
    for (std::size_t i = 0; i + 1 < n; ++i)
      c(i, i + 1) = static_cast<Elem>(rng() % 3);
    int m = static_cast<int>(rng() % 3);
    OpModule ind = induce_cyclic(OpModule(c), m, 3);
    std::size_t pm = m == 0 ? 1 : (m == 1 ? 3 : 9);
    EXPECT_EQ(ind.rank, pm * n);
    Mat gp = ind.op.pow(pm);
    EXPECT_EQ(gp.block(0, 0, n, n), c);
    // Shapiro: H^1 of the induced module equals coker(c - 1)
    EXPECT_EQ(h1_procyclic(ind).length(), h1_procyclic(OpModule(c)).length());
  }
}

TEST(Decompose, SummandDimensions)
{
  for (int p : {2, 3, 5}) {
    auto g = build_group(GroupKind::SL2, p);
    RingSpec r(p, 1);
    auto parts = decompose_jbar(g, r);
    EXPECT_EQ(parts.size(), static_cast<std::size_t>(p - 1));
    CanonicalBasis total(r, jbar(g, r).rank());
    std::size_t dims = 0;
    for (const auto& ps : parts) {
      EXPECT_EQ(ps.span.size(), static_cast<std::size_t>(p + 1));
      EXPECT_TRUE(is_stable(jbar(g, r), ps.span));
      EXPECT_TRUE(is_valid_module(ps.summand.module));
      dims += ps.span.size();
      total = linalg::sum(total, ps.span);
    }
    EXPECT_EQ(dims, static_cast<std::size_t>(p * p - 1));
    EXPECT_TRUE(total.is_full());
  }
}

TEST(Decompose, WorksOverZ9)
{
  auto g = build_group(GroupKind::SL2, 3);
  RingSpec r(3, 2);
  auto parts = decompose_jbar(g, r);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].span.length() + parts[1].span.length(), 16u);
  EXPECT_TRUE(linalg::sum(parts[0].span, parts[1].span).is_full());
}

TEST(Composition, Lengths)
{
  for (int p : {2, 3, 5}) {
    auto g = build_group(GroupKind::SL2, p);
    RingSpec r(p, 1);
    EXPECT_EQ(composition_length(trivial_module(g, r)).length, 1u);
    EXPECT_TRUE(is_irreducible(trivial_module(g, r)));
    GModule st = steinberg(g, r);
    EXPECT_EQ(st.rank(), static_cast<std::size_t>(p));
    EXPECT_TRUE(is_irreducible(st));
    for (const auto& ps : decompose_jbar(g, r)) {
      auto cs = composition_length(ps.summand.module);
      EXPECT_EQ(cs.length, 2u) << "p=" << p << " " << ps.summand.module.name();
      EXPECT_FALSE(is_irreducible(ps.summand.module));
      EXPECT_EQ(ps.summand.module.length_of(invariants(ps.summand.module, g->Nbar())), 2u);
    }
  }
  auto g = build_group(GroupKind::SL2, 3);
  auto cs = composition_length(jbar(g, RingSpec(3, 1)));
  EXPECT_EQ(cs.length, 4u);
  std::size_t sum = 0;
  for (auto d : cs.factor_dims)
    sum += d;
  EXPECT_EQ(sum, 8u);
}

TEST(Composition, ChoiceIndependent)
{
  for (int p : {3, 5}) {
    auto g = build_group(GroupKind::SL2, p);
    GModule j = jbar(g, RingSpec(p, 1));
    auto base = composition_length(j);
    auto dims = base.factor_dims;
    std::sort(dims.begin(), dims.end());
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto cs = composition_length(j, seed);
      EXPECT_EQ(cs.length, base.length);
      auto d = cs.factor_dims;
      std::sort(d.begin(), d.end());
      EXPECT_EQ(d, dims);
    }
  }
}

TEST(Steinberg, OneDimensionalFixedLine)
{
  auto g = build_group(GroupKind::SL2, 3);
  GModule st = steinberg(g, RingSpec(3, 1));
  EXPECT_EQ(st.length_of(invariants(st, g->Nbar())), 1u);
  EXPECT_EQ(Quotient{coinvariants(st, g->Nbar())}.length(), 1u);
}
