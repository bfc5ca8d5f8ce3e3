#include <gtest/gtest.h>

#include "coefsys/catalog.hpp"
#include "coefsys/tree.hpp"

using namespace coefsys;

namespace {

GroupPtr sl2(int p) { return build_group(GroupKind::SL2, p); }

void expect_all_pass(const LemmaReport& r)
{
  EXPECT_FALSE(r.rejected()) << r.reject_reason;
  for (const auto& c : r.claims)
    EXPECT_EQ(c.verdict, Verdict::Pass) << r.lemma << " " << r.instance << " " << c.name << " " << c.detail;
}

Mat dense_boundary(const HalfTreeComplex& cc) { return cc.boundary().to_dense(); }

Mat dense_g0(const HalfTreeComplex& cc)
{
  Mat g(cc.ring(), cc.dim0(), cc.dim0());
  for (std::size_t c = 0; c < cc.dim0(); ++c) {
    Vec v = cc.g0(unit_vec(cc.dim0(), c));
    for (std::size_t r = 0; r < cc.dim0(); ++r)
      g(r, c) = v[r];
  }
  return g;
}

// Gamma-fixed classes in H_0 by enumerating all 0-chains: the number of
// chains c with g c - c a boundary, divided by the number of boundaries.
std::size_t brute_fixed_dim(const HalfTreeComplex& cc)
{
  const RingSpec& r = cc.ring();
  const std::size_t n = cc.dim0();
  const Mat bd = dense_boundary(cc);
  CanonicalBasis im = CanonicalBasis::span(r, n, bd.transpose().row_list());
  const Mat g = dense_g0(cc);
  const auto p = static_cast<std::size_t>(r.p());
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i)
    total *= p;
  std::size_t fixed = 0;
  for (std::size_t code = 0; code < total; ++code) {
    Vec c(n);
    std::size_t t = code;
    for (auto& x : c) {
      x = static_cast<Elem>(t % p);
      t /= p;
    }
    fixed += im.contains(vec_sub(r, g.apply(c), c));
  }
  std::size_t bcount = 1;
  for (std::size_t i = 0; i < im.size(); ++i)
    bcount *= p;
  std::size_t q = fixed / bcount, dim = 0;
  while (q > 1) {
    q /= p;
    ++dim;
  }
  return dim;
}

} // namespace

TEST(RhoChoice, ParsesAndRejects)
{
  EXPECT_EQ(RhoChoice::parse("w0").kind, RhoChoice::Kind::W0);
  auto t = RhoChoice::parse("twist:2");
  EXPECT_EQ(t.kind, RhoChoice::Kind::Twist);
  EXPECT_EQ(t.k, 2);
  EXPECT_EQ(RhoChoice::parse("torus:3").to_string(), "torus:3");
  EXPECT_THROW(RhoChoice::parse("twist:"), Error);
  EXPECT_THROW(RhoChoice::parse("twist:2x"), Error);
  EXPECT_THROW(RhoChoice::parse("w1"), Error);
}

TEST(Tree, TrivialModuleDepthThree)
{
  auto g = sl2(2);
  HalfTreeComplex cc(trivial_module(g, RingSpec(2, 1)), 3);
  EXPECT_EQ(cc.dim0(), 15u);
  EXPECT_EQ(cc.dim1(), 14u);
  Homology h = homology(cc);
  EXPECT_EQ(h.rank_boundary, 14u);
  EXPECT_TRUE(h.h1_basis.empty());
  EXPECT_EQ(h.h0, 1u);
  EXPECT_EQ(h.h0_fixed, 1u);
  EXPECT_TRUE(h.iota_fixed);
  EXPECT_EQ(h.iota_rank, 1u);
}

TEST(Tree, JbarDimensions)
{
  auto g = sl2(3);
  HalfTreeComplex cc(jbar(g, RingSpec(3, 1)), 2);
  EXPECT_EQ(cc.wdim(), 8u);
  EXPECT_EQ(cc.edge_dim(), 4u);
  EXPECT_EQ(cc.dim0(), 104u);
  EXPECT_EQ(cc.dim1(), 48u);
  EXPECT_EQ(cc.level_size0(2), 72u);
  EXPECT_EQ(cc.level_size1(1), 36u);
}

TEST(Tree, JbarFixedDimensionStable)
{
  auto g = sl2(3);
  GModule w = jbar(g, RingSpec(3, 1));
  for (int depth = 1; depth <= 4; ++depth) {
    Homology h = homology(HalfTreeComplex(w, depth));
    EXPECT_EQ(h.h0_fixed, 4u) << depth;
    EXPECT_EQ(h.rank_boundary, h.dim1) << depth;
    EXPECT_EQ(h.iota_rank, 4u);
    EXPECT_TRUE(h.iota_fixed);
  }
}

TEST(Tree, SteinbergFixedLine)
{
  for (int p : {2, 3, 5}) {
    auto g = sl2(p);
    Homology h = homology(HalfTreeComplex(steinberg(g, RingSpec(p, 1)), 2));
    EXPECT_EQ(h.h0_fixed, 1u) << p;
    EXPECT_EQ(h.iota_rank, 1u) << p;
  }
}

TEST(Tree, FixedDimensionMatchesEnumeration)
{
  struct Case {
    int p, depth;
    GModule w;
  };
  std::vector<Case> cases;
  cases.push_back({2, 1, trivial_module(sl2(2), RingSpec(2, 1))});
  cases.push_back({2, 2, trivial_module(sl2(2), RingSpec(2, 1))});
  cases.push_back({3, 1, trivial_module(sl2(3), RingSpec(3, 1))});
  cases.push_back({2, 1, steinberg(sl2(2), RingSpec(2, 1))});
  cases.push_back({2, 1, jbar(sl2(2), RingSpec(2, 1))});
  for (auto& c : cases) {
    HalfTreeComplex cc(c.w, c.depth);
    ASSERT_LE(cc.dim0(), 16u);
    EXPECT_EQ(homology(cc).h0_fixed, brute_fixed_dim(cc)) << c.w.name() << " D=" << c.depth;
  }
}

TEST(Tree, SparseRanksMatchDense)
{
  auto g = sl2(3);
  const RingSpec k(3, 1);
  for (const auto& w : {jbar(g, k), steinberg(g, k), trivial_module(g, k)}) {
    HalfTreeComplex cc(w, 2, RhoChoice::parse("twist:2"), 2);
    const Mat bd = dense_boundary(cc);
    Homology h = homology(cc);
    EXPECT_EQ(h.rank_boundary, linalg::rank(bd.transpose()));
    // rank of [boundary | g - 1] via dense Howell form
    Mat gm = dense_g0(cc) - Mat::identity(k, cc.dim0());
    EXPECT_EQ(cc.dim0() - h.h0_fixed, linalg::rank(Mat::hstack(bd, gm).transpose()));
    // canonical forms agree with the identity elimination order
    linalg::SparseEchelon se(k, cc.dim0());
    for (std::size_t e = 0; e < cc.dim1(); ++e)
      se.insert(cc.boundary().column(e));
    EXPECT_EQ(se.rref(), linalg::howell_form(bd.transpose()).rows());
  }
}

TEST(Tree, BoundaryIsEquivariant)
{
  for (int p : {2, 3, 5}) {
    auto g = sl2(p);
    const RingSpec k(p, 1);
    for (int u = 1; u < p; ++u)
      for (const char* rho : {"w0", "twist:1", "torus:1"}) {
        HalfTreeComplex cc(jbar(g, k), 2, RhoChoice::parse(rho), u);
        EXPECT_TRUE(cc.equivariant()) << p << " u=" << u << " " << rho;
      }
  }
}

TEST(Tree, GeneratorOrderOnLevels)
{
  auto g = sl2(3);
  HalfTreeComplex cc(jbar(g, RingSpec(3, 1)), 2, {}, 2);
  for (int m = 0; m < cc.depth(); ++m) {
    Vec b(cc.dim1(), 0);
    for (std::size_t k = cc.off1(m); k < cc.off1(m + 1); ++k)
      b[k] = static_cast<Elem>((k * 7 + 1) % 3);
    Vec cur = b;
    for (std::size_t i = 0; i < cc.ppow(m + 1); ++i)
      cur = cc.g1(cur);
    EXPECT_EQ(cur, b) << m;
  }
  Vec c(cc.dim0(), 0);
  for (std::size_t k = 0; k < cc.dim0(); ++k)
    c[k] = static_cast<Elem>(k % 3);
  Vec cur = c;
  for (std::size_t i = 0; i < cc.ppow(cc.depth()) * 3; ++i)
    cur = cc.g0(cur);
  EXPECT_EQ(cur, c);
}

TEST(Tree, ParentEdgeInvertsChild)
{
  auto g = sl2(5);
  HalfTreeComplex cc(trivial_module(g, RingSpec(5, 1)), 3, {}, 3);
  for (int m = 0; m < cc.depth(); ++m)
    for (std::size_t a = 0; a < cc.ppow(m); ++a)
      for (std::size_t j = 0; j < 5; ++j) {
        auto [a2, j2] = cc.parent_edge(m + 1, cc.child(m, a, j));
        EXPECT_EQ(a2, a);
        EXPECT_EQ(j2, j);
      }
}

TEST(Tree, LastRelationIsACycle)
{
  linalg::SparseEchelon se(RingSpec(3, 1), 3, true);
  se.insert({{0, 1}, {1, 2}});
  se.insert({{1, 1}, {2, 1}});
  EXPECT_FALSE(se.insert({{0, 1}, {2, 1}}));
  const auto& rel = se.last_relation();
  Vec acc(3, 0);
  const std::vector<Vec> rows{{1, 2, 0}, {0, 1, 1}, {1, 0, 1}};
  const RingSpec k(3, 1);
  for (auto [i, x] : rel)
    acc = vec_add(k, acc, vec_scale(k, rows[i], x));
  EXPECT_TRUE(vec_is_zero(acc));
}

TEST(Tree, PreconditionErrors)
{
  auto g = sl2(3);
  EXPECT_THROW(HalfTreeComplex(jbar(g, RingSpec(3, 2)), 2), Error);
  EXPECT_THROW(HalfTreeComplex(regular_module(g, RingSpec(3, 1)), 2), Error);
  EXPECT_THROW(HalfTreeComplex(jbar(g, RingSpec(3, 1)), 0), Error);
  EXPECT_THROW(HalfTreeComplex(jbar(g, RingSpec(3, 1)), 2, RhoChoice::parse("twist:3")), Error);
  EXPECT_THROW(HalfTreeComplex(jbar(g, RingSpec(3, 1)), 2, {}, 3), Error);
}

TEST(Tree, CorrproAndPresentationOnCatalog)
{
  for (int p : {2, 3}) {
    Catalog cat = builtin_catalog(p, 1, 2, 11);
    for (const auto& w : cat.modules) {
      expect_all_pass(check_corrpro(w, 3));
      expect_all_pass(check_presentation(w, 3));
      expect_all_pass(check_cogtri_hypothesis(w));
    }
  }
}

TEST(Tree, CorrproGeneralLinear)
{
  auto g = build_group(GroupKind::GL2, 3);
  auto rep = check_corrpro(jbar(g, RingSpec(3, 1)), 2);
  expect_all_pass(rep);
  EXPECT_GT(rep.dims.at("inv_nbar"), 0);
}

TEST(Reduce, RandomFixedChains)
{
  std::mt19937_64 rng(5);
  auto g = sl2(3);
  const RingSpec k(3, 1);
  std::vector<GModule> mods{jbar(g, k), steinberg(g, k), trivial_module(g, k)};
  for (const auto& ps : decompose_jbar(g, k))
    mods.push_back(ps.summand.module);
  for (const auto& w : mods)
    for (int u : {1, 2})
      for (const char* rho : {"w0", "twist:2", "torus:1"}) {
        HalfTreeComplex cc(w, 3, RhoChoice::parse(rho), u);
        ChainReducer red(cc);
        for (int t = 0; t < 6; ++t) {
          Vec c = random_fixed_chain(cc, rng);
          ReductionResult r = red.reduce(c);
          EXPECT_TRUE(r.certificate_ok);
          EXPECT_EQ(vec_add(k, cc.iota(r.w), cc.apply_boundary(r.certificate)), c);
          EXPECT_EQ(r.rounds, std::max(r.initial_level, 0));
        }
      }
}

TEST(Reduce, RecoversIotaComponent)
{
  std::mt19937_64 rng(9);
  auto g = sl2(5);
  const RingSpec k(5, 1);
  HalfTreeComplex cc(jbar(g, k), 2);
  ChainReducer red(cc);
  for (const auto& w : cc.fixed_vectors()) {
    Vec b(cc.dim1());
    for (auto& x : b)
      x = static_cast<Elem>(rng() % 5);
    Vec c = vec_add(k, cc.iota(w), cc.apply_boundary(b));
    ReductionResult r = red.reduce(c);
    // iota is injective modulo boundaries, so w comes back exactly
    EXPECT_EQ(r.w, w);
    EXPECT_EQ(r.initial_level, 2);
  }
}

TEST(Reduce, ChainInterface)
{
  auto g = sl2(2);
  const RingSpec k(2, 1);
  HalfTreeComplex cc(steinberg(g, k), 2);
  Vec c = cc.iota(cc.fixed_vectors().front());
  Chain ch = cc.split0(c);
  EXPECT_EQ(ch.support_level(), 0);
  Vec w;
  Chain b = ChainReducer(cc).reduce_chain(ch, &w);
  EXPECT_EQ(b.degree, 1);
  EXPECT_EQ(b.support_level(), -1);
  EXPECT_EQ(w, cc.fixed_vectors().front());
}

TEST(Reduce, RejectsNonFixedClass)
{
  auto g = sl2(3);
  HalfTreeComplex cc(jbar(g, RingSpec(3, 1)), 2);
  Vec c(cc.dim0(), 0);
  c[cc.idx0(2, 4, 0)] = 1;
  EXPECT_THROW(reduce_chain(cc, c), Error);
}
