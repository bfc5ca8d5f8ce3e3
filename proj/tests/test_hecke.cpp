#include <gtest/gtest.h>

#include <set>

#include "coefsys/hecke.hpp"

using namespace coefsys;

namespace {

void expect_all_pass(const LemmaReport& r)
{
  EXPECT_FALSE(r.rejected()) << r.reject_reason;
  for (const auto& c : r.claims)
    EXPECT_EQ(c.verdict, Verdict::Pass) << r.lemma << " " << r.instance << " " << c.name << " " << c.detail;
}

void expect_all_recorded_true(const LemmaReport& r)
{
  EXPECT_EQ(r.overall(), Verdict::Pass);
  for (const auto& c : r.claims)
    if (c.verdict == Verdict::Recorded)
      EXPECT_NE(c.detail.find("true"), std::string::npos) << r.lemma << " " << c.name;
}

// double cosets Nbar g Nbar counted as sets of group elements
std::size_t brute_double_cosets(const FiniteGroup& g)
{
  const auto nb = g.closure(g.Nbar());
  std::set<std::set<Elt>> seen;
  for (Elt x = 0; x < g.order(); ++x) {
    std::set<Elt> dc;
    for (Elt a : nb)
      for (Elt b : nb)
        dc.insert(g.mul(g.mul(a, x), b));
    seen.insert(std::move(dc));
  }
  return seen.size();
}

std::size_t ipow(std::size_t b, std::size_t k)
{
  std::size_t r = 1;
  while (k--)
    r *= b;
  return r;
}

} // namespace

TEST(HeckeAlgebra, DimensionsMatchDoubleCosetCount)
{
  const std::map<int, std::size_t> expected{{2, 2}, {3, 8}, {5, 32}};
  for (auto [p, d] : expected) {
    auto h = build_hecke(p, RingSpec(p, 1));
    EXPECT_EQ(h->dim(), d);
    EXPECT_EQ(h->dim(), brute_double_cosets(h->grp()));
    EXPECT_EQ(h->jdim(), static_cast<std::size_t>((p * p - 1) * (p - 1)));
  }
}

TEST(HeckeAlgebra, SpecialLinearVariant)
{
  for (int p : {2, 3}) {
    HeckeAlgebra h(build_group(GroupKind::SL2, p), RingSpec(p, 1));
    EXPECT_EQ(h.dim(), brute_double_cosets(h.grp()));
    auto rep = check_hecke_algebra(h);
    expect_all_pass(rep);
    EXPECT_EQ(rep.find("dimension_formula"), nullptr);
  }
}

TEST(HeckeAlgebra, ExhaustiveChecks)
{
  for (int p : {2, 3, 5})
    for (int e : {1, 2}) {
      auto h = build_hecke(p, RingSpec(p, e));
      auto rep = check_hecke_algebra(*h);
      expect_all_pass(rep);
      EXPECT_EQ(rep.dims.at("triples_checked"), static_cast<long long>(h->dim() * h->dim() * h->dim()));
    }
}

TEST(HeckeAlgebra, StructureConstantsAgainstMatrices)
{
  auto h = build_hecke(3, RingSpec(3, 2));
  const std::size_t d = h->dim();
  std::vector<Mat> t;
  for (std::size_t a = 0; a < d; ++a)
    t.push_back(h->basis_matrix(a));
  EXPECT_EQ(t[h->unit()], Mat::identity(h->ring(), h->jdim()));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      Mat want(h->ring(), h->jdim(), h->jdim());
      for (std::size_t c = 0; c < d; ++c)
        want = want + t[c].scaled(h->constant(a, b, c));
      EXPECT_EQ(t[a] * t[b], want) << a << " " << b;
    }
  // every operator is G-linear, checked on all group elements
  GModule j = jbar(h->group(), h->ring());
  for (Elt g = 0; g < h->grp().order(); ++g) {
    Mat rg = j.act(g);
    for (std::size_t a = 0; a < d; ++a)
      EXPECT_EQ(rg * t[a], t[a] * rg);
  }
}

TEST(HeckeAlgebra, BasisSpansEndomorphisms)
{
  // End_G(jbar) computed as the commutant of the generator actions
  auto h = build_hecke(3, RingSpec(3, 1));
  GModule j = jbar(h->group(), h->ring());
  const std::size_t n = h->jdim();
  // x -> (g X - X g) on vec(X), X in M_n; kernel dimension = dim End_G
  Mat sys(h->ring(), n * n, n * n * j.gen_action().size());
  std::size_t col = 0;
  for (const auto& g : j.gen_action()) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c, ++col)
        for (std::size_t k = 0; k < n; ++k) {
          // (g X)(r, c) = sum_k g(r, k) X(k, c); (X g)(r, c) = sum_k X(r, k) g(k, c)
          sys(k * n + c, col) = h->ring().add(sys(k * n + c, col), g(r, k));
          sys(r * n + k, col) = h->ring().sub(sys(r * n + k, col), g(k, c));
        }
  }
  EXPECT_EQ(linalg::kernel(sys).size(), h->dim());
}

TEST(HeckeAlgebra, UnsupportedPrime)
{
  EXPECT_THROW(build_hecke(7, RingSpec(7, 1)), Error);
  EXPECT_THROW(build_hecke(4, RingSpec(2, 1)), Error);
}

TEST(HeckeModule, AxiomsHoldAndFailWhenBroken)
{
  auto h = build_hecke(3, RingSpec(3, 1));
  std::mt19937_64 rng(3);
  HeckeModule f = free_hecke_module(h, 2);
  EXPECT_TRUE(check_module_axioms(f));
  HeckeModule q = random_hecke_quotient(h, rng, 1, "q");
  EXPECT_TRUE(check_module_axioms(q));
  EXPECT_GT(q.length(), 0u);
  EXPECT_LT(q.length(), 8u + 1);
  EXPECT_TRUE(check_module_axioms(hecke_direct_sum(q, f)));
  HeckeModule bad = free_hecke_module(h);
  bad.act[h->generators().front()] = bad.act[h->generators().front()].scaled(2);
  EXPECT_FALSE(check_module_axioms(bad));
  auto rep = check_vytastra(bad);
  EXPECT_TRUE(rep.rejected());
}

TEST(HeckeModule, LeftModuleAxiomsOnFreeModule)
{
  // left multiplication matrices compose as the algebra: T_a (T_b x) = (T_a T_b) x
  auto h = build_hecke(3, RingSpec(3, 1));
  for (std::size_t a = 0; a < h->dim(); ++a)
    for (std::size_t b = 0; b < h->dim(); ++b) {
      Mat want(h->ring(), h->dim(), h->dim());
      for (std::size_t c = 0; c < h->dim(); ++c)
        want = want + h->left_mult(c).scaled(h->constant(a, b, c));
      EXPECT_EQ(h->left_mult(b) * h->left_mult(a), want);
    }
}

TEST(Tensor, FreeModuleGivesJbar)
{
  for (int p : {2, 3, 5}) {
    auto h = build_hecke(p, RingSpec(p, 1));
    TensorModule k = tensor_K(free_hecke_module(h));
    EXPECT_EQ(k.length(), h->jdim());
  }
  auto h = build_hecke(3, RingSpec(3, 2));
  EXPECT_EQ(tensor_K(free_hecke_module(h)).length(), 2 * h->jdim());
}

TEST(Tensor, CanonicalMapToJbarIsIsomorphism)
{
  // T_c (x) v -> T_c v kills the balancing rows, is onto and G-linear
  auto h = build_hecke(3, RingSpec(3, 1));
  const RingSpec& ring = h->ring();
  const std::size_t d = h->dim(), n = h->jdim();
  Mat mu(ring, d * n, n);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t x = 0; x < n; ++x)
      for (auto y : h->support(c, x))
        mu(c * n + x, y) = 1;
  HeckeModule f = free_hecke_module(h);
  TensorModule k(f, true);
  // balancing relations in the kernel: each row of B maps to zero
  for (std::size_t b = 0; b < d; ++b)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t x = 0; x < n; ++x) {
        Vec v(d * n, 0);
        for (std::size_t kk = 0; kk < d; ++kk)
          v[kk * n + x] = ring.add(v[kk * n + x], f.act[b](i, kk));
        for (auto y : h->support(b, x))
          v[i * n + y] = ring.sub(v[i * n + y], 1);
        EXPECT_TRUE(vec_is_zero(mu.left_apply(v)));
        EXPECT_TRUE(k.is_zero(v));
      }
  EXPECT_EQ(linalg::rank(mu), n);
  EXPECT_EQ(k.length(), n);
  for (Elt g : h->grp().generators()) {
    const auto& pm = h->perm(g);
    for (std::size_t r = 0; r < d * n; ++r) {
      Vec e = unit_vec(d * n, r);
      Vec lhs = mu.left_apply(k.act(g, e));
      Vec img = mu.left_apply(e), rhs(n, 0);
      for (std::size_t x = 0; x < n; ++x)
        rhs[pm[x]] = img[x];
      EXPECT_EQ(lhs, rhs);
    }
  }
}

TEST(Tensor, ZeroAndAdditivity)
{
  auto h = build_hecke(3, RingSpec(3, 1));
  HeckeModule f = free_hecke_module(h);
  HeckeModule zero = hecke_quotient(f, {unit_vec(f.rank, h->unit())}, "0");
  EXPECT_EQ(zero.length(), 0u);
  EXPECT_EQ(tensor_K(zero).length(), 0u);
  EXPECT_EQ(tensor_K(free_hecke_module(h, 2)).length(), 2 * h->jdim());
  std::mt19937_64 rng(17);
  for (int t = 0; t < 4; ++t) {
    HeckeModule a = random_hecke_quotient(h, rng, 1, "a");
    HeckeModule b = random_hecke_quotient(h, rng, 1, "b");
    TensorModule ka(a), kb(b), kab(hecke_direct_sum(a, b));
    EXPECT_EQ(kab.length(), ka.length() + kb.length());
    EXPECT_EQ(kab.invariants_length(), ka.invariants_length() + kb.invariants_length());
  }
}

TEST(Tensor, SparseAndDensePathsAgree)
{
  auto h = build_hecke(3, RingSpec(3, 1));
  std::mt19937_64 rng(23);
  std::vector<HeckeModule> mods{free_hecke_module(h)};
  for (int t = 0; t < 4; ++t)
    mods.push_back(random_hecke_quotient(h, rng, 1 + t % 2, "q"));
  for (const auto& m : mods) {
    TensorModule sp(m), de(m, true);
    EXPECT_EQ(sp.length(), de.length());
    EXPECT_EQ(sp.invariants_length(), de.invariants_length());
    std::vector<Vec> img;
    for (std::size_t i = 0; i < m.rank; ++i)
      img.push_back(sp.phi_tensor(i));
    EXPECT_EQ(sp.image_length(img), de.image_length(img));
  }
}

TEST(Tensor, ReducedPresentationMatchesBalancingRows)
{
  for (int p : {2, 3})
    for (int e : {1, 2}) {
      auto h = build_hecke(p, RingSpec(p, e));
      std::mt19937_64 rng(static_cast<std::uint64_t>(31 * p + e));
      std::vector<HeckeModule> mods{free_hecke_module(h), free_hecke_module(h, 2)};
      for (int t = 0; t < 4; ++t)
        mods.push_back(random_hecke_quotient(h, rng, 1 + t % 2, "q"));
      for (const auto& m : mods) {
        TensorModule fast(m), slow(m, false, true);
        ASSERT_TRUE(fast.reduced());
        ASSERT_FALSE(slow.reduced());
        EXPECT_EQ(fast.length(), slow.length()) << p << " " << e;
        EXPECT_EQ(fast.invariants_length(), slow.invariants_length()) << p << " " << e;
        std::vector<Vec> img;
        for (std::size_t i = 0; i < m.rank; ++i)
          img.push_back(fast.phi_tensor(i));
        EXPECT_EQ(fast.image_length(img), slow.image_length(img));
        for (int t = 0; t < 20; ++t) {
          Vec v(fast.ambient(), 0);
          for (auto& x : v)
            x = rng() % 5 == 0 ? static_cast<Elem>(rng() % h->ring().modulus()) : 0;
          // v minus a balancing row is zero iff v is
          std::size_t i = rng() % m.rank, x = rng() % h->jdim(), b = h->generators()[rng() % h->generators().size()];
          Vec w = v;
          for (std::size_t k = 0; k < m.rank; ++k)
            w[k * h->jdim() + x] = h->ring().add(w[k * h->jdim() + x], m.act[b](i, k));
          for (auto y : h->support(b, x))
            w[i * h->jdim() + y] = h->ring().sub(w[i * h->jdim() + y], 1);
          EXPECT_EQ(fast.is_zero(v), slow.is_zero(v));
          EXPECT_EQ(fast.is_zero(w), fast.is_zero(v));
        }
      }
    }
}

TEST(Tensor, PermutedBasisFallsBackToBalancingRows)
{
  // H with its basis reversed: same module, not in the standard free basis
  auto h = build_hecke(3, RingSpec(3, 1));
  HeckeModule f = free_hecke_module(h);
  HeckeModule g = f;
  const std::size_t d = f.rank;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k)
        g.act[a](i, k) = f.act[a](d - 1 - i, d - 1 - k);
  ASSERT_TRUE(check_module_axioms(g));
  TensorModule kg(g);
  EXPECT_FALSE(kg.reduced());
  EXPECT_EQ(kg.length(), TensorModule(f).length());
  EXPECT_EQ(kg.invariants_length(), TensorModule(f).invariants_length());
}

TEST(Tensor, InvariantsMatchEnumeration)
{
  // p = 2: M (x) jbar has 2^6 vectors; count those fixed modulo B
  auto h = build_hecke(2, RingSpec(2, 1));
  HeckeModule f = free_hecke_module(h);
  TensorModule k(f), oracle(f, false, true);
  const std::size_t big = f.rank * h->jdim();
  const RingSpec& ring = h->ring();
  std::size_t in_b = 0, fixed = 0;
  for (std::size_t code = 0; code < ipow(2, big); ++code) {
    Vec v(big);
    for (std::size_t i = 0; i < big; ++i)
      v[i] = static_cast<Elem>((code >> i) & 1u);
    in_b += oracle.is_zero(v);
    fixed += oracle.is_zero(vec_sub(ring, k.act(h->grp().nbar(), v), v));
  }
  std::size_t q = fixed / in_b, dim = 0;
  while (q > 1) {
    q /= 2;
    ++dim;
  }
  EXPECT_EQ(k.invariants_length(), dim);
  EXPECT_EQ(ipow(2, big) / in_b, ipow(2, k.length()));
}

TEST(Vytastra, FreeModuleBijective)
{
  for (int p : {2, 3, 5}) {
    auto h = build_hecke(p, RingSpec(p, 1));
    auto rep = check_vytastra(free_hecke_module(h));
    expect_all_pass(rep);
    EXPECT_EQ(rep.dims.at("module_length"), static_cast<long long>(2 * (p - 1) * (p - 1)));
    EXPECT_EQ(rep.dims.at("tensor_invariants"), rep.dims.at("module_length"));
  }
}

TEST(Vytastra, SeededQuotients)
{
  for (int p : {2, 3}) {
    auto h = build_hecke(p, RingSpec(p, 1));
    std::mt19937_64 rng(100 + static_cast<unsigned>(p));
    for (int t = 0; t < 10; ++t)
      expect_all_pass(check_vytastra(random_hecke_quotient(h, rng, 1 + t % 2, "q" + std::to_string(t))));
  }
}

TEST(Vytastra, RecordedBeyondResidueField)
{
  auto h = build_hecke(3, RingSpec(3, 2));
  auto rep = check_vytastra(free_hecke_module(h));
  for (const auto& c : rep.claims)
    EXPECT_EQ(c.verdict, Verdict::Recorded);
  expect_all_recorded_true(rep);
}

TEST(Flatness, SectionFoundAndVerified)
{
  for (int p : {2, 3, 5}) {
    auto h = build_hecke(p, RingSpec(p, 1));
    auto rep = check_flatness(*h, p <= 3);
    expect_all_pass(rep);
    ASSERT_NE(rep.find("flat"), nullptr);
    EXPECT_EQ(rep.find("flat")->verdict, Verdict::Pass);
  }
}

TEST(Flatness, TamperedSectionRejected)
{
  auto h = build_hecke(3, RingSpec(3, 1));
  HeckeCover cv = hecke_cover(*h);
  auto s = find_section(*h, cv);
  ASSERT_TRUE(s.has_value());
  EXPECT_TRUE(verify_section(*h, cv, *s));
  Mat bad = *s;
  bad(0, 0) = h->ring().add(bad(0, 0), 1);
  EXPECT_FALSE(verify_section(*h, cv, bad));
}

TEST(Flatness, RecordedBeyondResidueField)
{
  auto h = build_hecke(3, RingSpec(3, 2));
  auto rep = check_flatness(*h, true);
  EXPECT_EQ(rep.find("flat")->verdict, Verdict::Recorded);
  EXPECT_EQ(rep.overall(), Verdict::Pass);
}

TEST(JbarStar, InvariantsEqualHeckeDimension)
{
  for (int p : {2, 3, 5})
    for (int e : {1, 2})
      expect_all_pass(invariants_jbar_star(*build_hecke(p, RingSpec(p, e))));
}
