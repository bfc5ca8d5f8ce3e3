#ifndef COEFSYS_SUITE_HPP
#define COEFSYS_SUITE_HPP

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "hecke.hpp"
#include "tree.hpp"

#ifndef COEFSYS_VERSION
#define COEFSYS_VERSION "1.0.0"
#endif

namespace coefsys {

class UsageError : public Error {
public:
  using Error::Error;
};

struct RunConfig {
  std::string command;                 ///< lemma21 ... hecke, all, reduce
  int p = 0;
  int e = 1;
  int depth = 2;
  std::optional<std::uint64_t> seed;
  std::string selection = "all";       ///< catalog entry name or "all"
  std::string catalog_file;            ///< load modules from here instead of the built-in catalog
  std::string rho = "w0";
  int unit = 1;
  std::size_t random = 0;              ///< seeded random modules on top of the catalog
  std::size_t samples = 5;             ///< fixed classes per module for reductions
  std::vector<std::string> checks{"dim", "assoc", "invariants", "vytastra", "flatness"};
  std::string output;
  unsigned jobs = 1;
};

inline const std::vector<std::string>& verify_commands()
{
  static const std::vector<std::string> cmds{"lemma21", "lemma22", "corrpro", "presentation",
                                             "cogtri", "reduction", "hecke", "all"};
  return cmds;
}

inline void validate(const RunConfig& c)
{
  const auto& cmds = verify_commands();
  if (c.command != "reduce" && std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    throw UsageError("unknown command '" + c.command + "'");
  if (c.p != 2 && c.p != 3 && c.p != 5 && c.p != 7)
    throw UsageError("--p must be one of 2, 3, 5, 7");
  if (c.e < 1 || c.e > 3)
    throw UsageError("--e must lie in [1, 3]");
  if (c.depth < 1 || c.depth > 6)
    throw UsageError("--depth must lie in [1, 6]");
  if (c.unit < 1 || c.unit >= c.p)
    throw UsageError("--unit must lie in [1, p)");
  if (c.jobs == 0)
    throw UsageError("--jobs must be positive");
  try {
    RhoChoice::parse(c.rho);
  } catch (const Error& ex) {
    throw UsageError(ex.what());
  }
  const bool randomized = c.random > 0 || c.command == "reduce" || c.command == "reduction" ||
                          (c.command == "all" && c.samples > 0);
  if (randomized && !c.seed)
    throw UsageError("--seed is required for randomized runs");
  if (c.command == "hecke" && c.p == 7)
    throw UsageError("verify hecke supports p in {2, 3, 5}");
  if (c.command == "reduce" && c.selection == "all")
    throw UsageError("reduce needs --module NAME");
  static const std::vector<std::string> known{"dim", "assoc", "invariants", "vytastra", "flatness"};
  for (const auto& k : c.checks)
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw UsageError("unknown hecke check '" + k + "'");
}

struct Report {
  std::string version = COEFSYS_VERSION;
  RunConfig config;
  std::vector<LemmaReport> records;
  std::vector<nlohmann::json> replay;
  double elapsed_ms = 0;

  Verdict aggregate() const
  {
    for (const auto& r : records) {
      if (r.overall() == Verdict::Fail)
        return Verdict::Fail;
      if (r.rejected() && r.reject_reason.empty())
        return Verdict::Fail;
    }
    return Verdict::Pass;
  }

  std::size_t count(Verdict v) const
  {
    std::size_t n = 0;
    for (const auto& r : records)
      n += r.overall() == v;
    return n;
  }
};

inline nlohmann::json to_json(const LemmaReport& r, bool timing = true)
{
  using nlohmann::json;
  json j;
  j["lemma"] = r.lemma;
  j["instance"] = r.instance;
  j["p"] = r.p;
  j["e"] = r.e;
  j["seed"] = r.seed;
  j["verdict"] = to_string(r.overall());
  if (r.rejected())
    j["reject_reason"] = r.reject_reason;
  json claims = json::array();
  for (const auto& c : r.claims)
    claims.push_back({{"name", c.name}, {"verdict", to_string(c.verdict)}, {"detail", c.detail}});
  j["claims"] = std::move(claims);
  j["dims"] = r.dims;
  json wit = json::array();
  for (const auto& [name, v] : r.witnesses)
    wit.push_back({{"name", name}, {"values", v}});
  j["witnesses"] = std::move(wit);
  if (timing)
    j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

inline nlohmann::json to_json(const RunConfig& c)
{
  nlohmann::json j;
  j["command"] = c.command;
  j["p"] = c.p;
  j["e"] = c.e;
  j["depth"] = c.depth;
  j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
  j["selection"] = c.selection;
  j["catalog_file"] = c.catalog_file;
  j["rho"] = c.rho;
  j["unit"] = c.unit;
  j["random"] = c.random;
  j["samples"] = c.samples;
  j["checks"] = c.checks;
  j["jobs"] = c.jobs;
  return j;
}

/// timing = false drops every wall-clock field, which makes reports of
/// identical configurations byte-identical.
inline nlohmann::json to_json(const Report& r, bool timing = true)
{
  nlohmann::json j;
  j["tool"] = "coefsys";
  j["version"] = r.version;
  j["config"] = to_json(r.config);
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& x : r.records)
    recs.push_back(to_json(x, timing));
  j["records"] = std::move(recs);
  j["aggregate"] = to_string(r.aggregate());
  j["counts"] = {{"pass", r.count(Verdict::Pass)},
                 {"fail", r.count(Verdict::Fail)},
                 {"rejected", r.count(Verdict::Rejected)}};
  j["replay"] = r.replay;
  if (timing)
    j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

namespace detail {

struct Task {
  std::function<LemmaReport()> run;
  std::optional<GModule> module;   ///< serialized for replay on failure
  std::string command;
};

inline std::vector<LemmaReport> run_tasks(const std::vector<Task>& tasks, unsigned jobs)
{
  std::vector<LemmaReport> out(tasks.size());
  auto one = [&](std::size_t i) {
    try {
      out[i] = tasks[i].run();
    } catch (const std::exception& ex) {
      LemmaReport r;
      r.lemma = tasks[i].command;
      r.instance = tasks[i].module ? tasks[i].module->name() : "";
      r.claim("completed", false, ex.what());
      out[i] = std::move(r);
    }
  };
  if (jobs <= 1 || tasks.size() <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i)
      one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, tasks.size()); ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();)
        one(i);
    });
  for (auto& th : pool)
    th.join();
  return out;
}

inline Catalog selected_catalog(const RunConfig& c)
{
  Catalog cat;
  if (!c.catalog_file.empty()) {
    cat = load_catalog(c.catalog_file);
    if (cat.ring.p() != c.p || cat.ring.e() != c.e)
      throw UsageError("catalog file is for p=" + std::to_string(cat.ring.p()) + " e=" +
                       std::to_string(cat.ring.e()));
  } else {
    cat = builtin_catalog(c.p, c.e);
  }
  if (c.selection != "all") {
    try {
      GModule m = cat.find(c.selection);
      cat.modules = {m};
    } catch (const Error& ex) {
      throw UsageError(ex.what());
    }
  }
  return cat;
}

/// Tree-based checks need the residue field; elsewhere the instance is rejected.
inline LemmaReport guarded_tree(const std::string& lemma, const GModule& w,
                                const std::function<LemmaReport()>& f)
{
  if (!w.ring().is_field()) {
    LemmaReport r = make_report(lemma, w);
    r.reject("module is not over the residue field");
    return r;
  }
  try {
    return f();
  } catch (const ReductionFailure&) {
    throw;
  } catch (const Error& ex) {
    LemmaReport r = make_report(lemma, w);
    r.reject(ex.what());
    return r;
  }
}

inline LemmaReport reduction_report(const GModule& w, const RunConfig& c, std::uint64_t seed)
{
  Stopwatch sw;
  HalfTreeComplex cc(w, c.depth, RhoChoice::parse(c.rho), c.unit);
  LemmaReport rep = tree_report("reduction", cc);
  rep.seed = seed;
  ChainReducer red(cc);
  std::mt19937_64 rng(seed);
  bool certs = true, identities = true;
  std::string failure;
  long long max_rounds = 0, checked = 0;
  for (std::size_t s = 0; s < c.samples; ++s) {
    Vec chain = random_fixed_chain(cc, rng);
    try {
      ReductionResult r = red.reduce(chain);
      certs = certs && r.certificate_ok;
      max_rounds = std::max<long long>(max_rounds, r.rounds);
      checked += static_cast<long long>(r.identities_checked);
    } catch (const ReductionFailure& ex) {
      identities = false;
      failure = ex.what();
    } catch (const Error& ex) {
      certs = false;
      failure = ex.what();
    }
  }
  rep.claim("certificates_exact", certs, failure);
  rep.claim("reduction_identities_hold", identities, failure);
  rep.dims["samples"] = static_cast<long long>(c.samples);
  rep.dims["max_rounds"] = max_rounds;
  rep.dims["identities_checked"] = checked;
  rep.elapsed_ms = sw.ms();
  return rep;
}

inline void add_module_tasks(std::vector<Task>& tasks, const std::string& cmd, const GModule& w,
                             const RunConfig& c, std::uint64_t seed, const CanonicalBasis* larger,
                             const CanonicalBasis* sub)
{
  auto add = [&](std::string name, std::function<LemmaReport()> f) {
    tasks.push_back({[f = std::move(f), seed] {
                       LemmaReport r = f();
                       r.seed = seed;
                       return r;
                     },
                     w, std::move(name)});
  };
  const bool all = cmd == "all";
  if (all || cmd == "lemma21") {
    add("lemma21", [w] { return check_herzjesu(w); });
    add("lemma21", [w] { return check_minimal_generators(w); });
  }
  if (all || cmd == "lemma22") {
    CanonicalBasis big = larger ? *larger : CanonicalBasis{};
    CanonicalBasis small = sub ? *sub : CanonicalBasis{};
    add("lemma22", [w, big]() mutable {
      if (big.ambient() == 0) {
        auto inv = invariants(w, w.grp().Nbar());
        big = generated_submodule(w, inv.rows().empty() ? std::vector<Vec>{} : std::vector<Vec>{inv.rows().front()});
      }
      GModule target = quotient(w, big, w.name() + "/R");
      return check_qpfpspec_i(w, target, Mat::identity(w.ring(), w.rank()));
    });
    add("lemma22", [w, small]() mutable {
      if (small.ambient() == 0) {
        auto inv = invariants(w, w.grp().Nbar());
        small = generated_submodule(w, inv.rows().empty() ? std::vector<Vec>{} : std::vector<Vec>{inv.rows().back()});
      }
      return check_qpfpspec_ii(w, small);
    });
  }
  const RhoChoice rho = RhoChoice::parse(c.rho);
  if (all || cmd == "corrpro")
    add("corrpro", [w, c, rho] {
      return guarded_tree("corrpro", w, [&] { return check_corrpro(w, c.depth, rho, c.unit); });
    });
  if (all || cmd == "presentation")
    add("presentation", [w, c, rho] {
      return guarded_tree("presentation", w, [&] { return check_presentation(w, c.depth, rho, c.unit); });
    });
  if (all || cmd == "cogtri")
    add("cogtri", [w] { return guarded_tree("cogtri", w, [&] { return check_cogtri_hypothesis(w); }); });
  if ((all && c.samples > 0) || cmd == "reduction")
    add("reduction", [w, c, seed] {
      return guarded_tree("reduction", w, [&] { return reduction_report(w, c, seed); });
    });
}

inline void add_hecke_tasks(std::vector<Task>& tasks, const RunConfig& c)
{
  auto has = [&](const char* k) { return std::find(c.checks.begin(), c.checks.end(), k) != c.checks.end(); };
  const RingSpec ring(c.p, c.e);
  // built once; the tasks below only read it
  HeckePtr shared = build_hecke(c.p, ring);
  auto push = [&](std::function<LemmaReport()> f) { tasks.push_back({std::move(f), std::nullopt, "hecke"}); };
  if (has("dim") || has("assoc"))
    push([shared] { return check_hecke_algebra(*shared); });
  if (has("invariants"))
    push([shared] { return invariants_jbar_star(*shared); });
  if (has("flatness"))
    push([shared, p = c.p] { return check_flatness(*shared, p <= 3); });
  if (has("vytastra")) {
    push([shared] { return check_vytastra(free_hecke_module(shared)); });
    if (c.random > 0) {
      std::mt19937_64 rng(*c.seed);
      for (std::size_t i = 0; i < c.random; ++i) {
        HeckeModule m = random_hecke_quotient(shared, rng, 1 + i % 2, "quot:" + std::to_string(i));
        push([m, seed = *c.seed] {
          LemmaReport r = check_vytastra(m);
          r.seed = seed;
          return r;
        });
      }
    }
  }
}

inline std::string replay_command(const RunConfig& c, const std::string& target)
{
  std::string s = "coefsys verify " + target + " --p " + std::to_string(c.p) + " --e " + std::to_string(c.e) +
                  " --depth " + std::to_string(c.depth) + " --rho " + c.rho + " --unit " + std::to_string(c.unit);
  if (c.seed)
    s += " --seed " + std::to_string(*c.seed);
  return s;
}

/// One replay entry per failing record: the command line and, for module
/// checks, the module as a single-entry catalog for --catalog-file.
inline void attach_replay(Report& rep, const std::vector<Task>& tasks)
{
  const RunConfig& c = rep.config;
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    if (rep.records[i].overall() != Verdict::Fail)
      continue;
    nlohmann::json rp;
    rp["record"] = i;
    std::string cmd = replay_command(c, tasks[i].command);
    if (tasks[i].module) {
      Catalog one;
      one.group = tasks[i].module->group();
      one.ring = tasks[i].module->ring();
      one.modules = {*tasks[i].module};
      rp["catalog"] = catalog_to_json(one);
      cmd += " --catalog-file REPLAY.json --module " + tasks[i].module->name();
    }
    rp["command"] = cmd;
    rep.replay.push_back(std::move(rp));
  }
}

} // namespace detail

inline Report run_suite(const RunConfig& c)
{
  validate(c);
  Stopwatch sw;
  Report rep;
  rep.config = c;
  std::vector<detail::Task> tasks;
  const std::string& cmd = c.command;
  if (cmd != "hecke") {
    Catalog cat = detail::selected_catalog(c);
    if (cat.modules.empty() && c.random == 0)
      throw UsageError("empty catalog selection");
    for (const auto& w : cat.modules)
      detail::add_module_tasks(tasks, cmd, w, c, c.seed.value_or(0), nullptr, nullptr);
    if (c.random > 0) {
      InstanceStream stream(*c.seed, c.p, c.e, c.p <= 3 ? 2 : 1);
      for (std::size_t i = 0; i < c.random; ++i) {
        RandomInstance ri = stream.next();
        detail::add_module_tasks(tasks, cmd, ri.module, c, *c.seed + i, &ri.larger, &ri.sub);
      }
    }
  }
  if (cmd == "hecke" || (cmd == "all" && c.p <= 5)) {
    RunConfig hc = c;
    if (cmd == "all")
      hc.random = c.random > 0 ? std::min<std::size_t>(c.random, 10) : 0;
    detail::add_hecke_tasks(tasks, hc);
  }
  rep.records = detail::run_tasks(tasks, c.jobs);
  detail::attach_replay(rep, tasks);
  rep.elapsed_ms = sw.ms();
  return rep;
}

} // namespace coefsys

#endif
