#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "coefsys/suite.hpp"

using namespace coefsys;

namespace {

void print_summary(const Report& rep)
{
  for (const auto& r : rep.records) {
    std::cout << to_string(r.overall()) << "  " << r.lemma << "  " << r.instance;
    if (r.rejected())
      std::cout << "  (" << r.reject_reason << ")";
    for (const auto& c : r.claims)
      if (c.verdict == Verdict::Fail)
        std::cout << "\n    failed: " << c.name << (c.detail.empty() ? "" : ": " + c.detail);
    std::cout << '\n';
  }
  std::cout << "aggregate: " << to_string(rep.aggregate()) << "  pass=" << rep.count(Verdict::Pass)
            << " fail=" << rep.count(Verdict::Fail) << " rejected=" << rep.count(Verdict::Rejected)
            << "  " << rep.elapsed_ms << " ms\n";
}

int run_verify(const RunConfig& cfg, bool timing)
{
  Report rep = run_suite(cfg);
  const auto j = to_json(rep, timing);
  if (cfg.output == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    print_summary(rep);
    if (!cfg.output.empty()) {
      std::ofstream out(cfg.output);
      if (!out)
        throw Error("cannot write " + cfg.output);
      out << j.dump(2) << '\n';
    }
  }
  return rep.aggregate() == Verdict::Pass ? 0 : 1;
}

int run_reduce(const RunConfig& cfg)
{
  validate(cfg);
  Catalog cat = detail::selected_catalog(cfg);
  const GModule& w = cat.modules.front();
  if (!w.ring().is_field())
    throw UsageError("reduce needs e = 1");
  HalfTreeComplex cc(w, cfg.depth, RhoChoice::parse(cfg.rho), cfg.unit);
  ChainReducer red(cc);
  std::mt19937_64 rng(*cfg.seed);
  bool ok = true;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    Vec c = random_fixed_chain(cc, rng);
    ReductionResult r = red.reduce(c);
    std::cout << "sample " << s << ": level " << r.initial_level << ", rounds " << r.rounds << ", w = [";
    for (std::size_t i = 0; i < r.w.size(); ++i)
      std::cout << (i ? " " : "") << r.w[i];
    std::cout << "], certificate " << (r.certificate_ok ? "ok" : "FAILED") << '\n';
    ok = ok && r.certificate_ok;
  }
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"coefsys: exact checks for coefficient systems on the half tree"};
  app.set_version_flag("--version", std::string(COEFSYS_VERSION));
  app.require_subcommand(1);

  RunConfig cfg;
  std::uint64_t seed = 0;
  bool no_timing = false;

  auto common = [&](CLI::App* sub, bool with_e) {
    sub->add_option("--p", cfg.p, "prime")->required();
    if (with_e)
      sub->add_option("--e", cfg.e, "coefficient ring Z/p^e");
    sub->add_option("--depth", cfg.depth, "tree depth D");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--rho", cfg.rho, "w0, twist:K or torus:K");
    sub->add_option("--unit", cfg.unit, "unit u in g1");
    sub->add_option("--catalog-file", cfg.catalog_file, "catalog JSON to read modules from");
  };

  auto* verify = app.add_subcommand("verify", "run checks and report verdicts");
  verify->add_option("target", cfg.command, "lemma21|lemma22|corrpro|presentation|cogtri|reduction|hecke|all")
      ->required()
      ->check(CLI::IsMember(verify_commands()));
  common(verify, true);
  auto* mod = verify->add_option("--module", cfg.selection, "catalog entry or 'all'");
  verify->add_option("--catalog", cfg.selection, "alias of --module")->excludes(mod);
  verify->add_option("--random", cfg.random, "number of seeded random modules");
  verify->add_option("--samples", cfg.samples, "fixed classes reduced per module");
  verify->add_option("--check", cfg.checks, "hecke checks: dim,assoc,invariants,vytastra,flatness")
      ->delimiter(',');
  verify->add_option("--json", cfg.output, "write the JSON report here ('-' for stdout)");
  verify->add_option("--jobs", cfg.jobs, "worker threads");
  verify->add_flag("--no-timing", no_timing, "omit wall-clock fields from JSON");

  auto* reduce = app.add_subcommand("reduce", "reduce random Gamma-fixed classes to level 0");
  common(reduce, false);
  reduce->add_option("--module", cfg.selection, "catalog entry")->required();
  reduce->add_option("--samples", cfg.samples, "number of classes");

  auto* catalog = app.add_subcommand("catalog", "built-in module catalog");
  catalog->require_subcommand(1);
  auto* emit = catalog->add_subcommand("emit", "write the catalog as JSON");
  std::string out_path;
  emit->add_option("--p", cfg.p)->required();
  emit->add_option("--e", cfg.e);
  emit->add_option("--out", out_path)->required();
  auto* list = catalog->add_subcommand("list", "list catalog entries");
  list->add_option("--p", cfg.p)->required();
  list->add_option("--e", cfg.e);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int rc = app.exit(ex);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed() || reduce->parsed()) {
      if (reduce->parsed())
        cfg.command = "reduce";
      if (verify->count("--seed") || reduce->count("--seed"))
        cfg.seed = seed;
      if (verify->parsed())
        return run_verify(cfg, !no_timing);
      return run_reduce(cfg);
    }
    RunConfig probe;
    probe.command = "lemma21";
    probe.p = cfg.p;
    probe.e = cfg.e;
    validate(probe);
    Catalog cat = builtin_catalog(cfg.p, cfg.e);
    if (emit->parsed()) {
      emit_catalog(cat, out_path);
      std::cout << "wrote " << cat.modules.size() << " modules to " << out_path << '\n';
    } else {
      for (const auto& m : cat.modules)
        std::cout << m.name() << "  rank " << m.rank() << "  length " << m.length() << '\n';
    }
    return 0;
  } catch (const UsageError& ex) {
    std::cerr << "usage error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
}
