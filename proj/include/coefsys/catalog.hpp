#ifndef COEFSYS_CATALOG_HPP
#define COEFSYS_CATALOG_HPP

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lemmas.hpp"

namespace coefsys {

/// Named modules for one (group, p, e).
struct Catalog {
  GroupPtr group;
  RingSpec ring;
  std::vector<GModule> modules;

  const GModule& find(const std::string& name) const
  {
    for (const auto& m : modules)
      if (m.name() == name)
        return m;
    throw Error("no module named '" + name + "' in the catalog");
  }

  std::vector<std::string> names() const
  {
    std::vector<std::string> out;
    for (const auto& m : modules)
      out.push_back(m.name());
    return out;
  }
};

inline constexpr const char* kCatalogFormat = "coefsys-catalog/1";

/// trivial, steinberg, jbar, the principal series ps:k and n_random
/// quotients rand:i of jbar^r (r <= 2 for p <= 3, r = 1 otherwise, to keep
/// files small).  Over the residue field every entry is stored free.
inline Catalog builtin_catalog(int p, int e, std::size_t n_random = 3, std::uint64_t seed = 0)
{
  Catalog c;
  c.group = build_group(GroupKind::SL2, p);
  c.ring = RingSpec(p, e);
  c.modules.push_back(trivial_module(c.group, c.ring));
  c.modules.push_back(steinberg(c.group, c.ring));
  c.modules.push_back(jbar(c.group, c.ring));
  for (const auto& ps : decompose_jbar(c.group, c.ring))
    c.modules.push_back(ps.summand.module);
  InstanceStream stream(seed, p, e, p <= 3 ? 2 : 1);
  for (std::size_t i = 0; i < n_random; ++i) {
    GModule m = stream.next().module;
    m.set_name("rand:" + std::to_string(i));
    c.modules.push_back(c.ring.is_field() ? freed(m) : m);
  }
  return c;
}

inline nlohmann::json mat_to_json(const Mat& m)
{
  return nlohmann::json(m.data());
}

inline nlohmann::json catalog_to_json(const Catalog& c)
{
  using nlohmann::json;
  json j;
  j["format"] = kCatalogFormat;
  j["group"] = to_string(c.group->kind());
  j["p"] = c.ring.p();
  j["e"] = c.ring.e();
  json gens = json::array();
  for (Elt g : c.group->generators()) {
    const Mat2& m = c.group->element(g);
    gens.push_back({m.a, m.b, m.c, m.d});
  }
  json mods = json::array();
  for (const auto& m : c.modules) {
    json e;
    e["name"] = m.name();
    e["rank"] = m.rank();
    e["generators"] = gens;
    json acts = json::array();
    for (const auto& a : m.gen_action())
      acts.push_back(mat_to_json(a));
    e["actions"] = acts;
    e["relations"] = m.relations().rows();
    mods.push_back(std::move(e));
  }
  j["modules"] = std::move(mods);
  return j;
}

inline Catalog catalog_from_json(const nlohmann::json& j)
{
  if (j.value("format", "") != kCatalogFormat)
    throw Error("catalog: unknown format");
  Catalog c;
  c.group = build_group(parse_group_kind(j.at("group").get<std::string>()), j.at("p").get<int>());
  c.ring = RingSpec(j.at("p").get<int>(), j.at("e").get<int>());
  for (const auto& e : j.at("modules")) {
    const auto n = e.at("rank").get<std::size_t>();
    const auto& gens = e.at("generators");
    if (gens.size() != c.group->generators().size())
      throw Error("catalog: generator list does not match the group");
    for (std::size_t k = 0; k < gens.size(); ++k) {
      auto g = gens[k].get<std::vector<int>>();
      if (g.size() != 4 || !(c.group->find({g[0], g[1], g[2], g[3]}) == c.group->generators()[k]))
        throw Error("catalog: generator list does not match the group");
    }
    std::vector<Mat> acts;
    for (const auto& a : e.at("actions")) {
      auto flat = a.get<std::vector<Elem>>();
      if (flat.size() != n * n)
        throw Error("catalog: action matrix has wrong size");
      Mat m(c.ring, n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
          m(i, k) = c.ring.reduce(flat[i * n + k]);
      acts.push_back(std::move(m));
    }
    auto rel = e.at("relations").get<std::vector<Vec>>();
    for (const auto& r : rel)
      if (r.size() != n)
        throw Error("catalog: relation has wrong length");
    GModule m(c.group, c.ring, n, std::move(acts), CanonicalBasis::span(c.ring, n, rel),
              e.at("name").get<std::string>());
    if (!is_valid_module(m))
      throw Error("catalog: module '" + m.name() + "' has a non-invertible action or unstable relations");
    c.modules.push_back(std::move(m));
  }
  return c;
}

inline void emit_catalog(const Catalog& c, const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write catalog to '" + path + "'");
  out << catalog_to_json(c).dump(1) << '\n';
  if (!out)
    throw Error("cannot write catalog to '" + path + "'");
}

inline Catalog load_catalog(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot read catalog '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw Error("catalog '" + path + "': " + ex.what());
  }
  return catalog_from_json(j);
}

inline bool same_module(const GModule& a, const GModule& b)
{
  return a.name() == b.name() && a.rank() == b.rank() && a.ring() == b.ring() &&
         a.gen_action() == b.gen_action() && a.relations() == b.relations();
}

} // namespace coefsys

#endif
