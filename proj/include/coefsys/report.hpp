#ifndef COEFSYS_REPORT_HPP
#define COEFSYS_REPORT_HPP

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ring.hpp"

namespace coefsys {

/// Rejected: the instance violates a hypothesis (not a failure of the claim).
/// Recorded: an outcome reported as data without an assertion.
enum class Verdict { Pass, Fail, Rejected, Recorded };

inline const char* to_string(Verdict v)
{
  switch (v) {
  case Verdict::Pass: return "pass";
  case Verdict::Fail: return "fail";
  case Verdict::Rejected: return "rejected";
  case Verdict::Recorded: return "recorded";
  }
  return "?";
}

struct Claim {
  std::string name;
  Verdict verdict = Verdict::Pass;
  std::string detail;
};

struct LemmaReport {
  std::string lemma;
  std::string instance;
  int p = 0;
  int e = 0;
  std::uint64_t seed = 0;
  std::vector<Claim> claims;
  std::map<std::string, long long> dims;
  std::vector<std::pair<std::string, Vec>> witnesses;
  std::string reject_reason;
  double elapsed_ms = 0;

  void claim(std::string name, bool ok, std::string detail = {})
  {
    claims.push_back({std::move(name), ok ? Verdict::Pass : Verdict::Fail, std::move(detail)});
  }
  void record(std::string name, bool value, std::string detail = {})
  {
    if (!detail.empty())
      detail += "; ";
    detail += value ? "true" : "false";
    claims.push_back({std::move(name), Verdict::Recorded, std::move(detail)});
  }
  void reject(std::string reason)
  {
    reject_reason = std::move(reason);
    claims.clear();
  }

  bool rejected() const { return !reject_reason.empty(); }

  Verdict overall() const
  {
    if (rejected())
      return Verdict::Rejected;
    for (const auto& c : claims)
      if (c.verdict == Verdict::Fail)
        return Verdict::Fail;
    return Verdict::Pass;
  }

  bool passed() const { return overall() == Verdict::Pass; }

  const Claim* find(const std::string& name) const
  {
    for (const auto& c : claims)
      if (c.name == name)
        return &c;
    return nullptr;
  }
};

class Stopwatch {
public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const
  {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
  }

private:
  std::chrono::steady_clock::time_point t0_;
};

} // namespace coefsys

#endif
