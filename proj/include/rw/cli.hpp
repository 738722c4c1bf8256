#pragma once

// Command implementations behind the `rw` executable. Each returns the JSON
// document to print and the process exit code.

#include <rw/construct.hpp>
#include <rw/errors.hpp>
#include <rw/json_io.hpp>
#include <rw/oracle.hpp>
#include <rw/verify.hpp>
#include <rw/wreath.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace rw::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kAssertionFailure = 1, kInputError = 2, kResourceCap = 3 };

struct CommandResult {
  int exit_code = kOk;
  nlohmann::json output;
};

/// Maps library exceptions onto exit codes; the error document names the
/// stage that failed.
inline CommandResult guarded(const std::string& stage, const std::function<CommandResult()>& body) {
  auto fail = [&](int code, const std::string& kind, const std::string& what) {
    return CommandResult{code, {{"error", {{"stage", stage}, {"kind", kind}, {"message", what}}}}};
  };
  try {
    return body();
  } catch (const ParseError& e) {
    return fail(kInputError, "parse", e.what());
  } catch (const PreconditionError& e) {
    return fail(kInputError, "validation", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(kInputError, "parse", e.what());
  } catch (const ResourceCapError& e) {
    return fail(kResourceCap, "resource_cap", e.what());
  } catch (const ArithmeticCapacityError& e) {
    return fail(kResourceCap, "arithmetic_capacity", e.what());
  } catch (const InternalError& e) {
    return fail(kAssertionFailure, "internal", e.what());
  }
}

inline CommandResult cmd_classify(const std::string& group_spec, std::size_t k) {
  return guarded("classify", [&] {
    auto g = FiniteAbelianGroup::parse(group_spec);
    return CommandResult{kOk, to_json(classify(g, k), g, k)};
  });
}

inline Construction construct_for(const FiniteAbelianGroup& g, std::size_t k, std::optional<int> case_no) {
  CaseTag tag;
  if (case_no) {
    tag = case_from_number(*case_no);
  } else {
    auto low = classify(g, k).lowest();
    if (!low) throw PreconditionError("no case applies to " + g.to_string() + " with k = " + std::to_string(k));
    tag = *low;
  }
  return build_case(g, k, tag);
}

inline CommandResult cmd_construct(const std::string& group_spec, std::size_t k, std::optional<int> case_no) {
  return guarded("construct", [&] {
    auto g = FiniteAbelianGroup::parse(group_spec);
    return CommandResult{kOk, to_json(construct_for(g, k, case_no))};
  });
}

inline nlohmann::json verification_json(const Construction& c, const VerificationReport& rep) {
  WreathProduct w(c.group, c.k);
  nlohmann::json j = to_json(rep, w);
  j["predicted_R"] = to_json(c.predicted_R);
  j["matches_prediction"] = rep.r_total == c.predicted_R;
  return j;
}

/// `construction_json` is the construction document itself.
inline CommandResult cmd_verify(const nlohmann::json& construction_json) {
  return guarded("verify", [&] {
    Construction c = construction_from_json(construction_json);
    VerificationReport rep = full_verify(c);
    auto j = verification_json(c, rep);
    return CommandResult{rep.r_total == c.predicted_R ? kOk : kAssertionFailure, j};
  });
}

struct OracleOptions {
  std::string group;
  std::size_t k = 1;
  std::int64_t n = 2;
  std::optional<int> case_no;
  bool psi_identity = false;
  std::uint64_t cap = kDefaultOracleCap;
  bool timing = true;
};

/// All three class counts on one quotient plus the pullback check.
inline nlohmann::json oracle_json(const FiniteWreath& gamma, const FiniteAutomorphism& psi, bool timing,
                                  bool& agree) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  auto t0 = clock::now();
  auto classes = twisted_classes_bruteforce(gamma, psi);
  auto t1 = clock::now();
  std::optional<std::uint64_t> burnside;
  if (gamma.order() <= kDefaultBurnsideCap) burnside = burnside_count(gamma, psi);
  auto t2 = clock::now();
  auto fixed = fixed_conjugacy_classes(gamma, psi);
  auto t3 = clock::now();
  auto pull = pullback_check(gamma, psi);
  auto t4 = clock::now();

  agree = classes.count == fixed && (!burnside || *burnside == classes.count);
  nlohmann::json j = {
      {"n", gamma.n()},
      {"order", gamma.order()},
      {"counts",
       {{"union_find", classes.count},
        {"burnside", burnside ? nlohmann::json(*burnside) : nlohmann::json(nullptr)},
        {"fixed_conjugacy_classes", fixed}}},
      {"agree", agree},
      {"pullback", to_json(pull)}};
  if (timing)
    j["timing_ms"] = {{"union_find", ms(t0, t1)},
                      {"burnside", ms(t1, t2)},
                      {"fixed_conjugacy_classes", ms(t2, t3)},
                      {"pullback", ms(t3, t4)}};
  return j;
}

inline CommandResult cmd_oracle(const OracleOptions& opt) {
  return guarded("oracle", [&] {
    auto g = FiniteAbelianGroup::parse(opt.group);
    FiniteWreath gamma(g, opt.n, opt.k, opt.cap);
    nlohmann::json j = {{"schema", "rw.oracle/1"}, {"group", g.to_string()}, {"k", opt.k}};
    FiniteAutomorphism psi = finite_identity(g, opt.k, opt.n);
    if (opt.psi_identity) {
      j["psi"] = "identity";
      j["case"] = nullptr;
    } else {
      Construction c = construct_for(g, opt.k, opt.case_no);
      psi = descend(c.automorphism, opt.n);
      j["psi"] = "construction";
      j["case"] = case_number(c.case_tag);
    }
    bool agree = false;
    j.update(oracle_json(gamma, psi, opt.timing, agree));
    bool pull_ok = j["pullback"]["verdict"] != "fails";
    return CommandResult{agree && pull_ok ? kOk : kAssertionFailure, j};
  });
}

struct ReportOptions {
  std::string group;
  std::size_t k = 1;
  std::optional<int> case_no;
  std::vector<std::int64_t> ns;
  std::uint64_t seed = 0;
  std::uint64_t cap = kDefaultOracleCap;
};

/// classify -> construct -> full_verify -> sampled structural checks ->
/// per-n oracle agreement and pullback.
inline CommandResult cmd_report(const ReportOptions& opt) {
  return guarded("report", [&] {
    std::vector<std::string> failures;
    auto g = FiniteAbelianGroup::parse(opt.group);
    nlohmann::json j = {{"schema", "rw.report/1"},
                        {"version", kVersion},
                        {"seed", opt.seed},
                        {"input",
                         {{"group", g.to_string()},
                          {"k", opt.k},
                          {"case", opt.case_no ? nlohmann::json(*opt.case_no) : nlohmann::json(nullptr)},
                          {"n", opt.ns}}}};
    j["classification"] = to_json(classify(g, opt.k), g, opt.k);

    Construction c = construct_for(g, opt.k, opt.case_no);
    j["construction"] = to_json(c);

    VerificationReport rep = full_verify(c);
    j["verification"] = verification_json(c, rep);
    if (!(rep.r_total == c.predicted_R)) failures.push_back("verify: r_total != predicted_R");

    std::mt19937_64 rng(opt.seed);
    WreathProduct w(g, opt.k);
    const auto& phi = c.automorphism;
    bool compatible = check_compatibility(phi.F(), phi.M(), 64, rng);
    if (!compatible) failures.push_back("compatibility check failed");

    bool homomorphism = true;
    for (int s = 0; s < 64 && homomorphism; ++s) {
      auto a = random_element(w, rng), b = random_element(w, rng);
      homomorphism = w.apply_automorphism(phi, w.multiply(a, b)) ==
                     w.multiply(w.apply_automorphism(phi, a), w.apply_automorphism(phi, b));
    }
    if (!homomorphism) failures.push_back("automorphism is not multiplicative on samples");

    auto order_m = matrix_order(phi.M(), kDefaultOrderBound);
    auto order_f = phi.F().order();
    nlohmann::json finite_order = nullptr;
    if (order_m && order_f) {
      std::uint64_t ord = std::lcm(*order_m, *order_f);
      bool ok = true;
      for (int s = 0; s < 16 && ok; ++s) {
        auto a = random_element(w, rng), img = a;
        for (std::uint64_t i = 0; i < ord; ++i) img = w.apply_automorphism(phi, img);
        ok = img == a;
      }
      finite_order = ord;
      if (!ok) failures.push_back("phi^order is not the identity on samples");
    } else {
      failures.push_back("automorphism order not found");
    }

    auto sigma = classify_sigma_reidemeister(phi);
    bool sigma_one = sigma.kind == SigmaClassification::Kind::One;
    if (!sigma_one) failures.push_back("classify_sigma_reidemeister returned Infinite");

    j["checks"] = {{"compatibility", compatible},
                   {"homomorphism_samples", homomorphism},
                   {"automorphism_order", finite_order},
                   {"sigma_reidemeister", sigma_one ? "one" : "infinite"},
                   {"r_total_matches_prediction", rep.r_total == c.predicted_R}};

    nlohmann::json oracles = nlohmann::json::array();
    for (auto n : opt.ns) {
      FiniteWreath gamma(g, n, opt.k, opt.cap);
      bool agree = false;
      auto oj = oracle_json(gamma, descend(phi, n), false, agree);
      if (!agree) failures.push_back("oracle counts disagree at n = " + std::to_string(n));
      if (oj["pullback"]["verdict"] == "fails") failures.push_back("pullback fails at n = " + std::to_string(n));
      if (oj["pullback"]["verdict"] == "holds" && oj["counts"]["union_find"] != oj["pullback"]["base_classes"])
        failures.push_back("quotient class count differs from base count at n = " + std::to_string(n));
      oracles.push_back(std::move(oj));
    }
    j["oracle"] = oracles;
    j["failures"] = failures;
    j["ok"] = failures.empty();
    return CommandResult{failures.empty() ? kOk : kAssertionFailure, j};
  });
}

}  // namespace rw::cli
