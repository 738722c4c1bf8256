#pragma once

// Explicit automorphisms of G wr Z^k with finite Reidemeister number, one
// construction per case:
//   Case 1: every 2- and 3-primary component has multiplicity >= 2;
//           M = -E, fibers F_2/F_3 blocks or scalar m (m^2, 1 - m^2 units).
//   Case 2: no 2-primary component, k = 2t; M = t copies of the order-3
//           rotation, fibers scalar m (m^3, 1 - m^3 units).
//   Case 3: every 2-primary component has multiplicity >= 2, k = 4s;
//           M = s copies of the order-5 companion matrix, fibers p - 1 on
//           odd components and F_2/F_3 blocks on 2-primary ones.

#include <rw/errors.hpp>
#include <rw/intlat.hpp>
#include <rw/wreath.hpp>
#include <rw/zqmod.hpp>

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace rw {

enum class CaseTag { Case1 = 1, Case2 = 2, Case3 = 3 };

inline int case_number(CaseTag c) { return static_cast<int>(c); }

inline CaseTag case_from_number(int n) {
  if (n < 1 || n > 3) throw PreconditionError("case must be 1, 2 or 3");
  return static_cast<CaseTag>(n);
}

struct CaseReport {
  std::array<bool, 3> applicable{};
  std::array<std::string, 3> reasons;

  bool applies(CaseTag c) const { return applicable[static_cast<std::size_t>(case_number(c) - 1)]; }
  std::optional<CaseTag> lowest() const {
    for (int c = 1; c <= 3; ++c)
      if (applicable[static_cast<std::size_t>(c - 1)]) return static_cast<CaseTag>(c);
    return std::nullopt;
  }
};

/// How one component (Z_{p^r})^d was covered.
struct ComponentLayout {
  Component component;
  std::vector<std::string> blocks;  // "F2", "F3", or "m=<value>" per scalar coordinate run
  std::optional<std::int64_t> scalar;
};

struct Construction {
  FiniteAbelianGroup group;
  std::size_t k = 1;
  CaseTag case_tag = CaseTag::Case1;
  WreathAutomorphism automorphism;
  ExtNat predicted_R;
  std::vector<ComponentLayout> block_layout;
};

namespace detail {

inline std::string component_name(const Component& c) {
  return std::to_string(c.p) + "^" + std::to_string(c.r) + ":" + std::to_string(c.d);
}

/// First component with the given prime and multiplicity < 2.
inline std::optional<Component> thin_component(const FiniteAbelianGroup& g, std::int64_t p) {
  for (const auto& c : g.components())
    if (c.p == p && c.d < 2) return c;
  return std::nullopt;
}

inline bool has_prime(const FiniteAbelianGroup& g, std::int64_t p) {
  for (const auto& c : g.components())
    if (c.p == p) return true;
  return false;
}

/// d = 2s: s copies of F_2; d = 2s + 1: s - 1 copies of F_2 and one F_3.
inline ModMatrix paired_block(const Component& c, std::vector<std::string>& names) {
  const std::int64_t q = c.q();
  ModMatrix m(c.d, c.d, q);
  std::size_t pairs = c.d / 2, off = 0;
  bool triple = c.d % 2 == 1;
  if (triple) --pairs;
  auto place = [&](const ModMatrix& b) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) m.set(off + i, off + j, b(i, j));
    off += b.rows();
  };
  for (std::size_t i = 0; i < pairs; ++i) {
    place(f2_block(q));
    names.emplace_back("F2");
  }
  if (triple) {
    place(f3_block(q));
    names.emplace_back("F3");
  }
  return m;
}

inline ComponentLayout scalar_layout(const Component& c, std::int64_t m) {
  return {c, {"m=" + std::to_string(m)}, m};
}

inline Int ipow(long base, std::size_t e) { return boost::multiprecision::pow(Int(base), static_cast<unsigned>(e)); }

}  // namespace detail

inline CaseReport classify(const FiniteAbelianGroup& g, std::size_t k) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  CaseReport rep;

  auto thin2 = detail::thin_component(g, 2);
  auto thin3 = detail::thin_component(g, 3);
  if (thin2 || thin3) {
    rep.applicable[0] = false;
    rep.reasons[0] = "component " + detail::component_name(thin2 ? *thin2 : *thin3) +
                     " has multiplicity < 2 at p = " + std::to_string(thin2 ? 2 : 3);
  } else {
    rep.applicable[0] = true;
    rep.reasons[0] = "all 2- and 3-primary components have multiplicity >= 2";
  }

  bool two = detail::has_prime(g, 2);
  if (two) {
    rep.reasons[1] = "2-primary component present";
  } else if (k % 2 != 0) {
    rep.reasons[1] = "k = " + std::to_string(k) + " is odd";
  } else {
    rep.applicable[1] = true;
    rep.reasons[1] = "no 2-primary component and k = 2*" + std::to_string(k / 2);
  }

  if (thin2) {
    rep.reasons[2] = "component " + detail::component_name(*thin2) + " has multiplicity < 2 at p = 2";
  } else if (k % 4 != 0) {
    rep.reasons[2] = "k = " + std::to_string(k) + " is not a multiple of 4";
  } else {
    rep.applicable[2] = true;
    rep.reasons[2] = "all 2-primary components have multiplicity >= 2 and k = 4*" + std::to_string(k / 4);
  }
  return rep;
}

inline Construction build_case1(const FiniteAbelianGroup& g, std::size_t k) {
  CaseReport rep = classify(g, k);
  if (!rep.applies(CaseTag::Case1)) throw PreconditionError("case 1 does not apply: " + rep.reasons[0]);
  std::vector<ModMatrix> blocks;
  std::vector<ComponentLayout> layout;
  for (const auto& c : g.components()) {
    if (c.p == 2 || c.p == 3) {
      ComponentLayout l{c, {}, std::nullopt};
      blocks.push_back(detail::paired_block(c, l.blocks));
      layout.push_back(std::move(l));
    } else {
      auto m = choose_m(c.p, c.r, 2);
      if (!m) throw InternalError("no admissible scalar for p = " + std::to_string(c.p));
      blocks.push_back(ModMatrix::scalar(c.d, c.q(), *m));
      layout.push_back(detail::scalar_layout(c, *m));
    }
  }
  WreathAutomorphism phi(GAutomorphism(g, std::move(blocks)), -IntMatrix::identity(k));
  return {g, k, CaseTag::Case1, std::move(phi), ExtNat(detail::ipow(2, k)), std::move(layout)};
}

inline Construction build_case2(const FiniteAbelianGroup& g, std::size_t k) {
  CaseReport rep = classify(g, k);
  if (!rep.applies(CaseTag::Case2)) throw PreconditionError("case 2 does not apply: " + rep.reasons[1]);
  std::vector<ModMatrix> blocks;
  std::vector<ComponentLayout> layout;
  for (const auto& c : g.components()) {
    auto m = choose_m(c.p, c.r, 3);
    if (!m) throw InternalError("no admissible scalar for p = " + std::to_string(c.p));
    blocks.push_back(ModMatrix::scalar(c.d, c.q(), *m));
    layout.push_back(detail::scalar_layout(c, *m));
  }
  const std::size_t t = k / 2;
  WreathAutomorphism phi(GAutomorphism(g, std::move(blocks)), direct_sum(rotation_order_3(), t));
  return {g, k, CaseTag::Case2, std::move(phi), ExtNat(detail::ipow(3, t)), std::move(layout)};
}

inline Construction build_case3(const FiniteAbelianGroup& g, std::size_t k) {
  CaseReport rep = classify(g, k);
  if (!rep.applies(CaseTag::Case3)) throw PreconditionError("case 3 does not apply: " + rep.reasons[2]);
  std::vector<ModMatrix> blocks;
  std::vector<ComponentLayout> layout;
  for (const auto& c : g.components()) {
    if (c.p == 2) {
      ComponentLayout l{c, {}, std::nullopt};
      blocks.push_back(detail::paired_block(c, l.blocks));
      layout.push_back(std::move(l));
    } else {
      blocks.push_back(ModMatrix::scalar(c.d, c.q(), c.p - 1));
      layout.push_back(detail::scalar_layout(c, c.p - 1));
    }
  }
  const std::size_t s = k / 4;
  WreathAutomorphism phi(GAutomorphism(g, std::move(blocks)), direct_sum(companion_cyclotomic_5(), s));
  return {g, k, CaseTag::Case3, std::move(phi), ExtNat(detail::ipow(5, s)), std::move(layout)};
}

inline Construction build_case(const FiniteAbelianGroup& g, std::size_t k, CaseTag c) {
  switch (c) {
    case CaseTag::Case1: return build_case1(g, k);
    case CaseTag::Case2: return build_case2(g, k);
    case CaseTag::Case3: return build_case3(g, k);
  }
  throw PreconditionError("unknown case");
}

}  // namespace rw
