#pragma once

// Brute-force ground truth on the finite quotients G wr (Z_n)^k. Elements
// are indexed by integers: code = (sum_pos c(sigma[pos]) |G|^pos) * n^k + z,
// with c the mixed-radix code of GElement and pos, z mixed-radix in base n.

#include <rw/errors.hpp>
#include <rw/intlat.hpp>
#include <rw/verify.hpp>
#include <rw/wreath.hpp>
#include <rw/zqmod.hpp>

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rw {

inline constexpr std::uint64_t kDefaultOracleCap = 2'000'000;
inline constexpr std::uint64_t kDefaultBurnsideCap = 5'000;

/// Disjoint sets whose root is always the least member.
class MinRootUnionFind {
 public:
  explicit MinRootUnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }
  std::uint32_t find(std::uint32_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a < b)
      parent_[b] = a;
    else
      parent_[a] = b;
    return true;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

class FiniteWreath {
 public:
  struct Elem {
    std::vector<std::uint32_t> sigma;  // G-code per position
    std::uint32_t z = 0;               // position index of the translation
    friend bool operator==(const Elem&, const Elem&) = default;
  };

  FiniteWreath(FiniteAbelianGroup base, std::int64_t n, std::size_t k,
               std::uint64_t cap = kDefaultOracleCap)
      : base_(std::move(base)), n_(n), k_(k) {
    if (n < 2) throw PreconditionError("quotient modulus n must be >= 2");
    if (k < 1 || k > kMaxRank) throw PreconditionError("rank k must be in [1, 16]");
    Int positions = boost::multiprecision::pow(Int(n), static_cast<unsigned>(k));
    Int gs = base_.order();
    Int order = boost::multiprecision::pow(gs, positions > 64 ? 64u : positions.convert_to<unsigned>()) * positions;
    if (positions > 64 || order > cap || order > Int(std::numeric_limits<std::uint32_t>::max()))
      throw ResourceCapError("finite quotient " + base_.to_string() + " wr (Z_" + std::to_string(n) + ")^" +
                             std::to_string(k) + " exceeds the enumeration cap of " + std::to_string(cap) +
                             " elements; use a smaller n, k or G");
    positions_ = positions.convert_to<std::uint32_t>();
    gsize_ = gs.convert_to<std::uint32_t>();
    order_ = order.convert_to<std::uint64_t>();

    g_add_.resize(std::size_t{gsize_} * gsize_);
    g_neg_.resize(gsize_);
    for (std::uint32_t a = 0; a < gsize_; ++a) {
      GElement ea = base_.decode(a);
      g_neg_[a] = static_cast<std::uint32_t>(base_.encode(base_.negate(ea)));
      for (std::uint32_t b = 0; b < gsize_; ++b)
        g_add_[std::size_t{a} * gsize_ + b] =
            static_cast<std::uint32_t>(base_.encode(base_.add(ea, base_.decode(b))));
    }
    pos_add_.resize(std::size_t{positions_} * positions_);
    pos_neg_.resize(positions_);
    for (std::uint32_t a = 0; a < positions_; ++a) {
      auto va = position(a);
      ZkVector neg(k_);
      for (std::size_t i = 0; i < k_; ++i) neg[i] = -va[i];
      pos_neg_[a] = position_index(neg);
      for (std::uint32_t b = 0; b < positions_; ++b)
        pos_add_[std::size_t{a} * positions_ + b] = position_index(va + position(b));
    }
  }

  const FiniteAbelianGroup& base() const { return base_; }
  std::int64_t n() const { return n_; }
  std::size_t rank() const { return k_; }
  std::uint64_t order() const { return order_; }
  std::uint32_t positions() const { return positions_; }
  std::uint32_t base_order() const { return gsize_; }

  ZkVector position(std::uint32_t idx) const {
    ZkVector v(k_);
    for (std::size_t i = 0; i < k_; ++i) {
      v[i] = idx % static_cast<std::uint32_t>(n_);
      idx /= static_cast<std::uint32_t>(n_);
    }
    return v;
  }
  std::uint32_t position_index(const ZkVector& v) const {
    std::uint32_t idx = 0;
    for (std::size_t i = k_; i-- > 0;) idx = idx * static_cast<std::uint32_t>(n_) + static_cast<std::uint32_t>(mod_reduce(v[i], n_));
    return idx;
  }

  Elem decode(std::uint64_t code) const {
    Elem e;
    e.z = static_cast<std::uint32_t>(code % positions_);
    code /= positions_;
    e.sigma.resize(positions_);
    for (std::uint32_t p = 0; p < positions_; ++p) {
      e.sigma[p] = static_cast<std::uint32_t>(code % gsize_);
      code /= gsize_;
    }
    return e;
  }
  std::uint64_t encode(const Elem& e) const {
    std::uint64_t code = 0;
    for (std::uint32_t p = positions_; p-- > 0;) code = code * gsize_ + e.sigma[p];
    return code * positions_ + e.z;
  }

  Elem identity() const { return Elem{std::vector<std::uint32_t>(positions_, 0), 0}; }

  /// (s1, z1)(s2, z2) = (s1 + shift(z1, s2), z1 + z2); shift(z, s)[y + z] = s[y].
  Elem multiply(const Elem& a, const Elem& b) const {
    Elem r;
    r.sigma.resize(positions_);
    for (std::uint32_t y = 0; y < positions_; ++y) {
      std::uint32_t src = pos_add_[std::size_t{y} * positions_ + pos_neg_[a.z]];
      r.sigma[y] = g_add_[std::size_t{a.sigma[y]} * gsize_ + b.sigma[src]];
    }
    r.z = pos_add_[std::size_t{a.z} * positions_ + b.z];
    return r;
  }

  /// (s, z)^-1 = (-shift(-z, s), -z).
  Elem inverse(const Elem& a) const {
    Elem r;
    r.sigma.resize(positions_);
    for (std::uint32_t y = 0; y < positions_; ++y)
      r.sigma[y] = g_neg_[a.sigma[pos_add_[std::size_t{y} * positions_ + a.z]]];
    r.z = pos_neg_[a.z];
    return r;
  }

  /// Reduction of an element of G wr Z^k: fibers congruent mod n are summed.
  Elem reduce(const WreathElement& g) const {
    Elem e = identity();
    for (const auto& [x, a] : g.sigma) {
      std::uint32_t p = position_index(x);
      e.sigma[p] = g_add_[std::size_t{e.sigma[p]} * gsize_ + static_cast<std::uint32_t>(base_.encode(a))];
    }
    e.z = position_index(g.z);
    return e;
  }

  /// Generators: point masses of each coordinate unit vector at every
  /// position, and the translation basis.
  std::vector<Elem> generators() const {
    std::vector<Elem> gens;
    for (std::size_t c = 0; c < base_.dimension(); ++c) {
      GElement unit = base_.zero();
      unit.coords[c] = 1;
      auto code = static_cast<std::uint32_t>(base_.encode(unit));
      for (std::uint32_t p = 0; p < positions_; ++p) {
        Elem e = identity();
        e.sigma[p] = code;
        gens.push_back(std::move(e));
      }
    }
    for (std::size_t i = 0; i < k_; ++i) {
      ZkVector v(k_, 0);
      v[i] = 1;
      Elem e = identity();
      e.z = position_index(v);
      gens.push_back(std::move(e));
    }
    return gens;
  }

 private:
  FiniteAbelianGroup base_;
  std::int64_t n_;
  std::size_t k_;
  std::uint32_t positions_ = 1, gsize_ = 1;
  std::uint64_t order_ = 1;
  std::vector<std::uint32_t> g_add_, g_neg_, pos_add_, pos_neg_;
};

/// The automorphism induced on G wr (Z_n)^k: a_y -> (F a)_{M y + twist}, z -> M z.
struct FiniteAutomorphism {
  GAutomorphism F;
  IntMatrix M_mod_n;  // entries in [0, n)
  ZkVector twist;     // entries in [0, n)
  std::int64_t n = 2;
};

inline FiniteAutomorphism descend(const WreathAutomorphism& phi, std::int64_t n) {
  if (n < 2) throw PreconditionError("descend: n must be >= 2");
  const std::size_t k = phi.rank();
  IntMatrix m(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      Int v = phi.M()(i, j) % n;
      if (v < 0) v += n;
      m(i, j) = v;
    }
  ZkVector t(k);
  for (std::size_t i = 0; i < k; ++i) t[i] = mod_reduce(phi.twist()[i], n);
  return {phi.F(), std::move(m), std::move(t), n};
}

inline FiniteAutomorphism finite_identity(const FiniteAbelianGroup& g, std::size_t k, std::int64_t n) {
  return descend(WreathAutomorphism::identity(g, k), n);
}

/// psi compiled to lookup tables for one quotient.
class FiniteAction {
 public:
  FiniteAction(const FiniteWreath& gamma, const FiniteAutomorphism& psi) : gamma_(&gamma) {
    if (psi.n != gamma.n() || psi.M_mod_n.dim() != gamma.rank() || !(psi.F.group() == gamma.base()))
      throw PreconditionError("automorphism does not act on this quotient");
    const FiniteAbelianGroup& g = gamma.base();
    f_.resize(gamma.base_order());
    for (std::uint32_t a = 0; a < gamma.base_order(); ++a)
      f_[a] = static_cast<std::uint32_t>(g.encode(psi.F.apply(g.decode(a))));
    index_.resize(gamma.positions());
    linear_.resize(gamma.positions());
    for (std::uint32_t p = 0; p < gamma.positions(); ++p) {
      ZkVector y = psi.M_mod_n.apply(gamma.position(p));
      linear_[p] = gamma.position_index(y);
      index_[p] = gamma.position_index(y + psi.twist);
    }
    if (std::set<std::uint32_t>(index_.begin(), index_.end()).size() != index_.size())
      throw PreconditionError("M is not invertible mod n");
  }

  FiniteWreath::Elem apply(const FiniteWreath::Elem& e) const {
    FiniteWreath::Elem r;
    r.sigma.assign(e.sigma.size(), 0);
    for (std::uint32_t y = 0; y < e.sigma.size(); ++y) r.sigma[index_[y]] = f_[e.sigma[y]];
    r.z = linear_[e.z];
    return r;
  }

  /// Permutation of positions y -> M y + twist + w, for the fiber analysis.
  const std::vector<std::uint32_t>& index_map() const { return index_; }

 private:
  const FiniteWreath* gamma_;
  std::vector<std::uint32_t> f_, index_, linear_;
};

struct ClassPartition {
  std::vector<std::uint32_t> root;  // least element of each element's class
  std::uint64_t count = 0;
  std::vector<std::uint64_t> representatives;  // ascending
};

/// Orbits of x -> g x psi(g)^-1 by union-find over a generating set.
inline ClassPartition twisted_class_partition(const FiniteWreath& gamma, const FiniteAutomorphism& psi) {
  FiniteAction act(gamma, psi);
  const auto gens = gamma.generators();
  std::vector<std::pair<FiniteWreath::Elem, FiniteWreath::Elem>> moves;  // (g, psi(g)^-1)
  for (const auto& g : gens) moves.emplace_back(g, gamma.inverse(act.apply(g)));
  const auto order = static_cast<std::uint32_t>(gamma.order());
  MinRootUnionFind uf(order);
  for (std::uint32_t x = 0; x < order; ++x) {
    auto ex = gamma.decode(x);
    for (const auto& [g, pg_inv] : moves) {
      auto y = gamma.multiply(gamma.multiply(g, ex), pg_inv);
      uf.unite(x, static_cast<std::uint32_t>(gamma.encode(y)));
    }
  }
  ClassPartition part;
  part.root.resize(order);
  for (std::uint32_t x = 0; x < order; ++x) {
    part.root[x] = uf.find(x);
    if (part.root[x] == x) part.representatives.push_back(x);
  }
  part.count = part.representatives.size();
  return part;
}

struct TwistedClasses {
  std::uint64_t count = 0;
  std::vector<std::uint64_t> representatives;
};

inline TwistedClasses twisted_classes_bruteforce(const FiniteWreath& gamma, const FiniteAutomorphism& psi) {
  auto part = twisted_class_partition(gamma, psi);
  return {part.count, std::move(part.representatives)};
}

/// (1/|Gamma|) #{(g, x) : g x psi(g)^-1 = x}.
inline std::uint64_t burnside_count(const FiniteWreath& gamma, const FiniteAutomorphism& psi,
                                    std::uint64_t cap = kDefaultBurnsideCap) {
  if (gamma.order() > cap)
    throw ResourceCapError("Burnside double count needs |Gamma| <= " + std::to_string(cap) + ", got " +
                           std::to_string(gamma.order()));
  FiniteAction act(gamma, psi);
  const std::uint64_t order = gamma.order();
  std::vector<FiniteWreath::Elem> all(order), psi_all(order);
  for (std::uint64_t i = 0; i < order; ++i) {
    all[i] = gamma.decode(i);
    psi_all[i] = act.apply(all[i]);
  }
  std::uint64_t pairs = 0;
  for (std::uint64_t g = 0; g < order; ++g)
    for (std::uint64_t x = 0; x < order; ++x)
      if (gamma.multiply(all[g], all[x]) == gamma.multiply(all[x], psi_all[g])) ++pairs;
  if (pairs % order != 0)
    throw InternalError("Burnside count " + std::to_string(pairs) + " is not divisible by |Gamma| = " +
                        std::to_string(order));
  return pairs / order;
}

/// Number of ordinary conjugacy classes C with psi(C) = C. By Brauer's
/// permutation lemma, this equals the number of psi-fixed irreducible
/// characters.
inline std::uint64_t fixed_conjugacy_classes(const FiniteWreath& gamma, const FiniteAutomorphism& psi) {
  auto part = twisted_class_partition(gamma, finite_identity(gamma.base(), gamma.rank(), gamma.n()));
  FiniteAction act(gamma, psi);
  std::uint64_t fixed = 0;
  for (auto r : part.representatives) {
    auto image = gamma.encode(act.apply(gamma.decode(r)));
    if (part.root[image] == r) ++fixed;
  }
  return fixed;
}

/// Twisted classes of the induced map on (Z_n)^k: cosets of (E - M)(Z_n)^k.
inline std::uint64_t base_class_count(const FiniteWreath& gamma, const FiniteAutomorphism& psi,
                                      std::vector<std::uint32_t>* roots = nullptr) {
  const std::size_t k = gamma.rank();
  MinRootUnionFind uf(gamma.positions());
  for (std::size_t i = 0; i < k; ++i) {
    ZkVector e(k, 0);
    e[i] = 1;
    ZkVector step = e - psi.M_mod_n.apply(e);
    for (std::uint32_t p = 0; p < gamma.positions(); ++p)
      uf.unite(p, gamma.position_index(gamma.position(p) + step));
  }
  std::uint64_t count = 0;
  if (roots) roots->resize(gamma.positions());
  for (std::uint32_t p = 0; p < gamma.positions(); ++p) {
    auto r = uf.find(p);
    if (r == p) ++count;
    if (roots) (*roots)[p] = r;
  }
  return count;
}

/// Onto-ness of Id - alpha(w) o psi' on Sigma_n for every w in (Z_n)^k,
/// orbit length by orbit length.
inline bool quotient_epimorphic(const FiniteWreath& gamma, const FiniteAutomorphism& psi) {
  std::set<std::size_t> lengths;
  for (std::uint32_t w = 0; w < gamma.positions(); ++w) {
    ZkVector shift = psi.twist + gamma.position(w);
    std::vector<bool> seen(gamma.positions(), false);
    for (std::uint32_t start = 0; start < gamma.positions(); ++start) {
      if (seen[start]) continue;
      std::size_t len = 0;
      std::uint32_t p = start;
      do {
        seen[p] = true;
        ++len;
        p = gamma.position_index(psi.M_mod_n.apply(gamma.position(p)) + shift);
      } while (p != start);
      lengths.insert(len);
    }
  }
  for (auto len : lengths) {
    auto blocks = psi.F.power(len).minus_identity();
    if (!is_epimorphism(blocks)) return false;
  }
  return true;
}

struct PullbackResult {
  enum class Verdict { Holds, Fails, Inconclusive };
  bool cylinders = false;       // every twisted class is a full preimage
  bool quotient_epi = false;    // fiberwise onto-ness in the quotient
  Verdict verdict = Verdict::Inconclusive;
  std::uint64_t classes = 0;
  std::uint64_t base_classes = 0;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> counterexample;  // same projection, different class
};

inline const char* pullback_verdict_name(PullbackResult::Verdict v) {
  switch (v) {
    case PullbackResult::Verdict::Holds: return "holds";
    case PullbackResult::Verdict::Fails: return "fails";
    case PullbackResult::Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// Checks, exhaustively, that twisted classes of psi are preimages of the
/// classes of M mod n under the projection to (Z_n)^k. When the fiberwise
/// onto-ness fails in the quotient a negative answer is Inconclusive.
inline PullbackResult pullback_check(const FiniteWreath& gamma, const FiniteAutomorphism& psi) {
  PullbackResult res;
  res.quotient_epi = quotient_epimorphic(gamma, psi);
  auto part = twisted_class_partition(gamma, psi);
  std::vector<std::uint32_t> base_root;
  res.base_classes = base_class_count(gamma, psi, &base_root);
  res.classes = part.count;

  const std::uint32_t positions = gamma.positions();
  std::vector<std::int64_t> class_of_base(positions, -1), first_elem(positions, -1);
  res.cylinders = true;
  for (std::uint32_t x = 0; x < part.root.size(); ++x) {
    std::uint32_t b = base_root[x % positions];
    if (class_of_base[b] < 0) {
      class_of_base[b] = part.root[x];
      first_elem[b] = x;
    } else if (class_of_base[b] != part.root[x]) {
      res.cylinders = false;
      res.counterexample = {static_cast<std::uint64_t>(first_elem[b]), x};
      break;
    }
  }
  if (res.cylinders)
    res.verdict = PullbackResult::Verdict::Holds;
  else
    res.verdict = res.quotient_epi ? PullbackResult::Verdict::Fails : PullbackResult::Verdict::Inconclusive;
  return res;
}

}  // namespace rw
