#pragma once

// The restricted wreath product G wr Z^k = (+)_{x in Z^k} G_x  x|  Z^k, with
// Z^k acting by translation of coordinates, and its normalized
// automorphisms a_x -> (F a)_{M x + twist}, z -> M z.

#include <rw/errors.hpp>
#include <rw/intlat.hpp>
#include <rw/zqmod.hpp>

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rw {

inline constexpr std::size_t kMaxRank = 16;

/// Finitely supported function Z^k -> G. Canonical: no zero values stored;
/// std::map keeps keys in lexicographic order.
using Support = std::map<ZkVector, GElement>;

struct WreathElement {
  Support sigma;
  ZkVector z;

  friend bool operator==(const WreathElement&, const WreathElement&) = default;
  friend auto operator<=>(const WreathElement&, const WreathElement&) = default;
};

/// Normalized automorphism: F on the fibers, M on Z^k, and an optional
/// translation of the fiber indices. With twist t the map is tau_t o phi,
/// where tau_t is conjugation by the translation t; it acts on the quotient
/// Z^k by M alone.
class WreathAutomorphism {
 public:
  WreathAutomorphism(GAutomorphism f, IntMatrix m, ZkVector twist = {})
      : f_(std::move(f)), m_(std::move(m)), twist_(std::move(twist)) {
    if (m_.dim() > kMaxRank)
      throw PreconditionError("rank " + std::to_string(m_.dim()) + " exceeds the limit of 16");
    if (twist_.empty()) twist_.assign(m_.dim(), 0);
    if (twist_.size() != m_.dim()) throw PreconditionError("twist has wrong dimension");
    if (!is_unimodular(m_)) throw PreconditionError("M is not unimodular: det = " + determinant(m_).str());
  }

  static WreathAutomorphism identity(const FiniteAbelianGroup& g, std::size_t k) {
    return WreathAutomorphism(GAutomorphism::identity(g), IntMatrix::identity(k));
  }

  const GAutomorphism& F() const { return f_; }
  const IntMatrix& M() const { return m_; }
  const ZkVector& twist() const { return twist_; }
  const FiniteAbelianGroup& group() const { return f_.group(); }
  std::size_t rank() const { return m_.dim(); }

  WreathAutomorphism with_twist(ZkVector t) const { return WreathAutomorphism(f_, m_, std::move(t)); }

  /// Index map x -> M x + twist.
  ZkVector move_index(const ZkVector& x) const { return m_.apply(x) + twist_; }

 private:
  GAutomorphism f_;
  IntMatrix m_;
  ZkVector twist_;
};

/// The group G wr Z^k. Holds the ambient data; elements are plain values.
class WreathProduct {
 public:
  WreathProduct(FiniteAbelianGroup g, std::size_t k) : g_(std::move(g)), k_(k) {
    if (k < 1 || k > kMaxRank) throw PreconditionError("rank k must be in [1, 16]");
  }

  const FiniteAbelianGroup& base() const { return g_; }
  std::size_t rank() const { return k_; }

  WreathElement identity() const { return {{}, ZkVector(k_, 0)}; }
  WreathElement translation(ZkVector z) const {
    check_vec(z);
    return {{}, std::move(z)};
  }
  /// The point mass a_x.
  WreathElement point_mass(const GElement& a, const ZkVector& x) const {
    check_vec(x);
    g_.validate(a);
    WreathElement e = identity();
    if (!FiniteAbelianGroup::is_zero(a)) e.sigma.emplace(x, a);
    return e;
  }

  static Support shift(const ZkVector& z, const Support& s) {
    Support out;
    for (const auto& [x, a] : s) out.emplace_hint(out.end(), x + z, a);
    return out;
  }

  Support add(const Support& a, const Support& b) const {
    Support out = a;
    for (const auto& [x, v] : b) {
      auto it = out.find(x);
      if (it == out.end()) {
        out.emplace(x, v);
      } else {
        it->second = g_.add(it->second, v);
        if (FiniteAbelianGroup::is_zero(it->second)) out.erase(it);
      }
    }
    return out;
  }

  Support negate(const Support& s) const {
    Support out;
    for (const auto& [x, v] : s) out.emplace_hint(out.end(), x, g_.negate(v));
    return out;
  }

  Support point_support(const GElement& a, const ZkVector& x) const {
    Support s;
    if (!FiniteAbelianGroup::is_zero(a)) s.emplace(x, a);
    return s;
  }

  /// (s1, z1)(s2, z2) = (s1 + shift(z1, s2), z1 + z2).
  WreathElement multiply(const WreathElement& g, const WreathElement& h) const {
    check(g);
    check(h);
    return {add(g.sigma, shift(g.z, h.sigma)), g.z + h.z};
  }

  /// (s, z)^-1 = (-shift(-z, s), -z).
  WreathElement inverse(const WreathElement& g) const {
    check(g);
    return {negate(shift(-g.z, g.sigma)), -g.z};
  }

  /// Sigma part of phi: a_x -> (F a)_{M x + twist}.
  Support apply_sigma(const WreathAutomorphism& phi, const Support& s) const {
    check_automorphism(phi);
    Support out;
    for (const auto& [x, a] : s) {
      GElement fa = phi.F().apply(a);
      ZkVector y = phi.move_index(x);
      // M is injective, so images never collide
      out.emplace(std::move(y), std::move(fa));
    }
    return out;
  }

  WreathElement apply_automorphism(const WreathAutomorphism& phi, const WreathElement& g) const {
    check(g);
    return {apply_sigma(phi, g.sigma), phi.M().apply(g.z)};
  }

  /// g x phi(g^-1).
  WreathElement twisted_conjugate(const WreathElement& g, const WreathElement& x,
                                  const WreathAutomorphism& phi) const {
    return multiply(multiply(g, x), apply_automorphism(phi, inverse(g)));
  }

  std::string format(const WreathElement& e) const {
    std::string s = "{";
    bool first = true;
    for (const auto& [x, a] : e.sigma) {
      if (!first) s += "; ";
      first = false;
      s += format_vector(x) + "->" + g_.format(a);
    }
    return s + "} | z=" + format_vector(e.z);
  }

  /// Inverse of format(): `{(x1 .. xk)->(g1 .. gn); ...} | z=(z1 .. zk)`.
  WreathElement parse(std::string_view text) const {
    std::size_t i = 0;
    auto ws = [&] {
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto expect = [&](std::string_view tok) {
      ws();
      if (text.substr(i, tok.size()) != tok)
        throw ParseError("expected '" + std::string(tok) + "'", i);
      i += tok.size();
    };
    auto tuple = [&]() {
      expect("(");
      std::vector<std::int64_t> v;
      for (;;) {
        ws();
        if (i < text.size() && text[i] == ')') {
          ++i;
          return v;
        }
        std::size_t start = i;
        if (i < text.size() && text[i] == '-') ++i;
        std::size_t digits = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (i == digits) throw ParseError("expected integer", start);
        try {
          v.push_back(std::stoll(std::string(text.substr(start, i - start))));
        } catch (const std::out_of_range&) {
          throw ParseError("integer out of range", start);
        }
      }
    };
    WreathElement e;
    expect("{");
    ws();
    if (i < text.size() && text[i] == '}') {
      ++i;
    } else {
      for (;;) {
        std::size_t at = i;
        ZkVector x = tuple();
        if (x.size() != k_) throw ParseError("index has wrong dimension", at);
        expect("->");
        at = i;
        auto coords = tuple();
        GElement a{coords};
        try {
          g_.validate(a);
        } catch (const PreconditionError& err) {
          throw ParseError(err.what(), at);
        }
        if (FiniteAbelianGroup::is_zero(a)) throw ParseError("zero value in support", at);
        if (!e.sigma.emplace(std::move(x), std::move(a)).second)
          throw ParseError("duplicate index in support", at);
        ws();
        if (i < text.size() && text[i] == ';') {
          ++i;
          continue;
        }
        expect("}");
        break;
      }
    }
    expect("|");
    expect("z=");
    std::size_t at = i;
    e.z = tuple();
    if (e.z.size() != k_) throw ParseError("translation has wrong dimension", at);
    ws();
    if (i != text.size()) throw ParseError("trailing characters", i);
    return e;
  }

  void check(const WreathElement& g) const {
    check_vec(g.z);
    for (const auto& [x, a] : g.sigma) {
      check_vec(x);
      if (FiniteAbelianGroup::is_zero(a)) throw PreconditionError("support stores a zero value");
    }
  }

  void check_automorphism(const WreathAutomorphism& phi) const {
    if (phi.rank() != k_ || !(phi.group() == g_))
      throw PreconditionError("automorphism does not act on " + g_.to_string() + " wr Z^" + std::to_string(k_));
  }

 private:
  void check_vec(const ZkVector& v) const {
    if (v.size() != k_) throw PreconditionError("vector dimension mismatch with rank " + std::to_string(k_));
  }

  FiniteAbelianGroup g_;
  std::size_t k_;
};

// Random sampling for property checks.

inline GElement random_g_element(const FiniteAbelianGroup& g, std::mt19937_64& rng) {
  GElement a = g.zero();
  for (std::size_t i = 0; i < a.coords.size(); ++i)
    a.coords[i] = std::uniform_int_distribution<std::int64_t>(0, g.modulus_at(i) - 1)(rng);
  return a;
}

inline GElement random_nonzero_g_element(const FiniteAbelianGroup& g, std::mt19937_64& rng) {
  if (g.is_trivial()) throw PreconditionError("trivial group has no nonzero element");
  for (;;) {
    GElement a = random_g_element(g, rng);
    if (!FiniteAbelianGroup::is_zero(a)) return a;
  }
}

inline ZkVector random_vector(std::size_t k, std::int64_t radius, std::mt19937_64& rng) {
  ZkVector v(k);
  for (auto& c : v) c = std::uniform_int_distribution<std::int64_t>(-radius, radius)(rng);
  return v;
}

inline WreathElement random_element(const WreathProduct& w, std::mt19937_64& rng,
                                    std::size_t max_support = 4, std::int64_t radius = 4) {
  WreathElement e = w.identity();
  if (!w.base().is_trivial()) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_support)(rng);
    for (std::size_t i = 0; i < n; ++i)
      e.sigma = w.add(e.sigma, w.point_support(random_g_element(w.base(), rng),
                                               random_vector(w.rank(), radius, rng)));
  }
  e.z = random_vector(w.rank(), radius, rng);
  return e;
}

/// Samples phi'(alpha(z) a_x) == alpha(M z) phi'(a_x) for random point
/// masses a_x and translations z. `sigma_map` is the candidate action on
/// supports.
template <class SigmaMap>
bool check_compatibility(const WreathProduct& w, SigmaMap&& sigma_map, const IntMatrix& m,
                         std::size_t sample_count, std::mt19937_64& rng) {
  if (sample_count < 1) throw PreconditionError("sample_count must be >= 1");
  if (w.base().is_trivial()) return true;
  for (std::size_t s = 0; s < sample_count; ++s) {
    Support h = w.point_support(random_nonzero_g_element(w.base(), rng), random_vector(w.rank(), 6, rng));
    ZkVector z = random_vector(w.rank(), 6, rng);
    Support lhs = sigma_map(WreathProduct::shift(z, h));
    Support rhs = WreathProduct::shift(m.apply(z), sigma_map(h));
    if (lhs != rhs) return false;
  }
  return true;
}

inline bool check_compatibility(const GAutomorphism& f, const IntMatrix& m, std::size_t sample_count,
                                std::mt19937_64& rng) {
  WreathProduct w(f.group(), m.dim());
  WreathAutomorphism phi(f, m);
  return check_compatibility(
      w, [&](const Support& s) { return w.apply_sigma(phi, s); }, m, sample_count, rng);
}

}  // namespace rw
