#pragma once

// Certification of R(phi) for normalized automorphisms phi = (F, M, twist):
//
//   R(phi) = sum over representatives z of Coker(E - M) of R(tau_z o phi'),
//
// and on the abelian group Sigma, R(tau_z o phi') = 1 exactly when
// Id - tau_z o phi' is onto. Sigma splits into the sums of fibers over the
// affine orbits u -> M u + z, so onto-ness is decided orbit by orbit.

#include <rw/construct.hpp>
#include <rw/errors.hpp>
#include <rw/intlat.hpp>
#include <rw/wreath.hpp>
#include <rw/zqmod.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rw {

inline constexpr std::uint64_t kDefaultOrderBound = 10'000;

/// R of the induced map on Z^k: |det(E - M)|, or infinite when it vanishes.
inline ExtNat reidemeister_zk(const IntMatrix& m) {
  return cokernel_order(IntMatrix::identity(m.dim()) - m);
}

/// Coset representatives of Z^k / (E - M) Z^k, via the Smith basis change:
/// U (E - M) V = S, so x = U^-1 y with 0 <= y_i < s_i.
inline std::vector<ZkVector> coset_representatives(const IntMatrix& m,
                                                   std::uint64_t cap = 1'000'000) {
  const std::size_t k = m.dim();
  SnfResult snf = smith_normal_form(IntMatrix::identity(k) - m);
  auto diag = snf.diagonal();
  Int total = 1;
  for (const auto& d : diag) {
    if (d == 0)
      throw PreconditionError("det(E - M) = 0: R(phi-bar) is infinite, there are no finitely many representatives");
    total *= d;
  }
  if (total > cap) throw ResourceCapError("too many representatives: " + total.str());
  std::vector<std::int64_t> mod(k);
  for (std::size_t i = 0; i < k; ++i) mod[i] = to_i64(diag[i]);
  std::vector<ZkVector> reps;
  std::vector<std::int64_t> y(k, 0);
  for (;;) {
    ZkVector x(k);
    for (std::size_t r = 0; r < k; ++r) {
      Int s = 0;
      for (std::size_t j = 0; j < k; ++j) s += snf.U_inv(r, j) * y[j];
      x[r] = to_i64(s);
    }
    reps.push_back(std::move(x));
    std::size_t i = k;
    while (i-- > 0) {
      if (++y[i] < mod[i]) break;
      y[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return reps;
}

/// E + M + ... + M^{L-1}.
inline IntMatrix geometric_sum(const IntMatrix& m, std::uint64_t length) {
  IntMatrix s(m.dim()), p = IntMatrix::identity(m.dim());
  for (std::uint64_t j = 0; j < length; ++j) {
    s = s + p;
    p = p * m;
  }
  return s;
}

inline std::vector<std::uint64_t> divisors(std::uint64_t t) {
  std::vector<std::uint64_t> d;
  for (std::uint64_t i = 1; i <= t; ++i)
    if (t % i == 0) d.push_back(i);
  return d;
}

struct OrbitType {
  std::uint64_t length;
  ZkVector witness;
};

/// One point for every exact orbit length L | order realized by u -> M u + z.
/// Points of period dividing L solve (M^L - E) u = -(E + ... + M^{L-1}) z,
/// an affine lattice; a period-L point exists unless a proper divisor's
/// solution lattice has the same rank (then both sets coincide). Otherwise
/// the divisor lattices are lower dimensional and a small box search hits a
/// point outside all of them.
inline std::vector<OrbitType> orbit_types(const IntMatrix& m, const ZkVector& z,
                                          std::uint64_t order) {
  const std::size_t k = m.dim();
  const IntMatrix e = IntMatrix::identity(k);
  std::vector<OrbitType> out;
  std::vector<std::optional<LatticeSolution>> sols;
  auto divs = divisors(order);
  for (std::uint64_t len : divs) {
    auto sol = solve_integer_system(m.pow(len) - e, -geometric_sum(m, len).apply(z));
    sols.push_back(sol);
    if (!sol) continue;
    bool covered = false;
    for (std::size_t j = 0; j + 1 < sols.size(); ++j)
      if (len % divs[j] == 0 && sols[j] && sols[j]->kernel.size() == sol->kernel.size()) covered = true;
    if (covered) continue;

    const std::size_t r = sol->kernel.size();
    const auto proper = static_cast<std::int64_t>(divisors(len).size() - 1);
    std::optional<ZkVector> hit;
    for (std::int64_t box = 0; box <= proper + 1 && !hit; ++box) {
      std::vector<std::int64_t> c(r, -box);
      for (;;) {
        ZkVector u = sol->particular;
        for (std::size_t i = 0; i < r; ++i) u = u + scaled(sol->kernel[i], c[i]);
        AffineOrbit orb = affine_orbit(m, z, u, len);
        if (orb.closed && orb.length() == len) {
          hit = u;
          break;
        }
        std::size_t i = 0;
        while (i < r && ++c[i] > box) c[i++] = -box;
        if (i == r) break;
      }
    }
    if (!hit) throw InternalError("no point of exact period " + std::to_string(len) + " found");
    out.push_back({len, *hit});
  }
  return out;
}

struct ComponentEvidence {
  Component component;
  std::int64_t det_assembled_mod_p;  // det(T - Id) on the whole orbit
  std::int64_t det_power_mod_p;      // det(F^L - E)
};

struct OrbitCheck {
  ZkVector z;  // translation of u -> M u + z
  ZkVector x;
  std::vector<ZkVector> points;
  bool epimorphic = false;
  std::vector<ComponentEvidence> evidence;
  std::optional<Support> fixed_element;  // nonzero fixed element when not onto

  std::size_t length() const { return points.size(); }
};

/// Decides whether Id - tau_z o phi' is onto on the fibers over the affine
/// orbit of x, by two routes that must agree: the assembled L*d x L*d
/// matrix (cyclic shift tensor F, minus identity) and the reduction to
/// F^L - E.
inline OrbitCheck orbit_epi_check(const GAutomorphism& f, const IntMatrix& m, const ZkVector& z,
                                  const ZkVector& x, std::size_t bound = 0) {
  if (bound == 0) {
    auto t = matrix_order(m, kDefaultOrderBound);
    bound = t ? static_cast<std::size_t>(4 * *t) : 4096;
  }
  AffineOrbit orb = affine_orbit(m, z, x, bound);
  if (!orb.closed)
    throw PreconditionError("affine orbit of " + format_vector(x) + " does not close within " +
                            std::to_string(bound) + " steps");
  const std::size_t len = orb.length();
  OrbitCheck out{z, x, orb.points, true, {}, std::nullopt};

  const auto& comps = f.group().components();
  std::optional<std::size_t> failing;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const ModMatrix& fc = f.blocks()[c];
    const std::size_t d = fc.rows();
    const std::int64_t q = fc.modulus();
    // fiber i -> fiber i+1 (mod L) carries F
    ModMatrix assembled(len * d, len * d, q);
    for (std::size_t i = 0; i < len; ++i) {
      std::size_t to = (i + 1) % len;
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
          assembled.set(to * d + a, i * d + b, (assembled(to * d + a, i * d + b) + fc(a, b)) % q);
    }
    assembled = assembled - ModMatrix::identity(len * d, q);
    ModMatrix reduced = fc.pow(len) - ModMatrix::identity(d, q);

    ComponentEvidence ev{comps[c], assembled.det_mod_p(), reduced.det_mod_p()};
    bool epi_a = is_epimorphism(std::span<const ModMatrix>(&assembled, 1));
    bool epi_b = is_epimorphism(std::span<const ModMatrix>(&reduced, 1));
    if (epi_a != epi_b)
      throw InternalError("assembled and reduced orbit checks disagree on component " +
                          std::to_string(comps[c].p) + "^" + std::to_string(comps[c].r));
    if (!epi_b && !failing) failing = c;
    out.epimorphic = out.epimorphic && epi_b;
    out.evidence.push_back(ev);
  }

  if (failing) {
    // v with F^L v = v gives the fixed element sum_i (F^i v)_{u_i}.
    const std::size_t c = *failing;
    const ModMatrix& fc = f.blocks()[c];
    auto gens = kernel_generators(fc.pow(len) - ModMatrix::identity(fc.rows(), fc.modulus()));
    if (gens.empty()) throw InternalError("singular block without kernel generator");
    const FiniteAbelianGroup& g = f.group();
    GElement v = g.zero();
    std::copy(gens.front().begin(), gens.front().end(),
              v.coords.begin() + static_cast<std::ptrdiff_t>(g.offset(c)));
    Support s;
    for (std::size_t i = 0; i < len; ++i) {
      s.emplace(orb.points[i], v);
      v = f.apply(v);
    }
    out.fixed_element = std::move(s);
  }
  return out;
}

enum class Verdict { TrivialClasses, InfiniteClasses };

inline const char* verdict_name(Verdict v) {
  return v == Verdict::TrivialClasses ? "TrivialClasses" : "InfiniteClasses";
}

struct RepresentativeCheck {
  ZkVector z;
  Verdict verdict = Verdict::TrivialClasses;
  std::vector<OrbitCheck> orbits;
};

struct VerificationReport {
  ExtNat r_bar;
  std::optional<std::uint64_t> order_M;
  std::vector<ZkVector> representatives;
  std::vector<RepresentativeCheck> per_rep;
  ExtNat r_total;
};

inline RepresentativeCheck check_representative(const WreathAutomorphism& phi, const ZkVector& z,
                                                std::uint64_t order) {
  RepresentativeCheck rc{z, Verdict::TrivialClasses, {}};
  const ZkVector shift = z + phi.twist();
  for (const auto& type : orbit_types(phi.M(), shift, order)) {
    rc.orbits.push_back(orbit_epi_check(phi.F(), phi.M(), shift, type.witness,
                                        static_cast<std::size_t>(4 * order)));
    if (!rc.orbits.back().epimorphic) rc.verdict = Verdict::InfiniteClasses;
  }
  return rc;
}

inline VerificationReport full_verify(const WreathAutomorphism& phi,
                                      std::uint64_t order_bound = kDefaultOrderBound) {
  VerificationReport rep;
  rep.r_bar = reidemeister_zk(phi.M());
  rep.order_M = matrix_order(phi.M(), order_bound);
  if (rep.r_bar.is_infinite()) {
    // projection onto Z^k maps classes onto classes
    rep.r_total = ExtNat::infinite();
    return rep;
  }
  if (!rep.order_M)
    throw PreconditionError("M has no finite order within " + std::to_string(order_bound));
  const std::uint64_t t = *rep.order_M;
  rep.representatives = coset_representatives(phi.M());
  const IntMatrix total_shift = geometric_sum(phi.M(), t);
  bool all_trivial = true;
  for (const auto& z : rep.representatives) {
    if (!is_zero(total_shift.apply(z + phi.twist())))
      throw InternalError("(E + M + ... + M^{t-1}) z != 0 although det(E - M) != 0");
    rep.per_rep.push_back(check_representative(phi, z, t));
    all_trivial = all_trivial && rep.per_rep.back().verdict == Verdict::TrivialClasses;
  }
  rep.r_total = all_trivial ? rep.r_bar : ExtNat::infinite();
  return rep;
}

inline VerificationReport full_verify(const Construction& c,
                                      std::uint64_t order_bound = kDefaultOrderBound) {
  return full_verify(c.automorphism, order_bound);
}

inline bool is_fixed(const WreathProduct& w, const WreathAutomorphism& phi, const Support& s) {
  return w.apply_sigma(phi, s) == s;
}

struct SigmaClassification {
  enum class Kind { One, Infinite } kind = Kind::One;
  std::optional<Support> witness;
  std::vector<OrbitCheck> orbits;
};

/// R(tau_twist o phi') for phi of finite order: 1 when every orbit type is
/// onto, otherwise infinite with a nonzero fixed element as witness.
inline SigmaClassification classify_sigma_reidemeister(const WreathAutomorphism& phi,
                                                       std::uint64_t orbit_budget = kDefaultOrderBound) {
  auto t = matrix_order(phi.M(), orbit_budget);
  if (!t) throw PreconditionError("automorphism is not of finite order (M has no order <= " +
                                  std::to_string(orbit_budget) + ")");
  if (determinant(IntMatrix::identity(phi.rank()) - phi.M()) == 0)
    throw PreconditionError("det(E - M) = 0: affine orbits need not close, R(phi-bar) is infinite");
  RepresentativeCheck rc = check_representative(phi.with_twist(ZkVector(phi.rank(), 0)), phi.twist(), *t);
  SigmaClassification out;
  out.orbits = std::move(rc.orbits);
  WreathProduct w(phi.group(), phi.rank());
  for (const auto& o : out.orbits) {
    if (o.epimorphic) continue;
    if (!o.fixed_element || o.fixed_element->empty() || !is_fixed(w, phi, *o.fixed_element))
      throw InternalError("failing orbit produced no valid fixed element");
    out.kind = SigmaClassification::Kind::Infinite;
    out.witness = o.fixed_element;
    break;
  }
  return out;
}

/// Pairwise distinct nonzero fixed elements of tau_twist o phi', starting
/// with sigma0 and continuing with sums of translates of sigma0 along the
/// M-orbit of n e_1 for n = step, 2 step, ...
inline std::vector<Support> generate_fixed_elements(const WreathAutomorphism& phi, const Support& sigma0,
                                                    std::size_t count,
                                                    std::uint64_t order_bound = kDefaultOrderBound) {
  WreathProduct w(phi.group(), phi.rank());
  if (sigma0.empty()) throw PreconditionError("sigma0 must be nonzero");
  if (!is_fixed(w, phi, sigma0)) throw PreconditionError("sigma0 is not fixed by the automorphism");
  auto t = matrix_order(phi.M(), order_bound);
  if (!t) throw PreconditionError("automorphism is not of finite order");

  std::vector<Support> out;
  if (count == 0) return out;
  out.push_back(sigma0);
  std::set<Support> seen{sigma0};

  const std::size_t k = phi.rank();
  std::int64_t diameter = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::int64_t lo = sigma0.begin()->first[i], hi = lo;
    for (const auto& [x, a] : sigma0) {
      lo = std::min(lo, x[i]);
      hi = std::max(hi, x[i]);
    }
    diameter = std::max(diameter, checked_add(hi, -lo));
  }
  const std::int64_t step = checked_mul(diameter + 1, static_cast<std::int64_t>(*t) + 1);

  ZkVector m(k, 0);
  m[0] = 1;
  std::vector<ZkVector> direction_orbit{m};
  for (ZkVector u = phi.M().apply(m); u != m; u = phi.M().apply(u)) direction_orbit.push_back(u);

  for (std::int64_t i = 1; out.size() < count; ++i) {
    if (static_cast<std::size_t>(i) > 10 * count + 10)
      throw InternalError("could not produce enough distinct fixed elements");
    const std::int64_t n = checked_mul(i, step);
    Support sum;
    for (const auto& d : direction_orbit) sum = w.add(sum, WreathProduct::shift(scaled(d, n), sigma0));
    if (sum.empty()) continue;
    if (!is_fixed(w, phi, sum)) throw InternalError("translated sum is not fixed");
    if (seen.insert(sum).second) out.push_back(std::move(sum));
  }
  return out;
}

}  // namespace rw
