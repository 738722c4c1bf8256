#pragma once

// Finite abelian groups G = (+)_i (Z_{p_i^r_i})^{d_i}, their elements, and
// blockwise automorphisms given by matrices mod p_i^r_i.

#include <rw/errors.hpp>
#include <rw/intlat.hpp>

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rw {

inline constexpr std::int64_t kMaxModulus = std::int64_t{1} << 31;

inline std::int64_t mod_reduce(std::int64_t a, std::int64_t q) {
  std::int64_t r = a % q;
  return r < 0 ? r + q : r;
}

inline std::int64_t mul_mod(std::int64_t a, std::int64_t b, std::int64_t q) {
  return static_cast<std::int64_t>(static_cast<__int128>(a) * b % q);
}

inline std::int64_t pow_mod(std::int64_t a, std::uint64_t e, std::int64_t q) {
  std::int64_t r = 1 % q, b = mod_reduce(a, q);
  while (e) {
    if (e & 1) r = mul_mod(r, b, q);
    b = mul_mod(b, b, q);
    e >>= 1;
  }
  return r;
}

inline bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// True iff a is a unit in Z_q, q = p^r, i.e. p does not divide a.
inline bool is_unit(std::int64_t a, std::int64_t q, std::int64_t p) {
  if (q < 2 || p < 2) throw PreconditionError("is_unit: q must be a power of p");
  for (std::int64_t t = q; t > 1; t /= p)
    if (t % p != 0) throw PreconditionError("is_unit: q must be a power of p");
  return mod_reduce(a, p) != 0;
}

/// Inverse of a unit mod q (extended Euclid).
inline std::int64_t inv_mod(std::int64_t a, std::int64_t q) {
  std::int64_t old_r = mod_reduce(a, q), r = q, old_s = 1, s = 0;
  while (r != 0) {
    std::int64_t quot = old_r / r;
    std::int64_t t = old_r - quot * r;
    old_r = r;
    r = t;
    t = old_s - quot * s;
    old_s = s;
    s = t;
  }
  if (old_r != 1) throw PreconditionError("inv_mod: not a unit");
  return mod_reduce(old_s, q);
}

inline int p_valuation(std::int64_t a, std::int64_t p, int cap) {
  if (a == 0) return cap;
  int v = 0;
  while (v < cap && a % p == 0) {
    a /= p;
    ++v;
  }
  return v;
}

/// (prime, exponent) of a prime power; throws otherwise.
inline std::pair<std::int64_t, int> prime_power_parts(std::int64_t q) {
  if (q < 2) throw PreconditionError("modulus must be a prime power >= 2");
  std::int64_t p = q;
  for (std::int64_t d = 2; d * d <= q; ++d)
    if (q % d == 0) {
      p = d;
      break;
    }
  int r = 0;
  std::int64_t t = q;
  while (t % p == 0) {
    t /= p;
    ++r;
  }
  if (t != 1) throw PreconditionError(std::to_string(q) + " is not a prime power");
  return {p, r};
}

/// Dense rows x cols matrix with entries reduced mod q = p^r.
class ModMatrix {
 public:
  ModMatrix() = default;
  ModMatrix(std::size_t rows, std::size_t cols, std::int64_t q)
      : rows_(rows), cols_(cols), q_(q), a_(rows * cols, 0) {
    if (q > kMaxModulus)
      throw PreconditionError("modulus " + std::to_string(q) + " exceeds 2^31");
    auto [p, r] = prime_power_parts(q);
    p_ = p;
    r_ = r;
  }
  ModMatrix(std::int64_t q, std::initializer_list<std::initializer_list<std::int64_t>> rows)
      : ModMatrix(rows.size(), rows.size() ? rows.begin()->size() : 0, q) {
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != cols_) throw PreconditionError("ragged ModMatrix literal");
      std::size_t j = 0;
      for (auto v : row) set(i, j++, v);
      ++i;
    }
  }

  static ModMatrix identity(std::size_t n, std::int64_t q) {
    ModMatrix m(n, n, q);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
  }
  static ModMatrix scalar(std::size_t n, std::int64_t q, std::int64_t s) {
    ModMatrix m(n, n, q);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, s);
    return m;
  }
  /// Reduction mod q of an exact integer matrix.
  static ModMatrix reduce(const IntMatrix& m, std::int64_t q) {
    ModMatrix r(m.dim(), m.dim(), q);
    for (std::size_t i = 0; i < m.dim(); ++i)
      for (std::size_t j = 0; j < m.dim(); ++j) {
        Int v = m(i, j) % q;
        r.set(i, j, v.convert_to<std::int64_t>());
      }
    return r;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  std::int64_t modulus() const { return q_; }
  std::int64_t prime() const { return p_; }
  int exponent() const { return r_; }

  std::int64_t operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  void set(std::size_t i, std::size_t j, std::int64_t v) {
    a_[i * cols_ + j] = mod_reduce(v, q_);
  }

  friend bool operator==(const ModMatrix&, const ModMatrix&) = default;

  friend ModMatrix operator*(const ModMatrix& x, const ModMatrix& y) {
    if (x.q_ != y.q_ || x.cols_ != y.rows_)
      throw PreconditionError("ModMatrix product shape/modulus mismatch");
    ModMatrix r(x.rows_, y.cols_, x.q_);
    for (std::size_t i = 0; i < x.rows_; ++i)
      for (std::size_t l = 0; l < x.cols_; ++l) {
        std::int64_t v = x(i, l);
        if (!v) continue;
        for (std::size_t j = 0; j < y.cols_; ++j)
          r.a_[i * r.cols_ + j] =
              (r.a_[i * r.cols_ + j] + mul_mod(v, y(l, j), x.q_)) % x.q_;
      }
    return r;
  }
  friend ModMatrix operator-(const ModMatrix& x, const ModMatrix& y) {
    if (x.q_ != y.q_ || x.rows_ != y.rows_ || x.cols_ != y.cols_)
      throw PreconditionError("ModMatrix difference shape/modulus mismatch");
    ModMatrix r = x;
    for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] = mod_reduce(x.a_[i] - y.a_[i], x.q_);
    return r;
  }
  friend ModMatrix operator+(const ModMatrix& x, const ModMatrix& y) {
    if (x.q_ != y.q_ || x.rows_ != y.rows_ || x.cols_ != y.cols_)
      throw PreconditionError("ModMatrix sum shape/modulus mismatch");
    ModMatrix r = x;
    for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] = (x.a_[i] + y.a_[i]) % x.q_;
    return r;
  }

  std::vector<std::int64_t> apply(std::span<const std::int64_t> v) const {
    if (v.size() != cols_) throw PreconditionError("ModMatrix apply: size mismatch");
    std::vector<std::int64_t> r(rows_, 0);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        r[i] = (r[i] + mul_mod((*this)(i, j), mod_reduce(v[j], q_), q_)) % q_;
    return r;
  }

  ModMatrix pow(std::uint64_t t) const {
    if (!square()) throw PreconditionError("pow of non-square ModMatrix");
    ModMatrix result = identity(rows_, q_), base = *this;
    while (t) {
      if (t & 1) result = result * base;
      t >>= 1;
      if (t) base = base * base;
    }
    return result;
  }

  /// Determinant reduced mod p (Gaussian elimination over F_p).
  std::int64_t det_mod_p() const {
    if (!square()) throw PreconditionError("determinant of non-square ModMatrix");
    const std::size_t n = rows_;
    std::vector<std::int64_t> a(a_.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = a_[i] % p_;
    std::int64_t det = 1;
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      while (piv < n && a[piv * n + c] == 0) ++piv;
      if (piv == n) return 0;
      if (piv != c) {
        for (std::size_t j = 0; j < n; ++j) std::swap(a[c * n + j], a[piv * n + j]);
        det = p_ - det;
        det %= p_;
      }
      det = mul_mod(det, a[c * n + c], p_);
      std::int64_t inv = inv_mod(a[c * n + c], p_);
      for (std::size_t i = c + 1; i < n; ++i) {
        std::int64_t f = mul_mod(a[i * n + c], inv, p_);
        if (!f) continue;
        for (std::size_t j = c; j < n; ++j)
          a[i * n + j] = mod_reduce(a[i * n + j] - mul_mod(f, a[c * n + j], p_), p_);
      }
    }
    return det;
  }

  bool is_invertible() const { return square() && det_mod_p() != 0; }

  /// Inverse mod q; requires a unit determinant.
  ModMatrix inverse() const {
    if (!is_invertible()) throw PreconditionError("ModMatrix is not invertible mod q");
    const std::size_t n = rows_;
    ModMatrix a = *this, inv = identity(n, q_);
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      while (piv < n && a(piv, c) % p_ == 0) ++piv;
      a.swap_rows(c, piv);
      inv.swap_rows(c, piv);
      std::int64_t u = inv_mod(a(c, c), q_);
      a.scale_row(c, u);
      inv.scale_row(c, u);
      for (std::size_t i = 0; i < n; ++i) {
        if (i == c || a(i, c) == 0) continue;
        std::int64_t f = a(i, c);
        a.add_row(i, c, q_ - f);
        inv.add_row(i, c, q_ - f);
      }
    }
    return inv;
  }

  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap(a_[i * cols_ + c], a_[j * cols_ + c]);
  }
  void swap_cols(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t r = 0; r < rows_; ++r) std::swap(a_[r * cols_ + i], a_[r * cols_ + j]);
  }
  void scale_row(std::size_t i, std::int64_t f) {
    for (std::size_t c = 0; c < cols_; ++c) a_[i * cols_ + c] = mul_mod(a_[i * cols_ + c], f, q_);
  }
  void scale_col(std::size_t j, std::int64_t f) {
    for (std::size_t r = 0; r < rows_; ++r) a_[r * cols_ + j] = mul_mod(a_[r * cols_ + j], f, q_);
  }
  // row[dst] += f row[src]
  void add_row(std::size_t dst, std::size_t src, std::int64_t f) {
    for (std::size_t c = 0; c < cols_; ++c)
      a_[dst * cols_ + c] = (a_[dst * cols_ + c] + mul_mod(f, a_[src * cols_ + c], q_)) % q_;
  }
  // col[dst] += f col[src]
  void add_col(std::size_t dst, std::size_t src, std::int64_t f) {
    for (std::size_t r = 0; r < rows_; ++r)
      a_[r * cols_ + dst] = (a_[r * cols_ + dst] + mul_mod(f, a_[r * cols_ + src], q_)) % q_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::int64_t q_ = 2, p_ = 2;
  int r_ = 1;
  std::vector<std::int64_t> a_;
};

inline std::string format_mod_matrix(const ModMatrix& m) {
  std::string s;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) s += ';';
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) s += ',';
      s += std::to_string(m(i, j));
    }
  }
  return s;
}

/// F_2 = [[0,1],[1,1]] reduced mod q.
inline ModMatrix f2_block(std::int64_t q) { return ModMatrix(q, {{0, 1}, {1, 1}}); }

/// F_3 = [[0,0,1],[0,1,1],[1,1,1]] reduced mod q.
inline ModMatrix f3_block(std::int64_t q) {
  return ModMatrix(q, {{0, 0, 1}, {0, 1, 1}, {1, 1, 1}});
}

/// Unit determinant mod p on every block (for Z_{p^r}-modules this is
/// bijectivity, hence surjectivity).
inline bool is_epimorphism(std::span<const ModMatrix> blocks) {
  return std::all_of(blocks.begin(), blocks.end(),
                     [](const ModMatrix& b) { return b.is_invertible(); });
}

/// Smallest m >= 2 with m^e and 1 - m^e both units mod p^r. The conditions
/// only see m mod p, so the search range 2..p^2-1 is exhaustive.
inline std::optional<std::int64_t> choose_m(std::int64_t p, int r, int e) {
  if (e != 2 && e != 3) throw PreconditionError("choose_m: exponent must be 2 or 3");
  if (!is_prime(p) || r < 1) throw PreconditionError("choose_m: bad prime power");
  for (std::int64_t m = 2; m < p * p; ++m) {
    std::int64_t me = pow_mod(m, static_cast<std::uint64_t>(e), p);
    if (me != 0 && mod_reduce(1 - me, p) != 0) return m;
  }
  return std::nullopt;
}

/// One homogeneous component (Z_{p^r})^d.
struct Component {
  std::int64_t p = 2;
  int r = 1;
  std::size_t d = 1;

  std::int64_t q() const {
    std::int64_t v = 1;
    for (int i = 0; i < r; ++i) v *= p;
    return v;
  }
  friend bool operator==(const Component&, const Component&) = default;
};

/// A coordinate vector; component c occupies coordinates
/// [offset(c), offset(c) + d_c) with residues in [0, q_c).
struct GElement {
  std::vector<std::int64_t> coords;

  friend auto operator<=>(const GElement&, const GElement&) = default;
  friend bool operator==(const GElement&, const GElement&) = default;
};

class FiniteAbelianGroup {
 public:
  FiniteAbelianGroup() = default;  // trivial group
  explicit FiniteAbelianGroup(std::vector<Component> comps) {
    for (const auto& c : comps) {
      if (!is_prime(c.p)) throw PreconditionError(std::to_string(c.p) + " is not prime");
      if (c.r < 1 || c.d < 1) throw PreconditionError("exponent and multiplicity must be >= 1");
      Int q = boost::multiprecision::pow(Int(c.p), static_cast<unsigned>(c.r));
      if (q > kMaxModulus)
        throw PreconditionError("modulus " + q.str() + " exceeds 2^31");
    }
    std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
      return std::pair(a.p, a.r) < std::pair(b.p, b.r);
    });
    for (const auto& c : comps) {
      if (!comps_.empty() && comps_.back().p == c.p && comps_.back().r == c.r)
        comps_.back().d += c.d;
      else
        comps_.push_back(c);
    }
    std::size_t off = 0;
    for (const auto& c : comps_) {
      offsets_.push_back(off);
      off += c.d;
      for (std::size_t i = 0; i < c.d; ++i) moduli_.push_back(c.q());
    }
  }

  /// Grammar: comma-separated `p^r:d`; whitespace ignored; "1" is the trivial
  /// group.
  static FiniteAbelianGroup parse(std::string_view text) {
    std::string s;
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < text.size(); ++i)
      if (!std::isspace(static_cast<unsigned char>(text[i]))) {
        s += text[i];
        pos.push_back(i);
      }
    if (s.empty()) throw ParseError("empty group spec", 0);
    if (s == "1") return FiniteAbelianGroup();
    pos.push_back(text.size());
    std::vector<Component> comps;
    std::size_t i = 0;
    auto number = [&](const char* what) -> std::int64_t {
      std::size_t start = i;
      std::int64_t v = 0;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        v = v * 10 + (s[i] - '0');
        if (v > kMaxModulus) throw ParseError(std::string(what) + " too large", pos[start]);
        ++i;
      }
      if (i == start) throw ParseError(std::string("expected ") + what, pos[i]);
      return v;
    };
    auto expect = [&](char ch) {
      if (i >= s.size() || s[i] != ch)
        throw ParseError(std::string("expected '") + ch + "'", pos[i]);
      ++i;
    };
    for (;;) {
      std::size_t start = i;
      Component c;
      c.p = number("prime");
      if (!is_prime(c.p)) throw ParseError(std::to_string(c.p) + " is not prime", pos[start]);
      expect('^');
      std::size_t rpos = i;
      std::int64_t r = number("exponent");
      if (r < 1) throw ParseError("exponent must be >= 1", pos[rpos]);
      c.r = static_cast<int>(r);
      expect(':');
      std::size_t dpos = i;
      std::int64_t d = number("multiplicity");
      if (d < 1) throw ParseError("multiplicity must be >= 1", pos[dpos]);
      c.d = static_cast<std::size_t>(d);
      Int q = boost::multiprecision::pow(Int(c.p), static_cast<unsigned>(c.r));
      if (q > kMaxModulus) throw ParseError("modulus " + q.str() + " exceeds 2^31", pos[start]);
      comps.push_back(c);
      if (i == s.size()) break;
      expect(',');
    }
    return FiniteAbelianGroup(std::move(comps));
  }

  std::string to_string() const {
    if (comps_.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(comps_[i].p) + "^" + std::to_string(comps_[i].r) + ":" +
           std::to_string(comps_[i].d);
    }
    return s;
  }

  const std::vector<Component>& components() const { return comps_; }
  std::size_t offset(std::size_t c) const { return offsets_[c]; }
  /// Total number of coordinates.
  std::size_t dimension() const { return moduli_.size(); }
  std::int64_t modulus_at(std::size_t coord) const { return moduli_[coord]; }
  bool is_trivial() const { return comps_.empty(); }

  Int order() const {
    Int o = 1;
    for (auto q : moduli_) o *= q;
    return o;
  }

  friend bool operator==(const FiniteAbelianGroup& a, const FiniteAbelianGroup& b) {
    return a.comps_ == b.comps_;
  }

  GElement zero() const { return GElement{std::vector<std::int64_t>(dimension(), 0)}; }

  void validate(const GElement& g) const {
    if (g.coords.size() != dimension())
      throw PreconditionError("element does not belong to group " + to_string());
    for (std::size_t i = 0; i < g.coords.size(); ++i)
      if (g.coords[i] < 0 || g.coords[i] >= moduli_[i])
        throw PreconditionError("element residue out of range for group " + to_string());
  }

  GElement make(std::vector<std::int64_t> coords) const {
    if (coords.size() != dimension())
      throw PreconditionError("element does not belong to group " + to_string());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = mod_reduce(coords[i], moduli_[i]);
    return GElement{std::move(coords)};
  }

  GElement add(const GElement& a, const GElement& b) const {
    GElement r = a;
    for (std::size_t i = 0; i < r.coords.size(); ++i)
      r.coords[i] = (a.coords[i] + b.coords[i]) % moduli_[i];
    return r;
  }
  GElement negate(const GElement& a) const {
    GElement r = a;
    for (std::size_t i = 0; i < r.coords.size(); ++i)
      r.coords[i] = a.coords[i] ? moduli_[i] - a.coords[i] : 0;
    return r;
  }
  static bool is_zero(const GElement& a) {
    return std::all_of(a.coords.begin(), a.coords.end(), [](std::int64_t c) { return c == 0; });
  }

  /// Mixed-radix index in [0, |G|), coordinate 0 least significant.
  std::uint64_t encode(const GElement& a) const {
    std::uint64_t code = 0;
    for (std::size_t i = dimension(); i-- > 0;)
      code = code * static_cast<std::uint64_t>(moduli_[i]) + static_cast<std::uint64_t>(a.coords[i]);
    return code;
  }
  GElement decode(std::uint64_t code) const {
    GElement a = zero();
    for (std::size_t i = 0; i < dimension(); ++i) {
      a.coords[i] = static_cast<std::int64_t>(code % static_cast<std::uint64_t>(moduli_[i]));
      code /= static_cast<std::uint64_t>(moduli_[i]);
    }
    return a;
  }

  std::string format(const GElement& a) const {
    std::string s = "(";
    for (std::size_t i = 0; i < a.coords.size(); ++i) {
      if (i) s += ' ';
      s += std::to_string(a.coords[i]);
    }
    return s + ")";
  }

 private:
  std::vector<Component> comps_;
  std::vector<std::size_t> offsets_;
  std::vector<std::int64_t> moduli_;
};

// Kernel of a square block mod q, two independent routes.

/// Brute force over all q^n vectors.
inline std::vector<std::vector<std::int64_t>> kernel_exhaustive(const ModMatrix& a) {
  const std::size_t n = a.cols();
  const std::int64_t q = a.modulus();
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> v(n, 0);
  for (;;) {
    auto img = a.apply(v);
    if (std::all_of(img.begin(), img.end(), [](std::int64_t c) { return c == 0; }))
      out.push_back(v);
    std::size_t i = 0;
    while (i < n && ++v[i] == q) v[i++] = 0;
    if (i == n) break;
  }
  return out;
}

/// U A V = diag(p^{val_i}) over the local ring Z/p^r (val_i = r means a
/// zero diagonal entry). Only V is kept; it is all the kernel needs.
struct LocalDiagonalization {
  ModMatrix V;
  std::vector<int> val;
};

inline LocalDiagonalization diagonalize_local(const ModMatrix& a_in) {
  if (!a_in.square()) throw PreconditionError("diagonalize_local: square block expected");
  const std::size_t n = a_in.rows();
  const std::int64_t q = a_in.modulus(), p = a_in.prime();
  const int r = a_in.exponent();
  ModMatrix a = a_in;
  LocalDiagonalization out{ModMatrix::identity(n, q), std::vector<int>(n, r)};
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t bi = n, bj = n;
    int best = r;
    for (std::size_t i = t; i < n; ++i)
      for (std::size_t j = t; j < n; ++j) {
        int w = p_valuation(a(i, j), p, r);
        if (w < best) {
          best = w;
          bi = i;
          bj = j;
        }
      }
    if (bi == n) break;  // rest is zero mod q
    a.swap_rows(t, bi);
    a.swap_cols(t, bj);
    out.V.swap_cols(t, bj);
    std::int64_t pv = 1;
    for (int i = 0; i < best; ++i) pv *= p;
    a.scale_row(t, inv_mod(a(t, t) / pv, q));  // pivot becomes p^best
    for (std::size_t i = 0; i < n; ++i) {
      if (i == t || a(i, t) == 0) continue;
      a.add_row(i, t, q - a(i, t) / pv);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == t || a(t, j) == 0) continue;
      std::int64_t f = q - a(t, j) / pv;
      a.add_col(j, t, f);
      out.V.add_col(j, t, f);
    }
    out.val[t] = best;
  }
  return out;
}

/// Generators of ker A: V (p^{r - val_i} e_i) for every val_i > 0.
inline std::vector<std::vector<std::int64_t>> kernel_generators(const ModMatrix& a) {
  auto diag = diagonalize_local(a);
  const std::size_t n = a.rows();
  std::vector<std::vector<std::int64_t>> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (diag.val[i] == 0) continue;
    std::int64_t s = 1;
    for (int e = 0; e < a.exponent() - diag.val[i]; ++e) s *= a.prime();
    std::vector<std::int64_t> y(n, 0);
    y[i] = s;
    out.push_back(diag.V.apply(y));
  }
  return out;
}

/// |ker A| = prod p^{val_i}.
inline Int kernel_order(const ModMatrix& a) {
  Int total = 1;
  for (int v : diagonalize_local(a).val) total *= boost::multiprecision::pow(Int(a.prime()), static_cast<unsigned>(v));
  return total;
}

/// All of ker A by elimination: V applied to {y : p^{val_i} y_i = 0}.
inline std::vector<std::vector<std::int64_t>> kernel_elimination(const ModMatrix& a) {
  auto diag = diagonalize_local(a);
  const std::size_t n = a.rows();
  const std::int64_t q = a.modulus();
  std::vector<std::int64_t> step(n), count(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t s = 1;
    for (int e = 0; e < a.exponent() - diag.val[i]; ++e) s *= a.prime();
    step[i] = s;
    count[i] = q / s;
  }
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> idx(n, 0), y(n, 0);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) y[i] = idx[i] * step[i];
    out.push_back(diag.V.apply(y));
    std::size_t i = 0;
    while (i < n && ++idx[i] == count[i]) idx[i++] = 0;
    if (i == n) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline constexpr std::uint64_t kExhaustiveKernelLimit = 1'000'000;

/// Blockwise automorphism of G: one invertible d x d matrix mod q per
/// component.
class GAutomorphism {
 public:
  GAutomorphism() = default;
  GAutomorphism(FiniteAbelianGroup group, std::vector<ModMatrix> blocks)
      : group_(std::move(group)), blocks_(std::move(blocks)) {
    const auto& comps = group_.components();
    if (blocks_.size() != comps.size())
      throw PreconditionError("automorphism needs one block per component of " + group_.to_string());
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const auto& b = blocks_[c];
      if (!b.square() || b.rows() != comps[c].d || b.modulus() != comps[c].q())
        throw PreconditionError("block " + std::to_string(c) + " has wrong shape or modulus");
      if (!b.is_invertible())
        throw PreconditionError("block for component " + std::to_string(comps[c].p) + "^" +
                                std::to_string(comps[c].r) + " is not invertible");
    }
  }

  static GAutomorphism identity(const FiniteAbelianGroup& g) {
    std::vector<ModMatrix> blocks;
    for (const auto& c : g.components()) blocks.push_back(ModMatrix::identity(c.d, c.q()));
    return GAutomorphism(g, std::move(blocks));
  }

  const FiniteAbelianGroup& group() const { return group_; }
  const std::vector<ModMatrix>& blocks() const { return blocks_; }

  friend bool operator==(const GAutomorphism&, const GAutomorphism&) = default;

  GElement apply(const GElement& g) const {
    group_.validate(g);
    GElement out = g;
    for (std::size_t c = 0; c < blocks_.size(); ++c) {
      std::size_t off = group_.offset(c), d = blocks_[c].cols();
      auto img = blocks_[c].apply(std::span<const std::int64_t>(g.coords).subspan(off, d));
      std::copy(img.begin(), img.end(), out.coords.begin() + static_cast<std::ptrdiff_t>(off));
    }
    return out;
  }

  GAutomorphism compose(const GAutomorphism& other) const {  // this o other
    if (!(group_ == other.group_)) throw PreconditionError("compose: group mismatch");
    std::vector<ModMatrix> b;
    for (std::size_t c = 0; c < blocks_.size(); ++c) b.push_back(blocks_[c] * other.blocks_[c]);
    return GAutomorphism(group_, std::move(b));
  }

  GAutomorphism inverse() const {
    std::vector<ModMatrix> b;
    for (const auto& m : blocks_) b.push_back(m.inverse());
    return GAutomorphism(group_, std::move(b));
  }

  GAutomorphism power(std::uint64_t t) const {
    std::vector<ModMatrix> b;
    for (const auto& m : blocks_) b.push_back(m.pow(t));
    return GAutomorphism(group_, std::move(b));
  }

  /// F - E blockwise (a homomorphism, not an automorphism).
  std::vector<ModMatrix> minus_identity() const {
    std::vector<ModMatrix> b;
    for (const auto& m : blocks_) b.push_back(m - ModMatrix::identity(m.rows(), m.modulus()));
    return b;
  }

  /// Least t <= bound with F^t = id.
  std::optional<std::uint64_t> order(std::uint64_t bound = 1'000'000) const {
    GAutomorphism id = identity(group_), p = *this;
    for (std::uint64_t t = 1; t <= bound; ++t) {
      if (p == id) return t;
      p = p.compose(*this);
    }
    return std::nullopt;
  }

  /// Solutions of (F - E) x = 0, enumerated blockwise and combined; always
  /// contains zero.
  std::vector<GElement> fixed_points(std::uint64_t limit = 1'000'000) const {
    Int total = 1;
    for (const auto& a : minus_identity()) total *= kernel_order(a);
    if (total > limit)
      throw ResourceCapError("fixed point set has " + total.str() + " elements (limit " +
                             std::to_string(limit) + ")");
    auto kernels = fixed_point_blocks();
    std::vector<GElement> out;
    std::vector<std::size_t> idx(kernels.size(), 0);
    for (;;) {
      GElement g = group_.zero();
      for (std::size_t c = 0; c < kernels.size(); ++c) {
        const auto& v = kernels[c][idx[c]];
        std::copy(v.begin(), v.end(), g.coords.begin() + static_cast<std::ptrdiff_t>(group_.offset(c)));
      }
      out.push_back(std::move(g));
      std::size_t c = 0;
      while (c < kernels.size() && ++idx[c] == kernels[c].size()) idx[c++] = 0;
      if (c == kernels.size()) break;
    }
    return out;
  }

  /// Per-component kernels of F - E. Exhaustive search while q^d stays under
  /// the limit, elimination mod p^r beyond.
  std::vector<std::vector<std::vector<std::int64_t>>> fixed_point_blocks() const {
    std::vector<std::vector<std::vector<std::int64_t>>> out;
    for (const auto& a : minus_identity()) {
      Int size = boost::multiprecision::pow(Int(a.modulus()), static_cast<unsigned>(a.rows()));
      out.push_back(size <= kExhaustiveKernelLimit ? kernel_exhaustive(a) : kernel_elimination(a));
    }
    return out;
  }

 private:
  FiniteAbelianGroup group_;
  std::vector<ModMatrix> blocks_;
};

inline GAutomorphism matrix_power_mod(const GAutomorphism& f, std::uint64_t t) { return f.power(t); }

}  // namespace rw
