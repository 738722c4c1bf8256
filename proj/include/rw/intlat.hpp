#pragma once

// Exact integer matrix algebra over Z: determinants, Smith normal form,
// cokernel orders, matrix orders and affine orbits of Z^k automorphisms.

#include <rw/errors.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rw {

using Int = boost::multiprecision::cpp_int;

/// Natural number or infinity. Reidemeister numbers and cokernel orders
/// live here.
class ExtNat {
 public:
  ExtNat() = default;  // zero
  ExtNat(Int v) : value_(std::move(v)) {  // NOLINT(implicit)
    if (*value_ < 0) throw PreconditionError("ExtNat must be nonnegative");
  }
  ExtNat(long long v) : ExtNat(Int(v)) {}  // NOLINT(implicit)
  static ExtNat infinite() {
    ExtNat r;
    r.value_.reset();
    return r;
  }

  bool is_infinite() const { return !value_.has_value(); }
  bool is_finite() const { return value_.has_value(); }
  const Int& value() const {
    if (!value_) throw PreconditionError("value() on infinite ExtNat");
    return *value_;
  }
  std::string to_string() const {
    return value_ ? value_->str() : std::string("infinite");
  }

  friend bool operator==(const ExtNat&, const ExtNat&) = default;

 private:
  std::optional<Int> value_{Int(0)};
};

inline std::ostream& operator<<(std::ostream& os, const ExtNat& n) {
  return os << n.to_string();
}

/// Checked narrowing of an exact integer into int64.
inline std::int64_t to_i64(const Int& v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min())
    throw ArithmeticCapacityError("integer " + v.str() +
                                  " does not fit in 64 bits");
  return v.convert_to<std::int64_t>();
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw ArithmeticCapacityError("64-bit overflow in addition");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw ArithmeticCapacityError("64-bit overflow in multiplication");
  return r;
}

/// A point of Z^k. Coordinates are machine integers; arithmetic on them is
/// overflow-checked.
using ZkVector = std::vector<std::int64_t>;

inline ZkVector operator+(const ZkVector& a, const ZkVector& b) {
  if (a.size() != b.size()) throw PreconditionError("ZkVector dimension mismatch");
  ZkVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = checked_add(a[i], b[i]);
  return r;
}

inline ZkVector operator-(const ZkVector& a) {
  ZkVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = checked_mul(a[i], -1);
  return r;
}

inline ZkVector operator-(const ZkVector& a, const ZkVector& b) { return a + (-b); }

inline ZkVector scaled(const ZkVector& a, std::int64_t s) {
  ZkVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = checked_mul(a[i], s);
  return r;
}

inline bool is_zero(const ZkVector& v) {
  return std::all_of(v.begin(), v.end(), [](std::int64_t c) { return c == 0; });
}

inline std::string format_vector(const ZkVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s + ")";
}

/// Square k x k matrix over Z with exact entries.
class IntMatrix {
 public:
  IntMatrix() = default;
  explicit IntMatrix(std::size_t k) : k_(k), a_(k * k) {
    if (k == 0) throw PreconditionError("IntMatrix dimension must be >= 1");
  }
  IntMatrix(std::initializer_list<std::initializer_list<long long>> rows)
      : IntMatrix(rows.size()) {
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != k_) throw PreconditionError("IntMatrix must be square");
      std::size_t j = 0;
      for (long long v : row) (*this)(i, j++) = v;
      ++i;
    }
  }

  static IntMatrix identity(std::size_t k) {
    IntMatrix m(k);
    for (std::size_t i = 0; i < k; ++i) m(i, i) = 1;
    return m;
  }
  static IntMatrix scalar(std::size_t k, const Int& s) {
    IntMatrix m(k);
    for (std::size_t i = 0; i < k; ++i) m(i, i) = s;
    return m;
  }
  static IntMatrix from_rows(const std::vector<std::vector<Int>>& rows) {
    IntMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size())
        throw PreconditionError("IntMatrix must be square");
      for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t dim() const { return k_; }
  Int& operator()(std::size_t i, std::size_t j) { return a_[i * k_ + j]; }
  const Int& operator()(std::size_t i, std::size_t j) const { return a_[i * k_ + j]; }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

  friend IntMatrix operator+(const IntMatrix& x, const IntMatrix& y) {
    x.require_same(y);
    IntMatrix r(x.k_);
    for (std::size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = x.a_[i] + y.a_[i];
    return r;
  }
  friend IntMatrix operator-(const IntMatrix& x, const IntMatrix& y) {
    x.require_same(y);
    IntMatrix r(x.k_);
    for (std::size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = x.a_[i] - y.a_[i];
    return r;
  }
  friend IntMatrix operator-(const IntMatrix& x) {
    IntMatrix r(x.k_);
    for (std::size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = -x.a_[i];
    return r;
  }
  friend IntMatrix operator*(const IntMatrix& x, const IntMatrix& y) {
    x.require_same(y);
    const std::size_t k = x.k_;
    IntMatrix r(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l) {
        if (x(i, l) == 0) continue;
        for (std::size_t j = 0; j < k; ++j) r(i, j) += x(i, l) * y(l, j);
      }
    return r;
  }

  /// M v with overflow-checked conversion back to machine integers.
  ZkVector apply(const ZkVector& v) const {
    if (v.size() != k_) throw PreconditionError("ZkVector dimension mismatch");
    ZkVector r(k_);
    for (std::size_t i = 0; i < k_; ++i) {
      Int s = 0;
      for (std::size_t j = 0; j < k_; ++j) s += (*this)(i, j) * v[j];
      r[i] = to_i64(s);
    }
    return r;
  }

  IntMatrix pow(std::uint64_t t) const {
    IntMatrix result = identity(k_), base = *this;
    while (t) {
      if (t & 1) result = result * base;
      t >>= 1;
      if (t) base = base * base;
    }
    return result;
  }

  IntMatrix transposed() const {
    IntMatrix r(k_);
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < k_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  bool is_diagonal() const {
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < k_; ++j)
        if (i != j && (*this)(i, j) != 0) return false;
    return true;
  }

  void swap_rows(std::size_t i, std::size_t j) {
    for (std::size_t c = 0; c < k_; ++c) std::swap((*this)(i, c), (*this)(j, c));
  }
  void swap_cols(std::size_t i, std::size_t j) {
    for (std::size_t r = 0; r < k_; ++r) std::swap((*this)(r, i), (*this)(r, j));
  }
  // row[dst] += f * row[src]
  void add_row(std::size_t dst, std::size_t src, const Int& f) {
    for (std::size_t c = 0; c < k_; ++c) (*this)(dst, c) += f * (*this)(src, c);
  }
  // col[dst] += f * col[src]
  void add_col(std::size_t dst, std::size_t src, const Int& f) {
    for (std::size_t r = 0; r < k_; ++r) (*this)(r, dst) += f * (*this)(r, src);
  }
  void negate_row(std::size_t i) {
    for (std::size_t c = 0; c < k_; ++c) (*this)(i, c) = -(*this)(i, c);
  }
  void negate_col(std::size_t j) {
    for (std::size_t r = 0; r < k_; ++r) (*this)(r, j) = -(*this)(r, j);
  }

 private:
  void require_same(const IntMatrix& o) const {
    if (k_ != o.k_) throw PreconditionError("IntMatrix dimension mismatch");
  }

  std::size_t k_ = 0;
  std::vector<Int> a_;
};

/// Matrix literal: rows separated by ';', entries by ','. "0,1;-1,-1".
inline std::string format_matrix(const IntMatrix& m) {
  std::string s;
  for (std::size_t i = 0; i < m.dim(); ++i) {
    if (i) s += ';';
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (j) s += ',';
      s += m(i, j).str();
    }
  }
  return s;
}

inline IntMatrix parse_matrix(std::string_view text) {
  std::vector<std::vector<Int>> rows(1);
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  for (;;) {
    skip_ws();
    std::size_t start = i;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
    std::size_t digits = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == digits) throw ParseError("expected integer in matrix literal", start);
    rows.back().emplace_back(std::string(text.substr(start, i - start)));
    skip_ws();
    if (i == text.size()) break;
    if (text[i] == ',') {
      ++i;
    } else if (text[i] == ';') {
      ++i;
      rows.emplace_back();
    } else {
      throw ParseError(std::string("unexpected character '") + text[i] +
                           "' in matrix literal",
                       i);
    }
  }
  for (const auto& r : rows)
    if (r.size() != rows.size())
      throw ParseError("matrix literal is not square", text.size());
  return IntMatrix::from_rows(rows);
}

inline std::ostream& operator<<(std::ostream& os, const IntMatrix& m) {
  return os << format_matrix(m);
}

/// Exact determinant by Bareiss fraction-free elimination.
inline Int determinant(const IntMatrix& m) {
  const std::size_t n = m.dim();
  IntMatrix a = m;
  Int sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t r = k + 1;
      while (r < n && a(r, k) == 0) ++r;
      if (r == n) return 0;
      a.swap_rows(k, r);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j)
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
      a(i, k) = 0;
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

inline bool is_unimodular(const IntMatrix& m) {
  Int d = determinant(m);
  return d == 1 || d == -1;
}

/// U * M * V = S with S diagonal (nonnegative divisibility chain) and U, V
/// unimodular. The inverses of U and V are tracked alongside.
struct SnfResult {
  IntMatrix S, U, V;
  IntMatrix U_inv, V_inv;

  std::vector<Int> diagonal() const {
    std::vector<Int> d(S.dim());
    for (std::size_t i = 0; i < S.dim(); ++i) d[i] = S(i, i);
    return d;
  }
  std::size_t rank() const {
    std::size_t r = 0;
    for (std::size_t i = 0; i < S.dim(); ++i)
      if (S(i, i) != 0) ++r;
    return r;
  }
};

/// Pivot rule: smallest nonzero absolute value in the active submatrix
/// (first in row-major order on ties); the pivot column is cleared by row
/// operations before the pivot row is cleared by column operations.
inline SnfResult smith_normal_form(const IntMatrix& m) {
  const std::size_t n = m.dim();
  SnfResult r{m, IntMatrix::identity(n), IntMatrix::identity(n),
              IntMatrix::identity(n), IntMatrix::identity(n)};
  IntMatrix& S = r.S;

  auto row_swap = [&](std::size_t i, std::size_t j) {
    S.swap_rows(i, j);
    r.U.swap_rows(i, j);
    r.U_inv.swap_cols(i, j);
  };
  auto col_swap = [&](std::size_t i, std::size_t j) {
    S.swap_cols(i, j);
    r.V.swap_cols(i, j);
    r.V_inv.swap_rows(i, j);
  };
  // row[dst] += f row[src]
  auto row_add = [&](std::size_t dst, std::size_t src, const Int& f) {
    S.add_row(dst, src, f);
    r.U.add_row(dst, src, f);
    r.U_inv.add_col(src, dst, -f);
  };
  // col[dst] += f col[src]
  auto col_add = [&](std::size_t dst, std::size_t src, const Int& f) {
    S.add_col(dst, src, f);
    r.V.add_col(dst, src, f);
    r.V_inv.add_row(src, dst, -f);
  };

  for (std::size_t t = 0; t < n; ++t) {
    for (;;) {
      std::size_t pi = n, pj = n;
      Int best;
      for (std::size_t i = t; i < n; ++i)
        for (std::size_t j = t; j < n; ++j) {
          if (S(i, j) == 0) continue;
          Int v = abs(S(i, j));
          if (pi == n || v < best) {
            best = v;
            pi = i;
            pj = j;
          }
        }
      if (pi == n) return r;  // remaining block is zero
      if (pi != t) row_swap(t, pi);
      if (pj != t) col_swap(t, pj);

      bool clean = true;
      for (std::size_t i = t + 1; i < n; ++i) {
        if (S(i, t) == 0) continue;
        Int q = S(i, t) / S(t, t);
        if (q != 0) row_add(i, t, -q);
        if (S(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (S(t, j) == 0) continue;
        Int q = S(t, j) / S(t, t);
        if (q != 0) col_add(j, t, -q);
        if (S(t, j) != 0) clean = false;
      }
      if (!clean) continue;

      std::size_t bad = n;
      for (std::size_t i = t + 1; i < n && bad == n; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (S(i, j) % S(t, t) != 0) {
            bad = i;
            break;
          }
      if (bad == n) break;
      row_add(t, bad, 1);
    }
    if (S(t, t) < 0) {
      S.negate_row(t);
      r.U.negate_row(t);
      r.U_inv.negate_col(t);
    }
  }
  return r;
}

/// #Coker(A) = #(Z^k / A Z^k): product of the Smith invariants, or
/// infinite when A is singular.
inline ExtNat cokernel_order(const IntMatrix& a) {
  SnfResult snf = smith_normal_form(a);
  Int prod = 1;
  for (const Int& d : snf.diagonal()) {
    if (d == 0) return ExtNat::infinite();
    prod *= d;
  }
  return ExtNat(prod);
}

/// Least t <= bound with M^t = E.
inline std::optional<std::uint64_t> matrix_order(const IntMatrix& m,
                                                  std::uint64_t bound) {
  if (bound < 1) throw PreconditionError("matrix_order bound must be >= 1");
  const IntMatrix e = IntMatrix::identity(m.dim());
  IntMatrix p = m;
  for (std::uint64_t t = 1; t <= bound; ++t) {
    if (p == e) return t;
    if (t < bound) p = p * m;
  }
  return std::nullopt;
}

/// Companion matrix of 1 + x + x^2 + x^3 + x^4; an element of order 5 in
/// GL(4, Z).
inline IntMatrix companion_cyclotomic_5() {
  return IntMatrix{{0, 0, 0, -1}, {1, 0, 0, -1}, {0, 1, 0, -1}, {0, 0, 1, -1}};
}

/// The order-3 rotation of Z^2: (u, v) -> (v, -u - v).
inline IntMatrix rotation_order_3() { return IntMatrix{{0, 1}, {-1, -1}}; }

inline IntMatrix direct_sum(std::span<const IntMatrix> blocks) {
  if (blocks.empty()) throw PreconditionError("direct_sum of an empty list");
  std::size_t k = 0;
  for (const auto& b : blocks) k += b.dim();
  IntMatrix r(k);
  std::size_t off = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.dim(); ++i)
      for (std::size_t j = 0; j < b.dim(); ++j) r(off + i, off + j) = b(i, j);
    off += b.dim();
  }
  return r;
}

inline IntMatrix direct_sum(const IntMatrix& block, std::size_t copies) {
  std::vector<IntMatrix> v(copies, block);
  return direct_sum(std::span<const IntMatrix>(v));
}

struct AffineOrbit {
  std::vector<ZkVector> points;  // x, Ax, A^2 x, ... (distinct)
  bool closed = false;           // A^{points.size()} x == x

  std::size_t length() const { return points.size(); }
};

/// Iterates u -> M u + z from x for at most `bound` steps.
inline AffineOrbit affine_orbit(const IntMatrix& m, const ZkVector& z,
                                const ZkVector& x, std::size_t bound) {
  AffineOrbit orbit;
  ZkVector u = x;
  for (std::size_t step = 0; step < bound; ++step) {
    orbit.points.push_back(u);
    u = m.apply(u) + z;
    if (u == x) {
      orbit.closed = true;
      return orbit;
    }
  }
  return orbit;
}

/// Integer solutions of A u = b: u = particular + sum c_i kernel[i].
struct LatticeSolution {
  ZkVector particular;
  std::vector<ZkVector> kernel;  // Z-basis of ker A
};

inline std::optional<LatticeSolution> solve_integer_system(const IntMatrix& a,
                                                           const ZkVector& b) {
  const std::size_t n = a.dim();
  if (b.size() != n) throw PreconditionError("solve_integer_system: size mismatch");
  SnfResult snf = smith_normal_form(a);
  // S y = U b, u = V y
  std::vector<Int> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    Int s = 0;
    for (std::size_t j = 0; j < n; ++j) s += snf.U(i, j) * b[j];
    c[i] = s;
  }
  std::vector<Int> y(n);
  LatticeSolution sol;
  for (std::size_t i = 0; i < n; ++i) {
    const Int& d = snf.S(i, i);
    if (d == 0) {
      if (c[i] != 0) return std::nullopt;
      ZkVector col(n);
      for (std::size_t r = 0; r < n; ++r) col[r] = to_i64(snf.V(r, i));
      sol.kernel.push_back(std::move(col));
    } else {
      if (c[i] % d != 0) return std::nullopt;
      y[i] = c[i] / d;
    }
  }
  sol.particular.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    Int s = 0;
    for (std::size_t j = 0; j < n; ++j) s += snf.V(r, j) * y[j];
    sol.particular[r] = to_i64(s);
  }
  return sol;
}

}  // namespace rw
