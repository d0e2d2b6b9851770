#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "affvortex/error.hpp"

namespace affvortex {

using Rational = boost::multiprecision::cpp_rational;

namespace qk_detail {

/// Sparse polynomial in one generator x and q; keys are (s, e) for x^e q^s
/// so that iteration order is the rendering order.
using Terms = std::map<std::pair<int, int>, Rational>;

inline void add_term(Terms& t, int e, int s, const Rational& c) {
  if (c == 0) return;
  auto [it, fresh] = t.try_emplace({s, e}, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) t.erase(it);
  }
}

inline std::string render(const Terms& t, char x) {
  if (t.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [key, coeff] : t) {
    const auto [s, e] = key;
    Rational c = coeff;
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    if (c < 0) c = -c;
    std::string mono;
    const auto factor = [&](char v, int p) {
      if (p == 0) return;
      if (!mono.empty()) mono += "*";
      mono += v;
      if (p > 1) mono += "^" + std::to_string(p);
    };
    factor(x, e);
    factor('q', s);
    if (mono.empty())
      out += c.str();
    else if (c == 1)
      out += mono;
    else
      out += c.str() + "*" + mono;
    first = false;
  }
  return out;
}

/// Recursive descent over sums, products, powers, parentheses, integers,
/// fractions a/b and single-letter generators.
template <typename Ring, typename MakeVar, typename MakeConst>
class Parser {
 public:
  Parser(std::string_view text, MakeVar var, MakeConst cst) : s_(text), var_(var), cst_(cst) {}

  Ring parse() {
    Ring r = sum();
    skip();
    expect(pos_ == s_.size(), "unexpected '" + std::string(1, s_[std::min(pos_, s_.size() - 1)]) + "'");
    return r;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(bool ok, const std::string& what) const {
    require(ok, ErrorCode::ParseError, what + " at position " + std::to_string(pos_) + " in \"" + std::string(s_) + "\"");
  }

  Ring sum() {
    Ring acc = eat('-') ? cst_(Rational(-1)) * product() : product();
    for (;;) {
      if (eat('+'))
        acc = acc + product();
      else if (eat('-'))
        acc = acc - product();
      else
        return acc;
    }
  }
  Ring product() {
    Ring acc = power();
    while (eat('*')) acc = acc * power();
    return acc;
  }
  Ring power() {
    Ring base = atom();
    if (!eat('^')) return base;
    const auto n = integer();
    expect(n.has_value(), "expected a non-negative exponent");
    expect(*n <= 10000, "exponent too large");
    Ring acc = cst_(Rational(1));
    for (long long i = 0; i < *n; ++i) acc = acc * base;
    return acc;
  }
  Ring atom() {
    skip();
    expect(pos_ < s_.size(), "unexpected end of expression");
    if (eat('(')) {
      Ring r = sum();
      expect(eat(')'), "expected ')'");
      return r;
    }
    if (auto n = integer()) {
      Rational value(*n);
      if (eat('/')) {
        const auto d = integer();
        expect(d.has_value() && *d != 0, "expected a nonzero denominator");
        value /= Rational(*d);
      }
      return cst_(value);
    }
    const char c = s_[pos_];
    expect(std::isalpha(static_cast<unsigned char>(c)) != 0, "unexpected '" + std::string(1, c) + "'");
    ++pos_;
    auto r = var_(c);
    expect(r.has_value(), "unknown generator '" + std::string(1, c) + "'");
    return *r;
  }
  std::optional<long long> integer() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == start) return std::nullopt;
    expect(pos_ - start <= 18, "integer literal too long");
    return std::stoll(std::string(s_.substr(start, pos_ - start)));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  MakeVar var_;
  MakeConst cst_;
};

}  // namespace qk_detail

/// Element of QH*(P^{N-1}) = Q[c, q] / (c^N = q), kept reduced (c-exponent
/// below N). deg c = 2, deg q = 2N.
class QHElement {
 public:
  explicit QHElement(int n) : n_(n) { require(n >= 2, ErrorCode::InvalidInput, "QH ring needs N >= 2"); }

  static QHElement monomial(int n, int r, int s, Rational coeff = 1) {
    require(r >= 0 && s >= 0, ErrorCode::InvalidInput, "monomial exponents must be non-negative");
    QHElement x(n);
    x.add(r, s, coeff);
    return x;
  }
  static QHElement one(int n) { return monomial(n, 0, 0); }

  int n() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  /// Coefficient of c^r q^s in the reduced form.
  Rational coeff(int r, int s) const {
    const auto it = terms_.find({s, r});
    return it == terms_.end() ? Rational(0) : it->second;
  }
  const qk_detail::Terms& terms() const { return terms_; }

  /// Common degree 2r + 2Ns of all monomials; nullopt if inhomogeneous or zero.
  std::optional<int> degree() const {
    std::optional<int> deg;
    for (const auto& [key, c] : terms_) {
      const int d = 2 * key.second + 2 * n_ * key.first;
      if (deg && *deg != d) return std::nullopt;
      deg = d;
    }
    return deg;
  }

  /// Adds coeff * c^r q^s, reducing c^r = c^{r mod N} q^{r div N}.
  void add(int r, int s, const Rational& coeff) { qk_detail::add_term(terms_, r % n_, s + r / n_, coeff); }

  /// Setting q = 0.
  QHElement at_q_zero() const {
    QHElement out(n_);
    for (const auto& [key, c] : terms_)
      if (key.first == 0) out.add(key.second, 0, c);
    return out;
  }

  std::string str() const { return qk_detail::render(terms_, 'c'); }

  static QHElement parse(std::string_view text, int n) {
    const auto var = [n](char v) -> std::optional<QHElement> {
      if (v == 'c') return monomial(n, 1, 0);
      if (v == 'q') return monomial(n, 0, 1);
      return std::nullopt;
    };
    const auto cst = [n](const Rational& c) { return monomial(n, 0, 0, c); };
    return qk_detail::Parser<QHElement, decltype(var), decltype(cst)>(text, var, cst).parse();
  }

  friend QHElement operator+(const QHElement& a, const QHElement& b) {
    same_n(a, b);
    QHElement out = a;
    for (const auto& [key, c] : b.terms_) qk_detail::add_term(out.terms_, key.second, key.first, c);
    return out;
  }
  friend QHElement operator-(const QHElement& a, const QHElement& b) { return a + b * Rational(-1); }
  friend QHElement operator*(const QHElement& a, const Rational& k) {
    QHElement out(a.n_);
    for (const auto& [key, c] : a.terms_) qk_detail::add_term(out.terms_, key.second, key.first, c * k);
    return out;
  }
  friend QHElement operator*(const QHElement& a, const QHElement& b) {
    same_n(a, b);
    QHElement out(a.n_);
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) out.add(ka.second + kb.second, ka.first + kb.first, ca * cb);
    return out;
  }
  friend bool operator==(const QHElement& a, const QHElement& b) { return a.n_ == b.n_ && a.terms_ == b.terms_; }

 private:
  static void same_n(const QHElement& a, const QHElement& b) {
    require(a.n_ == b.n_, ErrorCode::MixedN,
            "QH elements for N = " + std::to_string(a.n_) + " and N = " + std::to_string(b.n_) + " cannot be combined");
  }

  int n_;
  qk_detail::Terms terms_;
};

inline QHElement qh_mul(const QHElement& x, const QHElement& y) { return x * y; }

/// Element of H*_{U(1)}(C^N) tensor Lambda = Q[u, q].
class EquivariantElement {
 public:
  EquivariantElement() = default;

  static EquivariantElement monomial(int m, int s, Rational coeff = 1) {
    require(m >= 0 && s >= 0, ErrorCode::InvalidInput, "monomial exponents must be non-negative");
    EquivariantElement x;
    qk_detail::add_term(x.terms_, m, s, coeff);
    return x;
  }

  bool is_zero() const { return terms_.empty(); }
  const qk_detail::Terms& terms() const { return terms_; }
  std::string str() const { return qk_detail::render(terms_, 'u'); }

  static EquivariantElement parse(std::string_view text) {
    const auto var = [](char v) -> std::optional<EquivariantElement> {
      if (v == 'u') return monomial(1, 0);
      if (v == 'q') return monomial(0, 1);
      return std::nullopt;
    };
    const auto cst = [](const Rational& c) { return monomial(0, 0, c); };
    return qk_detail::Parser<EquivariantElement, decltype(var), decltype(cst)>(text, var, cst).parse();
  }

  friend EquivariantElement operator+(const EquivariantElement& a, const EquivariantElement& b) {
    EquivariantElement out = a;
    for (const auto& [key, c] : b.terms_) qk_detail::add_term(out.terms_, key.second, key.first, c);
    return out;
  }
  friend EquivariantElement operator-(const EquivariantElement& a, const EquivariantElement& b) {
    EquivariantElement out = a;
    for (const auto& [key, c] : b.terms_) qk_detail::add_term(out.terms_, key.second, key.first, -c);
    return out;
  }
  friend EquivariantElement operator*(const EquivariantElement& a, const EquivariantElement& b) {
    EquivariantElement out;
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) qk_detail::add_term(out.terms_, ka.second + kb.second, ka.first + kb.first, ca * cb);
    return out;
  }
  friend bool operator==(const EquivariantElement&, const EquivariantElement&) = default;

 private:
  qk_detail::Terms terms_;
};

/// u^m -> c^r q^{d_m} with m = d_m N + r.
inline QHElement kirwan_q(int m, int n) {
  require(m >= 0, ErrorCode::InvalidInput, "kirwan_q needs m >= 0");
  return QHElement::monomial(n, m % n, m / n);
}

/// Lambda-linear extension: u^m q^s -> kirwan_q(m) q^s.
inline QHElement kirwan_q_lambda(const EquivariantElement& x, int n) {
  QHElement out(n);
  for (const auto& [key, c] : x.terms()) out.add(key.second, key.first, c);
  return out;
}

/// The q = 0 specialisation: c^m for m < N, zero otherwise.
inline QHElement kirwan_classical(int m, int n) {
  require(m >= 0, ErrorCode::InvalidInput, "kirwan_classical needs m >= 0");
  return m < n ? QHElement::monomial(n, m, 0) : QHElement(n);
}

}  // namespace affvortex
