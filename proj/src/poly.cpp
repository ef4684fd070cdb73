#include "conehull/poly.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace conehull {

Monomial Monomial::var(std::size_t nvars, std::size_t i, int pow) {
  Monomial m = one(nvars);
  m.exps.at(i) = pow;
  return m;
}

int Monomial::degree() const {
  int d = 0;
  for (int e : exps) d += e;
  return d;
}

Monomial Monomial::operator*(const Monomial& o) const {
  if (exps.size() != o.exps.size()) throw Error("monomial arity mismatch");
  Monomial r = *this;
  for (std::size_t i = 0; i < exps.size(); ++i) r.exps[i] += o.exps[i];
  return r;
}

double Monomial::eval(const std::vector<double>& x) const {
  if (x.size() != exps.size()) throw Error("evaluation point has wrong dimension");
  double v = 1.0;
  for (std::size_t i = 0; i < exps.size(); ++i)
    for (int k = 0; k < exps[i]; ++k) v *= x[i];
  return v;
}

bool grlex_less(const Monomial& a, const Monomial& b) {
  int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  // within a degree, lexicographically larger exponent vector comes first
  return a.exps > b.exps;
}

int Polynomial::total_degree() const {
  if (terms_.empty()) throw Error("zero polynomial has no degree");
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::set_coeff(const Monomial& m, double c) {
  if (m.nvars() != vars_.size()) throw Error("monomial arity mismatch");
  if (c == 0.0)
    terms_.erase(m);
  else
    terms_[m] = c;
}

void Polynomial::add_term(const Monomial& m, double c) {
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    if (c != 0.0) terms_.emplace(m, c);
    return;
  }
  it->second += c;
  if (it->second == 0.0) terms_.erase(it);
}

Polynomial Polynomial::constant(std::vector<std::string> vars, double c) {
  Polynomial p(std::move(vars));
  p.add_term(Monomial::one(p.nvars()), c);
  return p;
}

Polynomial Polynomial::variable(std::vector<std::string> vars, std::size_t i) {
  Polynomial p(std::move(vars));
  if (i >= p.nvars()) throw Error("variable index out of range");
  p.add_term(Monomial::var(p.nvars(), i), 1.0);
  return p;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (vars_ != o.vars_) throw Error("polynomial variable lists differ");
  Polynomial r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

Polynomial Polynomial::scaled(double s) const {
  Polynomial r(vars_);
  for (const auto& [m, c] : terms_) r.add_term(m, c * s);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (vars_ != o.vars_) throw Error("polynomial variable lists differ");
  Polynomial r(vars_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) r.add_term(ma * mb, ca * cb);
  return r;
}

Polynomial Polynomial::pow(int e) const {
  if (e < 0) throw Error("negative polynomial power");
  Polynomial r = constant(vars_, 1.0);
  for (int i = 0; i < e; ++i) r = r * *this;
  return r;
}

double Polynomial::eval(const std::vector<double>& x) const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v += c * m.eval(x);
  return v;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  if (var >= nvars()) throw Error("variable index out of range");
  Polynomial r(vars_);
  for (const auto& [m, c] : terms_) {
    if (m.exps[var] == 0) continue;
    Monomial d = m;
    d.exps[var] -= 1;
    r.add_term(d, c * m.exps[var]);
  }
  return r;
}

Polynomial Polynomial::homogenize(const std::string& hom_name) const {
  if (std::find(vars_.begin(), vars_.end(), hom_name) != vars_.end())
    throw Error("homogenizing variable name collides with an existing variable");
  if (is_zero()) throw Error("cannot homogenize the zero polynomial");
  int d = total_degree();
  std::vector<std::string> nv;
  nv.reserve(vars_.size() + 1);
  nv.push_back(hom_name);
  nv.insert(nv.end(), vars_.begin(), vars_.end());
  Polynomial r(nv);
  for (const auto& [m, c] : terms_) {
    std::vector<int> e;
    e.reserve(m.exps.size() + 1);
    e.push_back(d - m.degree());
    e.insert(e.end(), m.exps.begin(), m.exps.end());
    r.add_term(Monomial(std::move(e)), c);
  }
  return r;
}

Polynomial Polynomial::dehomogenize(std::size_t var) const {
  if (var >= nvars()) throw Error("variable index out of range");
  std::vector<std::string> nv;
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (i != var) nv.push_back(vars_[i]);
  Polynomial r(nv);
  for (const auto& [m, c] : terms_) {
    std::vector<int> e;
    for (std::size_t i = 0; i < m.exps.size(); ++i)
      if (i != var) e.push_back(m.exps[i]);
    r.add_term(Monomial(std::move(e)), c);
  }
  return r;
}

Polynomial Polynomial::top_form() const {
  int d = total_degree();
  Polynomial r(vars_);
  for (const auto& [m, c] : terms_)
    if (m.degree() == d) r.add_term(m, c);
  return r;
}

bool Polynomial::operator==(const Polynomial& o) const {
  return vars_ == o.vars_ && terms_ == o.terms_;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  // leading term first
  std::ostringstream out;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    double a = c;
    if (first) {
      if (a < 0) {
        out << "-";
        a = -a;
      }
    } else {
      out << (a < 0 ? " - " : " + ");
      a = std::abs(a);
    }
    first = false;
    bool is_const = m.degree() == 0;
    if (a != 1.0 || is_const) {
      out << format_double(a);
      if (!is_const) out << "*";
    }
    bool firstv = true;
    for (std::size_t i = 0; i < m.exps.size(); ++i) {
      if (m.exps[i] == 0) continue;
      if (!firstv) out << "*";
      firstv = false;
      out << vars_[i];
      if (m.exps[i] > 1) out << "^" << m.exps[i];
    }
  }
  return out.str();
}

namespace {

// Recursive-descent parser over a fixed variable list.
class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars)
      : text_(text), vars_(vars) {}

  Polynomial run() {
    Polynomial p = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    if (p.nvars() == 0) p = Polynomial(vars_) + p;  // defensive, should not happen
    return p;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool eat(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  Polynomial parse_sum() {
    skip_ws();
    bool neg = false;
    while (eat('+') || (peek('-') && (eat('-'), neg = !neg, true))) {
    }
    Polynomial acc = parse_product();
    if (neg) acc = -acc;
    for (;;) {
      skip_ws();
      if (eat('+')) {
        acc = acc + parse_product();
      } else if (eat('-')) {
        acc = acc - parse_product();
      } else {
        return acc;
      }
    }
  }

  Polynomial parse_product() {
    Polynomial acc = parse_factor();
    for (;;) {
      skip_ws();
      if (eat('*')) {
        acc = acc * parse_factor();
        continue;
      }
      // juxtaposition: a factor may follow without '*'
      if (pos_ < text_.size()) {
        char c = text_[pos_];
        if (c == '(' || std::isalpha(static_cast<unsigned char>(c)) ||
            std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
          acc = acc * parse_factor();
          continue;
        }
      }
      return acc;
    }
  }

  Polynomial parse_factor() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    Polynomial base = [&] {
      char c = text_[pos_];
      if (c == '(') {
        ++pos_;
        Polynomial inner = parse_sum();
        if (!eat(')')) throw ParseError("expected ')'", pos_);
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_variable();
      throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }();
    skip_ws();
    if (eat('^')) {
      int e = parse_int_exponent();
      base = base.pow(e);
    }
    return base;
  }

  Polynomial parse_number() {
    double num = parse_literal();
    skip_ws();
    // fraction a/b between numeric literals only
    if (pos_ < text_.size() && text_[pos_] == '/') {
      std::size_t save = pos_;
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() &&
          (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
        double den = parse_literal();
        if (den == 0.0) throw ParseError("division by zero", save);
        num /= den;
      } else {
        pos_ = save;
      }
    }
    return Polynomial::constant(vars_, num);
  }

  double parse_literal() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    // exponent suffix like 1e-3
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t epos = pos_ + 1;
      if (epos < text_.size() && (text_[epos] == '+' || text_[epos] == '-')) ++epos;
      if (epos < text_.size() && std::isdigit(static_cast<unsigned char>(text_[epos]))) {
        pos_ = epos;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
      throw ParseError("malformed numeric literal", start);
    return v;
  }

  Polynomial parse_variable() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end()) throw ParseError("unknown variable '" + name + "'", start);
    return Polynomial::variable(vars_, static_cast<std::size_t>(it - vars_.begin()));
  }

  int parse_int_exponent() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError("expected integer exponent", pos_);
    int v = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc()) throw ParseError("malformed exponent", start);
    return v;
  }

  const std::string& text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial Polynomial::parse(const std::string& text, const std::vector<std::string>& vars) {
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = i + 1; j < vars.size(); ++j)
      if (vars[i] == vars[j]) throw Error("duplicate variable name '" + vars[i] + "'");
  Parser p(text, vars);
  Polynomial r = p.run();
  if (r.vars() != vars) {
    // constants produced inside the parser already carry the full list
    Polynomial fixed(vars);
    for (const auto& [m, c] : r.terms()) fixed.set_coeff(m, c);
    return fixed;
  }
  return r;
}

bool SemialgebraicSet::contains(const std::vector<double>& x, double tol) const {
  for (const auto& p : inequalities)
    if (p.eval(x) < -tol) return false;
  for (const auto& q : equalities)
    if (std::abs(q.eval(x)) > tol) return false;
  return true;
}

}  // namespace conehull
