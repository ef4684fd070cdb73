#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace conehull {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t pos)
      : Error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  explicit ParseError(const std::string& msg) : Error(msg), position(0) {}
  std::size_t position;
};

// Exponent vector. Variable 0 is the most significant one; when a set is
// homogenized the homogenizing variable is inserted at slot 0.
struct Monomial {
  std::vector<int> exps;

  Monomial() = default;
  explicit Monomial(std::vector<int> e) : exps(std::move(e)) {}
  static Monomial one(std::size_t nvars) { return Monomial(std::vector<int>(nvars, 0)); }
  static Monomial var(std::size_t nvars, std::size_t i, int pow = 1);

  int degree() const;
  std::size_t nvars() const { return exps.size(); }
  Monomial operator*(const Monomial& o) const;
  bool operator==(const Monomial& o) const { return exps == o.exps; }
  double eval(const std::vector<double>& x) const;
};

// Graded lexicographic: lower total degree first, within a degree higher
// power of earlier variables first (1, x0, x1, x2, x0^2, x0*x1, ...).
bool grlex_less(const Monomial& a, const Monomial& b);

struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return grlex_less(a, b); }
};

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<std::string> vars) : vars_(std::move(vars)) {}

  // Grammar: sum of terms, a term is [coeff][*][var[^int]]*, coefficients may
  // be decimals or integer fractions a/b, parentheses are expanded.
  static Polynomial parse(const std::string& text, const std::vector<std::string>& vars);

  static Polynomial constant(std::vector<std::string> vars, double c);
  static Polynomial variable(std::vector<std::string> vars, std::size_t i);

  const std::vector<std::string>& vars() const { return vars_; }
  std::size_t nvars() const { return vars_.size(); }
  const std::map<Monomial, double, GrlexLess>& terms() const { return terms_; }

  bool is_zero() const { return terms_.empty(); }
  // The zero polynomial has no degree.
  int total_degree() const;
  bool is_even_degree() const { return total_degree() % 2 == 0; }
  double coeff(const Monomial& m) const;
  void set_coeff(const Monomial& m, double c);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator-() const;
  Polynomial scaled(double s) const;
  Polynomial pow(int e) const;

  double eval(const std::vector<double>& x) const;
  Polynomial derivative(std::size_t var) const;

  // x0^d * p(x/x0) with the new variable placed first; d = total degree.
  Polynomial homogenize(const std::string& hom_name) const;
  // Substitute 1 for variable `var` and drop it from the variable list.
  Polynomial dehomogenize(std::size_t var) const;
  // Terms of maximal total degree.
  Polynomial top_form() const;

  std::string to_string() const;

  bool operator==(const Polynomial& o) const;

 private:
  void add_term(const Monomial& m, double c);
  static constexpr double kDropTol = 0.0;  // exact zero coefficients are dropped

  std::vector<std::string> vars_;
  std::map<Monomial, double, GrlexLess> terms_;
};

// Basic closed semialgebraic set {x : p >= 0 for all inequalities,
// q = 0 for all equalities}.
struct SemialgebraicSet {
  std::vector<std::string> vars;
  std::vector<Polynomial> inequalities;
  std::vector<Polynomial> equalities;

  std::size_t nvars() const { return vars.size(); }
  bool contains(const std::vector<double>& x, double tol) const;
};

std::string format_double(double v);  // shortest round-trip form

}  // namespace conehull
