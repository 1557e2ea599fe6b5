#pragma once

#include "skewfatou/util.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace skewfatou {

enum class var_kind { z, w };

class function_expr;
// Expressions are immutable shared trees; copies are pointer copies and
// evaluation is safe from any number of threads.
using fn = std::shared_ptr<const function_expr>;

class function_expr {
public:
  enum class kind { constant, variable, add, mul, intpow, exponential, polynomial };

  kind node = kind::constant;
  cplx value{0.0, 0.0};          // constant
  var_kind var = var_kind::z;    // variable, polynomial
  std::vector<fn> kids;          // add/mul operands, intpow/exponential child
  int power = 0;                 // intpow exponent, >= 0
  std::vector<cplx> coeffs;      // polynomial, ascending degree
  // Polynomial nodes may carry an affine pre-map and evaluate by Horner in
  // u = (x - center)/scale. Plain poly(...) text parses to center 0, scale 1;
  // the fit engine emits coefficients in its rescaled variable.
  cplx center{0.0, 0.0};
  cplx scale{1.0, 0.0};

  bool uses_z = false;
  bool uses_w = false;
};

// Factories apply light constant folding (0/1 absorption, constant merging)
// so derivative trees stay small. No other rewriting happens.
fn constant(cplx c);
fn variable(var_kind v);
fn var_z();
fn var_w();
fn add(std::vector<fn> terms);
fn add(fn a, fn b);
fn sub(fn a, fn b);
fn mul(std::vector<fn> factors);
fn mul(fn a, fn b);
fn intpow(fn base, int n);
fn exponential(fn arg);
fn polynomial(std::vector<cplx> coeffs, var_kind v,
              cplx center = cplx(0.0), cplx scale = cplx(1.0));

cplx eval(const fn& e, cplx z, cplx w);
// Fiber-restricted evaluation; throws std::invalid_argument if e uses w.
cplx eval_z(const fn& e, cplx z);

struct log_modulus {
  double log_abs = 0.0;                // log|e(z,w)|, finite or +-inf
  std::optional<double> argument;      // radians, when structurally available
};

// log|e| without forming e when the structure permits (products, integer
// powers and exp contribute log-moduli directly; sums and polynomials fall
// back to direct evaluation). Throws std::range_error when a fallback or an
// exp argument overflows, since the result is then not representable.
double log_modulus_eval(const fn& e, cplx z, cplx w);
log_modulus log_modulus_eval_full(const fn& e, cplx z, cplx w);

fn derivative(const fn& e, var_kind v);

std::string to_string(const fn& e);

struct parse_error : std::runtime_error {
  parse_error(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " (at column " + std::to_string(position + 1) + ")"),
        position(position) {}
  std::size_t position;
};

// Grammar (documented in the CLI help):
//   expr   := term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' nonneg-int)?
//   atom   := 'z' | 'w' | number | 'i' | 'exp' '(' expr ')'
//           | 'poly' '(' const-expr (',' const-expr)* ')' | '(' expr ')' | '-' atom
// Numbers are decimal literals with optional exponent and optional trailing
// 'i'. poly(...) coefficients are constant subexpressions; the polynomial's
// variable is poly_var (z for f/h slots, w for g slots).
fn parse_expr(const std::string& text, var_kind poly_var);

} // namespace skewfatou
