#include "skewfatou/expr.hpp"

#include <cmath>
#include <numbers>

namespace skewfatou {

namespace {

std::shared_ptr<function_expr> make_node(function_expr::kind k) {
  auto n = std::make_shared<function_expr>();
  n->node = k;
  return n;
}

void fold_usage(function_expr& n) {
  for (const auto& kid : n.kids) {
    n.uses_z = n.uses_z || kid->uses_z;
    n.uses_w = n.uses_w || kid->uses_w;
  }
}

bool is_const(const fn& e, cplx c) {
  return e->node == function_expr::kind::constant && e->value == c;
}

} // namespace

fn constant(cplx c) {
  auto n = make_node(function_expr::kind::constant);
  n->value = c;
  return n;
}

fn variable(var_kind v) {
  auto n = make_node(function_expr::kind::variable);
  n->var = v;
  n->uses_z = v == var_kind::z;
  n->uses_w = v == var_kind::w;
  return n;
}

fn var_z() { return variable(var_kind::z); }
fn var_w() { return variable(var_kind::w); }

fn add(std::vector<fn> terms) {
  std::vector<fn> kept;
  cplx acc{0.0, 0.0};
  bool saw_const = false;
  for (auto& t : terms) {
    if (!t) throw std::invalid_argument("null subexpression");
    if (t->node == function_expr::kind::add) {
      for (const auto& kid : t->kids) kept.push_back(kid);
      continue;
    }
    if (t->node == function_expr::kind::constant) {
      acc += t->value;
      saw_const = true;
      continue;
    }
    kept.push_back(std::move(t));
  }
  if (saw_const && acc != cplx(0.0)) kept.push_back(constant(acc));
  if (kept.empty()) return constant(acc);
  if (kept.size() == 1) return kept[0];
  auto n = make_node(function_expr::kind::add);
  n->kids = std::move(kept);
  fold_usage(*n);
  return n;
}

fn add(fn a, fn b) { return add(std::vector<fn>{std::move(a), std::move(b)}); }
fn sub(fn a, fn b) { return add(std::move(a), mul(constant(-1.0), std::move(b))); }

fn mul(std::vector<fn> factors) {
  std::vector<fn> kept;
  cplx acc{1.0, 0.0};
  bool saw_const = false;
  for (auto& f : factors) {
    if (!f) throw std::invalid_argument("null subexpression");
    if (f->node == function_expr::kind::mul) {
      for (const auto& kid : f->kids) {
        if (kid->node == function_expr::kind::constant) {
          acc *= kid->value;
          saw_const = true;
        } else {
          kept.push_back(kid);
        }
      }
      continue;
    }
    if (f->node == function_expr::kind::constant) {
      acc *= f->value;
      saw_const = true;
      continue;
    }
    kept.push_back(std::move(f));
  }
  if (acc == cplx(0.0)) return constant(0.0);
  if (saw_const && acc != cplx(1.0)) kept.insert(kept.begin(), constant(acc));
  if (kept.empty()) return constant(acc);
  if (kept.size() == 1) return kept[0];
  auto n = make_node(function_expr::kind::mul);
  n->kids = std::move(kept);
  fold_usage(*n);
  return n;
}

fn mul(fn a, fn b) { return mul(std::vector<fn>{std::move(a), std::move(b)}); }

fn intpow(fn base, int n) {
  if (!base) throw std::invalid_argument("null subexpression");
  if (n < 0) throw std::invalid_argument("intpow exponent must be >= 0");
  if (n == 0) return constant(1.0);
  if (n == 1) return base;
  if (base->node == function_expr::kind::constant) {
    cplx acc{1.0, 0.0};
    cplx b = base->value;
    for (int e = n; e > 0; e >>= 1) {
      if (e & 1) acc *= b;
      b *= b;
    }
    return constant(acc);
  }
  auto node = make_node(function_expr::kind::intpow);
  node->kids = {std::move(base)};
  node->power = n;
  fold_usage(*node);
  return node;
}

fn exponential(fn arg) {
  if (!arg) throw std::invalid_argument("null subexpression");
  if (arg->node == function_expr::kind::constant) return constant(std::exp(arg->value));
  auto n = make_node(function_expr::kind::exponential);
  n->kids = {std::move(arg)};
  fold_usage(*n);
  return n;
}

fn polynomial(std::vector<cplx> coeffs, var_kind v, cplx center, cplx scale) {
  if (coeffs.empty()) return constant(0.0);
  if (scale == cplx(0.0)) throw std::invalid_argument("polynomial scale must be nonzero");
  while (coeffs.size() > 1 && coeffs.back() == cplx(0.0)) coeffs.pop_back();
  if (coeffs.size() == 1) return constant(coeffs[0]);
  auto n = make_node(function_expr::kind::polynomial);
  n->coeffs = std::move(coeffs);
  n->var = v;
  n->center = center;
  n->scale = scale;
  n->uses_z = v == var_kind::z;
  n->uses_w = v == var_kind::w;
  return n;
}

cplx eval(const fn& e, cplx z, cplx w) {
  if (!e) throw std::invalid_argument("null expression");
  switch (e->node) {
    case function_expr::kind::constant:
      return e->value;
    case function_expr::kind::variable:
      return e->var == var_kind::z ? z : w;
    case function_expr::kind::add: {
      cplx acc{0.0, 0.0};
      for (const auto& kid : e->kids) acc += eval(kid, z, w);
      return acc;
    }
    case function_expr::kind::mul: {
      cplx acc{1.0, 0.0};
      for (const auto& kid : e->kids) acc *= eval(kid, z, w);
      return acc;
    }
    case function_expr::kind::intpow: {
      cplx acc{1.0, 0.0};
      cplx b = eval(e->kids[0], z, w);
      for (int p = e->power; p > 0; p >>= 1) {
        if (p & 1) acc *= b;
        b *= b;
      }
      return acc;
    }
    case function_expr::kind::exponential:
      return std::exp(eval(e->kids[0], z, w));
    case function_expr::kind::polynomial: {
      cplx u = (e->var == var_kind::z ? z : w);
      u = (u - e->center) / e->scale;
      cplx acc = e->coeffs.back();
      for (std::size_t j = e->coeffs.size() - 1; j-- > 0;) acc = acc * u + e->coeffs[j];
      return acc;
    }
  }
  throw std::logic_error("unreachable expression kind");
}

cplx eval_z(const fn& e, cplx z) {
  if (!e) throw std::invalid_argument("null expression");
  if (e->uses_w)
    throw std::invalid_argument("expression uses w but only z was supplied");
  return eval(e, z, cplx(0.0));
}

namespace {

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a > std::numbers::pi) a -= two_pi;
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

log_modulus direct_log_modulus(const fn& e, cplx z, cplx w, const char* what) {
  cplx v = eval(e, z, w);
  if (!is_finite(v))
    throw std::range_error(std::string("log-modulus not representable: ") + what +
                           " overflows under direct evaluation");
  log_modulus lm;
  lm.log_abs = std::log(std::abs(v));
  lm.argument = std::arg(v);
  return lm;
}

} // namespace

log_modulus log_modulus_eval_full(const fn& e, cplx z, cplx w) {
  if (!e) throw std::invalid_argument("null expression");
  switch (e->node) {
    case function_expr::kind::constant: {
      log_modulus lm;
      lm.log_abs = std::log(std::abs(e->value));
      lm.argument = std::arg(e->value);
      return lm;
    }
    case function_expr::kind::variable: {
      cplx v = e->var == var_kind::z ? z : w;
      log_modulus lm;
      lm.log_abs = std::log(std::abs(v));
      lm.argument = std::arg(v);
      return lm;
    }
    case function_expr::kind::mul: {
      log_modulus lm;
      double arg_acc = 0.0;
      bool have_arg = true;
      lm.log_abs = 0.0;
      for (const auto& kid : e->kids) {
        log_modulus k = log_modulus_eval_full(kid, z, w);
        lm.log_abs += k.log_abs;
        if (k.argument)
          arg_acc += *k.argument;
        else
          have_arg = false;
      }
      if (have_arg) lm.argument = wrap_angle(arg_acc);
      return lm;
    }
    case function_expr::kind::intpow: {
      log_modulus k = log_modulus_eval_full(e->kids[0], z, w);
      log_modulus lm;
      lm.log_abs = static_cast<double>(e->power) * k.log_abs;
      if (k.argument) lm.argument = wrap_angle(static_cast<double>(e->power) * *k.argument);
      return lm;
    }
    case function_expr::kind::exponential: {
      // log|exp(u)| = Re u, never forming exp(Re u).
      cplx u = eval(e->kids[0], z, w);
      if (!is_finite(u))
        throw std::range_error(
            "log-modulus not representable: exp argument overflows under direct evaluation");
      log_modulus lm;
      lm.log_abs = u.real();
      lm.argument = wrap_angle(u.imag());
      return lm;
    }
    case function_expr::kind::add:
      return direct_log_modulus(e, z, w, "sum");
    case function_expr::kind::polynomial:
      return direct_log_modulus(e, z, w, "polynomial");
  }
  throw std::logic_error("unreachable expression kind");
}

double log_modulus_eval(const fn& e, cplx z, cplx w) {
  return log_modulus_eval_full(e, z, w).log_abs;
}

fn derivative(const fn& e, var_kind v) {
  if (!e) throw std::invalid_argument("null expression");
  switch (e->node) {
    case function_expr::kind::constant:
      return constant(0.0);
    case function_expr::kind::variable:
      return constant(e->var == v ? 1.0 : 0.0);
    case function_expr::kind::add: {
      std::vector<fn> terms;
      terms.reserve(e->kids.size());
      for (const auto& kid : e->kids) terms.push_back(derivative(kid, v));
      return add(std::move(terms));
    }
    case function_expr::kind::mul: {
      std::vector<fn> terms;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        std::vector<fn> factors;
        for (std::size_t j = 0; j < e->kids.size(); ++j)
          factors.push_back(i == j ? derivative(e->kids[j], v) : e->kids[j]);
        terms.push_back(mul(std::move(factors)));
      }
      return add(std::move(terms));
    }
    case function_expr::kind::intpow: {
      fn inner = derivative(e->kids[0], v);
      return mul({constant(static_cast<double>(e->power)),
                  intpow(e->kids[0], e->power - 1), std::move(inner)});
    }
    case function_expr::kind::exponential:
      return mul(exponential(e->kids[0]), derivative(e->kids[0], v));
    case function_expr::kind::polynomial: {
      if (e->var != v) return constant(0.0);
      // d/dx p((x-c)/s) = p'(u)/s, folded into the coefficients.
      std::vector<cplx> d;
      d.reserve(e->coeffs.size() - 1);
      for (std::size_t j = 1; j < e->coeffs.size(); ++j)
        d.push_back(e->coeffs[j] * cplx(static_cast<double>(j)) / e->scale);
      return polynomial(std::move(d), e->var, e->center, e->scale);
    }
  }
  throw std::logic_error("unreachable expression kind");
}

namespace {

std::string const_to_string(cplx c) {
  if (c.imag() == 0.0) return fmt_double(c.real());
  if (c.real() == 0.0) return fmt_double(c.imag()) + "i";
  std::string s = fmt_double(c.real());
  if (c.imag() > 0 || std::isnan(c.imag())) s += "+";
  return s + fmt_double(c.imag()) + "i";
}

// Constants like 1+2i or 3-4i must not appear bare as factors or power bases:
// "1+2i*z" would re-parse with the product binding tighter than the sum.
std::string factor_to_string(const fn& k) {
  std::string s = to_string(k);
  if (k->node == function_expr::kind::constant && s.find_first_of("+-", 1) != std::string::npos)
    return "(" + s + ")";
  return s;
}

} // namespace

std::string to_string(const fn& e) {
  if (!e) return "<null>";
  switch (e->node) {
    case function_expr::kind::constant:
      return const_to_string(e->value);
    case function_expr::kind::variable:
      return e->var == var_kind::z ? "z" : "w";
    case function_expr::kind::add: {
      std::string s;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) s += " + ";
        s += to_string(e->kids[i]);
      }
      return "(" + s + ")";
    }
    case function_expr::kind::mul: {
      std::string s;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) s += "*";
        s += factor_to_string(e->kids[i]);
      }
      return "(" + s + ")";
    }
    case function_expr::kind::intpow:
      return factor_to_string(e->kids[0]) + "^" + std::to_string(e->power);
    case function_expr::kind::exponential:
      return "exp(" + to_string(e->kids[0]) + ")";
    case function_expr::kind::polynomial: {
      std::string s = "poly";
      if (e->center != cplx(0.0) || e->scale != cplx(1.0))
        s += "[center=" + const_to_string(e->center) + ",scale=" + const_to_string(e->scale) +
             ",var=" + (e->var == var_kind::z ? "z" : "w") + "]";
      s += "(";
      for (std::size_t i = 0; i < e->coeffs.size(); ++i) {
        if (i) s += ",";
        s += const_to_string(e->coeffs[i]);
      }
      return s + ")";
    }
  }
  return "<invalid>";
}

} // namespace skewfatou
