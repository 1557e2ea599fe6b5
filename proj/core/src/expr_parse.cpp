#include "skewfatou/expr.hpp"

#include <cctype>
#include <charconv>

namespace skewfatou {

namespace {

class parser {
public:
  parser(const std::string& text, var_kind poly_var) : text_(text), poly_var_(poly_var) {}

  fn run() {
    fn e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

private:
  const std::string& text_;
  var_kind poly_var_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw parse_error(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  fn parse_sum() {
    fn acc = parse_term();
    for (;;) {
      if (eat('+'))
        acc = add(acc, parse_term());
      else if (eat('-'))
        acc = sub(acc, parse_term());
      else
        return acc;
    }
  }

  fn parse_term() {
    fn acc = parse_factor();
    while (eat('*')) acc = mul(acc, parse_factor());
    return acc;
  }

  fn parse_factor() {
    fn base = parse_atom();
    if (eat('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == start) fail("expected a nonnegative integer exponent after '^'");
      int n = 0;
      auto res = std::from_chars(text_.data() + start, text_.data() + pos_, n);
      if (res.ec != std::errc()) fail("exponent out of range");
      return intpow(base, n);
    }
    return base;
  }

  fn parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      return mul(constant(-1.0), parse_atom());
    }
    if (c == '(') {
      ++pos_;
      fn e = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isalnum(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      std::string word = text_.substr(start, pos_ - start);
      if (word == "z") return var_z();
      if (word == "w") return var_w();
      if (word == "i") return constant(cplx(0.0, 1.0));
      if (word == "exp") {
        if (!eat('(')) fail("expected '(' after exp");
        fn arg = parse_sum();
        if (!eat(')')) fail("expected ')'");
        return exponential(arg);
      }
      if (word == "poly") {
        if (!eat('(')) fail("expected '(' after poly");
        std::vector<cplx> coeffs;
        do {
          coeffs.push_back(parse_const_expr());
        } while (eat(','));
        if (!eat(')')) fail("expected ')'");
        return polynomial(std::move(coeffs), poly_var_);
      }
      pos_ = start;
      fail("unknown identifier '" + word + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  // poly(...) coefficients: any constant subexpression, e.g. 1+2i or -0.5.
  cplx parse_const_expr() {
    skip_ws();
    std::size_t at = pos_;
    fn e = parse_sum();
    if (e->node != function_expr::kind::constant) {
      pos_ = at;
      fail("poly coefficient must be a constant");
    }
    return e->value;
  }

  fn parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        ++pos_;
      } else if ((c == 'e' || c == 'E') && pos_ + 1 < text_.size() &&
                 (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                  ((text_[pos_ + 1] == '+' || text_[pos_ + 1] == '-') && pos_ + 2 < text_.size() &&
                   std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))))) {
        pos_ += 2; // consume 'e' and sign-or-digit; digits follow
      } else {
        break;
      }
    }
    double v = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < text_.size() && text_[pos_] == 'i') {
      ++pos_;
      return constant(cplx(0.0, v));
    }
    return constant(cplx(v, 0.0));
  }
};

} // namespace

fn parse_expr(const std::string& text, var_kind poly_var) {
  return parser(text, poly_var).run();
}

} // namespace skewfatou
