#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sosc/form.hpp"

namespace sosc {

/// Syntax error in form text; position() is a 0-based character offset.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

inline std::string variable_name(int n_vars, int i) {
  static constexpr const char* kShort[] = {"x", "y", "z"};
  if (n_vars <= 3) return kShort[i];
  return "x" + std::to_string(i + 1);
}

/// Terms in graded-lex order, e.g. "x^4*y^2 + x^2*y^4 + z^6 - 3*x^2*y^2*z^2".
inline std::string to_string(const Form& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    const bool negative = c < 0;
    Rational mag = negative ? Rational(-c) : c;
    if (first)
      out += negative ? "-" : "";
    else
      out += negative ? " - " : " + ";
    first = false;
    std::string mono;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += variable_name(p.n_vars(), static_cast<int>(i));
      if (e[i] > 1) mono += "^" + std::to_string(e[i]);
    }
    if (mono.empty())
      out += mag.get_str();
    else if (mag == 1)
      out += mono;
    else
      out += mag.get_str() + "*" + mono;
  }
  return out;
}

namespace detail {

// expr   := ['+'|'-'] term (('+'|'-') term)*
// term   := power (['*'] power)*
// power  := atom ['^' integer]
// atom   := number ['/' number] | variable | '(' expr ')'
class FormParser {
 public:
  FormParser(std::string_view text, int n_vars) : text_(text), n_(n_vars) {}

  Form parse() {
    skip_ws();
    if (at_end()) throw ParseError("empty form", pos_);
    Form f = expr();
    skip_ws();
    if (!at_end()) throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    return f;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Form combine(const Form& a, const Form& b, bool subtract_b, std::size_t where) {
    try {
      return subtract_b ? subtract(a, b) : add(a, b);
    } catch (const std::invalid_argument&) {
      throw ParseError("non-homogeneous input: terms of different degree", where);
    }
  }

  Form expr() {
    skip_ws();
    bool neg = false;
    if (peek() == '+' || peek() == '-') {
      neg = peek() == '-';
      ++pos_;
    }
    Form acc = term();
    if (neg) acc = negate(acc);
    for (;;) {
      skip_ws();
      char c = peek();
      if (c != '+' && c != '-') break;
      std::size_t where = pos_++;
      Form t = term();
      acc = combine(acc, t, c == '-', where);
    }
    return acc;
  }

  bool starts_atom() const {
    char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) || std::isalpha(static_cast<unsigned char>(c)) || c == '(';
  }

  Form term() {
    Form acc = power();
    for (;;) {
      skip_ws();
      if (peek() == '*') {
        ++pos_;
        acc = mul(acc, power());
      } else if (starts_atom()) {
        acc = mul(acc, power());
      } else {
        break;
      }
    }
    return acc;
  }

  Form power() {
    Form base = atom();
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      skip_ws();
      std::size_t start = pos_;
      std::string digits = read_digits();
      if (digits.empty()) throw ParseError("expected integer exponent", start);
      if (digits.size() > 4) throw ParseError("exponent too large", start);
      base = pow(base, static_cast<unsigned>(std::stoul(digits)));
    }
    return base;
  }

  std::string read_digits() {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Form atom() {
    skip_ws();
    std::size_t start = pos_;
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num = read_digits();
      Rational value{Integer(num)};
      skip_ws();
      if (peek() == '/') {
        ++pos_;
        skip_ws();
        std::size_t dstart = pos_;
        std::string den = read_digits();
        if (den.empty()) throw ParseError("expected denominator", dstart);
        if (Integer(den) == 0) throw ParseError("zero denominator", dstart);
        value = make_rational(Integer(num), Integer(den));
      }
      return Form::constant(n_, value);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (!at_end() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      return Form::variable(n_, variable_index(name, start));
    }
    if (c == '(') {
      ++pos_;
      Form inner = expr();
      skip_ws();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (at_end()) throw ParseError("unexpected end of input", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  int variable_index(const std::string& name, std::size_t where) const {
    if (n_ <= 3) {
      static constexpr const char* kShort[] = {"x", "y", "z"};
      for (int i = 0; i < n_; ++i)
        if (name == kShort[i]) return i;
    }
    if (name.size() > 1 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t k = 1; k < name.size(); ++k) digits = digits && std::isdigit(static_cast<unsigned char>(name[k]));
      if (digits && name.size() < 6) {
        int idx = std::stoi(name.substr(1));
        if (idx >= 1 && idx <= n_) return idx - 1;
      }
    }
    throw ParseError("unknown variable '" + name + "'", where);
  }

  std::string_view text_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a form in variables x1..xn (x, y, z when n <= 3). Parentheses and
/// integer powers of subexpressions are accepted.
inline Form parse_form(std::string_view text, int n_vars) {
  if (n_vars < 1) throw std::invalid_argument("a form needs at least one variable");
  return detail::FormParser(text, n_vars).parse();
}

/// Number of variables a form text refers to: the largest index among
/// x1..xn, otherwise 3, 2 or 1 by whether z, y or only x occurs.
inline int infer_n_vars(std::string_view text) {
  int best = 0;
  bool has_y = false, has_z = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool word_start = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
    if (!word_start) continue;
    if (c == 'x' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      std::size_t j = i + 1;
      int v = 0;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) v = v * 10 + (text[j++] - '0');
      best = std::max(best, v);
    } else if (c == 'y') {
      has_y = true;
    } else if (c == 'z') {
      has_z = true;
    }
  }
  if (best > 0) return best;
  return has_z ? 3 : (has_y ? 2 : 1);
}

}  // namespace sosc
