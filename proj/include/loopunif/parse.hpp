#pragma once

#include <cctype>
#include <cstdint>
#include <istream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loopunif/term.hpp"

namespace loopunif {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

class TermParser {
 public:
  explicit TermParser(const std::string& src) : src_(src) {}

  Term parse() {
    Term t = term();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input");
    return t;
  }

 private:
  const std::string& src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at offset " + std::to_string(pos_) + " in '" +
                     src_ + "'");
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c));
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string ident() {
    skip_ws();
    if (pos_ >= src_.size() || !ident_start(src_[pos_]))
      fail("expected identifier");
    std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    return src_.substr(start, pos_ - start);
  }

  static bool all_digits(const std::string& s, std::size_t from) {
    if (from >= s.size()) return false;
    for (std::size_t i = from; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
  }

  std::uint32_t parse_index(const std::string& digits) {
    unsigned long v = 0;
    try {
      v = std::stoul(digits);
    } catch (const std::out_of_range&) {
      fail("variable index out of range");
    }
    if (v > std::numeric_limits<std::uint32_t>::max())
      fail("variable index out of range");
    return static_cast<std::uint32_t>(v);
  }

  Term term() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    if (src_[pos_] == '#') {
      ++pos_;
      if (pos_ >= src_.size() || !ident_start(src_[pos_]))
        fail("expected recursion variable name after '#'");
      return rec_var(ident());
    }
    std::string id = ident();
    if (id.size() >= 2 && id[1] == '_' && all_digits(id, 2)) {
      if (id[0] == 'x') return xvar(parse_index(id.substr(2)));
      if (id[0] == 'y') return yvar(parse_index(id.substr(2)));
      fail("'" + id + "' is not a variable; classes are x and y");
    }
    if (!eat('(')) return constant(std::move(id));
    std::vector<Term> args;
    skip_ws();
    if (!eat(')')) {
      args.push_back(term());
      while (eat(',')) args.push_back(term());
      if (!eat(')')) fail("expected ')' or ','");
    }
    return app(std::move(id), std::move(args));
  }
};

inline std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

inline Term parse_term(const std::string& src) {
  return detail::TermParser(src).parse();
}

struct ProblemInput {
  Term extendable;
  Term fixed;
};

// Input format: two lines, `extendable: <term>` then `fixed: <term>`.
// Blank lines are ignored.
inline ProblemInput parse_problem(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = detail::trimmed(line);
    if (!t.empty()) lines.push_back(t);
  }
  if (lines.size() != 2)
    throw ParseError("expected exactly two non-blank lines "
                     "('extendable: <term>' and 'fixed: <term>'), got " +
                     std::to_string(lines.size()));
  auto value_of = [](const std::string& l, const std::string& key) {
    if (l.rfind(key, 0) != 0)
      throw ParseError("expected line starting with '" + key + "', got '" + l +
                       "'");
    return detail::trimmed(l.substr(key.size()));
  };
  ProblemInput p;
  p.extendable = parse_term(value_of(lines[0], "extendable:"));
  p.fixed = parse_term(value_of(lines[1], "fixed:"));
  return p;
}

}  // namespace loopunif
