#pragma once

// Concrete syntax:
//
//   term  := INT                        a deBruijn variable, 1-based
//          | (lam term)                 abstraction
//          | (term term term ...)       left-associated application
//          | {term: p, term: p, ...}    distribution
//   p     := decimal | a/b              fractions divide exactly at parse time
//
// `;` starts a line comment; whitespace separates tokens and nothing more.
// Printing is TermStore::text, which emits the canonical form this parser
// round-trips to the identical TermId.

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>

#include "slc/errors.hpp"
#include "slc/term.hpp"

namespace slc {

namespace detail {

class Parser {
 public:
  Parser(TermStore& store, std::string_view src) : store_(store), src_(src) {}

  TermId run() {
    TermId t = term();
    skip_ws();
    if (pos_ < src_.size()) {
      if (src_[pos_] == ')' || src_[pos_] == '}')
        fail(ParseErrorKind::UnbalancedDelimiter, pos_, "unmatched closing delimiter");
      fail(ParseErrorKind::UnexpectedToken, pos_, "trailing input after the term");
    }
    return t;
  }

 private:
  TermId term() {
    skip_ws();
    if (pos_ >= src_.size())
      fail(ParseErrorKind::UnexpectedToken, pos_, "expected a term");
    char c = src_[pos_];
    if (c == '(') return parens();
    if (c == '{') return dist();
    if (std::isdigit(static_cast<unsigned char>(c))) return variable();
    fail(ParseErrorKind::UnexpectedToken, pos_, "expected a term");
  }

  TermId variable() {
    std::size_t start = pos_;
    std::string_view tok = lex_number();
    for (char c : tok)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        fail(ParseErrorKind::UnexpectedToken, start, "a variable must be a plain integer");
    char* end = nullptr;
    unsigned long long v = std::strtoull(std::string(tok).c_str(), &end, 10);
    if (v == 0)
      fail(ParseErrorKind::ZeroIndex, start, "variable indices start at 1");
    if (v > 0xFFFFFFFEull)
      fail(ParseErrorKind::UnexpectedToken, start, "variable index too large");
    return store_.mk_var(static_cast<std::uint32_t>(v));
  }

  TermId parens() {
    std::size_t open = pos_;
    ++pos_;  // '('
    skip_ws();
    if (keyword_lam()) {
      // (lam e1 e2 ...) abstracts over the application (e1 e2 ...), matching
      // the application sugar below.
      TermId body = term();
      for (;;) {
        skip_ws();
        if (pos_ >= src_.size())
          fail(ParseErrorKind::UnbalancedDelimiter, open, "unclosed '('");
        if (src_[pos_] == ')') {
          ++pos_;
          return store_.mk_lam(body);
        }
        body = store_.mk_app(body, term());
      }
    }
    TermId acc = term();
    std::size_t items = 1;
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size())
        fail(ParseErrorKind::UnbalancedDelimiter, open, "unclosed '('");
      if (src_[pos_] == ')') {
        ++pos_;
        if (items < 2)
          fail(ParseErrorKind::UnexpectedToken, open, "an application needs an operand");
        return acc;
      }
      acc = store_.mk_app(acc, term());
      ++items;
    }
  }

  TermId dist() {
    std::size_t open = pos_;
    ++pos_;  // '{'
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '}')
      fail(ParseErrorKind::EmptyDistribution, open, "a distribution needs at least one entry");
    std::vector<DistEntry> entries;
    for (;;) {
      TermId e = term();
      skip_ws();
      if (pos_ >= src_.size())
        fail(ParseErrorKind::UnbalancedDelimiter, open, "unclosed '{'");
      if (src_[pos_] != ':')
        fail(ParseErrorKind::UnexpectedToken, pos_, "expected ':' after a distribution entry");
      ++pos_;
      entries.push_back({e, probability()});
      skip_ws();
      if (pos_ >= src_.size())
        fail(ParseErrorKind::UnbalancedDelimiter, open, "unclosed '{'");
      if (src_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (src_[pos_] == '}') {
        ++pos_;
        break;
      }
      fail(ParseErrorKind::UnexpectedToken, pos_, "expected ',' or '}' in a distribution");
    }
    try {
      return store_.mk_dist(std::move(entries));
    } catch (const Error& e) {
      // Construction rejected the collected probabilities (bad sum, or a
      // singleton whose mass is not 1); report it at the literal.
      fail(ParseErrorKind::BadProbability, open, e.what());
    }
  }

  double probability() {
    skip_ws();
    std::size_t start = pos_;
    double p = number_token("expected a probability");
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '/') {
      ++pos_;
      skip_ws();
      double denom = number_token("expected a fraction denominator");
      if (denom == 0.0)
        fail(ParseErrorKind::BadProbability, start, "fraction denominator is zero");
      p /= denom;
    }
    if (!(p > 0.0) || p > 1.0)
      fail(ParseErrorKind::BadProbability, start, "probability must lie in (0, 1]");
    return p;
  }

  double number_token(const char* what) {
    std::size_t start = pos_;
    std::string tok(lex_number());
    if (tok.empty()) fail(ParseErrorKind::UnexpectedToken, start, what);
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
      fail(ParseErrorKind::BadProbability, start, "malformed number");
    return v;
  }

  std::string_view lex_number() {
    std::size_t start = pos_;
    // A leading sign is part of the token, so that "-0.3" is classified as
    // an out-of-range probability rather than an unexpected token.
    if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '.') {
        ++pos_;
        continue;
      }
      // Exponent signs belong to the token: 1e-09 is one number.
      if ((c == '+' || c == '-') && pos_ > start) {
        char prev = src_[pos_ - 1];
        if (prev == 'e' || prev == 'E') {
          ++pos_;
          continue;
        }
      }
      break;
    }
    return src_.substr(start, pos_ - start);
  }

  bool keyword_lam() {
    if (src_.compare(pos_, 3, "lam") != 0) return false;
    if (pos_ + 3 < src_.size()) {
      char c = src_[pos_ + 3];
      if (std::isalnum(static_cast<unsigned char>(c))) return false;
    }
    pos_ += 3;
    return true;
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(ParseErrorKind kind, std::size_t start, const std::string& msg) {
    throw ParseError(kind, SourceSpan{start, pos_ > start ? pos_ : start + 1}, msg);
  }

  TermStore& store_;
  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline TermId parse(TermStore& store, std::string_view text) {
  return detail::Parser(store, text).run();
}

inline std::string print(const TermStore& store, TermId t) { return store.text(t); }

}  // namespace slc
