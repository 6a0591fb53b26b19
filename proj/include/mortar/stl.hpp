#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "mortar/signal.hpp"

namespace mortar {

enum class Comparator { LessEq, GreaterEq, Less, Greater };

/// Closed time window [lo, hi] in seconds, 0 <= lo <= hi.
struct TimeWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct StlNode;
using StlNodePtr = std::shared_ptr<const StlNode>;

struct StlNode {
  enum class Kind { Predicate, Not, And, Or, Globally, Eventually };

  Kind kind{};

  // Predicate payload: <channel> <cmp> <threshold>
  std::string channel;
  Comparator cmp{};
  double threshold = 0.0;

  // Temporal window; nullopt means unbounded (rest of the trace).
  std::optional<TimeWindow> window;

  // Unary operators use `left` only.
  StlNodePtr left, right;
};

struct StlFormula {
  StlNodePtr root;
  std::string text;  ///< source the formula was parsed from, if any
};

class StlParseError : public std::runtime_error {
 public:
  StlParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class StlEvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace stl_detail {

struct Token {
  enum class Type {
    End,
    Ident,
    Number,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    AndAnd,
    OrOr,
    Bang,
    Le,
    Ge,
    Lt,
    Gt
  };
  Type type = Type::End;
  std::string text;
  double value = 0.0;
  std::size_t offset = 0;
};

inline const char* token_name(Token::Type t) {
  switch (t) {
    case Token::Type::End: return "end of input";
    case Token::Type::Ident: return "identifier";
    case Token::Type::Number: return "number";
    case Token::Type::LParen: return "'('";
    case Token::Type::RParen: return "')'";
    case Token::Type::LBracket: return "'['";
    case Token::Type::RBracket: return "']'";
    case Token::Type::Comma: return "','";
    case Token::Type::AndAnd: return "'&&'";
    case Token::Type::OrOr: return "'||'";
    case Token::Type::Bang: return "'!'";
    case Token::Type::Le: return "'<='";
    case Token::Type::Ge: return "'>='";
    case Token::Type::Lt: return "'<'";
    case Token::Type::Gt: return "'>'";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { next(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    next();
    return t;
  }

 private:
  void next() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.type = Token::Type::End;
      return;
    }
    const char c = src_[pos_];
    switch (c) {
      case '(': tok_.type = Token::Type::LParen; ++pos_; return;
      case ')': tok_.type = Token::Type::RParen; ++pos_; return;
      case '[': tok_.type = Token::Type::LBracket; ++pos_; return;
      case ']': tok_.type = Token::Type::RBracket; ++pos_; return;
      case ',': tok_.type = Token::Type::Comma; ++pos_; return;
      case '!': tok_.type = Token::Type::Bang; ++pos_; return;
      case '&':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '&') {
          tok_.type = Token::Type::AndAnd;
          pos_ += 2;
          return;
        }
        throw StlParseError("expected '&&'", pos_);
      case '|':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '|') {
          tok_.type = Token::Type::OrOr;
          pos_ += 2;
          return;
        }
        throw StlParseError("expected '||'", pos_);
      case '<':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
          tok_.type = Token::Type::Le;
          pos_ += 2;
        } else {
          tok_.type = Token::Type::Lt;
          ++pos_;
        }
        return;
      case '>':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
          tok_.type = Token::Type::Ge;
          pos_ += 2;
        } else {
          tok_.type = Token::Type::Gt;
          ++pos_;
        }
        return;
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) ||
              src_[end] == '_'))
        ++end;
      tok_.type = Token::Type::Ident;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
        c == '+') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin)
        throw StlParseError(std::string("unexpected character '") + c + "'",
                            pos_);
      tok_.type = Token::Type::Number;
      tok_.value = v;
      tok_.text = src_.substr(pos_, static_cast<std::size_t>(end - begin));
      pos_ += static_cast<std::size_t>(end - begin);
      return;
    }
    throw StlParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  Token tok_;
};

// Grammar, loosest binding first:
//   formula   := conjunct ("||" conjunct)*
//   conjunct  := term ("&&" term)*
//   term      := "!" term
//              | ("G" | "F") window? "(" formula ")"
//              | "(" formula ")"
//              | predicate
//   window    := "[" number "," number "]"
//   predicate := ident ("<=" | ">=" | "<" | ">") number
// "G"/"F" are treated as operators only when followed by "(" or "[",
// otherwise they are ordinary channel names.
class Parser {
 public:
  explicit Lexer& lexer() { return lex_; }
  explicit Parser(const std::string& src) : lex_(src) {}

  StlNodePtr parse() {
    StlNodePtr f = parse_or();
    if (lex_.peek().type != Token::Type::End)
      throw StlParseError(std::string("expected end of input, found ") +
                              token_name(lex_.peek().type),
                          lex_.peek().offset);
    return f;
  }

 private:
  StlNodePtr parse_or() {
    StlNodePtr node = parse_and();
    while (lex_.peek().type == Token::Type::OrOr) {
      lex_.take();
      auto n = std::make_shared<StlNode>();
      n->kind = StlNode::Kind::Or;
      n->left = std::move(node);
      n->right = parse_and();
      node = std::move(n);
    }
    return node;
  }

  StlNodePtr parse_and() {
    StlNodePtr node = parse_term();
    while (lex_.peek().type == Token::Type::AndAnd) {
      lex_.take();
      auto n = std::make_shared<StlNode>();
      n->kind = StlNode::Kind::And;
      n->left = std::move(node);
      n->right = parse_term();
      node = std::move(n);
    }
    return node;
  }

  StlNodePtr parse_term() {
    const Token& t = lex_.peek();
    if (t.type == Token::Type::Bang) {
      lex_.take();
      auto n = std::make_shared<StlNode>();
      n->kind = StlNode::Kind::Not;
      n->left = parse_term();
      return n;
    }
    if (t.type == Token::Type::LParen) {
      lex_.take();
      StlNodePtr inner = parse_or();
      expect(Token::Type::RParen);
      return inner;
    }
    if (t.type == Token::Type::Ident) {
      if ((t.text == "G" || t.text == "F")) {
        // lookahead decides operator vs channel name
        Token op = lex_.take();
        const Token& after = lex_.peek();
        if (after.type == Token::Type::LBracket ||
            after.type == Token::Type::LParen) {
          auto n = std::make_shared<StlNode>();
          n->kind = op.text == "G" ? StlNode::Kind::Globally
                                   : StlNode::Kind::Eventually;
          if (after.type == Token::Type::LBracket) n->window = parse_window();
          expect(Token::Type::LParen);
          n->left = parse_or();
          expect(Token::Type::RParen);
          return n;
        }
        return parse_predicate_tail(op);
      }
      Token ident = lex_.take();
      return parse_predicate_tail(ident);
    }
    throw StlParseError(std::string("expected formula, found ") +
                            token_name(t.type),
                        t.offset);
  }

  TimeWindow parse_window() {
    const std::size_t open = lex_.peek().offset;
    expect(Token::Type::LBracket);
    const Token lo = expect(Token::Type::Number);
    expect(Token::Type::Comma);
    const Token hi = expect(Token::Type::Number);
    expect(Token::Type::RBracket);
    if (lo.value < 0.0)
      throw StlParseError("window start must be >= 0", open);
    if (lo.value > hi.value)
      throw StlParseError("window start exceeds window end", open);
    return TimeWindow{lo.value, hi.value};
  }

  StlNodePtr parse_predicate_tail(const Token& ident) {
    const Token& c = lex_.peek();
    Comparator cmp;
    switch (c.type) {
      case Token::Type::Le: cmp = Comparator::LessEq; break;
      case Token::Type::Ge: cmp = Comparator::GreaterEq; break;
      case Token::Type::Lt: cmp = Comparator::Less; break;
      case Token::Type::Gt: cmp = Comparator::Greater; break;
      default:
        throw StlParseError(
            std::string("expected comparator (<=, >=, <, >), found ") +
                token_name(c.type),
            c.offset);
    }
    lex_.take();
    const Token num = expect(Token::Type::Number);
    auto n = std::make_shared<StlNode>();
    n->kind = StlNode::Kind::Predicate;
    n->channel = ident.text;
    n->cmp = cmp;
    n->threshold = num.value;
    return n;
  }

  Token expect(Token::Type type) {
    const Token& t = lex_.peek();
    if (t.type != type)
      throw StlParseError(std::string("expected ") + token_name(type) +
                              ", found " + token_name(t.type),
                          t.offset);
    return lex_.take();
  }

  Lexer lex_;
};

/// Nearest-integer index for a window endpoint given in seconds.
inline long long window_index(double seconds, double dt) {
  return std::llround(seconds / dt);
}

inline double eval(const StlNode& n, const SignalTrace& tr, std::size_t t,
                   std::size_t len) {
  switch (n.kind) {
    case StlNode::Kind::Predicate: {
      const auto it = tr.channels.find(n.channel);
      if (it == tr.channels.end())
        throw StlEvalError("unknown channel: " + n.channel);
      const double x = it->second[t];
      // strict comparators share the non-strict margin
      if (n.cmp == Comparator::LessEq || n.cmp == Comparator::Less)
        return n.threshold - x;
      return x - n.threshold;
    }
    case StlNode::Kind::Not:
      return -eval(*n.left, tr, t, len);
    case StlNode::Kind::And:
      return std::min(eval(*n.left, tr, t, len), eval(*n.right, tr, t, len));
    case StlNode::Kind::Or:
      return std::max(eval(*n.left, tr, t, len), eval(*n.right, tr, t, len));
    case StlNode::Kind::Globally:
    case StlNode::Kind::Eventually: {
      std::size_t k0 = t;
      std::size_t k1 = len - 1;
      if (n.window) {
        const long long lo =
            static_cast<long long>(t) + window_index(n.window->lo, tr.dt);
        const long long hi =
            static_cast<long long>(t) + window_index(n.window->hi, tr.dt);
        if (lo > static_cast<long long>(len) - 1)
          throw StlEvalError("temporal window has no samples inside the trace");
        k0 = static_cast<std::size_t>(lo);
        k1 = static_cast<std::size_t>(
            std::min<long long>(hi, static_cast<long long>(len) - 1));
      }
      double acc = eval(*n.left, tr, k0, len);
      for (std::size_t k = k0 + 1; k <= k1; ++k) {
        const double v = eval(*n.left, tr, k, len);
        acc = n.kind == StlNode::Kind::Globally ? std::min(acc, v)
                                                : std::max(acc, v);
      }
      return acc;
    }
  }
  throw StlEvalError("malformed formula node");
}

}  // namespace stl_detail

inline StlFormula parse_stl(const std::string& text) {
  if (text.empty()) throw StlParseError("empty specification", 0);
  stl_detail::Parser parser(text);
  return StlFormula{parser.parse(), text};
}

/// Quantitative robustness of the trace against the formula, evaluated at
/// time 0. Predicates score the margin to their threshold, boolean operators
/// fold with min/max, temporal operators fold their child over the window
/// [t+a, t+b] mapped to sample indices by nearest-integer rounding and
/// clamped to the trace.
inline double robustness(const SignalTrace& trace, const StlFormula& formula) {
  trace.validate();
  if (!formula.root) throw std::invalid_argument("robustness: empty formula");
  return stl_detail::eval(*formula.root, trace, 0, trace.length());
}

/// Zero counts as satisfied, matching the safe-side classification rule.
inline bool satisfied(double robustness_score) {
  return robustness_score >= 0.0;
}

}  // namespace mortar
