// Lexer for .swl sources. Produces the whole token stream up front; plain
// (* ... *) comments are skipped (nesting supported), (*@ ... *) annotation
// delimiters are kept as tokens.
#pragma once

#include <string>
#include <vector>

#include "bhl/ast.hpp"
#include "bhl/rational.hpp"

namespace bhl {

enum class Tok {
  Ident, Number,            // Number carries an exact rational (1, 0.05, 3/100)
  LParen, RParen, LBracket, RBracket,
  Comma, Semi, Colon, Equal, Bang,
  Sat,                      // |=
  AndOp, OrOp, AmpAmp,      // /\  \/  &&
  PlusDot,                  // +.
  CmpLt, CmpGt, CmpNeq, CmpEq, CmpLe, CmpGe,  // <' >' $!= =' <=' >='
  AnnotStart, AnnotEnd,     // (*@  *)
  Eof
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  Rat value{0};
  bool is_integer = false;
  Span span;
};

class Lexer {
 public:
  explicit Lexer(std::string src) : src_(std::move(src)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (eof()) break;
      Span start = here();
      if (try_comment(out, start)) continue;
      char c = peek();
      if (is_ident_start(c)) {
        std::string id;
        while (!eof() && is_ident_char(peek())) id += get();
        out.push_back(tok(Tok::Ident, start, id));
        continue;
      }
      if (c >= '0' && c <= '9') {
        out.push_back(number(start));
        continue;
      }
      symbol(out, start);
    }
    out.push_back(tok(Tok::Eof, here(), ""));
    return out;
  }

 private:
  std::string src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  bool eof() const { return pos_ >= src_.size(); }
  char peek(std::size_t k = 0) const {
    return pos_ + k < src_.size() ? src_[pos_ + k] : '\0';
  }
  char get() {
    char c = src_[pos_++];
    if (c == '\n') { ++line_; col_ = 1; } else { ++col_; }
    return c;
  }
  Span here() const { return {line_, col_, line_, col_}; }
  Token tok(Tok k, Span start, std::string text) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.span = start;
    t.span.end_line = line_;
    t.span.end_col = col_;
    return t;
  }
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9') || c == '\'';
  }
  void skip_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n'))
      get();
  }

  [[noreturn]] void fail(Span sp, const std::string& msg) {
    throw FrontendError({sp, "error", "E001", msg});
  }

  // Returns true if a plain comment was consumed; pushes AnnotStart for (*@.
  bool try_comment(std::vector<Token>& out, Span start) {
    if (peek() != '(' || peek(1) != '*') return false;
    if (peek(2) == '@') {
      get(); get(); get();
      out.push_back(tok(Tok::AnnotStart, start, "(*@"));
      return true;
    }
    get(); get();
    int depth = 1;
    while (depth > 0) {
      if (eof()) fail(start, "unterminated comment");
      if (peek() == '(' && peek(1) == '*') { get(); get(); ++depth; }
      else if (peek() == '*' && peek(1) == ')') { get(); get(); --depth; }
      else get();
    }
    return true;
  }

  Token number(Span start) {
    std::string text;
    while (!eof() && peek() >= '0' && peek() <= '9') text += get();
    bool integer = true;
    if (peek() == '.' && peek(1) >= '0' && peek(1) <= '9') {
      integer = false;
      text += get();
      while (!eof() && peek() >= '0' && peek() <= '9') text += get();
    } else if (peek() == '/' && peek(1) >= '0' && peek(1) <= '9') {
      integer = false;
      text += get();
      while (!eof() && peek() >= '0' && peek() <= '9') text += get();
    }
    Token t = tok(Tok::Number, start, text);
    t.value = parse_rat(text);
    t.is_integer = integer;
    return t;
  }

  void symbol(std::vector<Token>& out, Span start) {
    char c = get();
    auto push = [&](Tok k, std::string text) { out.push_back(tok(k, start, std::move(text))); };
    switch (c) {
      case '(': push(Tok::LParen, "("); return;
      case ')': push(Tok::RParen, ")"); return;
      case '[': push(Tok::LBracket, "["); return;
      case ']': push(Tok::RBracket, "]"); return;
      case ',': push(Tok::Comma, ","); return;
      case ';': push(Tok::Semi, ";"); return;
      case ':': push(Tok::Colon, ":"); return;
      case '!': push(Tok::Bang, "!"); return;
      case '&':
        if (peek() == '&') { get(); push(Tok::AmpAmp, "&&"); return; }
        break;
      case '|':
        if (peek() == '=') { get(); push(Tok::Sat, "|="); return; }
        break;
      case '/':
        if (peek() == '\\') { get(); push(Tok::AndOp, "/\\"); return; }
        break;
      case '\\':
        if (peek() == '/') { get(); push(Tok::OrOp, "\\/"); return; }
        break;
      case '+':
        if (peek() == '.') { get(); push(Tok::PlusDot, "+."); return; }
        break;
      case '*':
        if (peek() == ')') { get(); push(Tok::AnnotEnd, "*)"); return; }
        break;
      case '$':
        if (peek() == '!' && peek(1) == '=') { get(); get(); push(Tok::CmpNeq, "$!="); return; }
        break;
      case '<':
        if (peek() == '\'') { get(); push(Tok::CmpLt, "<'"); return; }
        if (peek() == '=' && peek(1) == '\'') { get(); get(); push(Tok::CmpLe, "<='"); return; }
        break;
      case '>':
        if (peek() == '\'') { get(); push(Tok::CmpGt, ">'"); return; }
        if (peek() == '=' && peek(1) == '\'') { get(); get(); push(Tok::CmpGe, ">='"); return; }
        break;
      case '=':
        if (peek() == '\'') { get(); push(Tok::CmpEq, "='"); return; }
        push(Tok::Equal, "=");
        return;
      default:
        break;
    }
    fail(start, std::string("unexpected character '") + c + "'");
  }
};

}  // namespace bhl
