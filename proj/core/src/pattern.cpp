/* Copyright 2026 The esat Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "esat/pattern.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "esat/error.hpp"

namespace esat {

Pattern Pattern::var(std::string name) {
  Pattern p;
  p.kind = Kind::Var;
  p.name = std::move(name);
  return p;
}

Pattern Pattern::app(std::string name, std::vector<Pattern> children) {
  Pattern p;
  p.name = std::move(name);
  p.children = std::move(children);
  return p;
}

Pattern Pattern::app(std::string name, std::vector<ParamTerm> params,
                     std::vector<Pattern> children) {
  Pattern p = app(std::move(name), std::move(children));
  p.params = std::move(params);
  return p;
}

Pattern Pattern::number(std::int64_t value) {
  return app("num", {ParamTerm{value}}, {});
}

bool Pattern::is_ground() const {
  if (is_var()) return false;
  if (params) {
    for (const auto& p : *params) {
      if (p.is_var()) return false;
    }
  }
  for (const auto& c : children) {
    if (!c.is_ground()) return false;
  }
  return true;
}

std::size_t Pattern::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

std::set<std::string> Pattern::vars() const {
  std::set<std::string> out;
  if (is_var()) {
    out.insert(name);
    return out;
  }
  for (const auto& c : children) out.merge(c.vars());
  return out;
}

std::set<std::string> Pattern::param_vars() const {
  std::set<std::string> out;
  if (params) {
    for (const auto& p : *params) {
      if (p.is_var()) out.insert(std::get<std::string>(p.value));
    }
  }
  for (const auto& c : children) out.merge(c.param_vars());
  return out;
}

std::string Pattern::to_string() const {
  if (is_var()) return "?" + name;
  if (name == "num" && params && params->size() == 1 &&
      !(*params)[0].is_var() && children.empty()) {
    return std::to_string(std::get<std::int64_t>((*params)[0].value));
  }
  std::string head = name;
  if (params) {
    head += "[";
    for (std::size_t i = 0; i < params->size(); ++i) {
      if (i) head += ",";
      const auto& p = (*params)[i];
      head += p.is_var() ? "?" + std::get<std::string>(p.value)
                         : std::to_string(std::get<std::int64_t>(p.value));
    }
    head += "]";
  }
  if (children.empty()) return head;
  std::string out = "(" + head;
  for (const auto& c : children) out += " " + c.to_string();
  return out + ")";
}

std::string Rule::to_string() const {
  std::string out;
  if (!name.empty()) out += name + ": ";
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (i) out += " |&| ";
    out += sources[i].to_string();
  }
  out += " => ";
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (i) out += " |&| ";
    out += targets[i].to_string();
  }
  return out;
}

namespace {

enum class Tok {
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Colon,
  Arrow,
  MultiSep,
  Ident,
  Var,
  Int,
  End
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '.';
}

class Lexer {
 public:
  Lexer(std::string_view text, int line) : text_(text), line_(line) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = text_[pos_];
      if (c == '(') {
        t.kind = Tok::LParen;
        advance(1);
      } else if (c == ')') {
        t.kind = Tok::RParen;
        advance(1);
      } else if (c == '[') {
        t.kind = Tok::LBracket;
        advance(1);
      } else if (c == ']') {
        t.kind = Tok::RBracket;
        advance(1);
      } else if (c == ',') {
        t.kind = Tok::Comma;
        advance(1);
      } else if (c == ':') {
        t.kind = Tok::Colon;
        advance(1);
      } else if (text_.substr(pos_, 2) == "=>") {
        t.kind = Tok::Arrow;
        advance(2);
      } else if (text_.substr(pos_, 3) == "|&|") {
        t.kind = Tok::MultiSep;
        advance(3);
      } else if (c == '?') {
        advance(1);
        if (pos_ >= text_.size() || !ident_start(text_[pos_])) {
          throw ParseError("expected variable name after '?'", line_, column_);
        }
        t.kind = Tok::Var;
        t.text = take_ident();
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < text_.size() &&
                  std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        t.kind = Tok::Int;
        const std::size_t start = pos_;
        advance(1);
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          advance(1);
        }
        t.text = std::string(text_.substr(start, pos_ - start));
      } else if (ident_start(c)) {
        t.kind = Tok::Ident;
        t.text = take_ident();
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'",
                         line_, column_);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else {
        break;
      }
    }
  }

  std::string take_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) advance(1);
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Pattern pattern() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Var:
        next();
        return Pattern::var(t.text);
      case Tok::Int:
        next();
        return Pattern::number(to_int(t));
      case Tok::Ident: {
        next();
        Pattern p = Pattern::app(t.text);
        if (peek().kind == Tok::LBracket) p.params = params();
        return p;
      }
      case Tok::LParen: {
        next();
        const Token& head = expect(Tok::Ident, "operator name");
        Pattern p = Pattern::app(head.text);
        if (peek().kind == Tok::LBracket) p.params = params();
        while (peek().kind != Tok::RParen) {
          if (peek().kind == Tok::End) fail(peek(), "unterminated '('");
          p.children.push_back(pattern());
        }
        next();
        return p;
      }
      default:
        fail(t, "expected a pattern");
    }
  }

  Rule rule(int id) {
    Rule r;
    r.id = id;
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::Colon) {
      r.name = next().text;
      next();
    }
    r.sources.push_back(pattern());
    while (peek().kind == Tok::MultiSep) {
      next();
      r.sources.push_back(pattern());
    }
    expect(Tok::Arrow, "'=>'");
    r.targets.push_back(pattern());
    while (peek().kind == Tok::MultiSep) {
      next();
      r.targets.push_back(pattern());
    }
    return r;
  }

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }

  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(peek(), std::string("expected ") + what);
    return next();
  }

  [[noreturn]] static void fail(const Token& t, const std::string& message) {
    throw ParseError(message, t.line, t.column);
  }

 private:
  std::vector<ParamTerm> params() {
    expect(Tok::LBracket, "'['");
    std::vector<ParamTerm> out;
    if (peek().kind == Tok::RBracket) {
      next();
      return out;
    }
    for (;;) {
      const Token& t = peek();
      if (t.kind == Tok::Int) {
        out.push_back(ParamTerm{to_int(t)});
      } else if (t.kind == Tok::Var) {
        out.push_back(ParamTerm{t.text});
      } else {
        fail(t, "expected integer or ?name attribute");
      }
      next();
      if (peek().kind == Tok::Comma) {
        next();
        continue;
      }
      expect(Tok::RBracket, "']'");
      return out;
    }
  }

  static std::int64_t to_int(const Token& t) {
    std::int64_t v = 0;
    auto [ptr, ec] =
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      fail(t, "integer out of range");
    }
    return v;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void check_rule(const Rule& r, int line) {
  if (r.sources.size() != r.targets.size()) {
    throw ParseError("rule has " + std::to_string(r.sources.size()) +
                         " source(s) but " + std::to_string(r.targets.size()) +
                         " target(s)",
                     line, 1);
  }
  std::set<std::string> bound;
  std::set<std::string> bound_params;
  for (const auto& s : r.sources) {
    bound.merge(s.vars());
    bound_params.merge(s.param_vars());
  }
  for (const auto& t : r.targets) {
    for (const auto& v : t.vars()) {
      if (!bound.count(v)) {
        throw ParseError("unbound target variable ?" + v, line, 1);
      }
    }
    for (const auto& v : t.param_vars()) {
      if (!bound_params.count(v)) {
        throw ParseError("unbound target attribute ?" + v, line, 1);
      }
    }
  }
}

}  // namespace

Pattern parse_pattern(std::string_view text) {
  Parser parser(Lexer(text, 1).run());
  Pattern p = parser.pattern();
  if (parser.peek().kind != Tok::End) {
    Parser::fail(parser.peek(), "trailing input after pattern");
  }
  return p;
}

namespace {

Rule parse_rule_line(std::string_view text, int id, int line) {
  Parser parser(Lexer(text, line).run());
  Rule r = parser.rule(id);
  if (parser.peek().kind != Tok::End) {
    Parser::fail(parser.peek(), "trailing input after rule");
  }
  check_rule(r, line);
  return r;
}

bool blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rule parse_rule(std::string_view text, int id) {
  return parse_rule_line(text, id, 1);
}

std::vector<Rule> parse_rules(std::string_view text) {
  std::vector<Rule> rules;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = text.substr(start, end - start);
    if (!blank_or_comment(line)) {
      rules.push_back(
          parse_rule_line(line, static_cast<int>(rules.size()), line_no));
    }
    start = end + 1;
  }
  return rules;
}

std::vector<Rule> load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rule file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_rules(buffer.str());
}

}  // namespace esat
