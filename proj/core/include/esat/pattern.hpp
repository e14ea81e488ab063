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

#ifndef ESAT_PATTERN_HPP
#define ESAT_PATTERN_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace esat {

/// One attribute slot of a pattern symbol: a literal or a `?name` binder.
struct ParamTerm {
  std::variant<std::int64_t, std::string> value;

  bool is_var() const { return std::holds_alternative<std::string>(value); }
  friend bool operator==(const ParamTerm&, const ParamTerm&) = default;
};

/// Term pattern in s-expression syntax.
///
///   ?x                 e-class variable
///   2                  integer constant, the symbol `num[2]`
///   a                  zero-arity symbol
///   (mul ?x 2)         application
///   (concat[1] ?x ?y)  application whose payload starts with 1
///   (split[?a,0] ?t)   payload prefix with a bound attribute
///
/// An application without brackets matches any payload. Ground patterns
/// (no variables) double as terms.
struct Pattern {
  enum class Kind { Var, App };

  Kind kind = Kind::App;
  std::string name;
  std::optional<std::vector<ParamTerm>> params;
  std::vector<Pattern> children;

  static Pattern var(std::string name);
  static Pattern app(std::string name, std::vector<Pattern> children = {});
  static Pattern app(std::string name, std::vector<ParamTerm> params,
                     std::vector<Pattern> children);
  static Pattern number(std::int64_t value);

  bool is_var() const { return kind == Kind::Var; }
  bool is_ground() const;
  std::size_t size() const;

  /// Names of e-class variables (without `?`).
  std::set<std::string> vars() const;
  /// Names of attribute variables.
  std::set<std::string> param_vars() const;

  std::string to_string() const;

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

Pattern parse_pattern(std::string_view text);

enum class RuleKind { Single, Multi };

/// Rewrite rule; targets[k] is merged into the e-class matched by
/// sources[k].
struct Rule {
  int id = 0;
  std::string name;
  std::vector<Pattern> sources;
  std::vector<Pattern> targets;

  RuleKind kind() const {
    return sources.size() > 1 ? RuleKind::Multi : RuleKind::Single;
  }
  std::string to_string() const;
};

/// Parses one rule: `[label:] src (|&| src)* => tgt (|&| tgt)*`.
Rule parse_rule(std::string_view text, int id = 0);

/// Parses a rule file, one rule per line, `#` comments. Ids follow line
/// order starting at 0.
std::vector<Rule> parse_rules(std::string_view text);
std::vector<Rule> load_rules(const std::filesystem::path& path);

}  // namespace esat

#endif  // ESAT_PATTERN_HPP
