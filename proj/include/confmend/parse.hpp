#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "confmend/errors.hpp"
#include "confmend/model.hpp"

namespace confmend {
namespace detail {

enum class TokType {
  Ident,
  Int,
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Colon,
  Comma,
  Dot,
  DotDot,
  Assign,   // =
  EqEq,     // ==
  Ne,       // !=
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  End,
};

struct Token {
  TokType type = TokType::End;
  std::string text;
  std::int64_t int_value = 0;
  int line = 0;
  int col = 0;
};

inline bool is_reserved_word(const std::string& s) {
  static const std::set<std::string> kw = {
      "entity", "constraint", "constraints", "roles",  "leader",
      "follower", "peer",     "int",         "bool",   "enum",
      "implies",  "and",      "or",          "not",    "true",
      "false",    "set"};
  return kw.count(s) > 0;
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_trivia();
    current_ = Token{};
    current_.line = line_;
    current_.col = col_;
    if (pos_ >= text_.size()) {
      current_.type = TokType::End;
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string ident;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ident += take();
      current_.type = TokType::Ident;
      current_.text = std::move(ident);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_int(false);
      return;
    }
    switch (c) {
      case '{': take(); current_.type = TokType::LBrace; return;
      case '}': take(); current_.type = TokType::RBrace; return;
      case '(': take(); current_.type = TokType::LParen; return;
      case ')': take(); current_.type = TokType::RParen; return;
      case '[': take(); current_.type = TokType::LBracket; return;
      case ']': take(); current_.type = TokType::RBracket; return;
      case ':': take(); current_.type = TokType::Colon; return;
      case ',': take(); current_.type = TokType::Comma; return;
      case '+': take(); current_.type = TokType::Plus; return;
      case '*': take(); current_.type = TokType::Star; return;
      case '.':
        take();
        if (pos_ < text_.size() && text_[pos_] == '.') {
          take();
          current_.type = TokType::DotDot;
        } else {
          current_.type = TokType::Dot;
        }
        return;
      case '=':
        take();
        if (pos_ < text_.size() && text_[pos_] == '=') {
          take();
          current_.type = TokType::EqEq;
        } else {
          current_.type = TokType::Assign;
        }
        return;
      case '!':
        take();
        if (pos_ < text_.size() && text_[pos_] == '=') {
          take();
          current_.type = TokType::Ne;
          return;
        }
        throw SyntaxError(current_.line, current_.col, "expected '!='");
      case '<':
        take();
        if (pos_ < text_.size() && text_[pos_] == '=') {
          take();
          current_.type = TokType::Le;
        } else {
          current_.type = TokType::Lt;
        }
        return;
      case '>':
        take();
        if (pos_ < text_.size() && text_[pos_] == '=') {
          take();
          current_.type = TokType::Ge;
        } else {
          current_.type = TokType::Gt;
        }
        return;
      case '-':
        take();
        if (pos_ < text_.size() &&
            std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          lex_int(true);
          return;
        }
        current_.type = TokType::Minus;
        return;
      default:
        throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
    }
  }

  void lex_int(bool negative) {
    std::string digits;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      digits += take();
    try {
      std::int64_t v = std::stoll(digits);
      current_.type = TokType::Int;
      current_.int_value = negative ? -v : v;
      current_.text = (negative ? "-" : "") + digits;
    } catch (const std::exception&) {
      throw SyntaxError(current_.line, current_.col, "integer literal out of range");
    }
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') take();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        take();
      } else {
        break;
      }
    }
  }

  char take() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token current_;
};

class ModelParser {
 public:
  explicit ModelParser(const std::string& text) : lex_(text) {}

  ConfigurationModel parse() {
    while (lex_.peek().type != TokType::End) {
      Token t = lex_.peek();
      if (is_kw(t, "entity")) {
        parse_entity();
      } else if (is_kw(t, "constraint")) {
        parse_constraint();
      } else if (is_kw(t, "constraints")) {
        lex_.next();
        expect(TokType::LBrace, "'{'");
        while (!at(TokType::RBrace)) {
          if (!is_kw(lex_.peek(), "constraint"))
            throw err("expected 'constraint' or '}'");
          parse_constraint();
        }
        expect(TokType::RBrace, "'}'");
      } else {
        throw err("expected 'entity', 'constraint' or 'constraints'");
      }
    }
    finish_constraints();
    auto wf = check_wellformed(model_);
    if (!wf.empty()) throw WellformednessFailure(std::move(wf));
    return model_;
  }

  // Single 'set Entity.attr = value' directive per line; values are checked
  // against the model's domains.
  static ChangeBundle parse_bundle(const std::string& text,
                                   const ConfigurationModel& model) {
    Lexer lex(text);
    ChangeBundle bundle;
    while (lex.peek().type != TokType::End) {
      Token t = lex.next();
      if (!(t.type == TokType::Ident && t.text == "set"))
        throw SyntaxError(t.line, t.col, "expected 'set'");
      Token ent = lex.next();
      if (ent.type != TokType::Ident)
        throw SyntaxError(ent.line, ent.col, "expected entity name");
      Token dot = lex.next();
      if (dot.type != TokType::Dot)
        throw SyntaxError(dot.line, dot.col, "expected '.'");
      Token attr = lex.next();
      if (attr.type != TokType::Ident)
        throw SyntaxError(attr.line, attr.col, "expected attribute name");
      Token eq = lex.next();
      if (eq.type != TokType::Assign)
        throw SyntaxError(eq.line, eq.col, "expected '='");
      Token val = lex.next();
      AttributeRef ref{ent.text, attr.text};
      const Attribute& a = model.attribute(ref);
      Value v = token_value(val);
      if (!a.domain.admits(v))
        throw InadmissibleValueError("value " + v.to_string() +
                                     " is not admissible for " + ref.to_string() +
                                     " : " + a.domain.to_string());
      if (bundle.changes.count(ref))
        throw DuplicateIdError("duplicate change for " + ref.to_string());
      bundle.changes.emplace(std::move(ref), std::move(v));
    }
    if (bundle.changes.empty()) throw Error("change bundle is empty");
    return bundle;
  }

 private:
  static bool is_kw(const Token& t, const char* kw) {
    return t.type == TokType::Ident && t.text == kw;
  }

  bool at(TokType type) const { return lex_.peek().type == type; }

  Token expect(TokType type, const char* what) {
    if (!at(type)) throw err(std::string("expected ") + what);
    return lex_.next();
  }

  SyntaxError err(const std::string& message) const {
    const Token& t = lex_.peek();
    return SyntaxError(t.line, t.col, message);
  }

  std::string expect_name(const char* what) {
    Token t = lex_.peek();
    if (t.type != TokType::Ident || is_reserved_word(t.text))
      throw err(std::string("expected ") + what);
    lex_.next();
    return t.text;
  }

  static Value token_value(const Token& t) {
    if (t.type == TokType::Int) return Value::integer(t.int_value);
    if (t.type == TokType::Ident) {
      if (t.text == "true") return Value::boolean(true);
      if (t.text == "false") return Value::boolean(false);
      if (!is_reserved_word(t.text)) return Value::label(t.text);
    }
    throw SyntaxError(t.line, t.col, "expected a value");
  }

  void parse_entity() {
    lex_.next();  // entity
    std::string name = expect_name("entity name");
    if (model_.entities.count(name))
      throw DuplicateIdError("duplicate entity '" + name + "'");
    Entity ent;
    ent.id = name;
    expect(TokType::LBrace, "'{'");
    while (!at(TokType::RBrace)) {
      std::string attr_name = expect_name("attribute name");
      if (ent.attributes.count(attr_name))
        throw DuplicateIdError("duplicate attribute '" + name + "." + attr_name + "'");
      expect(TokType::Colon, "':'");
      Domain domain = parse_domain();
      expect(TokType::Assign, "'='");
      Token val = lex_.next();
      Value v = token_value(val);
      if (!domain.admits(v))
        throw SyntaxError(val.line, val.col,
                          "initial value " + v.to_string() + " is outside " +
                              domain.to_string());
      ent.attributes.emplace(attr_name, Attribute{std::move(domain), std::move(v)});
    }
    expect(TokType::RBrace, "'}'");
    model_.entities.emplace(name, std::move(ent));
  }

  Domain parse_domain() {
    Token t = lex_.peek();
    if (is_kw(t, "bool")) {
      lex_.next();
      return Domain::boolean();
    }
    if (is_kw(t, "int")) {
      lex_.next();
      expect(TokType::LBracket, "'['");
      Token lo = expect(TokType::Int, "integer");
      expect(TokType::DotDot, "'..'");
      Token hi = expect(TokType::Int, "integer");
      expect(TokType::RBracket, "']'");
      try {
        return Domain::int_range(lo.int_value, hi.int_value);
      } catch (const Error& e) {
        throw SyntaxError(t.line, t.col, e.what());
      }
    }
    if (is_kw(t, "enum")) {
      lex_.next();
      expect(TokType::LBrace, "'{'");
      std::vector<std::string> labels;
      labels.push_back(expect_name("enum label"));
      while (at(TokType::Comma)) {
        lex_.next();
        labels.push_back(expect_name("enum label"));
      }
      expect(TokType::RBrace, "'}'");
      try {
        return Domain::enumeration(std::move(labels));
      } catch (const DuplicateIdError&) {
        throw;
      } catch (const Error& e) {
        throw SyntaxError(t.line, t.col, e.what());
      }
    }
    throw err("expected a domain (bool, int[lo..hi] or enum{...})");
  }

  void parse_constraint() {
    lex_.next();  // constraint
    std::string cid = expect_name("constraint name");
    if (pending_.count(cid))
      throw DuplicateIdError("duplicate constraint '" + cid + "'");
    Token roles_tok = lex_.next();
    if (!is_kw(roles_tok, "roles"))
      throw SyntaxError(roles_tok.line, roles_tok.col, "expected 'roles'");
    expect(TokType::LParen, "'('");
    std::map<EntityId, Role> table;
    for (;;) {
      std::string eid = expect_name("entity name");
      expect(TokType::Colon, "':'");
      Token role_tok = lex_.next();
      Role role;
      if (is_kw(role_tok, "leader")) role = Role::Leader;
      else if (is_kw(role_tok, "follower")) role = Role::Follower;
      else if (is_kw(role_tok, "peer")) role = Role::Peer;
      else throw SyntaxError(role_tok.line, role_tok.col, "expected leader, follower or peer");
      if (table.count(eid))
        throw DuplicateIdError("duplicate role for entity '" + eid +
                               "' in constraint '" + cid + "'");
      table.emplace(std::move(eid), role);
      if (at(TokType::Comma)) {
        lex_.next();
        continue;
      }
      break;
    }
    expect(TokType::RParen, "')'");
    expect(TokType::LBrace, "'{'");
    Token expr_tok = lex_.peek();
    Expr expr = parse_expr();
    expect(TokType::RBrace, "'}'");
    pending_.emplace(cid, Pending{std::move(expr), std::move(table),
                                  expr_tok.line, expr_tok.col});
  }

  // Precedence, loosest first: implies, or, and, not, comparison, additive,
  // multiplicative, atoms. Implication is right-associative; a comparison
  // may not chain without parentheses.
  Expr parse_expr() {
    Expr lhs = parse_or();
    if (at(TokType::Ident) && lex_.peek().text == "implies") {
      lex_.next();
      return Expr::implies(std::move(lhs), parse_expr());
    }
    return lhs;
  }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (at(TokType::Ident) && lex_.peek().text == "or") {
      lex_.next();
      lhs = Expr::disjunction(std::move(lhs), parse_and());
    }
    return lhs;
  }

  Expr parse_and() {
    Expr lhs = parse_not();
    while (at(TokType::Ident) && lex_.peek().text == "and") {
      lex_.next();
      lhs = Expr::conjunction(std::move(lhs), parse_not());
    }
    return lhs;
  }

  Expr parse_not() {
    if (at(TokType::Ident) && lex_.peek().text == "not") {
      lex_.next();
      return Expr::negation(parse_not());
    }
    return parse_cmp();
  }

  Expr parse_cmp() {
    Expr lhs = parse_additive();
    BinaryOp op;
    switch (lex_.peek().type) {
      case TokType::EqEq: op = BinaryOp::Eq; break;
      case TokType::Ne: op = BinaryOp::Ne; break;
      case TokType::Lt: op = BinaryOp::Lt; break;
      case TokType::Le: op = BinaryOp::Le; break;
      case TokType::Gt: op = BinaryOp::Gt; break;
      case TokType::Ge: op = BinaryOp::Ge; break;
      default: return lhs;
    }
    lex_.next();
    return Expr::binary(op, std::move(lhs), parse_additive());
  }

  Expr parse_additive() {
    Expr lhs = parse_mult();
    for (;;) {
      if (at(TokType::Plus)) {
        lex_.next();
        lhs = Expr::binary(BinaryOp::Add, std::move(lhs), parse_mult());
      } else if (at(TokType::Minus)) {
        lex_.next();
        lhs = Expr::binary(BinaryOp::Sub, std::move(lhs), parse_mult());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_mult() {
    Expr lhs = parse_atom();
    while (at(TokType::Star)) {
      lex_.next();
      lhs = Expr::binary(BinaryOp::Mul, std::move(lhs), parse_atom());
    }
    return lhs;
  }

  Expr parse_atom() {
    Token t = lex_.peek();
    if (t.type == TokType::LParen) {
      lex_.next();
      Expr e = parse_expr();
      expect(TokType::RParen, "')'");
      return e;
    }
    if (t.type == TokType::Int) {
      lex_.next();
      return Expr::literal(Value::integer(t.int_value));
    }
    if (t.type == TokType::Ident) {
      if (t.text == "true") {
        lex_.next();
        return Expr::literal(Value::boolean(true));
      }
      if (t.text == "false") {
        lex_.next();
        return Expr::literal(Value::boolean(false));
      }
      if (is_reserved_word(t.text)) throw err("unexpected keyword in expression");
      lex_.next();
      if (at(TokType::Dot)) {
        lex_.next();
        std::string attr = expect_name("attribute name");
        return Expr::ref(AttributeRef{t.text, std::move(attr)});
      }
      // A bare identifier is an enum label literal.
      return Expr::literal(Value::label(t.text));
    }
    throw err("expected an expression");
  }

  // Constraint expressions are resolved and typechecked once all entities
  // are known, so declaration order in the document does not matter.
  void finish_constraints() {
    KindResolver kind_of = [this](const AttributeRef& r) -> std::optional<Kind> {
      const Attribute* a = model_.find_attribute(r);
      if (!a) return std::nullopt;
      return a->domain.kind();
    };
    for (auto& [cid, p] : pending_) {
      Kind root;
      try {
        root = typecheck(p.expr, kind_of);
      } catch (const Error& e) {
        throw SyntaxError(p.line, p.col,
                          "constraint '" + cid + "': " + e.what());
      }
      if (root != Kind::Bool)
        throw SyntaxError(p.line, p.col,
                          "constraint '" + cid + "' must be a bool expression");
      Constraint c = Constraint::make(cid, p.expr);
      if (c.participants.empty())
        throw SyntaxError(p.line, p.col,
                          "constraint '" + cid + "' references no entities");
      model_.constraints.emplace(cid, std::move(c));
      model_.roles.emplace(cid, std::move(p.roles));
    }
  }

  struct Pending {
    Expr expr;
    std::map<EntityId, Role> roles;
    int line;
    int col;
  };

  Lexer lex_;
  ConfigurationModel model_;
  std::map<ConstraintId, Pending> pending_;
};

}  // namespace detail

inline ConfigurationModel parse_model(const std::string& text) {
  return detail::ModelParser(text).parse();
}

inline ChangeBundle parse_bundle(const std::string& text,
                                 const ConfigurationModel& model) {
  return detail::ModelParser::parse_bundle(text, model);
}

}  // namespace confmend
