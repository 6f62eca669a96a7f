#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include "confmend/errors.hpp"
#include "confmend/values.hpp"

namespace confmend {

// Names one attribute of one entity. Ordering is lexicographic by entity
// then attribute, which is also the solver's variable order.
struct AttributeRef {
  std::string entity;
  std::string attribute;

  auto operator<=>(const AttributeRef&) const = default;

  std::string to_string() const { return entity + "." + attribute; }
};

enum class BinaryOp { And, Or, Implies, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul };

inline const char* to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
    case BinaryOp::Implies: return "implies";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
  }
  return "?";
}

inline bool is_logical(BinaryOp op) {
  return op == BinaryOp::And || op == BinaryOp::Or || op == BinaryOp::Implies;
}

inline bool is_equality(BinaryOp op) {
  return op == BinaryOp::Eq || op == BinaryOp::Ne;
}

inline bool is_ordering(BinaryOp op) {
  return op == BinaryOp::Lt || op == BinaryOp::Le || op == BinaryOp::Gt ||
         op == BinaryOp::Ge;
}

inline bool is_arith(BinaryOp op) {
  return op == BinaryOp::Add || op == BinaryOp::Sub || op == BinaryOp::Mul;
}

// Immutable expression tree with value semantics; nodes are shared and never
// mutated after construction.
class Expr {
 public:
  struct Literal;
  struct Ref;
  struct Not;
  struct Binary;
  struct Node;

  Expr();

  static Expr literal(Value v);
  static Expr ref(AttributeRef r);
  static Expr negation(Expr e);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

  static Expr conjunction(Expr l, Expr r) { return binary(BinaryOp::And, std::move(l), std::move(r)); }
  static Expr disjunction(Expr l, Expr r) { return binary(BinaryOp::Or, std::move(l), std::move(r)); }
  static Expr implies(Expr l, Expr r) { return binary(BinaryOp::Implies, std::move(l), std::move(r)); }

  const Literal* as_literal() const;
  const Ref* as_ref() const;
  const Not* as_not() const;
  const Binary* as_binary() const;

  bool operator==(const Expr& other) const;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Literal {
  Value value;
};
struct Expr::Ref {
  AttributeRef ref;
};
struct Expr::Not {
  Expr operand;
};
struct Expr::Binary {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};
struct Expr::Node {
  std::variant<Literal, Ref, Not, Binary> v;
};

inline Expr::Expr()
    : node_(std::make_shared<Node>(Node{Literal{Value::boolean(true)}})) {}

inline Expr Expr::literal(Value v) {
  return Expr(std::make_shared<Node>(Node{Literal{std::move(v)}}));
}
inline Expr Expr::ref(AttributeRef r) {
  return Expr(std::make_shared<Node>(Node{Ref{std::move(r)}}));
}
inline Expr Expr::negation(Expr e) {
  return Expr(std::make_shared<Node>(Node{Not{std::move(e)}}));
}
inline Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Expr(std::make_shared<Node>(Node{Binary{op, std::move(lhs), std::move(rhs)}}));
}

inline const Expr::Literal* Expr::as_literal() const {
  return std::get_if<Literal>(&node_->v);
}
inline const Expr::Ref* Expr::as_ref() const {
  return std::get_if<Ref>(&node_->v);
}
inline const Expr::Not* Expr::as_not() const {
  return std::get_if<Not>(&node_->v);
}
inline const Expr::Binary* Expr::as_binary() const {
  return std::get_if<Binary>(&node_->v);
}

inline bool Expr::operator==(const Expr& other) const {
  if (node_ == other.node_) return true;
  if (node_->v.index() != other.node_->v.index()) return false;
  if (const auto* l = as_literal()) return l->value == other.as_literal()->value;
  if (const auto* r = as_ref()) return r->ref == other.as_ref()->ref;
  if (const auto* n = as_not()) return n->operand == other.as_not()->operand;
  const Binary& a = *as_binary();
  const Binary& b = *other.as_binary();
  return a.op == b.op && a.lhs == b.lhs && a.rhs == b.rhs;
}

// Strict evaluation against any lookup mapping AttributeRef to an optional
// Value. Implication evaluates as (not lhs) or rhs.
template <class Lookup>
Value eval_with(const Expr& e, Lookup&& lookup) {
  if (const auto* lit = e.as_literal()) return lit->value;
  if (const auto* ref = e.as_ref()) {
    std::optional<Value> v = lookup(ref->ref);
    if (!v) throw MissingBindingError("no binding for " + ref->ref.to_string());
    return *v;
  }
  if (const auto* neg = e.as_not())
    return Value::boolean(!eval_with(neg->operand, lookup).as_bool());

  const Expr::Binary& bin = *e.as_binary();
  Value l = eval_with(bin.lhs, lookup);
  Value r = eval_with(bin.rhs, lookup);
  switch (bin.op) {
    case BinaryOp::And: return Value::boolean(l.as_bool() && r.as_bool());
    case BinaryOp::Or: return Value::boolean(l.as_bool() || r.as_bool());
    case BinaryOp::Implies: return Value::boolean(!l.as_bool() || r.as_bool());
    case BinaryOp::Eq: return Value::boolean(l == r);
    case BinaryOp::Ne: return Value::boolean(!(l == r));
    case BinaryOp::Lt: return Value::boolean(l.as_int() < r.as_int());
    case BinaryOp::Le: return Value::boolean(l.as_int() <= r.as_int());
    case BinaryOp::Gt: return Value::boolean(l.as_int() > r.as_int());
    case BinaryOp::Ge: return Value::boolean(l.as_int() >= r.as_int());
    case BinaryOp::Add: return Value::integer(l.as_int() + r.as_int());
    case BinaryOp::Sub: return Value::integer(l.as_int() - r.as_int());
    case BinaryOp::Mul: return Value::integer(l.as_int() * r.as_int());
  }
  throw Error("unreachable binary op");
}

inline Value eval(const Expr& e, const std::map<AttributeRef, Value>& env) {
  return eval_with(e, [&env](const AttributeRef& r) -> std::optional<Value> {
    auto it = env.find(r);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
}

inline void collect_refs(const Expr& e, std::set<AttributeRef>& out) {
  if (const auto* ref = e.as_ref()) {
    out.insert(ref->ref);
  } else if (const auto* neg = e.as_not()) {
    collect_refs(neg->operand, out);
  } else if (const auto* bin = e.as_binary()) {
    collect_refs(bin->lhs, out);
    collect_refs(bin->rhs, out);
  }
}

inline std::set<AttributeRef> refs(const Expr& e) {
  std::set<AttributeRef> out;
  collect_refs(e, out);
  return out;
}

// Kind inference and checking. The resolver supplies the declared kind of
// each attribute reference; unknown references and kind mismatches throw.
using KindResolver = std::function<std::optional<Kind>(const AttributeRef&)>;

inline Kind typecheck(const Expr& e, const KindResolver& kind_of) {
  if (const auto* lit = e.as_literal()) return lit->value.kind();
  if (const auto* ref = e.as_ref()) {
    std::optional<Kind> k = kind_of(ref->ref);
    if (!k) throw Error("unknown attribute " + ref->ref.to_string());
    return *k;
  }
  if (const auto* neg = e.as_not()) {
    if (typecheck(neg->operand, kind_of) != Kind::Bool)
      throw Error("'not' requires a bool operand");
    return Kind::Bool;
  }
  const Expr::Binary& bin = *e.as_binary();
  Kind l = typecheck(bin.lhs, kind_of);
  Kind r = typecheck(bin.rhs, kind_of);
  if (is_logical(bin.op)) {
    if (l != Kind::Bool || r != Kind::Bool)
      throw Error(std::string("'") + to_string(bin.op) + "' requires bool operands");
    return Kind::Bool;
  }
  if (is_equality(bin.op)) {
    if (l != r)
      throw Error(std::string("'") + to_string(bin.op) +
                  "' requires operands of the same kind");
    return Kind::Bool;
  }
  if (is_ordering(bin.op)) {
    if (l != Kind::Int || r != Kind::Int)
      throw Error(std::string("'") + to_string(bin.op) + "' requires int operands");
    return Kind::Bool;
  }
  if (l != Kind::Int || r != Kind::Int)
    throw Error(std::string("'") + to_string(bin.op) + "' requires int operands");
  return Kind::Int;
}

// Canonical text form: every binary node fully parenthesised, so printing
// and re-parsing round-trips the exact tree.
inline std::string expr_to_string(const Expr& e) {
  if (const auto* lit = e.as_literal()) return lit->value.to_string();
  if (const auto* ref = e.as_ref()) return ref->ref.to_string();
  if (const auto* neg = e.as_not()) return "not " + expr_to_string(neg->operand);
  const Expr::Binary& bin = *e.as_binary();
  return "(" + expr_to_string(bin.lhs) + " " + to_string(bin.op) + " " +
         expr_to_string(bin.rhs) + ")";
}

}  // namespace confmend
