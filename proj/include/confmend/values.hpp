#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "confmend/errors.hpp"

namespace confmend {

enum class Kind { Bool, Int, Enum };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::Bool: return "bool";
    case Kind::Int: return "int";
    case Kind::Enum: return "enum";
  }
  return "?";
}

// A runtime value of one of the three supported kinds. Enum values carry
// their label; label identity is what equality compares.
class Value {
 public:
  Value() : data_(false) {}

  static Value boolean(bool b) { return Value(b); }
  static Value integer(std::int64_t i) { return Value(i); }
  static Value label(std::string s) { return Value(std::move(s)); }

  Kind kind() const {
    switch (data_.index()) {
      case 0: return Kind::Bool;
      case 1: return Kind::Int;
      default: return Kind::Enum;
    }
  }

  bool as_bool() const { return std::get<bool>(data_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  const std::string& as_label() const { return std::get<std::string>(data_); }

  bool operator==(const Value&) const = default;

  std::string to_string() const {
    switch (data_.index()) {
      case 0: return as_bool() ? "true" : "false";
      case 1: return std::to_string(as_int());
      default: return as_label();
    }
  }

 private:
  explicit Value(bool b) : data_(b) {}
  explicit Value(std::int64_t i) : data_(i) {}
  explicit Value(std::string s) : data_(std::move(s)) {}

  std::variant<bool, std::int64_t, std::string> data_;
};

// Finite attribute domain: bool, a bounded integer range, or an ordered
// enumeration of labels. The range span is capped so that exhaustive
// enumeration stays tractable everywhere in the engine.
class Domain {
 public:
  static constexpr std::int64_t kMaxIntSpan = 1 << 16;

  Domain() = default;

  static Domain boolean() {
    Domain d;
    d.kind_ = Kind::Bool;
    return d;
  }

  static Domain int_range(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw Error("int domain: lo > hi");
    if (hi - lo + 1 > kMaxIntSpan) throw Error("int domain: span too large");
    Domain d;
    d.kind_ = Kind::Int;
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
  }

  static Domain enumeration(std::vector<std::string> labels) {
    if (labels.empty()) throw Error("enum domain: no labels");
    for (std::size_t i = 0; i < labels.size(); ++i)
      for (std::size_t j = i + 1; j < labels.size(); ++j)
        if (labels[i] == labels[j])
          throw DuplicateIdError("enum domain: duplicate label '" + labels[i] +
                                 "'");
    Domain d;
    d.kind_ = Kind::Enum;
    d.labels_ = std::move(labels);
    return d;
  }

  Kind kind() const { return kind_; }
  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }
  const std::vector<std::string>& labels() const { return labels_; }

  bool admits(const Value& v) const {
    if (v.kind() != kind_) return false;
    switch (kind_) {
      case Kind::Bool: return true;
      case Kind::Int: return v.as_int() >= lo_ && v.as_int() <= hi_;
      case Kind::Enum:
        for (const auto& l : labels_)
          if (l == v.as_label()) return true;
        return false;
    }
    return false;
  }

  std::size_t size() const {
    switch (kind_) {
      case Kind::Bool: return 2;
      case Kind::Int: return static_cast<std::size_t>(hi_ - lo_ + 1);
      case Kind::Enum: return labels_.size();
    }
    return 0;
  }

  // Canonical value order: false < true, ascending integers, enum labels in
  // declaration order. This order is what the solver's value selection uses.
  Value value_at(std::size_t i) const {
    switch (kind_) {
      case Kind::Bool: return Value::boolean(i != 0);
      case Kind::Int: return Value::integer(lo_ + static_cast<std::int64_t>(i));
      case Kind::Enum: return Value::label(labels_.at(i));
    }
    return Value();
  }

  std::optional<std::size_t> index_of(const Value& v) const {
    if (!admits(v)) return std::nullopt;
    switch (kind_) {
      case Kind::Bool: return v.as_bool() ? 1u : 0u;
      case Kind::Int: return static_cast<std::size_t>(v.as_int() - lo_);
      case Kind::Enum:
        for (std::size_t i = 0; i < labels_.size(); ++i)
          if (labels_[i] == v.as_label()) return i;
        return std::nullopt;
    }
    return std::nullopt;
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Bool: return "bool";
      case Kind::Int:
        return "int[" + std::to_string(lo_) + ".." + std::to_string(hi_) + "]";
      case Kind::Enum: {
        std::string out = "enum{";
        for (std::size_t i = 0; i < labels_.size(); ++i) {
          if (i) out += ",";
          out += labels_[i];
        }
        out += "}";
        return out;
      }
    }
    return "?";
  }

  bool operator==(const Domain&) const = default;

 private:
  Kind kind_ = Kind::Bool;
  std::int64_t lo_ = 0;
  std::int64_t hi_ = 0;
  std::vector<std::string> labels_;
};

}  // namespace confmend
