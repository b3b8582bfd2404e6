#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace fedtx {

struct Blob {
  std::string bytes;
  bool operator==(const Blob&) const = default;
};

enum class ValueType : std::uint8_t { kNull, kBoolean, kInteger, kText, kBlob };

std::string_view toString(ValueType type);

/// Tagged scalar column value. Equality is tag-aware (values of different
/// tags are never equal); ordering across tags raises kTypeMismatch.
class Value {
 public:
  Value() = default;
  explicit Value(bool v) : data_(v) {}
  explicit Value(std::int64_t v) : data_(v) {}
  explicit Value(int v) : data_(static_cast<std::int64_t>(v)) {}
  explicit Value(std::string v) : data_(std::move(v)) {}
  explicit Value(const char* v) : data_(std::string(v)) {}
  explicit Value(Blob v) : data_(std::move(v)) {}

  static Value null() { return Value(); }
  static Value text(std::string v) { return Value(std::move(v)); }
  static Value blob(std::string bytes) { return Value(Blob{std::move(bytes)}); }

  ValueType type() const noexcept { return static_cast<ValueType>(data_.index()); }
  bool isNull() const noexcept { return type() == ValueType::kNull; }

  bool asBool() const;
  std::int64_t asInt() const;
  const std::string& asText() const;
  const Blob& asBlob() const;

  bool operator==(const Value& other) const = default;

  // <0, 0, >0. Throws Error(kTypeMismatch) when tags differ.
  friend int compare(const Value& a, const Value& b);
  friend bool operator<(const Value& a, const Value& b) { return compare(a, b) < 0; }

  std::string toString() const;

 private:
  std::variant<std::monostate, bool, std::int64_t, std::string, Blob> data_;
};

using Columns = std::map<std::string, Value, std::less<>>;

}  // namespace fedtx
