#include "fedtx/value.hpp"

#include "fedtx/errors.hpp"

namespace fedtx {

std::string_view toString(ValueType type) {
  switch (type) {
    case ValueType::kNull: return "null";
    case ValueType::kBoolean: return "boolean";
    case ValueType::kInteger: return "integer";
    case ValueType::kText: return "text";
    case ValueType::kBlob: return "blob";
  }
  return "?";
}

namespace {

[[noreturn]] void wrongType(ValueType want, ValueType got) {
  throw Error(ErrorCode::kTypeMismatch,
              "expected " + std::string(toString(want)) + ", got " + std::string(toString(got)));
}

template <class T>
int threeWay(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

}  // namespace

bool Value::asBool() const {
  if (type() != ValueType::kBoolean) wrongType(ValueType::kBoolean, type());
  return std::get<bool>(data_);
}

std::int64_t Value::asInt() const {
  if (type() != ValueType::kInteger) wrongType(ValueType::kInteger, type());
  return std::get<std::int64_t>(data_);
}

const std::string& Value::asText() const {
  if (type() != ValueType::kText) wrongType(ValueType::kText, type());
  return std::get<std::string>(data_);
}

const Blob& Value::asBlob() const {
  if (type() != ValueType::kBlob) wrongType(ValueType::kBlob, type());
  return std::get<Blob>(data_);
}

int compare(const Value& a, const Value& b) {
  if (a.type() != b.type()) {
    throw Error(ErrorCode::kTypeMismatch, "cannot compare " + std::string(toString(a.type())) +
                                              " with " + std::string(toString(b.type())));
  }
  switch (a.type()) {
    case ValueType::kNull: return 0;
    case ValueType::kBoolean: return threeWay(a.asBool(), b.asBool());
    case ValueType::kInteger: return threeWay(a.asInt(), b.asInt());
    case ValueType::kText: return threeWay(a.asText(), b.asText());
    case ValueType::kBlob: return threeWay(a.asBlob().bytes, b.asBlob().bytes);
  }
  return 0;
}

std::string Value::toString() const {
  switch (type()) {
    case ValueType::kNull: return "null";
    case ValueType::kBoolean: return asBool() ? "true" : "false";
    case ValueType::kInteger: return std::to_string(asInt());
    case ValueType::kText: {
      std::string out = "\"";
      for (char c : asText()) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      out.push_back('"');
      return out;
    }
    case ValueType::kBlob: {
      static constexpr char kHex[] = "0123456789abcdef";
      std::string out = "0x";
      for (unsigned char c : asBlob().bytes) {
        out.push_back(kHex[c >> 4]);
        out.push_back(kHex[c & 0xf]);
      }
      return out;
    }
  }
  return "?";
}

}  // namespace fedtx
