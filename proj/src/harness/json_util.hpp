#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "wrs/space.hpp"

namespace wrs::harness::detail {

/// Integers map to int64, other numbers to double, strings to string.
template <class Json>
std::optional<Value> value_from_json(const Json& j) {
  if (j.is_number_integer()) {
    if (j.is_number_unsigned() && j.template get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
      return std::nullopt;
    return Value{j.template get<std::int64_t>()};
  }
  if (j.is_number_float()) return Value{j.template get<double>()};
  if (j.is_string()) return Value{j.template get<std::string>()};
  return std::nullopt;
}

template <class Json>
Json value_to_json(const Value& v) {
  return std::visit([](const auto& x) { return Json(x); }, v);
}

/// "%.17g": enough digits to round-trip a double.
std::string format_double(double v);

}  // namespace wrs::harness::detail
