#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ssla {

using Json = nlohmann::json;

inline constexpr std::string_view kWireVersion = "1";

/// Canonical text: keys sorted bytewise, no insignificant whitespace, UTF-8.
/// Floating point values are rejected (FormatError) because their text form
/// is not unique.
std::string canonical_dump(const Json& value);

/// Parses any JSON text; throws Error(MalformedMessage).
Json parse_json(std::string_view text);

/// `{"type": ..., "version": "1", "body": {...}}`
struct WireDocument {
    std::string type;
    Json body;

    Json to_json() const;
    std::string canonical() const { return canonical_dump(to_json()); }
    /// Throws Error(MalformedMessage) or Error(UnsupportedVersion).
    static WireDocument from_json(const Json& doc);
    static WireDocument parse(std::string_view text) { return from_json(parse_json(text)); }
};

/// Throws Error(MalformedMessage) unless `obj` is an object whose keys are all
/// in `required` or `optional`, with every required key present.
void expect_keys(const Json& obj, std::initializer_list<std::string_view> required,
                 std::initializer_list<std::string_view> optional = {});

}  // namespace ssla
