#include "ssla/document.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "ssla/error.hpp"

namespace ssla {

namespace {

void reject_floats(const Json& v) {
    if (v.is_number_float()) throw FormatError("floating point values have no canonical form");
    if (v.is_structured()) {
        for (const auto& child : v) reject_floats(child);
    }
}

}  // namespace

std::string canonical_dump(const Json& value) {
    reject_floats(value);
    try {
        return value.dump(-1, ' ', false, Json::error_handler_t::strict);
    } catch (const Json::exception& e) {
        throw FormatError(std::string("cannot encode document: ") + e.what());
    }
}

Json parse_json(std::string_view text) {
    std::vector<std::set<std::string>> open_objects;
    std::string duplicate;
    Json::parser_callback_t track = [&](int, Json::parse_event_t event, Json& parsed) {
        switch (event) {
            case Json::parse_event_t::object_start:
                open_objects.emplace_back();
                break;
            case Json::parse_event_t::object_end:
                open_objects.pop_back();
                break;
            case Json::parse_event_t::key:
                if (!open_objects.back().insert(parsed.get<std::string>()).second && duplicate.empty()) {
                    duplicate = parsed.get<std::string>();
                }
                break;
            default:
                break;
        }
        return true;
    };
    Json out;
    try {
        out = Json::parse(text, track);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::MalformedMessage, std::string("invalid JSON: ") + e.what());
    }
    if (!duplicate.empty()) throw Error(ErrorCode::MalformedMessage, "duplicate key '" + duplicate + "'");
    return out;
}

Json WireDocument::to_json() const {
    return Json{{"type", type}, {"version", std::string(kWireVersion)}, {"body", body}};
}

WireDocument WireDocument::from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("version")) {
        throw Error(ErrorCode::MalformedMessage, "document has no version");
    }
    if (!doc["version"].is_string() || doc["version"].get<std::string>() != kWireVersion) {
        throw Error(ErrorCode::UnsupportedVersion, "unsupported document version " + doc["version"].dump());
    }
    expect_keys(doc, {"type", "version", "body"});
    if (!doc["type"].is_string() || !doc["body"].is_object()) {
        throw Error(ErrorCode::MalformedMessage, "document needs a string type and an object body");
    }
    return {doc["type"].get<std::string>(), doc["body"]};
}

void expect_keys(const Json& obj, std::initializer_list<std::string_view> required,
                 std::initializer_list<std::string_view> optional) {
    if (!obj.is_object()) throw Error(ErrorCode::MalformedMessage, "expected an object");
    for (auto key : required) {
        if (!obj.contains(std::string(key))) {
            throw Error(ErrorCode::MalformedMessage, "missing field '" + std::string(key) + "'");
        }
    }
    for (const auto& [key, _] : obj.items()) {
        auto known = [&](std::initializer_list<std::string_view> keys) {
            return std::find(keys.begin(), keys.end(), key) != keys.end();
        };
        if (!known(required) && !known(optional)) {
            throw Error(ErrorCode::MalformedMessage, "unexpected field '" + key + "'");
        }
    }
}

}  // namespace ssla
