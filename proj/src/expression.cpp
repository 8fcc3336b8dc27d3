#include "ssla/expression.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ssla/error.hpp"

namespace ssla {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::uint32_t parse_arc(std::string_view arc, std::string_view whole) {
    if (arc.empty()) {
        throw SyntaxError("empty arc in '" + std::string(whole) + "'");
    }
    if (arc.size() > 1 && arc.front() == '0') {
        throw SyntaxError("leading zero in arc of '" + std::string(whole) + "'");
    }
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(arc.data(), arc.data() + arc.size(), value);
    if (ec != std::errc() || ptr != arc.data() + arc.size()) {
        throw SyntaxError("non-numeric arc '" + std::string(arc) + "' in '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

std::string_view dimension_name(Dimension d) noexcept {
    switch (d) {
        case Dimension::Target: return "Target";
        case Dimension::Risk: return "Risk";
        case Dimension::Function: return "Function";
        case Dimension::Technique: return "Technique";
    }
    return "?";
}

std::optional<Dimension> try_parse_dimension(std::string_view name) noexcept {
    for (auto d : kAllDimensions) {
        if (dimension_name(d) == name) return d;
    }
    return std::nullopt;
}

Dimension parse_dimension(std::string_view name) {
    if (auto d = try_parse_dimension(name)) return *d;
    throw SyntaxError("unknown dimension '" + std::string(name) + "'");
}

Oid::Oid(Dimension dimension, std::vector<std::uint32_t> arcs)
    : dimension_(dimension), arcs_(std::move(arcs)) {
    if (arcs_.empty()) throw SyntaxError("OID needs at least one arc");
}

Oid Oid::parse(std::string_view text) {
    auto parts = split(text, '.');
    if (parts.size() < 2) {
        throw SyntaxError("OID '" + std::string(text) + "' has no arcs");
    }
    auto dim = try_parse_dimension(parts.front());
    if (!dim) {
        throw SyntaxError("unknown dimension in '" + std::string(text) + "'");
    }
    std::vector<std::uint32_t> arcs;
    arcs.reserve(parts.size() - 1);
    for (std::size_t i = 1; i < parts.size(); ++i) arcs.push_back(parse_arc(parts[i], text));
    return Oid(*dim, std::move(arcs));
}

std::string Oid::str() const {
    std::string out(dimension_name(dimension_));
    for (auto arc : arcs_) {
        out += '.';
        out += std::to_string(arc);
    }
    return out;
}

SecurityExpression::SecurityExpression(Oid single) : segments_{std::move(single)} {}

SecurityExpression::SecurityExpression(std::vector<Oid> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw SyntaxError("expression needs at least one segment");
    for (std::size_t i = 1; i < segments_.size(); ++i) {
        if (segments_[i - 1].dimension() >= segments_[i].dimension()) {
            throw DimensionOrderError("compound segments out of order: '" + str() + "'");
        }
    }
}

std::vector<Oid> SecurityExpression::context() const {
    return {segments_.begin(), segments_.end() - 1};
}

std::string SecurityExpression::str() const {
    std::string out;
    for (const auto& seg : segments_) {
        if (!out.empty()) out += ':';
        out += seg.str();
    }
    return out;
}

SecurityExpression parse_expression(std::string_view text) {
    if (text.empty()) throw SyntaxError("empty expression");
    std::vector<Oid> segments;
    for (auto part : split(text, ':')) segments.push_back(Oid::parse(part));
    return SecurityExpression(std::move(segments));
}

Dimension effective_dimension(const SecurityExpression& expr) noexcept {
    return expr.operative().dimension();
}

std::string_view role_name(ExpressionRole role) noexcept {
    switch (role) {
        case ExpressionRole::Requirement: return "Requirement";
        case ExpressionRole::Capability: return "Capability";
        case ExpressionRole::SslaEntry: return "SslaEntry";
    }
    return "?";
}

ExpressionRole parse_role(std::string_view name) {
    for (auto r : {ExpressionRole::Requirement, ExpressionRole::Capability, ExpressionRole::SslaEntry}) {
        if (role_name(r) == name) return r;
    }
    throw FormatError("unknown expression role '" + std::string(name) + "'");
}

ExpressionSet ExpressionSet::from_strings(ExpressionRole role, const std::vector<std::string>& items) {
    ExpressionSet set(role);
    for (const auto& s : items) {
        if (!set.insert(parse_expression(s))) {
            throw FormatError("duplicate expression '" + s + "'");
        }
    }
    return set;
}

bool ExpressionSet::contains(const SecurityExpression& expr) const {
    return std::find(items_.begin(), items_.end(), expr) != items_.end();
}

bool ExpressionSet::insert(SecurityExpression expr) {
    if (contains(expr)) return false;
    items_.push_back(std::move(expr));
    return true;
}

std::vector<Oid> ExpressionSet::operatives() const {
    std::vector<Oid> out;
    for (const auto& item : items_) {
        if (std::find(out.begin(), out.end(), item.operative()) == out.end()) {
            out.push_back(item.operative());
        }
    }
    return out;
}

std::vector<std::string> ExpressionSet::strings() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& item : items_) out.push_back(item.str());
    return out;
}

std::optional<std::string> Dictionary::label(const Oid& oid) const {
    auto it = entries_.find(oid);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void Dictionary::add(const Oid& oid, std::string label) {
    if (oid.dimension() != dimension_) {
        throw Error(ErrorCode::DimensionMismatch, "OID '" + oid.str() + "' does not belong in the " +
                                                      std::string(dimension_name(dimension_)) + " dictionary");
    }
    if (!entries_.emplace(oid, std::move(label)).second) {
        throw Error(ErrorCode::DuplicateOid, "duplicate OID '" + oid.str() + "'");
    }
}

Dictionary load_dictionary(std::istream& document) {
    std::stringstream buf;
    buf << document.rdbuf();
    return load_dictionary(buf.str());
}

Dictionary load_dictionary(std::string_view document) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw FormatError(std::string("dictionary is not valid JSON: ") + e.what());
    }
    try {
        if (!doc.is_object() || !doc.contains("dimension") || !doc.contains("entries")) {
            throw FormatError("dictionary needs 'dimension' and 'entries'");
        }
        auto dim = try_parse_dimension(doc.at("dimension").get<std::string>());
        if (!dim) throw FormatError("dictionary has an unknown dimension");
        Dictionary dict(*dim);
        if (doc.contains("arc_prefix")) dict.set_arc_prefix(doc.at("arc_prefix").get<std::string>());
        const auto& entries = doc.at("entries");
        if (!entries.is_array()) throw FormatError("'entries' must be a list");
        for (const auto& entry : entries) {
            Oid oid = [&] {
                try {
                    return Oid::parse(entry.at("oid").get<std::string>());
                } catch (const SyntaxError& e) {
                    throw FormatError(std::string("bad dictionary OID: ") + e.what());
                }
            }();
            dict.add(oid, entry.at("label").get<std::string>());
        }
        return dict;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed dictionary: ") + e.what());
    }
}

}  // namespace ssla
