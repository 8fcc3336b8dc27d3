#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssla {

/// The four viewpoints a security statement can be made from, ordered from
/// most abstract to most concrete.
enum class Dimension : std::uint8_t { Target = 0, Risk = 1, Function = 2, Technique = 3 };

inline constexpr std::array<Dimension, 4> kAllDimensions = {
    Dimension::Target, Dimension::Risk, Dimension::Function, Dimension::Technique};

std::string_view dimension_name(Dimension d) noexcept;
std::optional<Dimension> try_parse_dimension(std::string_view name) noexcept;
/// Throws SyntaxError for anything but the four case-sensitive names.
Dimension parse_dimension(std::string_view name);

/// A dimension-prefixed object identifier, e.g. `Risk.1.1.2`.
class Oid {
public:
    Oid(Dimension dimension, std::vector<std::uint32_t> arcs);

    /// Accepts canonical text only: no whitespace, no leading zeros in arcs.
    static Oid parse(std::string_view text);

    Dimension dimension() const noexcept { return dimension_; }
    const std::vector<std::uint32_t>& arcs() const noexcept { return arcs_; }
    std::string str() const;

    friend auto operator<=>(const Oid&, const Oid&) = default;
    friend bool operator==(const Oid&, const Oid&) = default;

private:
    Dimension dimension_;
    std::vector<std::uint32_t> arcs_;
};

/// One vocabulary item, possibly a colon compound such as
/// `Risk.1.1.2:Function.19.12.2`. Segment dimensions strictly increase and
/// the last segment is the operative one.
class SecurityExpression {
public:
    explicit SecurityExpression(Oid single);
    explicit SecurityExpression(std::vector<Oid> segments);

    const std::vector<Oid>& segments() const noexcept { return segments_; }
    const Oid& operative() const noexcept { return segments_.back(); }
    /// Every segment except the operative one.
    std::vector<Oid> context() const;
    std::string str() const;

    friend auto operator<=>(const SecurityExpression&, const SecurityExpression&) = default;
    friend bool operator==(const SecurityExpression&, const SecurityExpression&) = default;

private:
    std::vector<Oid> segments_;
};

/// Throws SyntaxError on malformed text and DimensionOrderError when compound
/// segments are not in strictly increasing dimension order.
SecurityExpression parse_expression(std::string_view text);

Dimension effective_dimension(const SecurityExpression& expr) noexcept;

enum class ExpressionRole { Requirement, Capability, SslaEntry };

std::string_view role_name(ExpressionRole role) noexcept;
ExpressionRole parse_role(std::string_view name);

/// Insertion-ordered set of expressions.
class ExpressionSet {
public:
    explicit ExpressionSet(ExpressionRole role = ExpressionRole::Requirement) : role_(role) {}

    /// Throws FormatError on a duplicate.
    static ExpressionSet from_strings(ExpressionRole role, const std::vector<std::string>& items);

    ExpressionRole role() const noexcept { return role_; }
    const std::vector<SecurityExpression>& items() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }

    bool contains(const SecurityExpression& expr) const;
    /// Returns false (and leaves the set unchanged) if already present.
    bool insert(SecurityExpression expr);
    /// Distinct operative Oids, in first-seen order.
    std::vector<Oid> operatives() const;
    std::vector<std::string> strings() const;

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    friend bool operator==(const ExpressionSet&, const ExpressionSet&) = default;

private:
    ExpressionRole role_;
    std::vector<SecurityExpression> items_;
};

/// Vocabulary of one dimension. Labels are for display only.
class Dictionary {
public:
    explicit Dictionary(Dimension dimension) : dimension_(dimension) {}

    Dimension dimension() const noexcept { return dimension_; }
    const std::map<Oid, std::string>& entries() const noexcept { return entries_; }
    bool contains(const Oid& oid) const { return entries_.count(oid) != 0; }
    std::optional<std::string> label(const Oid& oid) const;

    /// Numeric OID arc prefix registered for this dictionary, if any. Stored
    /// for documentation; matching never looks at it.
    const std::optional<std::string>& arc_prefix() const noexcept { return arc_prefix_; }
    void set_arc_prefix(std::string prefix) { arc_prefix_ = std::move(prefix); }

    /// Throws Error(DimensionMismatch) or Error(DuplicateOid).
    void add(const Oid& oid, std::string label);

private:
    Dimension dimension_;
    std::map<Oid, std::string> entries_;
    std::optional<std::string> arc_prefix_;
};

/// Reads the dictionary file format:
/// `{"dimension": "Risk", "arc_prefix": "...", "entries": [{"oid": ..., "label": ...}]}`
/// (`arc_prefix` optional).
Dictionary load_dictionary(std::istream& document);
Dictionary load_dictionary(std::string_view document);

}  // namespace ssla
