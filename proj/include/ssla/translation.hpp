#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ssla/expression.hpp"

namespace ssla {

/// Directed multimap from one dimension to the next more concrete one.
/// Only [Target,Risk], [Risk,Function] and [Function,Technique] exist.
class TranslationTable {
public:
    using Row = std::pair<Oid, std::vector<Oid>>;

    /// Throws FormatError unless `target` immediately follows `source`.
    TranslationTable(Dimension source, Dimension target);

    Dimension source() const noexcept { return source_; }
    Dimension target() const noexcept { return target_; }
    const std::vector<Row>& rows() const noexcept { return rows_; }

    /// Appends `values` to the row for `key`, creating it if needed.
    /// Duplicate values are dropped. Throws Error(DimensionMismatch).
    void add_row(const Oid& key, const std::vector<Oid>& values);

    /// nullptr when there is no row for `key`.
    const std::vector<Oid>* forward(const Oid& key) const;
    /// Every key whose row contains `value`, in table order.
    std::vector<Oid> reverse(const Oid& value) const;

private:
    Dimension source_;
    Dimension target_;
    std::vector<Row> rows_;
};

/// Reads `{"source": "Risk", "target": "Function", "rows": [{"key": ..., "values": [...]}]}`.
TranslationTable load_translation_table(std::string_view document);

struct TranslationResult {
    SecurityExpression input;
    std::vector<SecurityExpression> output;
    /// True iff no table row applied and the output is exactly the input.
    bool passthrough = false;
};

/// Anything that can answer translation queries: a local knowledge base or
/// a client for a remote one.
class Translator {
public:
    virtual ~Translator() = default;
    /// Throws UnknownOidError if any segment is absent from every dictionary.
    virtual TranslationResult translate(const SecurityExpression& expr, Dimension goal) const = 0;
};

/// Dictionaries and tables of one KB. Immutable once constructed; reload by
/// building a new instance.
class KnowledgeBase final : public Translator {
public:
    /// Missing dictionaries or tables are treated as empty. Throws FormatError
    /// when a table mentions an Oid its dictionaries do not define, or when
    /// two dictionaries/tables claim the same slot.
    KnowledgeBase(std::vector<Dictionary> dictionaries, std::vector<TranslationTable> tables);

    /// Loads a manifest `{"dictionaries": [paths], "tables": [paths]}`; paths
    /// are relative to the manifest's directory.
    static KnowledgeBase load(const std::filesystem::path& manifest);

    const Dictionary& dictionary(Dimension d) const;
    /// The table whose source is `source` (Technique has none).
    const TranslationTable& table(Dimension source) const;
    bool knows(const Oid& oid) const;

    TranslationResult translate(const SecurityExpression& expr, Dimension goal) const override;

private:
    std::vector<Dictionary> dictionaries_;  // indexed by Dimension
    std::vector<TranslationTable> tables_;  // indexed by source Dimension
};

inline TranslationResult translate(const Translator& kb, const SecurityExpression& expr, Dimension goal) {
    return kb.translate(expr, goal);
}

/// Per-item outcome of translate_set: exactly one of `result` or `error` is set.
struct TranslationOutcome {
    SecurityExpression input;
    std::optional<TranslationResult> result;
    std::optional<std::string> error;
};

/// Element-wise translate. Keeps input order and reports UnknownOid per item
/// without aborting the others.
std::vector<TranslationOutcome> translate_set(const Translator& kb, const ExpressionSet& set, Dimension goal);

}  // namespace ssla
