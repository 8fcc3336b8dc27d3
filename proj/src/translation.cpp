#include "ssla/translation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ssla/error.hpp"

namespace ssla {

namespace {

int index_of(Dimension d) { return static_cast<int>(d); }

Dimension dimension_at(int i) { return static_cast<Dimension>(i); }

void push_unique(std::vector<Oid>& out, const Oid& oid) {
    if (std::find(out.begin(), out.end(), oid) == out.end()) out.push_back(oid);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Oid parse_table_oid(const nlohmann::json& j) {
    try {
        return Oid::parse(j.get<std::string>());
    } catch (const SyntaxError& e) {
        throw FormatError(std::string("bad table OID: ") + e.what());
    }
}

}  // namespace

TranslationTable::TranslationTable(Dimension source, Dimension target) : source_(source), target_(target) {
    if (index_of(target) != index_of(source) + 1) {
        throw FormatError("no translation table type [" + std::string(dimension_name(source)) + ", " +
                          std::string(dimension_name(target)) + "]");
    }
}

void TranslationTable::add_row(const Oid& key, const std::vector<Oid>& values) {
    if (key.dimension() != source_) {
        throw Error(ErrorCode::DimensionMismatch, "row key '" + key.str() + "' is not a " +
                                                      std::string(dimension_name(source_)) + " OID");
    }
    for (const auto& v : values) {
        if (v.dimension() != target_) {
            throw Error(ErrorCode::DimensionMismatch, "row value '" + v.str() + "' is not a " +
                                                          std::string(dimension_name(target_)) + " OID");
        }
    }
    auto it = std::find_if(rows_.begin(), rows_.end(), [&](const Row& r) { return r.first == key; });
    if (it == rows_.end()) {
        rows_.emplace_back(key, std::vector<Oid>{});
        it = rows_.end() - 1;
    }
    for (const auto& v : values) push_unique(it->second, v);
}

const std::vector<Oid>* TranslationTable::forward(const Oid& key) const {
    for (const auto& row : rows_) {
        if (row.first == key) return &row.second;
    }
    return nullptr;
}

std::vector<Oid> TranslationTable::reverse(const Oid& value) const {
    std::vector<Oid> keys;
    for (const auto& [key, values] : rows_) {
        if (std::find(values.begin(), values.end(), value) != values.end()) keys.push_back(key);
    }
    return keys;
}

TranslationTable load_translation_table(std::string_view document) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw FormatError(std::string("translation table is not valid JSON: ") + e.what());
    }
    try {
        if (!doc.is_object()) throw FormatError("translation table must be an object");
        auto source = try_parse_dimension(doc.at("source").get<std::string>());
        auto target = try_parse_dimension(doc.at("target").get<std::string>());
        if (!source || !target) throw FormatError("translation table has an unknown dimension");
        TranslationTable table(*source, *target);
        for (const auto& row : doc.at("rows")) {
            std::vector<Oid> values;
            for (const auto& v : row.at("values")) values.push_back(parse_table_oid(v));
            table.add_row(parse_table_oid(row.at("key")), values);
        }
        return table;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed translation table: ") + e.what());
    }
}

KnowledgeBase::KnowledgeBase(std::vector<Dictionary> dictionaries, std::vector<TranslationTable> tables) {
    for (auto d : kAllDimensions) dictionaries_.emplace_back(d);
    for (int i = 0; i < 3; ++i) tables_.emplace_back(dimension_at(i), dimension_at(i + 1));

    std::vector<bool> dict_seen(4, false);
    for (auto& dict : dictionaries) {
        auto i = index_of(dict.dimension());
        if (dict_seen[i]) throw FormatError("two dictionaries for " + std::string(dimension_name(dict.dimension())));
        dict_seen[i] = true;
        dictionaries_[i] = std::move(dict);
    }
    std::vector<bool> table_seen(3, false);
    for (auto& table : tables) {
        auto i = index_of(table.source());
        if (table_seen[i]) {
            throw FormatError("two translation tables with source " + std::string(dimension_name(table.source())));
        }
        table_seen[i] = true;
        for (const auto& [key, values] : table.rows()) {
            if (!knows(key)) throw FormatError("table key '" + key.str() + "' is not in its dictionary");
            for (const auto& v : values) {
                if (!knows(v)) throw FormatError("table value '" + v.str() + "' is not in its dictionary");
            }
        }
        tables_[i] = std::move(table);
    }
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& manifest) {
    using nlohmann::json;
    auto base = manifest.parent_path();
    json doc;
    try {
        doc = json::parse(read_file(manifest));
    } catch (const json::exception& e) {
        throw FormatError("KB manifest " + manifest.string() + " is not valid JSON: " + e.what());
    }
    std::vector<Dictionary> dicts;
    std::vector<TranslationTable> tables;
    try {
        for (const auto& p : doc.at("dictionaries")) dicts.push_back(load_dictionary(read_file(base / p.get<std::string>())));
        for (const auto& p : doc.at("tables")) tables.push_back(load_translation_table(read_file(base / p.get<std::string>())));
    } catch (const json::exception& e) {
        throw FormatError("malformed KB manifest " + manifest.string() + ": " + e.what());
    }
    return KnowledgeBase(std::move(dicts), std::move(tables));
}

const Dictionary& KnowledgeBase::dictionary(Dimension d) const { return dictionaries_[index_of(d)]; }

const TranslationTable& KnowledgeBase::table(Dimension source) const {
    if (source == Dimension::Technique) throw FormatError("no table has Technique as its source");
    return tables_[index_of(source)];
}

bool KnowledgeBase::knows(const Oid& oid) const { return dictionary(oid.dimension()).contains(oid); }

TranslationResult KnowledgeBase::translate(const SecurityExpression& expr, Dimension goal) const {
    for (const auto& seg : expr.segments()) {
        if (!knows(seg)) throw UnknownOidError("unknown OID '" + seg.str() + "' in '" + expr.str() + "'");
    }

    const auto from = index_of(effective_dimension(expr));
    const auto to = index_of(goal);
    if (from == to) return {expr, {expr}, true};

    std::vector<Oid> frontier{expr.operative()};
    bool applied = false;
    if (from < to) {
        for (int hop = from; hop < to; ++hop) {
            const auto& tbl = tables_[hop];
            std::vector<Oid> next;
            for (const auto& item : frontier) {
                const std::vector<Oid>* row = index_of(item.dimension()) == hop ? tbl.forward(item) : nullptr;
                if (row == nullptr) {
                    push_unique(next, item);
                    continue;
                }
                applied = true;
                for (const auto& v : *row) push_unique(next, v);
            }
            frontier = std::move(next);
        }
    } else {
        for (int hop = from; hop > to; --hop) {
            const auto& tbl = tables_[hop - 1];
            std::vector<Oid> next;
            for (const auto& item : frontier) {
                std::vector<Oid> keys;
                if (index_of(item.dimension()) == hop) keys = tbl.reverse(item);
                if (keys.empty()) {
                    push_unique(next, item);
                    continue;
                }
                applied = true;
                for (const auto& k : keys) push_unique(next, k);
            }
            frontier = std::move(next);
        }
    }

    TranslationResult result{expr, {}, false};
    for (const auto& tail : frontier) {
        std::vector<Oid> segments;
        for (const auto& ctx : expr.context()) {
            if (index_of(ctx.dimension()) < to && ctx.dimension() < tail.dimension()) segments.push_back(ctx);
        }
        segments.push_back(tail);
        SecurityExpression out(std::move(segments));
        if (std::find(result.output.begin(), result.output.end(), out) == result.output.end()) {
            result.output.push_back(std::move(out));
        }
    }
    result.passthrough = !applied && result.output.size() == 1 && result.output.front() == expr;
    return result;
}

std::vector<TranslationOutcome> translate_set(const Translator& kb, const ExpressionSet& set, Dimension goal) {
    std::vector<TranslationOutcome> out;
    out.reserve(set.size());
    for (const auto& item : set) {
        try {
            out.push_back({item, kb.translate(item, goal), std::nullopt});
        } catch (const UnknownOidError& e) {
            out.push_back({item, std::nullopt, e.what()});
        }
    }
    return out;
}

}  // namespace ssla
