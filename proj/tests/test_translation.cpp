#include <doctest.h>

#include "oracles.hpp"
#include "ssla/error.hpp"
#include "support.hpp"

using namespace testing;

namespace {

const oracle::Tables& tables() {
    static const oracle::Tables t(fixture("kb/kb.json"));
    return t;
}

oracle::StringSet operatives_of(const TranslationResult& r) {
    oracle::StringSet out;
    for (const auto& e : r.output) out.insert(e.operative().str());
    return out;
}

std::vector<std::string> outputs(const std::string& expr, Dimension goal) {
    return strings_of(seed_kb()->translate(X(expr), goal).output);
}

}  // namespace

TEST_SUITE("translation") {

TEST_CASE("table excerpts") {
    CHECK(outputs("Target.1.1.1", Dimension::Risk) == std::vector<std::string>{"Risk.2.3.4", "Risk.3.2.3"});
    CHECK(outputs("Risk.1.1.1", Dimension::Function) ==
          std::vector<std::string>{"Function.12.1.3", "Function.17", "Function.23.3"});
    CHECK(outputs("Risk.1.1.2", Dimension::Function) == std::vector<std::string>{"Function.15", "Function.19.12.2"});
}

TEST_CASE("goal equal to the dimension is identity") {
    auto r = seed_kb()->translate(X("Function.15"), Dimension::Function);
    CHECK(r.passthrough);
    CHECK(strings_of(r.output) == std::vector<std::string>{"Function.15"});
    for (const auto& oid : tables().all_oids()) {
        auto e = X(oid);
        auto same = seed_kb()->translate(e, effective_dimension(e));
        CHECK(same.passthrough);
        CHECK(same.output == std::vector<SecurityExpression>{e});
    }
}

TEST_CASE("a function without technique rows passes through") {
    auto r = seed_kb()->translate(X("Function.15"), Dimension::Technique);
    CHECK(r.passthrough);
    CHECK(strings_of(r.output) == std::vector<std::string>{"Function.15"});
}

TEST_CASE("unknown oids are reported") {
    CHECK_THROWS_AS(seed_kb()->translate(X("Risk.9.9.9"), Dimension::Function), UnknownOidError);
    CHECK_THROWS_AS(seed_kb()->translate(X("Risk.9.9.9:Function.17"), Dimension::Technique), UnknownOidError);
}

TEST_CASE("every translation matches the path enumeration oracle") {
    for (const auto& oid : tables().all_oids()) {
        for (auto goal : kAllDimensions) {
            CAPTURE(oid);
            CAPTURE(dimension_name(goal));
            auto r = seed_kb()->translate(X(oid), goal);
            CHECK(operatives_of(r) == tables().translate(oid, std::string(dimension_name(goal))));
            CHECK(r.output.size() == operatives_of(r).size());
        }
    }
}

TEST_CASE("two-hop composition for the payment card target") {
    auto expected = tables().translate("Target.1.1.2", "Function");
    CHECK(operatives_of(seed_kb()->translate(X("Target.1.1.2"), Dimension::Function)) == expected);
    // Risk.3.1.3 has no row and is carried through unchanged
    CHECK(expected.count("Risk.3.1.3") == 1);
    auto r = seed_kb()->translate(X("Target.1.1.2"), Dimension::Function);
    CHECK_FALSE(r.passthrough);
}

TEST_CASE("composition equals the union over the intermediate hop") {
    for (const auto& target : tables().vocabulary("Target")) {
        oracle::StringSet via_risks;
        for (const auto& risk : seed_kb()->translate(X(target), Dimension::Risk).output) {
            auto f = operatives_of(seed_kb()->translate(risk, Dimension::Function));
            via_risks.insert(f.begin(), f.end());
        }
        CHECK(operatives_of(seed_kb()->translate(X(target), Dimension::Function)) == via_risks);
    }
}

TEST_CASE("reverse lookup equals a scan of every row") {
    for (const auto& tech : tables().vocabulary("Technique")) {
        oracle::StringSet scan;
        for (const auto& fn : tables().vocabulary("Function")) {
            const auto* row = tables().row(fn);
            if (row != nullptr && std::find(row->begin(), row->end(), tech) != row->end()) scan.insert(fn);
        }
        if (scan.empty()) scan.insert(tech);
        CAPTURE(tech);
        CHECK(operatives_of(seed_kb()->translate(X(tech), Dimension::Function)) == scan);
    }
    CHECK(outputs("Technique.7.2", Dimension::Function) == std::vector<std::string>{"Function.17"});
}

TEST_CASE("single hops are adjoint") {
    for (auto source : {Dimension::Target, Dimension::Risk, Dimension::Function}) {
        const auto& table = seed_kb()->table(source);
        const auto target = table.target();
        for (const auto& x : seed_kb()->dictionary(source).entries()) {
            for (const auto& y : seed_kb()->dictionary(target).entries()) {
                const auto* fwd = table.forward(x.first);
                bool in_forward = fwd != nullptr && std::find(fwd->begin(), fwd->end(), y.first) != fwd->end();
                auto rev = table.reverse(y.first);
                bool in_reverse = std::find(rev.begin(), rev.end(), x.first) != rev.end();
                CHECK(in_forward == in_reverse);
            }
        }
    }
}

TEST_CASE("no invented items") {
    oracle::StringSet in_tables;
    for (auto source : {Dimension::Target, Dimension::Risk, Dimension::Function}) {
        for (const auto& [k, values] : seed_kb()->table(source).rows()) {
            in_tables.insert(k.str());
            for (const auto& v : values) in_tables.insert(v.str());
        }
    }
    for (const auto& oid : tables().all_oids()) {
        for (auto goal : kAllDimensions) {
            auto r = seed_kb()->translate(X(oid), goal);
            for (const auto& e : r.output) {
                if (e.operative().str() == oid) continue;
                CHECK(in_tables.count(e.operative().str()) == 1);
            }
        }
    }
}

TEST_CASE("compound context is kept below the goal") {
    CHECK(outputs("Risk.1.1.2:Function.19.12.2", Dimension::Technique) ==
          std::vector<std::string>{"Risk.1.1.2:Technique.3.5"});
    CHECK(outputs("Target.1.1.1:Risk.3.2.3", Dimension::Function) ==
          std::vector<std::string>{"Target.1.1.1:Function.14.2"});
    // context at or past the goal is dropped
    CHECK(outputs("Function.17:Technique.7.2", Dimension::Function) == std::vector<std::string>{"Function.17"});
    CHECK(outputs("Risk.2.3.2:Function.18.1", Dimension::Risk) == std::vector<std::string>{"Risk.2.3.2"});
}

TEST_CASE("translate_set keeps order and reports per item") {
    auto out = translate_set(*seed_kb(), reqs({"Risk.1.1.1", "Risk.9.9", "Risk.1.1.2"}), Dimension::Function);
    REQUIRE(out.size() == 3);
    CHECK(out[0].result->output.size() == 3);
    CHECK(out[1].error.has_value());
    CHECK_FALSE(out[1].result.has_value());
    CHECK(out[2].result->output.size() == 2);
    CHECK(translate_set(*seed_kb(), reqs({}), Dimension::Function).empty());
}

TEST_CASE("empty tables make every translation a passthrough") {
    auto kb = KnowledgeBase::load(fixture("kb_empty/kb.json"));
    for (const auto& oid : tables().all_oids()) {
        for (auto goal : kAllDimensions) {
            auto r = kb.translate(X(oid), goal);
            CHECK(r.passthrough);
            CHECK(strings_of(r.output) == std::vector<std::string>{oid});
        }
    }
}

TEST_CASE("tables are validated against the dictionaries") {
    std::vector<Dictionary> dicts;
    Dictionary risk(Dimension::Risk);
    risk.add(Oid::parse("Risk.1"), "r");
    Dictionary fn(Dimension::Function);
    fn.add(Oid::parse("Function.1"), "f");
    dicts.push_back(risk);
    dicts.push_back(fn);

    TranslationTable ok(Dimension::Risk, Dimension::Function);
    ok.add_row(Oid::parse("Risk.1"), {Oid::parse("Function.1"), Oid::parse("Function.1")});
    CHECK(ok.forward(Oid::parse("Risk.1"))->size() == 1);
    CHECK_NOTHROW(KnowledgeBase(dicts, {ok}));

    TranslationTable bad(Dimension::Risk, Dimension::Function);
    bad.add_row(Oid::parse("Risk.1"), {Oid::parse("Function.2")});
    CHECK_THROWS_AS(KnowledgeBase(dicts, {bad}), FormatError);

    CHECK_THROWS_AS(TranslationTable(Dimension::Target, Dimension::Function), FormatError);
    CHECK_THROWS_AS(TranslationTable(Dimension::Function, Dimension::Risk), FormatError);
    try {
        ok.add_row(Oid::parse("Function.1"), {Oid::parse("Function.1")});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("table file format") {
    auto t = load_translation_table(
        R"({"source":"Function","target":"Technique","rows":[{"key":"Function.1","values":["Technique.2"]}]})");
    CHECK(t.source() == Dimension::Function);
    CHECK(t.rows().size() == 1);
    CHECK_THROWS_AS(load_translation_table(R"({"source":"Function","target":"Technique"})"), FormatError);
    CHECK_THROWS_AS(load_translation_table("nope"), FormatError);
}

}  // TEST_SUITE
