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

std::vector<std::string> subset(const std::vector<std::string>& universe, std::uint64_t mask) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        if ((mask >> i & 1U) != 0) out.push_back(universe[i]);
    }
    return out;
}

bool satisfied(const std::string& req, const std::vector<std::string>& cap_list, DecisionPolicy policy = {}) {
    return decide_one(*seed_kb(), X(req), caps(cap_list), policy) == Satisfaction::Satisfied;
}

}  // namespace

TEST_SUITE("decision") {

TEST_CASE("technique requirements need an exact match") {
    CHECK(satisfied("Technique.7.2", {"Technique.7.2", "Technique.3.1"}));
    CHECK_FALSE(satisfied("Technique.3.3", {"Technique.3.1"}));
    CHECK(satisfied("Function.17:Technique.7.2", {"Technique.7.2"}));
    CHECK(satisfied("Technique.7.2", {"Function.17:Technique.7.2"}));
}

TEST_CASE("a requirement outside the vocabulary is reported") {
    CHECK_THROWS_AS(satisfied("Risk.9.9", {"Technique.3.1"}), UnknownOidError);
}

TEST_CASE("network sniffing needs all three functions covered") {
    const std::vector<std::string> full{"Technique.4.2", "Technique.7.2", "Technique.3.3"};
    CHECK(satisfied("Risk.1.1.1", full));
    for (std::size_t drop = 0; drop < full.size(); ++drop) {
        auto fewer = full;
        fewer.erase(fewer.begin() + static_cast<long>(drop));
        CAPTURE(drop);
        CHECK_FALSE(satisfied("Risk.1.1.1", fewer));
    }
}

TEST_CASE("function capabilities cover themselves") {
    CHECK(satisfied("Function.15", {"Function.15"}));
    CHECK_FALSE(satisfied("Function.15", {"Technique.3.1", "Technique.3.5"}));
    CHECK(satisfied("Risk.1.1.2", {"Function.15", "Technique.3.5"}));
}

TEST_CASE("unknown capabilities cover nothing") {
    CHECK_FALSE(satisfied("Function.17", {"Technique.99.1"}));
    CHECK(satisfied("Function.17", {"Technique.99.1", "Technique.7.3"}));
}

TEST_CASE("exhaustive agreement with the set cover oracle") {
    const auto& techniques = tables().vocabulary("Technique");
    REQUIRE(techniques.size() <= 6);
    std::vector<std::string> requirements = tables().all_oids();
    requirements.push_back("Risk.1.1.2:Function.19.12.2");
    requirements.push_back("Target.1.1.1:Risk.2.3.4");
    std::size_t compared = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << techniques.size()); ++mask) {
        auto cap_list = subset(techniques, mask);
        for (const auto& req : requirements) {
            CAPTURE(req);
            CAPTURE(mask);
            CHECK(satisfied(req, cap_list) == oracle::brute_force_satisfied(tables(), req, cap_list));
            ++compared;
        }
    }
    CHECK(compared == (std::size_t{1} << techniques.size()) * requirements.size());
}

TEST_CASE("oracle agreement with function capabilities mixed in") {
    auto universe = tables().vocabulary("Technique");
    universe.push_back("Function.15");
    universe.push_back("Function.30");
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << universe.size()); ++mask) {
        auto cap_list = subset(universe, mask);
        for (const auto& req : tables().all_oids()) {
            CHECK(satisfied(req, cap_list) == oracle::brute_force_satisfied(tables(), req, cap_list));
        }
    }
}

TEST_CASE("full coverage means acceptance, not the inverted early return") {
    const auto& techniques = tables().vocabulary("Technique");
    std::size_t disagreements = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << techniques.size()); ++mask) {
        auto cap_list = subset(techniques, mask);
        for (const auto& req : tables().all_oids()) {
            int all = oracle::all_entries_match(tables(), req, cap_list);
            int inverted = oracle::inverted_early_return(tables(), req, cap_list);
            CHECK(satisfied(req, cap_list) == (all == 1));
            if (all != inverted) ++disagreements;
        }
    }
    // the inverted loop returns 0 on a fully covered requirement
    CHECK(disagreements > 0);
    const std::vector<std::string> full{"Technique.4.2", "Technique.7.2", "Technique.3.3"};
    CHECK(oracle::all_entries_match(tables(), "Risk.1.1.1", full) == 1);
    CHECK(oracle::inverted_early_return(tables(), "Risk.1.1.1", full) == 0);
}

TEST_CASE("adding capabilities never loses satisfaction") {
    const auto& techniques = tables().vocabulary("Technique");
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << techniques.size()); ++mask) {
        for (std::size_t extra = 0; extra < techniques.size(); ++extra) {
            auto bigger = mask | (std::uint64_t{1} << extra);
            for (const auto& req : tables().all_oids()) {
                if (satisfied(req, subset(techniques, mask))) CHECK(satisfied(req, subset(techniques, bigger)));
            }
        }
    }
}

TEST_CASE("decide_set overall verdicts") {
    SUBCASE("empty requirements are accepted") {
        auto v = decide_set(*seed_kb(), reqs({}), sp_caps());
        CHECK(v.overall == Overall::Accept);
        CHECK_FALSE(v.counter);
    }
    SUBCASE("all satisfied") {
        auto v = decide_set(*seed_kb(), reqs({"Technique.7.2", "Function.17"}), sp_caps());
        CHECK(v.overall == Overall::Accept);
        CHECK(v.per_requirement.size() == 2);
    }
    SUBCASE("reject lists what cannot be provided") {
        auto v = decide_set(*seed_kb(), reqs({"Function.17", "Function.12.1.3"}), caps({"Technique.4.2"}));
        CHECK(v.overall == Overall::Reject);
        REQUIRE(v.counter);
        CHECK(strings_of(v.counter->unsatisfiable) == std::vector<std::string>{"Function.17"});
    }
}

TEST_CASE("the provider counters the scenario's functions in the Technique dimension") {
    DecisionPolicy sp_policy{true};
    auto four = reqs({"Function.12.1.3", "Function.17", "Function.23.3", "Function.15"});
    auto v = decide_set(*seed_kb(), four, sp_caps(), sp_policy, user_caps());
    CHECK(v.overall == Overall::Counter);
    REQUIRE(v.counter);
    CHECK(v.counter->entries.contains(X("Function.17:Technique.7.2")));
    CHECK(v.counter->entries.contains(X("Function.15")));
    CHECK(v.counter->unsatisfiable.empty());
}

TEST_CASE("counterproposal entries match the preference oracle") {
    auto functions = user_function_reqs();
    auto counter = build_counterproposal(*seed_kb(), functions, user_caps(), sp_caps());
    oracle::StringSet peer{"Technique.7.2", "Technique.4.2"};
    oracle::StringSet own;
    for (const auto& s : sp_caps().strings()) own.insert(s);
    std::vector<std::string> expected;
    for (const auto& f : functions.strings()) {
        auto t = oracle::choose_technique(tables(), f, peer, own);
        expected.push_back(t.empty() ? f : f + ":" + t);
    }
    CHECK(counter.entries.strings() == expected);
    CHECK(counter.entries.role() == ExpressionRole::SslaEntry);
}

TEST_CASE("counterproposals for risk requirements keep the risk and the function") {
    auto counter = build_counterproposal(*seed_kb(), reqs({"Risk.1.1.2"}), user_caps(), sp_caps());
    CHECK(counter.entries.strings() ==
          std::vector<std::string>{"Risk.1.1.2:Function.15", "Risk.1.1.2:Function.19.12.2:Technique.3.5"});
}

TEST_CASE("counterproposal failure cases") {
    SUBCASE("no selectable technique") {
        auto c = build_counterproposal(*seed_kb(), reqs({"Function.17"}), user_caps(), caps({"Technique.3.1"}));
        CHECK(c.entries.empty());
        CHECK(strings_of(c.unsatisfiable) == std::vector<std::string>{"Function.17"});
    }
    SUBCASE("a rowless function the builder does not assert") {
        auto c = build_counterproposal(*seed_kb(), reqs({"Function.30"}), user_caps(), sp_caps());
        CHECK(strings_of(c.unsatisfiable) == std::vector<std::string>{"Function.30"});
    }
    SUBCASE("unknown requirement") {
        auto c = build_counterproposal(*seed_kb(), reqs({"Function.99"}), user_caps(), sp_caps());
        CHECK(strings_of(c.unsatisfiable) == std::vector<std::string>{"Function.99"});
    }
    SUBCASE("own-only technique when the peer offers none") {
        auto c = build_counterproposal(*seed_kb(), reqs({"Function.23.3"}), user_caps(), sp_caps());
        CHECK(c.entries.strings() == std::vector<std::string>{"Function.23.3:Technique.3.1"});
    }
}

TEST_CASE("a counterproposal is accepted by the party that built it") {
    const auto& techniques = tables().vocabulary("Technique");
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << techniques.size()); ++mask) {
        auto own_list = subset(techniques, mask);
        own_list.push_back("Function.15");
        auto own = caps(own_list);
        for (const auto& req : tables().all_oids()) {
            auto c = build_counterproposal(*seed_kb(), reqs({req}), user_caps(), own);
            if (!c.unsatisfiable.empty()) continue;
            ExpressionSet as_reqs(ExpressionRole::Requirement);
            for (const auto& e : c.entries) as_reqs.insert(e);
            CAPTURE(req);
            CHECK(decide_set(*seed_kb(), as_reqs, own).overall == Overall::Accept);
        }
    }
}

TEST_CASE("counterproposals are deterministic") {
    auto a = build_counterproposal(*seed_kb(), user_function_reqs(), user_caps(), sp_caps());
    for (int i = 0; i < 20; ++i) {
        auto b = build_counterproposal(*seed_kb(), user_function_reqs(), user_caps(), sp_caps());
        CHECK(a.entries == b.entries);
        CHECK(expressions_to_json(a.entries).dump() == expressions_to_json(b.entries).dump());
    }
}

TEST_CASE("require_technique turns concretizable requirements into counters") {
    DecisionPolicy strict{true};
    CHECK_FALSE(satisfied("Function.17", {"Technique.7.2"}, strict));
    CHECK(satisfied("Function.17", {"Technique.7.2"}));
    CHECK(satisfied("Function.15", {"Function.15"}, strict));
    CHECK(satisfied("Technique.7.2", {"Technique.7.2"}, strict));
}

}  // TEST_SUITE
