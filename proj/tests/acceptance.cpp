// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "harness.hpp"
#include "oracles.hpp"

using namespace testing;

namespace {

using SteadyClock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

double seconds_since(SteadyClock::time_point start) {
    return std::chrono::duration<double>(SteadyClock::now() - start).count();
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
    return out;
}

Outcome table_fidelity() {
    Outcome o;
    auto start = SteadyClock::now();
    auto kb = KnowledgeBase::load(fixture("kb/kb.json"));
    struct Row {
        const char* from;
        Dimension goal;
        std::vector<std::string> expected;
    };
    const std::vector<Row> rows{
        {"Target.1.1.1", Dimension::Risk, {"Risk.2.3.4", "Risk.3.2.3"}},
        {"Risk.1.1.1", Dimension::Function, {"Function.12.1.3", "Function.17", "Function.23.3"}},
        {"Risk.1.1.2", Dimension::Function, {"Function.15", "Function.19.12.2"}},
    };
    for (const auto& r : rows) {
        auto got = strings_of(kb.translate(X(r.from), r.goal).output);
        std::sort(got.begin(), got.end());
        o.require(got == r.expected, std::string(r.from) + " gave {" + join(got) + "}");
    }
    auto elapsed = seconds_since(start);
    o.require(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
    if (o.pass) o.detail = "3 rows exact in " + std::to_string(elapsed) + " s";
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    auto start = SteadyClock::now();
    const oracle::Tables tables(fixture("kb/kb.json"));
    auto kb = seed_kb();
    const auto& techniques = tables.vocabulary("Technique");
    o.require(techniques.size() <= 6, "seed fixture has more than 6 techniques");
    auto requirements = tables.all_oids();
    std::size_t compared = 0;
    std::size_t mismatches = 0;
    std::size_t reading_mismatches = 0;
    std::size_t inversions = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << techniques.size()); ++mask) {
        std::vector<std::string> subset;
        for (std::size_t i = 0; i < techniques.size(); ++i) {
            if ((mask >> i & 1U) != 0) subset.push_back(techniques[i]);
        }
        for (const auto& req : requirements) {
            bool lib = decide_one(*kb, X(req), caps(subset)) == Satisfaction::Satisfied;
            if (lib != oracle::brute_force_satisfied(tables, req, subset)) ++mismatches;
            int all = oracle::all_entries_match(tables, req, subset);
            if (lib != (all == 1)) ++reading_mismatches;
            if (all != oracle::inverted_early_return(tables, req, subset)) ++inversions;
            ++compared;
        }
    }
    auto elapsed = seconds_since(start);
    o.require(mismatches == 0, std::to_string(mismatches) + " oracle mismatches");
    o.require(reading_mismatches == 0, std::to_string(reading_mismatches) + " all-entries mismatches");
    o.require(inversions > 0, "inverted early return never disagreed with the all-entries reading");
    o.require(elapsed < 10.0, "took " + std::to_string(elapsed) + " s");
    if (o.pass) {
        o.detail = std::to_string(compared) + " pairs, 0 mismatches; inverted early return differs on " +
                   std::to_string(inversions) + "; " + std::to_string(elapsed) + " s";
    }
    return o;
}

Outcome hashcash() {
    Outcome o;
    SystemRandom rng;
    PowPolicy policy;
    policy.required_bits = 12;
    const auto user = derive_identity(party_key("user").public_key());
    const auto sp = derive_identity(party_key("sp").public_key());
    std::vector<double> ms;
    std::size_t failures = 0;
    std::uint64_t max_hashes = 0;
    for (int i = 0; i < 100; ++i) {
        StampExtension ext{user, sp, rng.bytes(16)};
        const auto now = system_clock()();
        auto start = SteadyClock::now();
        auto stamp = mint(sp.hex(), ext, policy, rng, now);
        ms.push_back(seconds_since(start) * 1000.0);
        StampReplaySet seen;
        auto before = stamp_hash_count();
        if (!verify_stamp(stamp, sp.hex(), policy, seen, now)) ++failures;
        max_hashes = std::max(max_hashes, stamp_hash_count() - before);
        if (verify_stamp(stamp, sp.hex(), policy, seen, now)) o.require(false, "replayed stamp accepted");
    }
    std::sort(ms.begin(), ms.end());
    const double median = (ms[49] + ms[50]) / 2.0;
    o.require(failures == 0, std::to_string(failures) + " stamps failed to verify");
    o.require(max_hashes <= 1, "verification used " + std::to_string(max_hashes) + " hashes");
    o.require(median < 100.0, "median mint " + std::to_string(median) + " ms");
    if (o.pass) {
        std::ostringstream d;
        d << "100/100 verify, median mint " << median << " ms, <= " << max_hashes << " hash per verify, replay rejected";
        o.detail = d.str();
    }
    return o;
}

AgentSetup scenario_setup(const std::string& config) {
    return prepare_agent(load_config(fixture("scenario/" + config)), std::make_shared<SeededRandom>(1));
}

Outcome end_to_end() {
    Outcome o;
    auto start = SteadyClock::now();
    auto user = scenario_setup("user.json");
    auto sp = scenario_setup("sp.json");
    RunOptions opts{7, fixed_clock(kTestNow)};
    auto first = run_negotiation(user, sp, opts);
    auto second = run_negotiation(user, sp, opts);
    auto elapsed = seconds_since(start);

    o.require(first.phase == Phase::Agreed, "negotiation ended " + std::string(phase_name(first.phase)));
    auto script = load_scenario(fixture("scenario/hotspot.json"));
    auto problems = check_scenario(script, first, derive_identity(user.key.public_key()),
                                   derive_identity(sp.key.public_key()));
    o.require(problems.empty(), "script: " + join(problems));
    if (first.user_record) {
        const auto& entries = first.user_record->agreed_entries;
        o.require(entries.contains(X("Function.17:Technique.7.2")), "no Function.17:Technique.7.2 entry");
        o.require(entries.contains(X("Function.15")), "no Function.15 entry");
    }
    o.require(first.user_record && second.user_record &&
                  encode_record(*first.user_record) == encode_record(*second.user_record),
              "seeded runs differ");
    o.require(elapsed < 5.0, "took " + std::to_string(elapsed) + " s");
    if (o.pass) {
        o.detail = std::to_string(first.trace.size()) + " messages, script matched, reproducible, " +
                   std::to_string(elapsed) + " s for two runs";
    }
    return o;
}

Outcome non_repudiation() {
    Outcome o;
    auto start = SteadyClock::now();
    auto outcome = run_negotiation(scenario_setup("user.json"), scenario_setup("sp.json"),
                                   RunOptions{7, fixed_clock(kTestNow)});
    if (!outcome.user_record || !outcome.sp_record) {
        o.require(false, "no records");
        return o;
    }
    o.require(compare_evidence(*outcome.user_record, *outcome.sp_record), "evidence differs");
    // audit_record takes only the record and the keys: no transport, no KB
    const std::vector<PublicKey> keys{party_key("user").public_key(), party_key("sp").public_key()};
    std::size_t total = 0;
    std::size_t survived = 0;
    for (const auto* record : {&*outcome.user_record, &*outcome.sp_record}) {
        const auto text = encode_record(*record);
        o.require(audit_record_text(text, keys).valid(), "unmodified record is not Valid");
        total += for_each_mutation(text, [&](const std::string& mutated, const std::string& where) {
            if (audit_record_text(mutated, keys).valid()) {
                ++survived;
                if (survived <= 3) o.require(false, "mutation at " + where + " still Valid");
            }
        });
        // both parties' bytes are identical, so one sweep covers both
        if (compare_evidence(*outcome.user_record, *outcome.sp_record)) break;
    }
    auto elapsed = seconds_since(start);
    o.require(survived == 0, std::to_string(survived) + " of " + std::to_string(total) + " mutations still Valid");
    o.require(elapsed < 30.0, "took " + std::to_string(elapsed) + " s");
    if (o.pass) {
        o.detail = "evidence identical, " + std::to_string(total) + "/" + std::to_string(total) +
                   " mutations Invalid, " + std::to_string(elapsed) + " s";
    }
    return o;
}

Outcome fuzzing() {
    Outcome o;
    auto start = SteadyClock::now();
    auto r = run_sequence_fuzz(10000, 20130613);
    auto elapsed = seconds_since(start);
    o.require(r.sequences == 10000, "ran " + std::to_string(r.sequences) + " sequences");
    o.require(r.illegal_transitions == 0, std::to_string(r.illegal_transitions) + " illegal transitions");
    o.require(r.crashes == 0, std::to_string(r.crashes) + " crashes");
    o.require(r.agreed_without_dual_signatures == 0,
              std::to_string(r.agreed_without_dual_signatures) + " Agreed states without dual signatures");
    if (!r.notes.empty()) o.require(false, r.notes.front());
    if (o.pass) {
        o.detail = std::to_string(r.sequences) + " sequences, " + std::to_string(r.deliveries) + " deliveries, " +
                   std::to_string(r.rejected) + " rejected, " + std::to_string(r.agreed) + " Agreed states, all dual-signed; " +
                   std::to_string(elapsed) + " s";
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 translation table fidelity", table_fidelity},
        {"2 decision oracle equivalence", oracle_equivalence},
        {"3 hashcash mint and verify", hashcash},
        {"4 end-to-end hotspot scenario", end_to_end},
        {"5 non-repudiation evidence", non_repudiation},
        {"6 replay and state fuzzing", fuzzing},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failed;
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
