// Command-line entry points: KB server, SP and user agents, loopback
// negotiation runner, audit and key generation.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <thread>

#include "ssla/agents.hpp"
#include "ssla/audit.hpp"
#include "ssla/strategy.hpp"

namespace fs = std::filesystem;
using namespace ssla;

namespace {

// 2013-06-13T00:00:00Z; the clock used for deterministic runs.
constexpr std::int64_t kDeterministicTime = 1371081600;

struct Overrides {
    std::string kb_url;
    std::string requirements;
    std::string capabilities;
    std::string out;
    int bits = -1;
    int max_rounds = -1;
};

void apply(AgentConfig& c, const Overrides& o) {
    if (!o.kb_url.empty()) {
        c.kb_url = o.kb_url;
        c.kb_manifest.reset();
    }
    if (!o.requirements.empty()) c.requirements = fs::path(o.requirements);
    if (!o.capabilities.empty()) c.capabilities = fs::path(o.capabilities);
    if (!o.out.empty()) c.out = fs::path(o.out);
    if (o.bits >= 0) c.pow.required_bits = o.bits;
    if (o.max_rounds > 0) c.max_rounds = o.max_rounds;
}

std::pair<std::string, int> host_port(const std::string& endpoint) {
    std::string rest = endpoint;
    if (auto scheme = rest.find("://"); scheme != std::string::npos) rest = rest.substr(scheme + 3);
    if (auto slash = rest.find('/'); slash != std::string::npos) rest.resize(slash);
    auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::Config, "endpoint needs a port: " + endpoint);
    try {
        return {rest.substr(0, colon), std::stoi(rest.substr(colon + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::Config, "bad port in endpoint " + endpoint);
    }
}

int exit_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::Config:
        case ErrorCode::Syntax:
        case ErrorCode::DimensionOrder:
        case ErrorCode::Format:
        case ErrorCode::DuplicateOid:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::UnknownOid:
        case ErrorCode::MalformedKey:
            return kExitConfigError;
        default:
            return kExitProtocolError;
    }
}

void print_error(const Error& e) { std::cerr << "error: " << code_name(e.code()) << ": " << e.what() << "\n"; }

void print_entries(const SslaRecord& record) {
    std::cout << "negotiation " << record.negotiation_id.hex() << " agreed\n";
    for (const auto& e : record.agreed_entries) std::cout << "  " << e.str() << "\n";
}

int finish(Phase phase, const std::optional<SslaRecord>& record, const std::string& reason,
           const std::optional<fs::path>& out) {
    if (phase == Phase::Agreed && record) {
        print_entries(*record);
        if (out) {
            write_record(*out, *record);
            std::cout << "record written to " << out->string() << "\n";
        }
        return kExitOk;
    }
    if (phase == Phase::Cancelled) {
        std::cout << "negotiation cancelled: " << reason << "\n";
        return kExitCancelled;
    }
    std::cerr << "negotiation did not finish (" << phase_name(phase) << ")\n";
    return kExitProtocolError;
}

/// Blocks SIGINT/SIGTERM in every thread and stops `server` when one arrives.
std::thread stop_on_signal(HttpServer& server) {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    return std::thread([&server, set] {
        int sig = 0;
        sigwait(&set, &sig);
        server.stop();
    });
}

std::shared_ptr<RandomSource> make_rng(std::optional<std::uint64_t> seed) {
    if (seed) return std::make_shared<SeededRandom>(*seed);
    return std::make_shared<SystemRandom>();
}

int cmd_kb_server(const std::string& manifest, const std::string& listen, const std::string& integrity_key) {
    auto kb = std::make_shared<KnowledgeBase>(KnowledgeBase::load(manifest));
    std::optional<PrivateKey> key;
    if (!integrity_key.empty()) key = PrivateKey::load(integrity_key);
    auto [host, port] = host_port(listen);
    HttpServer server(std::make_shared<KbService>(kb, key));
    int bound = server.start(host, port);
    std::cout << "kb server listening on " << host << ":" << bound << std::endl;
    auto watcher = stop_on_signal(server);
    watcher.detach();
    server.wait();
    return kExitOk;
}

int cmd_sp_agent(AgentConfig config, std::optional<std::uint64_t> seed, int timeout) {
    auto rng = make_rng(seed);
    auto setup = prepare_agent(config, rng);
    auto clock = seed ? fixed_clock(kDeterministicTime) : system_clock();
    auto agent = std::make_shared<Agent>(
        setup.key,
        std::make_shared<ResponderStrategy>(setup.kb, setup.capabilities, DecisionPolicy{config.require_technique}),
        setup.protocol_policy(), clock, rng);
    auto [host, port] = host_port(config.endpoint);
    HttpServer server(std::make_shared<NegotiationService>(agent));
    int bound = server.start(host, port);
    std::cout << "sp agent " << agent->identity().str() << " listening on " << host << ":" << bound << std::endl;

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout);
    std::optional<NegotiationState> done;
    while (!done) {
        for (const auto& id : agent->negotiations()) {
            auto s = agent->state(id);
            if (s && is_terminal(s->phase)) done = s;
        }
        if (!done && timeout > 0 && std::chrono::steady_clock::now() > deadline) break;
        if (!done) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    server.stop();
    server.wait();
    if (!done) {
        std::cerr << "no negotiation finished within " << timeout << " s\n";
        return kExitProtocolError;
    }
    return finish(done->phase, done->record, done->cancel_reason, config.out);
}

int cmd_user_agent(AgentConfig config, std::optional<std::uint64_t> seed) {
    auto rng = make_rng(seed);
    auto setup = prepare_agent(config, rng);
    auto clock = seed ? fixed_clock(kDeterministicTime) : system_clock();
    HttpTransport transport(config.endpoint);

    PartyIdentity sp;
    if (setup.peer_key) {
        sp = derive_identity(*setup.peer_key);
    } else {
        auto r = transport.send({"GET", "/identity", {}});
        if (r.status != 200) raise_from(r);
        auto doc = WireDocument::parse(r.body);
        auto key = PublicKey::from_der(base64_decode(doc.body.at("public_key").get<std::string>()));
        sp = derive_identity(key);
        if (sp.str() != doc.body.at("identity").get<std::string>()) {
            throw Error(ErrorCode::IdentityMismatch, "service key does not match its advertised identity");
        }
    }

    Agent agent(setup.key, std::make_shared<InitiatorStrategy>(setup.kb, setup.requirements), setup.protocol_policy(),
                clock, rng);
    auto first = agent.initiate(sp, initial_requirements(setup), setup.capabilities, config.kb_url);
    run_initiator(agent, transport, first);
    auto state = agent.state(first.negotiation_id);
    return finish(state->phase, state->record, state->cancel_reason, config.out);
}

int cmd_negotiate(AgentConfig user_cfg, AgentConfig sp_cfg, const std::string& sp_out, const std::string& script,
                  std::optional<std::uint64_t> seed) {
    auto user = prepare_agent(user_cfg, make_rng(seed));
    auto sp = prepare_agent(sp_cfg, make_rng(seed));
    std::optional<ScenarioScript> expected;
    if (!script.empty()) expected = load_scenario(script);

    RunOptions options;
    options.seed = seed;
    if (seed) options.clock = fixed_clock(kDeterministicTime);
    auto outcome = run_negotiation(user, sp, options);

    for (const auto& m : outcome.trace) {
        std::cout << "-> " << message_type(m) << " from " << sender_of(m).str().substr(0, 16) << "...";
        if (const auto* p = std::get_if<SslaProposal>(&m)) {
            std::cout << " round " << p->round << ":";
            for (const auto& e : p->requirements) std::cout << " " << e.str();
        }
        std::cout << "\n";
    }
    if (outcome.error) {
        print_error(*outcome.error);
        return exit_for(*outcome.error);
    }
    if (expected) {
        auto problems = check_scenario(*expected, outcome, derive_identity(user.key.public_key()),
                                       derive_identity(sp.key.public_key()));
        for (const auto& p : problems) std::cerr << "scenario: " << p << "\n";
        if (!problems.empty()) return kExitProtocolError;
        std::cout << "scenario matched " << script << "\n";
    }
    if (outcome.phase == Phase::Agreed && outcome.sp_record) {
        auto out = sp_out.empty() ? sp_cfg.out : std::optional<fs::path>(sp_out);
        if (out) write_record(*out, *outcome.sp_record);
    }
    return finish(outcome.phase, outcome.user_record, outcome.cancel_reason, user_cfg.out);
}

int cmd_audit(const std::vector<std::string>& records, const std::vector<std::string>& key_files, bool json,
              int min_bits) {
    std::vector<PublicKey> keys;
    for (const auto& k : key_files) {
        try {
            keys.push_back(PublicKey::load(k));
        } catch (const Error& e) {
            std::cerr << "warning: key " << k << " unusable: " << e.what() << "\n";
        }
    }
    bool all_valid = true;
    std::vector<std::string> texts;
    Json out = Json::array();
    for (const auto& path : records) {
        AuditReport report;
        try {
            texts.push_back(read_file(path));
            report = audit_record_text(texts.back(), keys, AuditOptions{min_bits});
        } catch (const Error& e) {
            report.checks.push_back({"record.read", false, e.what()});
        }
        all_valid = all_valid && report.valid();
        if (json) {
            auto j = report_to_json(report);
            j["record"] = path;
            out.push_back(j);
        } else {
            std::cout << "== " << path << "\n" << format_report(report);
        }
    }
    if (texts.size() == 2 && records.size() == 2) {
        bool same = texts[0] == texts[1];
        all_valid = all_valid && same;
        if (json) {
            out.push_back({{"compare_evidence", same}});
        } else {
            std::cout << "evidence identical: " << (same ? "yes" : "no") << "\n";
        }
    }
    if (json) std::cout << out.dump(2) << "\n";
    return all_valid ? kExitOk : kExitInvalid;
}

int cmd_keygen(const std::string& out, bool force) {
    if (fs::exists(out) && !force) throw Error(ErrorCode::Config, out + " exists; pass --force to replace it");
    auto key = PrivateKey::generate();
    {
        std::ofstream f(out, std::ios::trunc);
        if (!f) throw Error(ErrorCode::Config, "cannot write " + out);
        f << key.to_pem();
    }
    fs::permissions(out, fs::perms::owner_read | fs::perms::owner_write);
    auto pub = key.public_key();
    auto pub_path = fs::path(out).replace_extension(".pub.pem");
    std::ofstream(pub_path, std::ios::trunc) << pub.to_pem();
    std::cout << derive_identity(pub).str() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Security SLA negotiation tools"};
    app.require_subcommand(1);

    Overrides ov;
    std::string config;
    std::optional<std::uint64_t> seed;
    auto add_overrides = [&](CLI::App* sub) {
        sub->add_option("--kb-url", ov.kb_url, "Use a remote knowledge base");
        sub->add_option("--requirements", ov.requirements, "Requirement list file");
        sub->add_option("--capabilities", ov.capabilities, "Capability list file");
        sub->add_option("--out", ov.out, "Where to write the agreement record");
        sub->add_option("--bits", ov.bits, "Proof-of-work difficulty");
        sub->add_option("--max-rounds", ov.max_rounds, "Round limit");
#ifdef SSLA_ENABLE_TEST_HOOKS
        sub->add_option("--deterministic-seed", seed, "Seed randomness and freeze the clock (testing only)");
#endif
    };

    auto* kb = app.add_subcommand("kb-server", "Serve a knowledge base over HTTP");
    std::string manifest;
    std::string listen = "127.0.0.1:8701";
    std::string integrity_key;
    kb->add_option("--kb", manifest, "Knowledge base manifest")->required();
    kb->add_option("--listen", listen, "host:port");
    kb->add_option("--integrity-key", integrity_key, "Sign translation replies with this key");

    auto* sp = app.add_subcommand("sp-agent", "Answer one negotiation as the service provider");
    sp->add_option("--config", config, "Agent configuration")->required();
    int timeout = 0;
    sp->add_option("--timeout", timeout, "Give up after this many seconds (0 waits forever)");
    add_overrides(sp);

    auto* user = app.add_subcommand("user-agent", "Negotiate with a remote service provider");
    user->add_option("--config", config, "Agent configuration")->required();
    add_overrides(user);

    auto* neg = app.add_subcommand("negotiate", "Run user and SP in one process over the loopback transport");
    std::string sp_config;
    std::string sp_out;
    std::string script;
    neg->add_option("--config", config, "User agent configuration")->required();
    neg->add_option("--sp-config", sp_config, "SP agent configuration")->required();
    neg->add_option("--sp-out", sp_out, "Where to write the SP's record");
    neg->add_option("--script", script, "Scenario script to check the message flow against");
    add_overrides(neg);

    auto* audit = app.add_subcommand("audit", "Verify agreement records offline");
    std::vector<std::string> records;
    std::vector<std::string> keys;
    bool json = false;
    int min_bits = 0;
    audit->add_option("--record", records, "Record file (repeatable)")->required();
    audit->add_option("--key", keys, "Party public key file (repeatable)");
    audit->add_flag("--json", json, "Machine-readable output");
    audit->add_option("--bits", min_bits, "Minimum stamp difficulty");

    auto* keygen = app.add_subcommand("keygen", "Generate an RSA-2048 key pair");
    std::string key_out;
    bool force = false;
    keygen->add_option("--out", key_out, "Private key file")->required();
    keygen->add_flag("--force", force, "Overwrite an existing file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (kb->parsed()) return cmd_kb_server(manifest, listen, integrity_key);
        if (audit->parsed()) return cmd_audit(records, keys, json, min_bits);
        if (keygen->parsed()) return cmd_keygen(key_out, force);

        auto cfg = load_config(config);
        apply(cfg, ov);
        if (sp->parsed()) return cmd_sp_agent(cfg, seed, timeout);
        if (user->parsed()) return cmd_user_agent(cfg, seed);
        auto sp_cfg = load_config(sp_config);
        Overrides shared;
        shared.bits = ov.bits;
        shared.max_rounds = ov.max_rounds;
        apply(sp_cfg, shared);
        return cmd_negotiate(cfg, sp_cfg, sp_out, script, seed);
    } catch (const Error& e) {
        print_error(e);
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitProtocolError;
    }
}
