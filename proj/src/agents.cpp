#include "ssla/agents.hpp"

#include <fstream>
#include <sstream>

#include "ssla/strategy.hpp"

namespace ssla {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

Json read_json(const fs::path& path) {
    auto text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        config_error(path.string() + ": " + e.what());
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
std::optional<T> optional_field(const Json& obj, const char* key, const fs::path& file) {
    if (!obj.contains(key)) return std::nullopt;
    try {
        return obj.at(key).get<T>();
    } catch (const Json::exception&) {
        config_error(file.string() + ": field '" + key + "' has the wrong type");
    }
}

AgentRole parse_role_name(const std::string& s) {
    if (s == "User") return AgentRole::User;
    if (s == "SP") return AgentRole::SP;
    config_error("unknown role '" + s + "'");
}

const char* role_label(AgentRole r) { return r == AgentRole::User ? "User" : "SP"; }

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) config_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_record(const fs::path& path, const SslaRecord& record) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) config_error("cannot write " + path.string());
    out << encode_record(record);
    if (!out.flush()) config_error("cannot write " + path.string());
}

AgentConfig load_config(const fs::path& path) {
    auto j = read_json(path);
    if (!j.is_object()) config_error(path.string() + ": expected an object");
    static const std::vector<std::string> known{"role",          "key",          "peer_key",     "kb",
                                                "kb_url",        "requirements", "capabilities", "pretranslate",
                                                "require_technique", "require_pow", "pow",       "max_rounds",
                                                "endpoint",      "out"};
    for (const auto& [k, _] : j.items()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            config_error(path.string() + ": unknown field '" + k + "'");
        }
    }
    const auto base = path.parent_path();
    AgentConfig c;
    auto role = optional_field<std::string>(j, "role", path);
    if (!role) config_error(path.string() + ": missing 'role'");
    c.role = parse_role_name(*role);
    auto key = optional_field<std::string>(j, "key", path);
    if (!key) config_error(path.string() + ": missing 'key'");
    c.key = resolve(base, *key);
    if (auto v = optional_field<std::string>(j, "peer_key", path)) c.peer_key = resolve(base, *v);
    if (auto v = optional_field<std::string>(j, "kb", path)) c.kb_manifest = resolve(base, *v);
    c.kb_url = optional_field<std::string>(j, "kb_url", path);
    if (c.kb_manifest && c.kb_url) config_error(path.string() + ": give either 'kb' or 'kb_url', not both");
    if (auto v = optional_field<std::string>(j, "requirements", path)) c.requirements = resolve(base, *v);
    if (auto v = optional_field<std::string>(j, "capabilities", path)) c.capabilities = resolve(base, *v);
    if (auto v = optional_field<std::string>(j, "pretranslate", path)) {
        c.pretranslate = try_parse_dimension(*v);
        if (!c.pretranslate) config_error(path.string() + ": unknown dimension '" + *v + "'");
    }
    c.require_technique = optional_field<bool>(j, "require_technique", path).value_or(false);
    c.require_pow = optional_field<bool>(j, "require_pow", path).value_or(true);
    if (j.contains("pow")) {
        const auto& pow = j.at("pow");
        if (!pow.is_object()) config_error(path.string() + ": 'pow' must be an object");
        if (auto v = optional_field<int>(pow, "bits", path)) c.pow.required_bits = *v;
        if (auto v = optional_field<int>(pow, "max_age", path)) c.pow.max_stamp_age = std::chrono::seconds(*v);
        if (auto v = optional_field<int>(pow, "skew", path)) c.pow.clock_skew = std::chrono::seconds(*v);
    }
    if (c.pow.required_bits < 0 || c.pow.required_bits > 40) config_error(path.string() + ": pow bits out of range");
    c.max_rounds = optional_field<int>(j, "max_rounds", path).value_or(8);
    if (c.max_rounds < 1) config_error(path.string() + ": max_rounds must be positive");
    if (auto v = optional_field<std::string>(j, "endpoint", path)) c.endpoint = *v;
    if (auto v = optional_field<std::string>(j, "out", path)) c.out = resolve(base, *v);
    return c;
}

ExpressionSet load_expressions(const fs::path& path, ExpressionRole role) {
    auto j = read_json(path);
    if (!j.is_object() || !j.contains("expressions") || !j.at("expressions").is_array() || j.size() != 1) {
        config_error(path.string() + ": expected {\"expressions\": [...]}");
    }
    try {
        ExpressionSet set(role);
        for (const auto& e : j.at("expressions")) {
            if (!e.is_string()) config_error(path.string() + ": expressions must be strings");
            if (!set.insert(parse_expression(e.get<std::string>()))) {
                config_error(path.string() + ": duplicate expression " + e.get<std::string>());
            }
        }
        return set;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        config_error(path.string() + ": " + e.what());
    }
}

ProtocolPolicy AgentSetup::protocol_policy() const {
    ProtocolPolicy p;
    p.pow = config.pow;
    p.require_pow = config.require_pow;
    p.max_rounds = config.max_rounds;
    return p;
}

AgentSetup prepare_agent(const AgentConfig& config, std::shared_ptr<RandomSource> rng) {
    auto load_key = [](const fs::path& p) {
        try {
            return PrivateKey::load(p);
        } catch (const Error& e) {
            config_error(p.string() + ": " + e.what());
        }
    };
    AgentSetup setup{config, load_key(config.key), std::nullopt, nullptr};
    try {
        if (config.peer_key) setup.peer_key = PublicKey::load(*config.peer_key);
        if (config.kb_manifest) {
            setup.kb = std::make_shared<KnowledgeBase>(KnowledgeBase::load(*config.kb_manifest));
        } else if (config.kb_url) {
            setup.kb = std::make_shared<RemoteKb>(std::make_shared<HttpTransport>(*config.kb_url), std::move(rng));
        } else {
            config_error("no knowledge base configured ('kb' or 'kb_url')");
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        config_error(e.what());
    }
    if (config.requirements) setup.requirements = load_expressions(*config.requirements, ExpressionRole::Requirement);
    if (config.capabilities) setup.capabilities = load_expressions(*config.capabilities, ExpressionRole::Capability);
    return setup;
}

ExpressionSet initial_requirements(const AgentSetup& user) {
    if (!user.config.pretranslate) return user.requirements;
    ExpressionSet out(ExpressionRole::Requirement);
    for (const auto& req : user.requirements) {
        for (const auto& e : user.kb->translate(req, *user.config.pretranslate).output) {
            if (!out.contains(e)) out.insert(e);
        }
    }
    return out;
}

NegotiationOutcome run_negotiation(const AgentSetup& user, const AgentSetup& sp, const RunOptions& options) {
    auto clock = options.clock ? options.clock : system_clock();
    std::shared_ptr<RandomSource> user_rng;
    std::shared_ptr<RandomSource> sp_rng;
    if (options.seed) {
        user_rng = std::make_shared<SeededRandom>(*options.seed);
        sp_rng = std::make_shared<SeededRandom>(*options.seed ^ 0x9e3779b97f4a7c15ULL);
    } else {
        user_rng = std::make_shared<SystemRandom>();
        sp_rng = std::make_shared<SystemRandom>();
    }

    Agent user_agent(user.key, std::make_shared<InitiatorStrategy>(user.kb, user.requirements), user.protocol_policy(),
                     clock, user_rng);
    auto sp_agent = std::make_shared<Agent>(
        sp.key,
        std::make_shared<ResponderStrategy>(sp.kb, sp.capabilities, DecisionPolicy{sp.config.require_technique}),
        sp.protocol_policy(), clock, sp_rng);
    LoopbackTransport transport(std::make_shared<NegotiationService>(sp_agent));

    NegotiationOutcome outcome;
    try {
        auto first = user_agent.initiate(sp_agent->identity(), initial_requirements(user), user.capabilities,
                                         user.config.kb_url);
        outcome.id = first.negotiation_id;
        run_initiator(user_agent, transport, first, &outcome.trace);
    } catch (const Error& e) {
        outcome.error = e;
    }
    if (outcome.id) {
        if (auto s = user_agent.state(*outcome.id)) {
            outcome.phase = s->phase;
            outcome.user_record = s->record;
            outcome.cancel_reason = s->cancel_reason;
        }
        if (auto s = sp_agent->state(*outcome.id)) {
            outcome.sp_record = s->record;
            if (outcome.cancel_reason.empty()) outcome.cancel_reason = s->cancel_reason;
        }
    }
    return outcome;
}

ScenarioScript load_scenario(const fs::path& path) {
    auto j = read_json(path);
    ScenarioScript script;
    try {
        for (const auto& s : j.at("steps")) {
            ScenarioStep step;
            step.message = s.at("message").get<std::string>();
            if (step.message != "SslaProposal" && step.message != "SslaConfirmation" && step.message != "Cancel") {
                config_error(path.string() + ": unknown message type '" + step.message + "'");
            }
            step.from = parse_role_name(s.at("from").get<std::string>());
            if (s.contains("round")) step.round = s.at("round").get<int>();
            if (s.contains("dimensions")) {
                for (const auto& d : s.at("dimensions")) step.dimensions.push_back(parse_dimension(d.get<std::string>()));
            }
            step.compound = s.value("compound", false);
            script.steps.push_back(std::move(step));
        }
        auto outcome = j.value("outcome", std::string("Agreed"));
        if (outcome == "Agreed") {
            script.outcome = Phase::Agreed;
        } else if (outcome == "Cancelled") {
            script.outcome = Phase::Cancelled;
        } else {
            config_error(path.string() + ": unknown outcome '" + outcome + "'");
        }
        if (j.contains("entries_include")) {
            for (const auto& e : j.at("entries_include")) script.entries_include.push_back(parse_expression(e.get<std::string>()));
        }
    } catch (const Json::exception& e) {
        config_error(path.string() + ": " + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        config_error(path.string() + ": " + e.what());
    }
    return script;
}

std::vector<std::string> check_scenario(const ScenarioScript& script, const NegotiationOutcome& outcome,
                                        const PartyIdentity& user, const PartyIdentity& sp) {
    std::vector<std::string> problems;
    if (outcome.error) problems.push_back("negotiation failed: " + std::string(outcome.error->what()));
    if (outcome.trace.size() != script.steps.size()) {
        problems.push_back("expected " + std::to_string(script.steps.size()) + " messages, saw " +
                           std::to_string(outcome.trace.size()));
    }
    for (std::size_t i = 0; i < std::min(outcome.trace.size(), script.steps.size()); ++i) {
        const auto& step = script.steps[i];
        const auto& msg = outcome.trace[i];
        const auto at = "step " + std::to_string(i + 1) + ": ";
        if (message_type(msg) != step.message) {
            problems.push_back(at + "expected " + step.message + ", saw " + std::string(message_type(msg)));
            continue;
        }
        const auto& expected_sender = step.from == AgentRole::User ? user : sp;
        if (sender_of(msg) != expected_sender) problems.push_back(at + "not sent by " + role_label(step.from));
        const auto* p = std::get_if<SslaProposal>(&msg);
        if (p == nullptr) continue;
        if (step.round && p->round != *step.round) problems.push_back(at + "round " + std::to_string(p->round));
        bool any_compound = false;
        for (const auto& e : p->requirements) {
            any_compound = any_compound || e.segments().size() > 1;
            auto d = e.operative().dimension();
            if (!step.dimensions.empty() &&
                std::find(step.dimensions.begin(), step.dimensions.end(), d) == step.dimensions.end()) {
                problems.push_back(at + e.str() + " is outside the expected dimensions");
            }
        }
        if (step.compound && !any_compound) problems.push_back(at + "no compound expressions");
    }
    if (outcome.phase != script.outcome) {
        problems.push_back("ended " + std::string(phase_name(outcome.phase)) + ", expected " +
                           std::string(phase_name(script.outcome)));
    }
    for (const auto& e : script.entries_include) {
        if (!outcome.user_record || !outcome.user_record->agreed_entries.contains(e)) {
            problems.push_back("agreement lacks " + e.str());
        }
    }
    return problems;
}

}  // namespace ssla
