#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssla/decision.hpp"
#include "ssla/protocol.hpp"
#include "ssla/service.hpp"

namespace ssla {

enum class AgentRole { User, SP };

/// Agent configuration file (JSON, same encoding as the wire). Relative paths
/// resolve against the file's directory.
///
///     {"role": "User", "key": "...", "peer_key": "...", "kb": "kb.json" | "kb_url": "http://...",
///      "requirements": "...", "capabilities": "...", "pretranslate": "Function",
///      "require_technique": false, "require_pow": true,
///      "pow": {"bits": 12, "max_age": 600, "skew": 120}, "max_rounds": 8,
///      "endpoint": "http://127.0.0.1:8700", "out": "record.json"}
struct AgentConfig {
    AgentRole role = AgentRole::User;
    std::filesystem::path key;
    std::optional<std::filesystem::path> peer_key;
    std::optional<std::filesystem::path> kb_manifest;
    std::optional<std::string> kb_url;
    std::optional<std::filesystem::path> requirements;
    std::optional<std::filesystem::path> capabilities;
    /// User only: translate requirements to this dimension before proposing.
    std::optional<Dimension> pretranslate;
    bool require_technique = false;
    bool require_pow = true;
    PowPolicy pow;
    int max_rounds = 8;
    std::string endpoint = "http://127.0.0.1:8700";
    std::optional<std::filesystem::path> out;
};

/// Throws Error(Config).
AgentConfig load_config(const std::filesystem::path& path);

/// `{"expressions": ["Risk.1.1.1", ...]}`. Throws Error(Config).
ExpressionSet load_expressions(const std::filesystem::path& path, ExpressionRole role);

/// Everything a configured agent needs, loaded and validated up front.
struct AgentSetup {
    AgentConfig config;
    PrivateKey key;
    std::optional<PublicKey> peer_key;
    std::shared_ptr<const Translator> kb;
    ExpressionSet requirements{ExpressionRole::Requirement};
    ExpressionSet capabilities{ExpressionRole::Capability};

    ProtocolPolicy protocol_policy() const;
};

/// Loads every referenced file. A remote KB is only contacted later, on the
/// first translation. Throws Error(Config).
AgentSetup prepare_agent(const AgentConfig& config, std::shared_ptr<RandomSource> rng);

/// Requirements as the user proposes them: pretranslated when configured.
ExpressionSet initial_requirements(const AgentSetup& user);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    Clock clock;
};

struct NegotiationOutcome {
    std::optional<NegotiationId> id;
    Phase phase = Phase::Idle;
    std::optional<SslaRecord> user_record;
    std::optional<SslaRecord> sp_record;
    std::vector<Message> trace;
    std::string cancel_reason;
    std::optional<Error> error;
};

/// Runs one negotiation between two configured agents over the loopback
/// transport and returns both sides' results.
NegotiationOutcome run_negotiation(const AgentSetup& user, const AgentSetup& sp, const RunOptions& options = {});

/// Writes the canonical record document. Throws Error(Config) on I/O failure.
void write_record(const std::filesystem::path& path, const SslaRecord& record);
std::string read_file(const std::filesystem::path& path);

/// Exit-status registry shared by all commands.
enum ExitCode : int {
    kExitOk = 0,
    kExitInvalid = 1,
    kExitCancelled = 2,
    kExitProtocolError = 3,
    kExitConfigError = 4,
};

/// Expected shape of a negotiation, checked against its message trace.
///
///     {"steps": [{"message": "SslaProposal", "from": "User", "round": 1,
///                 "dimensions": ["Function"], "compound": false}, ...],
///      "outcome": "Agreed", "entries_include": ["Function.17:Technique.7.2"]}
struct ScenarioStep {
    std::string message;
    AgentRole from = AgentRole::User;
    std::optional<int> round;
    /// Every requirement's operative Oid must lie in one of these.
    std::vector<Dimension> dimensions;
    /// At least one requirement must be a colon compound.
    bool compound = false;
};

struct ScenarioScript {
    std::vector<ScenarioStep> steps;
    Phase outcome = Phase::Agreed;
    std::vector<SecurityExpression> entries_include;
};

/// Throws Error(Config) on unknown message types, roles or dimensions.
ScenarioScript load_scenario(const std::filesystem::path& path);

/// Lists every deviation of `outcome` from `script`; empty means it matched.
std::vector<std::string> check_scenario(const ScenarioScript& script, const NegotiationOutcome& outcome,
                                        const PartyIdentity& user, const PartyIdentity& sp);

}  // namespace ssla
