#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trustboot/actors.hpp"
#include "trustboot/bus.hpp"
#include "trustboot/knowledge.hpp"
#include "trustboot/result.hpp"

namespace trustboot::harness {

enum class Topology { DIRECT, HIERARCHICAL };
enum class KeyMode { SYMMETRIC, DH };
enum class DhProfile { TOY, STANDARD };
enum class DelegationMode { PUBLIC_KEY, PRESHARED };
enum class HierKeySource { MASTER, SM };

struct EmployeeCfg {
    std::string id;
    std::string password;
};

struct SlaveCfg {
    std::string id;
    wire::Capability capability = wire::Capability::SYM_ONLY;
    std::string employee;
    std::string handheld;
    std::string master;  // hierarchical routing override; empty = first master
};

// Adversary script pieces. Principals are written "ROLE:name" (e.g.
// "S:dev1", "EMS:ems"); an empty matcher field matches anything.
struct DropCfg {
    std::string from;
    std::string to;
    std::optional<uint8_t> tag;
    int count = -1;  // how many matches to drop; -1 = all
};

struct ReplayCfg {
    size_t index = 0;  // transcript event index at execution time
    std::string to;
};

struct InjectCfg {
    std::string to;
    Bytes bytes;            // explicit payload; empty = generated
    size_t random_len = 0;  // generate this many random bytes instead
    std::optional<uint8_t> framed_tag;  // wrap random fields in a valid frame
};

struct AdversaryCfg {
    std::vector<DropCfg> drop;
    std::vector<ReplayCfg> replay;  // executed after the main run, in order
    std::vector<InjectCfg> inject;  // executed after replays, in order
    std::vector<std::string> steal_card;    // employee ids
    std::vector<std::string> steal_device;  // slave ids, stolen right after provisioning
};

// Marks an expected-rejection scenario: the run exits 2 iff at least one
// of these error names was the cause of a rejection and nothing else went
// wrong.
struct ExpectCfg {
    std::vector<std::string> errors;
};

struct ScenarioConfig {
    std::string name;
    uint64_t seed = 0;
    Topology topology = Topology::DIRECT;
    KeyMode key_mode = KeyMode::SYMMETRIC;
    DhProfile dh_profile = DhProfile::TOY;
    DelegationMode delegation_mode = DelegationMode::PUBLIC_KEY;
    HierKeySource hier_key_source = HierKeySource::MASTER;
    std::vector<EmployeeCfg> employees;
    std::vector<std::string> masters;
    std::vector<SlaveCfg> slaves;
    AdversaryCfg adversary;
    std::vector<std::string> checks;  // secrecy goal atoms; empty = defaults
    std::optional<ExpectCfg> expect;

    static Result<ScenarioConfig> from_json_text(std::string_view text);
    static Result<ScenarioConfig> load(const std::string& path);
    Result<void> validate() const;
};

struct SlaveOutcome {
    std::string slave;
    bool keyed = false;
    std::string reason;  // error name + detail when not keyed
};

enum class ReportFormat { TEXT, STRUCTURED };

struct RunReport {
    std::string scenario;
    std::vector<SlaveOutcome> outcomes;
    size_t wire_message_count = 0;
    std::vector<dy::SecrecyResult> secrecy;
    std::map<std::string, size_t> audit_counts;
    std::vector<std::string> blocked;  // adversary actions that were rejected
    std::vector<std::string> alerts;   // anything unexpected; forces exit 1
    std::string transcript_digest;     // hex sha256 over transcript.log bytes
    int exit_code = 1;

    bool all_keyed() const;
    bool secrecy_holds() const;
    std::string render(ReportFormat fmt) const;
};

// Everything a run writes, kept in memory so tests can assert on artifact
// bytes without touching the filesystem.
struct RunArtifacts {
    std::string transcript_log;
    std::string audit_log;
    std::string transcript_sym;  // symbolic transcript consumed by `check`
};

Result<RunReport> run_scenario(const ScenarioConfig& cfg, RunArtifacts* artifacts = nullptr);

// run_scenario plus artifact files (transcript.log, audit.log,
// transcript.sym, report) under out_dir.
Result<RunReport> run_scenario_to_dir(const ScenarioConfig& cfg, const std::string& out_dir,
                                      ReportFormat fmt);

// The canonical threat-model batteries, derived from a happy-path base
// config: join replay, challenge replay, injection at every hop, stolen
// card, stolen device. Every battery must exit 2.
struct SuiteEntry {
    std::string name;
    RunReport report;
};

Result<std::vector<SuiteEntry>> attack_suite(const ScenarioConfig& base,
                                             const std::string& out_dir, ReportFormat fmt);

std::string render_suite(const std::vector<SuiteEntry>& entries, ReportFormat fmt);
int suite_exit_code(const std::vector<SuiteEntry>& entries);

struct CheckReport {
    std::vector<dy::SecrecyResult> secrecy;
    int exit_code = 1;

    std::string render(ReportFormat fmt) const;
};

// Re-runs the deduction engine over a saved symbolic transcript
// (transcript.sym produced by a run).
Result<CheckReport> check_transcript(const std::string& sym_path);

}  // namespace trustboot::harness
