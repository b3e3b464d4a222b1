#include "trustboot/scenario.hpp"

#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "trustboot/crypto.hpp"

using namespace trustboot;
using namespace trustboot::harness;

namespace {

const char* kDirectSym = R"({
  "seed": 7,
  "topology": "DIRECT",
  "key_mode": "SYMMETRIC",
  "employees": [{"id": "alice", "password": "pw1"}],
  "slaves": [{"id": "s1", "employee": "alice", "handheld": "hh1"}]
})";

const char* kHierSym = R"({
  "seed": 7,
  "topology": "HIERARCHICAL",
  "key_mode": "SYMMETRIC",
  "employees": [{"id": "alice", "password": "pw1"}],
  "masters": ["m1"],
  "slaves": [{"id": "s1", "employee": "alice", "handheld": "hh1", "master": "m1"}]
})";

const char* kDirectDh = R"({
  "seed": 7,
  "topology": "DIRECT",
  "key_mode": "DH",
  "dh_profile": "TOY",
  "employees": [{"id": "alice", "password": "pw1"}],
  "slaves": [{"id": "s1", "employee": "alice", "handheld": "hh1",
              "capability": "ASYM_CAPABLE"}]
})";

const char* kHierDh = R"({
  "seed": 7,
  "topology": "HIERARCHICAL",
  "key_mode": "DH",
  "dh_profile": "TOY",
  "employees": [{"id": "alice", "password": "pw1"}],
  "masters": ["m1"],
  "slaves": [{"id": "s1", "employee": "alice", "handheld": "hh1",
              "capability": "ASYM_CAPABLE", "master": "m1"}]
})";

ScenarioConfig parse(const char* text) {
    auto cfg = ScenarioConfig::from_json_text(text);
    EXPECT_TRUE(cfg.ok()) << (cfg.ok() ? "" : cfg.error().detail);
    return cfg.ok() ? cfg.take() : ScenarioConfig{};
}

RunReport run(const char* text) {
    auto rep = run_scenario(parse(text));
    EXPECT_TRUE(rep.ok()) << (rep.ok() ? "" : rep.error().detail);
    return rep.ok() ? rep.take() : RunReport{};
}

std::string expect_config_error(const char* text) {
    auto cfg = ScenarioConfig::from_json_text(text);
    EXPECT_FALSE(cfg.ok());
    if (cfg.ok()) return {};
    EXPECT_EQ(cfg.code(), Err::ConfigError);
    return cfg.error().detail;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* tag) {
        path = std::filesystem::temp_directory_path() /
               (std::string("tb_") + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

// ---- config loading ------------------------------------------------------------

TEST(Config, FieldDiagnosticsNameThePath) {
    EXPECT_NE(expect_config_error("{}").find("seed"), std::string::npos);
    EXPECT_NE(expect_config_error("not json at all").find("JSON"), std::string::npos);

    auto topo = expect_config_error(R"({"seed":1,"topology":"RING","key_mode":"SYMMETRIC",
        "employees":[{"id":"a","password":"p"}],
        "slaves":[{"id":"s","employee":"a","handheld":"h"}]})");
    EXPECT_NE(topo.find("topology"), std::string::npos);
    EXPECT_NE(topo.find("DIRECT"), std::string::npos);  // options listed

    auto nested = expect_config_error(R"({"seed":1,"topology":"DIRECT","key_mode":"SYMMETRIC",
        "employees":[{"id":"a","password":"p"}],
        "slaves":[{"id":"s","employee":"ghost","handheld":"h"}]})");
    EXPECT_NE(nested.find("slaves[0].employee"), std::string::npos);
    EXPECT_NE(nested.find("ghost"), std::string::npos);
}

TEST(Config, StructuralRulesEnforced) {
    // hierarchical needs a master
    auto no_master = expect_config_error(R"({"seed":1,"topology":"HIERARCHICAL",
        "key_mode":"SYMMETRIC","employees":[{"id":"a","password":"p"}],
        "slaves":[{"id":"s","employee":"a","handheld":"h"}]})");
    EXPECT_NE(no_master.find("master"), std::string::npos);

    // negotiated keys need capable devices
    auto sym_only_dh = expect_config_error(R"({"seed":1,"topology":"DIRECT","key_mode":"DH",
        "employees":[{"id":"a","password":"p"}],
        "slaves":[{"id":"s","employee":"a","handheld":"h","capability":"SYM_ONLY"}]})");
    EXPECT_NE(sym_only_dh.find("capability"), std::string::npos);

    // duplicates
    auto dup = expect_config_error(R"({"seed":1,"topology":"DIRECT","key_mode":"SYMMETRIC",
        "employees":[{"id":"a","password":"p"}],
        "slaves":[{"id":"s","employee":"a","handheld":"h"},
                  {"id":"s","employee":"a","handheld":"h"}]})");
    EXPECT_NE(dup.find("duplicate"), std::string::npos);

    // adversary targets must parse as principals
    auto bad_to = expect_config_error(R"({"seed":1,"topology":"DIRECT","key_mode":"SYMMETRIC",
        "employees":[{"id":"a","password":"p"}],
        "slaves":[{"id":"s","employee":"a","handheld":"h"}],
        "adversary":{"replay":[{"index":0,"to":"nocolon"}]}})");
    EXPECT_NE(bad_to.find("replay[0].to"), std::string::npos);
}

TEST(Config, LoadReadsFilesAndNamesThem) {
    TempDir tmp("cfg");
    std::filesystem::create_directories(tmp.path);
    auto file = tmp.path / "my_run.json";
    std::ofstream(file) << kDirectSym;
    auto cfg = ScenarioConfig::load(file.string());
    ASSERT_TRUE(cfg.ok());
    EXPECT_EQ(cfg.value().name, "my_run");  // stem becomes the name
    EXPECT_EQ(cfg.value().seed, 7u);

    auto missing = ScenarioConfig::load((tmp.path / "nope.json").string());
    ASSERT_FALSE(missing.ok());
    EXPECT_EQ(missing.code(), Err::IoError);
}

// ---- happy paths ------------------------------------------------------------------

TEST(Run, MessageCountMatrix) {
    EXPECT_EQ(run(kDirectSym).wire_message_count, 5u);
    EXPECT_EQ(run(kHierSym).wire_message_count, 7u);
    EXPECT_EQ(run(kDirectDh).wire_message_count, 7u);
    EXPECT_EQ(run(kHierDh).wire_message_count, 9u);
}

TEST(Run, HappyPathReport) {
    RunReport r = run(kDirectSym);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_TRUE(r.all_keyed());
    EXPECT_TRUE(r.secrecy_holds());
    EXPECT_TRUE(r.blocked.empty());
    EXPECT_TRUE(r.alerts.empty());
    EXPECT_EQ(r.audit_counts.at("PROVISIONED"), 1u);
    EXPECT_EQ(r.audit_counts.at("AUTHENTICATED"), 1u);
    EXPECT_EQ(r.audit_counts.at("VERIFIED"), 1u);
    EXPECT_EQ(r.audit_counts.at("KEY_ISSUED"), 1u);
    EXPECT_EQ(r.audit_counts.count("REJECTED"), 0u);
    EXPECT_EQ(r.transcript_digest.size(), 64u);
    // default goals: employee secret + the four per-slave session secrets
    EXPECT_EQ(r.secrecy.size(), 5u);
}

TEST(Run, DeterministicBySeed) {
    RunReport a = run(kHierDh);
    RunReport b = run(kHierDh);
    EXPECT_EQ(a.transcript_digest, b.transcript_digest);
    EXPECT_EQ(a.render(ReportFormat::TEXT), b.render(ReportFormat::TEXT));

    auto cfg = parse(kHierDh);
    cfg.seed = 8;
    auto c = run_scenario(cfg);
    ASSERT_TRUE(c.ok());
    EXPECT_NE(c.value().transcript_digest, a.transcript_digest);
}

TEST(Run, StructuredRenderIsValidJson) {
    RunReport r = run(kDirectSym);
    auto j = nlohmann::json::parse(r.render(ReportFormat::STRUCTURED), nullptr, false);
    ASSERT_FALSE(j.is_discarded());
    EXPECT_EQ(j["exit_code"], 0);
    EXPECT_EQ(j["wire_message_count"], 5);
    EXPECT_EQ(j["outcomes"][0]["status"], "KEYED");
    EXPECT_EQ(j["secrecy"].size(), 5u);
}

// ---- adversary actions ---------------------------------------------------------------

TEST(Adversary, DropKillsTheSession) {
    auto cfg = parse(kDirectSym);
    DropCfg drop;
    drop.tag = 6;  // the challenge
    drop.count = 1;
    cfg.adversary.drop.push_back(drop);
    auto r = run_scenario(cfg);
    ASSERT_TRUE(r.ok());
    EXPECT_FALSE(r.value().all_keyed());
    EXPECT_EQ(r.value().exit_code, 1);  // lost session is a failure without expect
    ASSERT_EQ(r.value().outcomes.size(), 1u);
    EXPECT_NE(r.value().outcomes[0].reason.find("lost in transit"), std::string::npos);
}

TEST(Adversary, ReplayedJoinIsCaughtAndExpected) {
    auto cfg = parse(kDirectSym);
    cfg.adversary.replay.push_back({0, "EMS:ems"});
    cfg.expect = ExpectCfg{{"ReplayDetected"}};
    auto r = run_scenario(cfg);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.value().exit_code, 2);
    ASSERT_FALSE(r.value().blocked.empty());
    EXPECT_NE(r.value().blocked[0].find("ReplayDetected"), std::string::npos);
    EXPECT_TRUE(r.value().alerts.empty());
}

TEST(Adversary, UnmatchedExpectationFails) {
    auto cfg = parse(kDirectSym);
    cfg.expect = ExpectCfg{{"ReplayDetected"}};  // nothing will be rejected
    auto r = run_scenario(cfg);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.value().exit_code, 1);
}

TEST(Adversary, InjectedGarbageIsRejectedEverywhere) {
    auto cfg = parse(kHierSym);
    for (const char* to : {"EMS:ems", "SM:sm", "M:m1", "S:s1"})
        cfg.adversary.inject.push_back({to, {}, 48, std::nullopt});
    cfg.adversary.inject.push_back({"EMS:ems", {}, 0, uint8_t{2}});  // framed junk
    cfg.expect = ExpectCfg{{"MalformedPacket", "AuthFail"}};
    auto r = run_scenario(cfg);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.value().exit_code, 2);
    EXPECT_GE(r.value().blocked.size(), 5u);
    EXPECT_TRUE(r.value().alerts.empty());
}

TEST(Adversary, StolenCardMakesNoProgress) {
    auto cfg = parse(kDirectSym);
    cfg.adversary.steal_card.push_back("alice");
    cfg.expect = ExpectCfg{{"WrongPassword"}};
    auto r = run_scenario(cfg);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.value().exit_code, 2);
    EXPECT_EQ(r.value().wire_message_count, 0u);  // zero protocol progress
    EXPECT_EQ(r.value().audit_counts.size(), 0u);
}

TEST(Adversary, StolenDeviceLeaksNothing) {
    auto cfg = parse(kDirectSym);
    cfg.adversary.steal_device.push_back("s1");
    cfg.expect = ExpectCfg{{"StealDevice"}};
    auto r = run_scenario(cfg);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.value().exit_code, 2);
    EXPECT_TRUE(r.value().secrecy_holds());
    EXPECT_FALSE(r.value().all_keyed());
}

// ---- artifacts and re-checking --------------------------------------------------------

TEST(Artifacts, WrittenAndRecheckable) {
    TempDir tmp("art");
    auto cfg = parse(kHierSym);
    auto r = run_scenario_to_dir(cfg, tmp.path.string(), ReportFormat::TEXT);
    ASSERT_TRUE(r.ok());
    for (const char* f : {"transcript.log", "audit.log", "transcript.sym", "report"})
        EXPECT_TRUE(std::filesystem::exists(tmp.path / f)) << f;

    // transcript.log digest matches the report
    std::ifstream t(tmp.path / "transcript.log", std::ios::binary);
    std::stringstream ss;
    ss << t.rdbuf();
    EXPECT_EQ(to_hex(crypto::sha256(to_bytes(ss.str()))), r.value().transcript_digest);

    auto check = check_transcript((tmp.path / "transcript.sym").string());
    ASSERT_TRUE(check.ok());
    EXPECT_EQ(check.value().exit_code, 0);
    for (const auto& s : check.value().secrecy) EXPECT_FALSE(s.derivable) << s.secret;
}

TEST(Artifacts, CheckFlagsSeededLeak) {
    TempDir tmp("leak");
    std::filesystem::create_directories(tmp.path);
    auto sym = tmp.path / "transcript.sym";
    std::ofstream(sym) << "initial k\n"
                       << "goal secret\n"
                       << "term (senc k secret)\n";
    auto check = check_transcript(sym.string());
    ASSERT_TRUE(check.ok());
    EXPECT_EQ(check.value().exit_code, 1);
    ASSERT_EQ(check.value().secrecy.size(), 1u);
    EXPECT_TRUE(check.value().secrecy[0].derivable);
    EXPECT_FALSE(check.value().secrecy[0].path.empty());

    std::ofstream(sym) << "nonsense line\n";
    EXPECT_FALSE(check_transcript(sym.string()).ok());
    EXPECT_FALSE(check_transcript((tmp.path / "missing.sym").string()).ok());
}

// ---- attack suite ----------------------------------------------------------------------

TEST(Suite, AllBatteriesBlockOnBothTopologies) {
    for (const char* base : {kDirectSym, kHierSym}) {
        auto entries = attack_suite(parse(base), "", ReportFormat::TEXT);
        ASSERT_TRUE(entries.ok());
        ASSERT_EQ(entries.value().size(), 5u);
        for (const auto& e : entries.value())
            EXPECT_EQ(e.report.exit_code, 2) << e.name << ": " << e.report.render(ReportFormat::TEXT);
        EXPECT_EQ(suite_exit_code(entries.value()), 2);

        std::string text = render_suite(entries.value(), ReportFormat::TEXT);
        for (const char* name :
             {"replay_join", "replay_challenge", "inject_every_hop", "stolen_card",
              "stolen_device"})
            EXPECT_NE(text.find(name), std::string::npos) << name;
    }
}

TEST(Suite, NonBlockedEntryFailsTheSuite) {
    std::vector<SuiteEntry> entries;
    RunReport okish;
    okish.exit_code = 2;
    RunReport bad;
    bad.exit_code = 1;
    entries.push_back({"good", okish});
    EXPECT_EQ(suite_exit_code(entries), 2);
    entries.push_back({"bad", bad});
    EXPECT_EQ(suite_exit_code(entries), 1);
    EXPECT_EQ(suite_exit_code({}), 1);
}

TEST(Suite, WritesPerBatteryArtifacts) {
    TempDir tmp("suite");
    auto entries = attack_suite(parse(kDirectSym), tmp.path.string(), ReportFormat::STRUCTURED);
    ASSERT_TRUE(entries.ok());
    EXPECT_TRUE(std::filesystem::exists(tmp.path / "replay_join" / "report"));
    EXPECT_TRUE(std::filesystem::exists(tmp.path / "stolen_device" / "transcript.log"));

    auto j = nlohmann::json::parse(render_suite(entries.value(), ReportFormat::STRUCTURED),
                                   nullptr, false);
    ASSERT_FALSE(j.is_discarded());
    EXPECT_EQ(j["exit_code"], 2);
    EXPECT_EQ(j["suite"].size(), 5u);
}

// ---- accountability across a mixed run -------------------------------------------------

TEST(Accountability, KeyIssueTracesToCommissioningEmployee) {
    const char* mixed = R"({
      "seed": 99,
      "topology": "HIERARCHICAL",
      "key_mode": "SYMMETRIC",
      "employees": [{"id": "alice", "password": "p1"},
                    {"id": "bob", "password": "p2"},
                    {"id": "carol", "password": "p3"}],
      "masters": ["m1", "m2"],
      "slaves": [
        {"id": "s1", "employee": "alice", "handheld": "h1", "master": "m1"},
        {"id": "s2", "employee": "bob",   "handheld": "h2", "master": "m2"},
        {"id": "s3", "employee": "carol", "handheld": "h3", "master": "m1"},
        {"id": "s4", "employee": "alice", "handheld": "h1", "master": "m2"},
        {"id": "s5", "employee": "carol", "handheld": "h3", "master": "m1"}
      ]
    })";
    RunArtifacts art;
    auto r = run_scenario(parse(mixed), &art);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.value().exit_code, 0);
    EXPECT_EQ(r.value().audit_counts.at("KEY_ISSUED"), 5u);

    std::map<std::string, std::string> expected{{"s1", "alice"},
                                                {"s2", "bob"},
                                                {"s3", "carol"},
                                                {"s4", "alice"},
                                                {"s5", "carol"}};
    size_t key_rows = 0;
    std::istringstream in(art.audit_log);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        size_t start = 0;
        while (true) {
            size_t tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        ASSERT_EQ(cols.size(), 6u) << line;
        if (cols[3] != "KEY_ISSUED") continue;
        ++key_rows;
        EXPECT_EQ(cols[1], expected.at(cols[0])) << line;
    }
    EXPECT_EQ(key_rows, 5u);
}
