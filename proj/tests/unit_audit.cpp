#include "trustboot/audit.hpp"

#include <gtest/gtest.h>

using namespace trustboot;

TEST(Audit, StepNames) {
    EXPECT_STREQ(audit_step_name(AuditStep::PROVISIONED), "PROVISIONED");
    EXPECT_STREQ(audit_step_name(AuditStep::AUTHENTICATED), "AUTHENTICATED");
    EXPECT_STREQ(audit_step_name(AuditStep::VERIFIED), "VERIFIED");
    EXPECT_STREQ(audit_step_name(AuditStep::KEY_ISSUED), "KEY_ISSUED");
    EXPECT_STREQ(audit_step_name(AuditStep::REJECTED), "REJECTED");
}

TEST(Audit, CommissionAttributionFlowsIntoLaterRecords) {
    AuditLog log;
    log.note_commission("s1", "alice", "hh1", 0);  // records PROVISIONED itself
    log.record(AuditStep::AUTHENTICATED, "s1", "direct", 3);
    log.record(AuditStep::KEY_ISSUED, "s1", "symmetric", 5);

    ASSERT_EQ(log.records().size(), 3u);
    EXPECT_EQ(log.records()[0].step, AuditStep::PROVISIONED);
    for (const auto& r : log.records()) {
        EXPECT_EQ(r.slave, "s1");
        EXPECT_EQ(r.employee, "alice");
        EXPECT_EQ(r.handheld, "hh1");
    }
    EXPECT_EQ(log.records()[2].step, AuditStep::KEY_ISSUED);
    EXPECT_EQ(log.records()[2].tick, 5u);

    auto attr = log.attribution("s1");
    ASSERT_TRUE(attr.has_value());
    EXPECT_EQ(attr->first, "alice");
    EXPECT_EQ(attr->second, "hh1");
    EXPECT_EQ(log.attribution("unknown"), std::nullopt);
}

TEST(Audit, UncommissionedActorsGetPlaceholders) {
    AuditLog log;
    log.record(AuditStep::REJECTED, "ghost", "AuthFail", 7);
    const auto& r = log.records().front();
    EXPECT_EQ(r.employee, "-");
    EXPECT_EQ(r.handheld, "-");
    EXPECT_EQ(r.to_line(), "ghost\t-\t-\tREJECTED\tAuthFail\t7");
}

TEST(Audit, LineFormatIsTabSeparated) {
    AuditLog log;
    log.note_commission("s2", "bob", "hh9", 1);
    EXPECT_EQ(log.records()[0].to_line(), "s2\tbob\thh9\tPROVISIONED\t-\t1");
    EXPECT_EQ(log.render(), "s2\tbob\thh9\tPROVISIONED\t-\t1\n");
}

TEST(Audit, AppendOnlyOrdering) {
    AuditLog log;
    log.record(AuditStep::REJECTED, "a", "first", 1);
    log.record(AuditStep::REJECTED, "b", "second", 2);
    log.record(AuditStep::REJECTED, "a", "third", 3);
    ASSERT_EQ(log.records().size(), 3u);
    EXPECT_EQ(log.records()[0].detail, "first");
    EXPECT_EQ(log.records()[1].detail, "second");
    EXPECT_EQ(log.records()[2].detail, "third");
}
