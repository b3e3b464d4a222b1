#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trustboot/wire.hpp"

namespace trustboot {

enum class AuditStep { PROVISIONED, AUTHENTICATED, VERIFIED, KEY_ISSUED, REJECTED };

const char* audit_step_name(AuditStep s);

// One accountability row. Every KEY_ISSUED row must trace back, through
// the same slave, to a PROVISIONED row naming the responsible employee
// and handheld.
struct AuditRecord {
    std::string slave;
    std::string employee;  // "-" when not yet attributable
    std::string handheld;
    AuditStep step;
    std::string detail;
    uint64_t tick = 0;

    std::string to_line() const;  // tab-separated, fields in declaration order
};

class AuditLog {
public:
    // Registers who commissioned a slave and appends the PROVISIONED row.
    // Later rows for the same slave inherit the attribution.
    void note_commission(const std::string& slave, const std::string& employee,
                         const std::string& handheld, uint64_t tick);

    void record(AuditStep step, const std::string& slave, const std::string& detail,
                uint64_t tick);

    const std::vector<AuditRecord>& records() const { return records_; }
    std::optional<std::pair<std::string, std::string>> attribution(
        const std::string& slave) const;

    std::string render() const;  // one to_line() per record

private:
    std::vector<AuditRecord> records_;
    std::map<std::string, std::pair<std::string, std::string>> commissioned_;
};

}  // namespace trustboot
