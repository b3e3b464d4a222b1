#include "trustboot/audit.hpp"

#include <sstream>

namespace trustboot {

const char* audit_step_name(AuditStep s) {
    switch (s) {
        case AuditStep::PROVISIONED: return "PROVISIONED";
        case AuditStep::AUTHENTICATED: return "AUTHENTICATED";
        case AuditStep::VERIFIED: return "VERIFIED";
        case AuditStep::KEY_ISSUED: return "KEY_ISSUED";
        case AuditStep::REJECTED: return "REJECTED";
    }
    return "?";
}

std::string AuditRecord::to_line() const {
    std::ostringstream os;
    os << slave << '\t' << employee << '\t' << handheld << '\t' << audit_step_name(step)
       << '\t' << (detail.empty() ? "-" : detail) << '\t' << tick;
    return os.str();
}

void AuditLog::note_commission(const std::string& slave, const std::string& employee,
                               const std::string& handheld, uint64_t tick) {
    commissioned_[slave] = {employee, handheld};
    record(AuditStep::PROVISIONED, slave, "", tick);
}

void AuditLog::record(AuditStep step, const std::string& slave, const std::string& detail,
                      uint64_t tick) {
    AuditRecord r;
    r.slave = slave.empty() ? "-" : slave;
    r.step = step;
    r.detail = detail;
    r.tick = tick;
    if (auto it = commissioned_.find(slave); it != commissioned_.end()) {
        r.employee = it->second.first;
        r.handheld = it->second.second;
    } else {
        r.employee = "-";
        r.handheld = "-";
    }
    records_.push_back(std::move(r));
}

std::optional<std::pair<std::string, std::string>> AuditLog::attribution(
    const std::string& slave) const {
    if (auto it = commissioned_.find(slave); it != commissioned_.end()) return it->second;
    return std::nullopt;
}

std::string AuditLog::render() const {
    std::string out;
    for (const auto& r : records_) {
        out += r.to_line();
        out += '\n';
    }
    return out;
}

}  // namespace trustboot
