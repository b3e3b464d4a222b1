#include "trustboot.h"

#include <cstring>
#include <string>

#include "trustboot/scenario.hpp"

using namespace trustboot;
using harness::ReportFormat;

struct tb_report {
    int exit_code = 1;
    std::string rendered;
    std::string digest;
};

namespace {

thread_local std::string g_last_error;

int to_status(Err e) { return static_cast<int>(e) + 1; }

int fail(const Error& e) {
    g_last_error = e.detail.empty() ? err_name(e.code)
                                    : std::string(err_name(e.code)) + ": " + e.detail;
    return to_status(e.code);
}

int fail_arg(const char* what) {
    g_last_error = what;
    return to_status(Err::ConfigError);
}

struct Options {
    std::optional<uint64_t> seed;
    std::string out_dir;
    ReportFormat fmt = ReportFormat::TEXT;
};

Options read_options(const tb_run_options* opts) {
    Options o;
    if (!opts) return o;
    if (opts->has_seed) o.seed = opts->seed;
    if (opts->out_dir) o.out_dir = opts->out_dir;
    if (opts->structured) o.fmt = ReportFormat::STRUCTURED;
    return o;
}

int emit(tb_report** out, tb_report rep) {
    if (!out) return fail_arg("output pointer is null");
    *out = new tb_report(std::move(rep));
    g_last_error.clear();
    return TB_OK;
}

int run_config(Result<harness::ScenarioConfig> cfg, const tb_run_options* opts,
               tb_report** out) {
    if (!cfg.ok()) return fail(cfg.error());
    Options o = read_options(opts);
    if (o.seed) cfg.value().seed = *o.seed;

    auto report = o.out_dir.empty()
                      ? harness::run_scenario(cfg.value())
                      : harness::run_scenario_to_dir(cfg.value(), o.out_dir, o.fmt);
    if (!report.ok()) return fail(report.error());

    tb_report rep;
    rep.exit_code = report.value().exit_code;
    rep.rendered = report.value().render(o.fmt);
    rep.digest = report.value().transcript_digest;
    return emit(out, std::move(rep));
}

}  // namespace

extern "C" {

int tb_run_scenario(const char* config_path, const tb_run_options* opts, tb_report** out) {
    if (!config_path) return fail_arg("config_path is null");
    return run_config(harness::ScenarioConfig::load(config_path), opts, out);
}

int tb_run_scenario_text(const char* config_json, const tb_run_options* opts,
                         tb_report** out) {
    if (!config_json) return fail_arg("config_json is null");
    return run_config(harness::ScenarioConfig::from_json_text(config_json), opts, out);
}

int tb_attack_suite(const char* config_path, const tb_run_options* opts, tb_report** out) {
    if (!config_path) return fail_arg("config_path is null");
    auto cfg = harness::ScenarioConfig::load(config_path);
    if (!cfg.ok()) return fail(cfg.error());
    Options o = read_options(opts);
    if (o.seed) cfg.value().seed = *o.seed;

    auto entries = harness::attack_suite(cfg.value(), o.out_dir, o.fmt);
    if (!entries.ok()) return fail(entries.error());

    tb_report rep;
    rep.exit_code = harness::suite_exit_code(entries.value());
    rep.rendered = harness::render_suite(entries.value(), o.fmt);
    return emit(out, std::move(rep));
}

int tb_check_transcript(const char* sym_path, const tb_run_options* opts, tb_report** out) {
    if (!sym_path) return fail_arg("sym_path is null");
    auto check = harness::check_transcript(sym_path);
    if (!check.ok()) return fail(check.error());

    Options o = read_options(opts);
    tb_report rep;
    rep.exit_code = check.value().exit_code;
    rep.rendered = check.value().render(o.fmt);
    return emit(out, std::move(rep));
}

int tb_report_exit_code(const tb_report* report) { return report ? report->exit_code : 1; }

const char* tb_report_render(const tb_report* report) {
    return report ? report->rendered.c_str() : "";
}

const char* tb_report_digest(const tb_report* report) {
    return report ? report->digest.c_str() : "";
}

void tb_report_free(tb_report* report) { delete report; }

const char* tb_status_name(int status) {
    if (status == TB_OK) return "OK";
    int idx = status - 1;
    if (idx < 0 || idx > static_cast<int>(Err::Internal)) return "UNKNOWN";
    return err_name(static_cast<Err>(idx));
}

const char* tb_last_error(void) { return g_last_error.c_str(); }

const char* tb_version(void) { return "1.0.0"; }

}  // extern "C"
