#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "trustboot.h"

int main(int argc, char** argv) {
    CLI::App app{"deterministic commissioning simulator for employee-trust device onboarding"};
    app.require_subcommand(1);

    uint64_t seed = 0;
    std::string out_dir;
    std::string format = "text";
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "directory for transcript.log/audit.log/report");
        cmd->add_option("--format", format, "report format")
            ->check(CLI::IsMember({"text", "structured"}));
    };

    auto* run = app.add_subcommand("run", "run one scenario to completion");
    std::string run_config;
    run->add_option("config", run_config, "scenario config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* run_seed = run->add_option("--seed", seed, "override the seed in the config");
    add_common(run);

    auto* suite = app.add_subcommand("attack-suite",
                                     "run the scripted adversary battery against a base scenario");
    std::string suite_config;
    suite->add_option("config", suite_config, "base scenario config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* suite_seed = suite->add_option("--seed", seed, "override the seed in the config");
    add_common(suite);

    auto* check = app.add_subcommand("check", "re-run the secrecy analysis over a transcript");
    std::string sym_path;
    check->add_option("transcript", sym_path, "transcript.sym written by run --out")
        ->required()
        ->check(CLI::ExistingFile);
    add_common(check);

    CLI11_PARSE(app, argc, argv);

    tb_run_options opts{};
    opts.seed = seed;
    opts.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
    opts.structured = format == "structured" ? 1 : 0;

    tb_report* rep = nullptr;
    int st;
    if (app.got_subcommand(run)) {
        opts.has_seed = run_seed->count() > 0 ? 1 : 0;
        st = tb_run_scenario(run_config.c_str(), &opts, &rep);
    } else if (app.got_subcommand(suite)) {
        opts.has_seed = suite_seed->count() > 0 ? 1 : 0;
        st = tb_attack_suite(suite_config.c_str(), &opts, &rep);
    } else {
        st = tb_check_transcript(sym_path.c_str(), &opts, &rep);
    }

    if (st != TB_OK) {
        std::fprintf(stderr, "error: %s [%s]\n", tb_last_error(), tb_status_name(st));
        return 1;
    }
    std::fputs(tb_report_render(rep), stdout);
    int code = tb_report_exit_code(rep);
    tb_report_free(rep);
    return code;
}
