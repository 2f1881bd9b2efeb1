#include "bosecrit/cli_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

const std::map<std::string, std::string> kDescriptions{
    {"critical-constants", "Birman-Schwinger grid ladder, variational bounds and critical-constant intervals"},
    {"moments", "Monte Carlo mixed moments of the mollified N-particle system"},
    {"sublimiting", "Partial sums of the three-particle sub-limiting path integrals"},
    {"iterated", "Iterated integrals L_m and the zeta integrals"},
    {"spectrum-scan", "Birman-Schwinger energy curves and bound-state eigenvalues"},
};

}  // namespace

int main(int argc, char** argv) {
    using namespace bosecrit::cli;
    CLI::App app{"Critical couplings and moment asymptotics for contact-interacting Brownian particles"};
    app.require_subcommand(1, 1);
    std::map<std::string, Flags> flags;
    for (const auto& name : commands()) {
        auto* sub = app.add_subcommand(name, kDescriptions.at(name));
        auto& f = flags[name];
        sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", f.seed, "Master random seed");
        sub->add_option("--threads", f.threads, "Worker threads (0: BOSECRIT_THREADS or hardware)")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", f.out, "Output directory");
        sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        const std::string name = app.get_subcommands().front()->get_name();
        const auto& f = flags[name];
        RunConfig cfg = f.config.empty() ? load_config(name, nullptr) : load_config_file(name, f.config);
        if (f.seed) cfg.global.seed = *f.seed;
        if (f.threads) cfg.global.threads = *f.threads;
        if (f.out) cfg.global.out_dir = *f.out;
        if (f.format) cfg.global.format = parse_format(*f.format);
        ResultRecord r = run(cfg);
        auto paths = write_outputs(r, cfg.global);
        std::cout << summary(r);
        for (const auto& p : paths) std::cout << "wrote " << p << "\n";
        for (const auto& d : r.diagnostics) std::cerr << "flag: " << d << "\n";
        return exit_code(r);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
