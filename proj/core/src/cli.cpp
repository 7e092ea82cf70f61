#include "ghzkd/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

namespace ghzkd {

namespace {

void bind_options(CLI::App& app, ExperimentConfig& config) {
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "config file supplying the same keys; flags override");
    app.get_config_formatter_base()->comment('#');

    app.add_option("--parties", config.num_parties, "number of legitimate users (>= 3)");
    app.add_option("--n", config.plan.n, "key positions per sequence");
    app.add_option("--d", config.plan.d, "first-check positions per sequence");
    app.add_option("--dprime", config.plan.d_prime, "second-check positions per sequence");
    app.add_option("--attack", config.attack, "adversary model")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, AttackKind>{{"none", AttackKind::None},
                                              {"2cnot", AttackKind::DoubleCnot},
                                              {"mitm-ghz", AttackKind::MitmGhz},
                                              {"mitm-z", AttackKind::MitmZ},
                                              {"intercept-resend", AttackKind::InterceptResend}},
            CLI::ignore_case));
    app.add_option("--encoding", config.encoding, "encoding agreement")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, EncodingMode>{{"two-op", EncodingMode::TwoOp},
                                                {"four-op", EncodingMode::FourOp}},
            CLI::ignore_case));
    app.add_flag("--eve-knows-agreement", config.eve_knows_agreement,
                 "give Eve the bit/operator agreement");
    app.add_option("--trials", config.trials, "independent sessions to run");
    app.add_option("--seed", config.seed, "master seed; runs are reproducible per seed");
    app.add_option("--threshold", config.error_threshold,
                   "d' error rate up to which a key is accepted");
    app.add_flag("--abort-on-detection", config.abort_on_detection,
                 "stop a session once step 4 flags an eavesdropper");
    app.add_option("--mitmz-pair", config.mitmz_pair,
                   "z ancilla bits for mitm-z, one per recipient (e.g. 00, 01)");
    app.add_option("--out", config.out_paths,
                   "report file; .csv writes the tabular form, anything else JSON; repeatable");
    app.add_option("--dump-transcripts", config.transcript_dir,
                   "directory for per-trial transcript dumps (JSON lines)");
}

}  // namespace

ExperimentConfig parse_cli(const std::vector<std::string>& argv) {
    CLI::App app{"Monte Carlo simulator for multi-key GHZ quantum key distribution"};
    ExperimentConfig config;
    bind_options(app, config);
    std::vector<const char*> raw;
    raw.reserve(argv.size());
    for (const std::string& a : argv) raw.push_back(a.c_str());
    app.parse(static_cast<int>(raw.size()), raw.data());
    return config;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Monte Carlo simulator for multi-key GHZ quantum key distribution"};
    ExperimentConfig config;
    bind_options(app, config);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    }
    try {
        TranscriptSink sink;
        if (!config.transcript_dir.empty()) {
            std::filesystem::create_directories(config.transcript_dir);
            const std::string dir = config.transcript_dir;
            sink = [dir](long trial, const Transcript& transcript) {
                std::ostringstream name;
                name << dir << "/trial_" << trial << ".jsonl";
                std::ofstream out(name.str(), std::ios::binary);
                if (!out) throw IoError("cannot open transcript file: " + name.str());
                out << to_jsonl(transcript);
                if (!out) throw IoError("failed writing transcript file: " + name.str());
            };
        }
        const ExperimentReport report = run_monte_carlo(config, sink);
        print_summary(std::cout, report);
        for (const std::string& path : config.out_paths) write_report(report, path);
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace ghzkd
