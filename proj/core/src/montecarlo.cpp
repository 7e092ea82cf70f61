#include "ghzkd/montecarlo.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace ghzkd {

namespace {

constexpr std::uint64_t kSaltTrial = 0x1000000;
constexpr std::uint64_t kSaltEveInference = 0x2000000;

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

const char* encoding_name(EncodingMode mode) {
    return mode == EncodingMode::TwoOp ? "two-op" : "four-op";
}

}  // namespace

SessionConfig ExperimentConfig::session_config() const {
    SessionConfig sc;
    sc.num_parties = num_parties;
    sc.plan = plan;
    sc.encoding = encoding;
    sc.error_threshold = error_threshold;
    sc.abort_on_detection = abort_on_detection;
    return sc;
}

std::vector<std::uint8_t> ExperimentConfig::mitmz_pattern() const {
    std::vector<std::uint8_t> bits;
    bits.reserve(mitmz_pair.size());
    for (char c : mitmz_pair) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("mitmz pair must be a bitstring, e.g. 00 or 01");
        }
        bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return bits;
}

void ExperimentConfig::validate() const {
    session_config().validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const auto bits = mitmz_pattern();
    if (!bits.empty() && bits.size() != static_cast<std::size_t>(num_parties - 1)) {
        throw std::invalid_argument("mitmz pair needs one bit per recipient");
    }
}

RateEstimate wilson_estimate(long successes, long total) {
    RateEstimate e;
    e.successes = successes;
    e.total = total;
    if (total <= 0) return e;
    const double z = 1.959963984540054;  // 95%
    const double n = static_cast<double>(total);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    e.rate = p;
    e.ci_low = std::max(0.0, center - half);
    e.ci_high = std::min(1.0, center + half);
    return e;
}

ExperimentReport run_monte_carlo(const ExperimentConfig& config, const TranscriptSink& sink) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    const SessionConfig session_config = config.session_config();
    const RandomStream master(config.seed);
    const int n = config.num_parties;

    long detected = 0;
    long agree = 0;
    long eve_whole = 0;
    long eve_bits_total = 0;
    long eve_bits_correct = 0;
    long eve_convention_guesses = 0;
    long eve_convention_correct = 0;
    long z_checks = 0;
    long z_failures = 0;
    long x_checks = 0;
    long x_failures = 0;
    long substitutions = 0;
    long exact_matches = 0;
    long tampered = 0;
    long audit_passes = 0;
    long aborted = 0;
    std::vector<long> selected(static_cast<std::size_t>(n), 0);
    std::vector<double> dprime_sum(static_cast<std::size_t>(n), 0.0);
    long dprime_sessions = 0;

    for (long trial = 0; trial < config.trials; ++trial) {
        RandomStream trial_rng = master.derive(kSaltTrial + static_cast<std::uint64_t>(trial));
        auto attack = make_attack(config.attack, n, config.mitmz_pattern());
        Session session(session_config, *attack, trial_rng);
        const SessionReport& report = session.run();

        RandomStream eve_rng = trial_rng.derive(kSaltEveInference);
        EveReport eve = attack->infer_keys(config.eve_knows_agreement, session.convention(),
                                           eve_rng);
        score_eve_report(eve, session, *attack, config.eve_knows_agreement);

        if (eve.detected) ++detected;
        if (report.all_keys_agree) ++agree;
        if (eve.whole_key_recovered) ++eve_whole;
        eve_bits_total += eve.bits_guessed_count;
        eve_bits_correct += eve.bits_correct;
        if (eve.has_convention_guess) {
            ++eve_convention_guesses;
            if (eve.convention_correct) ++eve_convention_correct;
        }
        z_checks += report.z_checks;
        z_failures += report.z_failures;
        x_checks += report.x_checks;
        x_failures += report.x_failures;
        substitutions += eve.substitutions;
        exact_matches += eve.substitution_exact_matches;
        bool any_tamper = false;
        for (std::uint8_t t : report.tamper) any_tamper = any_tamper || t;
        if (any_tamper) ++tampered;
        if (audit_leakage(report.transcript)) ++audit_passes;
        if (report.aborted) {
            ++aborted;
        } else {
            ++dprime_sessions;
            ++selected[static_cast<std::size_t>(report.selected_key_owner)];
            for (int owner = 0; owner < n; ++owner) {
                double sum = 0.0;
                int partners = 0;
                for (int partner = 0; partner < n; ++partner) {
                    if (partner == owner) continue;
                    sum += report.dprime_error[static_cast<std::size_t>(owner)]
                                              [static_cast<std::size_t>(partner)];
                    ++partners;
                }
                dprime_sum[static_cast<std::size_t>(owner)] += sum / partners;
            }
        }
        if (sink) sink(trial, report.transcript);
    }

    ExperimentReport out;
    out.config = config;
    out.detection = wilson_estimate(detected, config.trials);
    out.key_agreement = wilson_estimate(agree, config.trials);
    out.eve_whole_key = wilson_estimate(eve_whole, config.trials);
    out.eve_bits = wilson_estimate(eve_bits_correct, eve_bits_total);
    out.eve_convention = wilson_estimate(eve_convention_correct, eve_convention_guesses);
    out.z_check_failures = wilson_estimate(z_failures, z_checks);
    out.x_check_failures = wilson_estimate(x_failures, x_checks);
    out.substitution_matches = wilson_estimate(exact_matches, substitutions);
    out.tamper = wilson_estimate(tampered, config.trials);
    out.audit = wilson_estimate(audit_passes, config.trials);
    out.mean_dprime_error.assign(static_cast<std::size_t>(n), 0.0);
    for (int owner = 0; owner < n; ++owner) {
        if (dprime_sessions > 0) {
            out.mean_dprime_error[static_cast<std::size_t>(owner)] =
                dprime_sum[static_cast<std::size_t>(owner)] / dprime_sessions;
        }
    }
    out.selected_key.reserve(static_cast<std::size_t>(n));
    for (int owner = 0; owner < n; ++owner) {
        out.selected_key.push_back(
            wilson_estimate(selected[static_cast<std::size_t>(owner)], config.trials));
    }
    out.aborted_sessions = aborted;
    out.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

namespace {

nlohmann::json rate_json(const RateEstimate& e) {
    return nlohmann::json{{"successes", e.successes},
                          {"total", e.total},
                          {"rate", e.rate},
                          {"ci95_low", e.ci_low},
                          {"ci95_high", e.ci_high}};
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
    const ExperimentConfig& c = report.config;
    nlohmann::json config{
        {"parties", c.num_parties},
        {"n", c.plan.n},
        {"d", c.plan.d},
        {"dprime", c.plan.d_prime},
        {"attack", to_string(c.attack)},
        {"encoding", encoding_name(c.encoding)},
        {"eve_knows_agreement", c.eve_knows_agreement},
        {"trials", c.trials},
        {"seed", c.seed},
        {"threshold", c.error_threshold},
        {"abort_on_detection", c.abort_on_detection},
        {"mitmz_pair", c.mitmz_pair},
    };
    nlohmann::json results{
        {"detection", rate_json(report.detection)},
        {"key_agreement", rate_json(report.key_agreement)},
        {"eve_whole_key", rate_json(report.eve_whole_key)},
        {"eve_bits", rate_json(report.eve_bits)},
        {"eve_convention", rate_json(report.eve_convention)},
        {"z_check_failures", rate_json(report.z_check_failures)},
        {"x_check_failures", rate_json(report.x_check_failures)},
        {"substitution_matches", rate_json(report.substitution_matches)},
        {"tamper", rate_json(report.tamper)},
        {"leakage_audit", rate_json(report.audit)},
        {"mean_dprime_error", report.mean_dprime_error},
        {"aborted_sessions", report.aborted_sessions},
    };
    nlohmann::json selected = nlohmann::json::array();
    for (const RateEstimate& e : report.selected_key) selected.push_back(rate_json(e));
    results["selected_key_distribution"] = std::move(selected);

    nlohmann::json doc{{"config", std::move(config)}, {"results", std::move(results)}};
    return doc.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "attack,metric,estimate,ci_low,ci_high,trials,seed\n";
    const std::string attack = to_string(report.config.attack);
    const auto row = [&](const std::string& metric, const RateEstimate& e) {
        out << attack << ',' << metric << ',' << format_double(e.rate) << ','
            << format_double(e.ci_low) << ',' << format_double(e.ci_high) << ','
            << report.config.trials << ',' << report.config.seed << '\n';
    };
    const auto plain_row = [&](const std::string& metric, double v) {
        out << attack << ',' << metric << ',' << format_double(v) << ",,,"
            << report.config.trials << ',' << report.config.seed << '\n';
    };
    row("detection_rate", report.detection);
    row("key_agreement_rate", report.key_agreement);
    row("eve_whole_key_rate", report.eve_whole_key);
    row("eve_bit_rate", report.eve_bits);
    row("eve_convention_rate", report.eve_convention);
    row("z_check_failure_rate", report.z_check_failures);
    row("x_check_failure_rate", report.x_check_failures);
    row("substitution_match_rate", report.substitution_matches);
    row("tamper_rate", report.tamper);
    row("leakage_audit_pass_rate", report.audit);
    for (std::size_t owner = 0; owner < report.mean_dprime_error.size(); ++owner) {
        plain_row("mean_dprime_error_owner_" + std::to_string(owner),
                  report.mean_dprime_error[owner]);
    }
    for (std::size_t owner = 0; owner < report.selected_key.size(); ++owner) {
        row("selected_key_owner_" + std::to_string(owner), report.selected_key[owner]);
    }
    plain_row("aborted_sessions", static_cast<double>(report.aborted_sessions));
    return out.str();
}

void write_report(const ExperimentReport& report, const std::string& path) {
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << (csv ? report_to_csv(report) : report_to_json(report));
    if (!out) throw IoError("failed writing output file: " + path);
}

void print_summary(std::ostream& out, const ExperimentReport& report) {
    const ExperimentConfig& c = report.config;
    out << "attack=" << to_string(c.attack) << " parties=" << c.num_parties << " n=" << c.plan.n
        << " d=" << c.plan.d << " d'=" << c.plan.d_prime << " encoding=" << encoding_name(c.encoding)
        << " trials=" << c.trials << " seed=" << c.seed << "\n";
    const auto line = [&](const char* name, const RateEstimate& e) {
        if (e.total == 0) return;
        out << "  " << name << ": " << e.rate << "  (95% CI [" << e.ci_low << ", " << e.ci_high
            << "], " << e.successes << "/" << e.total << ")\n";
    };
    line("step-4 detection rate", report.detection);
    line("key agreement rate", report.key_agreement);
    line("eve whole-key rate", report.eve_whole_key);
    line("eve bit rate", report.eve_bits);
    line("eve convention rate", report.eve_convention);
    line("z-check failure rate", report.z_check_failures);
    line("x-check failure rate", report.x_check_failures);
    line("substitution exact-match rate", report.substitution_matches);
    line("tamper rate", report.tamper);
    line("leakage audit pass rate", report.audit);
    out << "  mean d' error per owner:";
    for (double v : report.mean_dprime_error) out << ' ' << v;
    out << "\n  selected key distribution:";
    for (const RateEstimate& e : report.selected_key) out << ' ' << e.rate;
    out << "\n  aborted sessions: " << report.aborted_sessions;
    out << "\n  wall clock: " << report.wall_clock_seconds << " s\n";
}

}  // namespace ghzkd
