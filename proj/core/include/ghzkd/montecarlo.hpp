#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ghzkd/adversary.hpp"
#include "ghzkd/protocol.hpp"

namespace ghzkd {

struct ExperimentConfig {
    int num_parties = 3;
    SequencePlan plan{};  // n=16, d=8, d'=8
    AttackKind attack = AttackKind::None;
    EncodingMode encoding = EncodingMode::TwoOp;
    bool eve_knows_agreement = false;
    long trials = 1000;
    std::uint64_t seed = 1;
    double error_threshold = 0.0;
    bool abort_on_detection = false;
    std::string mitmz_pair;               // one bit per recipient, e.g. "00"; empty = all zeros
    std::vector<std::string> out_paths;   // .json or .csv, decided by extension
    std::string transcript_dir;           // per-trial dumps; empty = off

    SessionConfig session_config() const;
    std::vector<std::uint8_t> mitmz_pattern() const;
    void validate() const;
};

struct RateEstimate {
    long successes = 0;
    long total = 0;
    double rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Wilson score interval at 95%.
RateEstimate wilson_estimate(long successes, long total);

struct ExperimentReport {
    ExperimentConfig config;

    RateEstimate detection;               // any sequence flagged at step 4
    RateEstimate key_agreement;           // all decoded keys match on key positions
    RateEstimate eve_whole_key;           // full keys plus the agreement identified
    RateEstimate eve_bits;                // raw flip-observation hits
    RateEstimate eve_convention;          // agreement identified
    RateEstimate z_check_failures;        // over z-basis step-4 runs
    RateEstimate x_check_failures;        // over x-basis step-4 runs
    RateEstimate substitution_matches;    // exact (label, keep-choice) matches
    RateEstimate tamper;                  // sessions with an unexplained sign change
    RateEstimate audit;                   // leakage audit passes
    std::vector<double> mean_dprime_error;          // per owner
    std::vector<RateEstimate> selected_key;         // per owner
    long aborted_sessions = 0;
    double wall_clock_seconds = 0.0;  // display only; never serialized
};

using TranscriptSink = std::function<void(long trial, const Transcript&)>;

// Runs `trials` independent sessions with derived per-trial seeds and
// aggregates. Deterministic for a fixed config and seed.
ExperimentReport run_monte_carlo(const ExperimentConfig& config,
                                 const TranscriptSink& sink = nullptr);

// Serialized forms are byte-stable for a fixed config, seed and version.
std::string report_to_json(const ExperimentReport& report);
std::string report_to_csv(const ExperimentReport& report);

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Format picked by extension: .csv is tabular, anything else JSON.
void write_report(const ExperimentReport& report, const std::string& path);

void print_summary(std::ostream& out, const ExperimentReport& report);

}  // namespace ghzkd
