#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ghzkd/ghz.hpp"
#include "ghzkd/protocol.hpp"
#include "ghzkd/transcript.hpp"

namespace ghzkd {

enum class AttackKind { None, DoubleCnot, MitmGhz, MitmZ, InterceptResend };

std::string to_string(AttackKind kind);

struct EveReport {
    std::map<PartyId, Bitstring> bits_guessed;  // per target key
    long bits_guessed_count = 0;
    long bits_correct = 0;
    bool has_convention_guess = false;
    EncodingConvention convention_guess{};
    bool convention_correct = false;
    bool whole_key_recovered = false;
    bool detected = false;
    long substitutions = 0;
    long substitution_exact_matches = 0;
};

// Adversary plugin. Hooks only ever see in-flight blocks; home particles are
// unreachable by construction.
class AttackStrategy {
public:
    virtual ~AttackStrategy() = default;
    virtual AttackKind kind() const = 0;

    virtual void on_forward_block(TransitBlock& block, QuantumStore& store, RandomStream& rng);
    virtual void on_backward_block(TransitBlock& block, QuantumStore& store, RandomStream& rng);

    // Build Eve's key guesses from whatever she observed. When she knows the
    // agreement she decodes under `actual`; otherwise she draws uniformly
    // from the conventions consistent with her observations.
    virtual EveReport infer_keys(bool knows_agreement, const EncodingConvention& actual,
                                 RandomStream& rng) const;

    // Fill substitution bookkeeping that needs the session's ground truth.
    virtual void score_substitutions(const Session& session, EveReport& report) const;
};

std::unique_ptr<AttackStrategy> make_attack(AttackKind kind, int num_parties,
                                            const std::vector<std::uint8_t>& mitmz_pattern = {});

// Compare Eve's guesses against the session's actual keys and convention.
void score_eve_report(EveReport& report, const Session& session, const AttackStrategy& attack,
                      bool eve_knows_agreement);

// True iff no message reveals an initial or final GHZ state identity.
bool audit_leakage(const Transcript& transcript);

}  // namespace ghzkd
