#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghzkd/ghz.hpp"
#include "ghzkd/rng.hpp"
#include "ghzkd/statevec.hpp"
#include "ghzkd/transcript.hpp"

namespace ghzkd {

using Bitstring = std::vector<std::uint8_t>;

class AttackStrategy;

struct SequencePlan {
    int n = 16;        // key positions
    int d = 8;         // first-check positions
    int d_prime = 8;   // second-check positions

    int total() const { return n + d + d_prime; }
    int key_len() const { return n + d_prime; }  // bits carried per key after the d check
    void validate() const;
};

// Location of one qubit inside the session's register store. Bindings are
// rebound by substitution attacks; the register itself stays put.
struct ParticleRef {
    int reg = -1;
    int qubit = -1;
    friend bool operator==(const ParticleRef&, const ParticleRef&) = default;
};

// Session-owned collection of quantum registers (one per prepared triplet,
// plus whatever an adversary creates).
class QuantumStore {
public:
    int add(StateVector state);
    StateVector& reg(int id);
    const StateVector& reg(int id) const;
    std::size_t size() const { return regs_.size(); }

    // Tensor a fresh |0> onto the register; returns the new qubit's index.
    int append_zero_qubit(int id);

    void apply_gate(ParticleRef p, Gate g);
    void apply_cnot(ParticleRef control, ParticleRef target);  // same register
    int measure(ParticleRef p, MeasurementBasis basis, RandomStream& rng);

private:
    std::vector<StateVector> regs_;
};

// One block of particles in flight between two parties. Attacks may rewrite
// `particles` (substitution) and operate on the store; they never see the
// owner's prepared states.
struct TransitBlock {
    PartyId owner = -1;  // whose triplets these particles belong to
    PartyId from = -1;
    PartyId to = -1;
    std::vector<int> positions;          // original position ids, sequence order
    std::vector<ParticleRef> particles;  // mutable bindings, parallel to positions
};

struct Party {
    PartyId id = 0;
    std::vector<GhzIndex> prepared;   // per owned triplet, original order
    std::vector<int> triplet_reg;     // register id per owned triplet
    Bitstring own_key;                // n + d' bits
    std::map<PartyId, Bitstring> decoded_keys;  // partner -> bits, surviving order
    bool tamper = false;              // unexplained sign change seen at decode
};

struct CheckRun {
    int position = -1;
    MeasurementBasis basis = MeasurementBasis::Z;
    bool passed = true;
};

struct CheckReport {
    PartyId owner = -1;
    std::vector<CheckRun> runs;
    bool detected = false;
};

struct DprimeResult {
    PartyId owner = -1;
    std::vector<int> indices;               // surviving-order indices sacrificed
    std::vector<double> error_per_partner;  // indexed by party id; own slot 0
    double max_error = 0.0;
};

struct SessionReport {
    int num_parties = 0;
    std::vector<std::uint8_t> detected_at_step4;  // per sequence owner
    long z_checks = 0;
    long z_failures = 0;
    long x_checks = 0;
    long x_failures = 0;
    std::vector<std::vector<double>> dprime_error;  // [owner][partner]
    std::vector<double> dprime_max_error;           // [owner]
    std::vector<std::uint8_t> key_accepted;         // rate <= threshold
    PartyId selected_key_owner = 0;
    std::vector<std::vector<std::uint8_t>> key_agreement;  // [owner][partner]
    bool all_keys_agree = false;
    std::vector<std::uint8_t> tamper;  // per owner
    bool aborted = false;
    bool reveal_order_violation = false;
    Transcript transcript;
};

struct SessionConfig {
    int num_parties = 3;
    SequencePlan plan{};
    EncodingMode encoding = EncodingMode::TwoOp;
    double error_threshold = 0.0;
    bool abort_on_detection = false;

    void validate() const;
};

// One protocol session: block preparation, two-pass exchange with
// announce/confirm framing, the d correlation check, key encoding, GHZ-basis
// decoding and the d' verification. Steps are public so tests can drive them
// individually; run() executes the full pipeline.
class Session {
public:
    Session(const SessionConfig& config, AttackStrategy& attack, RandomStream rng);

    void prepare_sequences();
    void distribute();
    CheckReport check_d(PartyId owner);
    void encode_keys();
    void return_blocks();
    void decode_keys(PartyId owner);
    DprimeResult verify_dprime(PartyId owner);
    const SessionReport& run();

    int num_parties() const { return config_.num_parties; }
    const SessionConfig& config() const { return config_; }
    const EncodingConvention& convention() const { return convention_; }
    const Party& party(PartyId p) const;
    Party& party_mutable(PartyId p);
    const std::vector<int>& surviving(PartyId owner) const;
    const std::vector<int>& final_key_indices(PartyId owner) const;
    const Transcript& transcript() const { return transcript_; }
    Transcript& transcript_mutable() { return transcript_; }
    QuantumStore& store() { return store_; }
    ParticleRef binding(PartyId owner, int slot, int position) const;
    const SessionReport& report() const { return report_; }

    // Test seam: re-prepare one triplet with a fixed state (before distribute).
    void override_prepared(PartyId owner, int position, const GhzIndex& state);

private:
    void log_transfer(PartyId owner, PartyId from, PartyId to);
    void finalize_report(std::span<const DprimeResult> dprime);
    void check_home_integrity() const;

    SessionConfig config_;
    AttackStrategy& attack_;
    RandomStream root_rng_;
    RandomStream attack_rng_;
    EncodingConvention convention_;
    QuantumStore store_;
    std::vector<Party> parties_;
    // bindings_[owner][slot][position]: who-holds-what view of each particle.
    std::vector<std::vector<std::vector<ParticleRef>>> bindings_;
    std::vector<std::vector<int>> surviving_;         // per owner
    std::vector<std::vector<int>> final_key_indices_; // per owner, surviving-order
    std::vector<ParticleRef> home_refs_;              // flattened integrity snapshot
    std::optional<ProjectiveFamily> ghz_projector_;
    std::vector<GhzIndex> family_indices_;
    Transcript transcript_;
    SessionReport report_;
    bool prepared_ = false;
    bool distributed_ = false;
};

// Owner with the smallest error; ties broken by lowest id.
PartyId select_best_key(std::span<const double> error_per_owner);

SessionReport run_session(const SessionConfig& config, AttackStrategy& attack, RandomStream rng);

// Validates the strict alternation of d' reveals for `owner` in a transcript;
// `first_responder` is the party expected to reveal the first position.
bool dprime_reveals_in_turn(const Transcript& transcript, PartyId owner, int num_parties);

}  // namespace ghzkd
