#include "ghzkd/adversary.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace ghzkd {

std::string to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::None: return "none";
        case AttackKind::DoubleCnot: return "2cnot";
        case AttackKind::MitmGhz: return "mitm-ghz";
        case AttackKind::MitmZ: return "mitm-z";
        case AttackKind::InterceptResend: return "intercept-resend";
    }
    return "unknown";
}

void AttackStrategy::on_forward_block(TransitBlock&, QuantumStore&, RandomStream&) {}
void AttackStrategy::on_backward_block(TransitBlock&, QuantumStore&, RandomStream&) {}

EveReport AttackStrategy::infer_keys(bool, const EncodingConvention&, RandomStream&) const {
    return {};
}

void AttackStrategy::score_substitutions(const Session&, EveReport&) const {}

namespace {

// Flip observations per (sequence owner, traveling slot), in block order.
using ObservationMap = std::map<std::pair<PartyId, int>, std::vector<std::pair<int, std::uint8_t>>>;

// Guess each party's key from the first sequence that carries it; the copies
// agree under the attacks modeled here.
void build_guesses(const ObservationMap& obs, EveReport& report) {
    for (const auto& [key, observations] : obs) {
        const PartyId slot = key.second;
        if (report.bits_guessed.contains(slot)) continue;
        Bitstring bits;
        bits.reserve(observations.size());
        for (const auto& [pos, flip] : observations) bits.push_back(flip);
        report.bits_guessed[slot] = std::move(bits);
    }
}

// A convention survives if, at every observed position, the operator word it
// implies is in the set consistent with the observed flips.
std::vector<EncodingConvention> consistent_conventions(const ObservationMap& obs) {
    // Regroup observations by (owner, position) into per-slot flip words.
    std::map<std::pair<PartyId, int>, std::vector<std::uint8_t>> flips_by_position;
    for (const auto& [key, observations] : obs) {
        for (const auto& [pos, flip] : observations) {
            flips_by_position[{key.first, pos}].push_back(flip);
        }
    }
    std::vector<EncodingConvention> survivors;
    for (const EncodingConvention& candidate : all_conventions()) {
        bool ok = true;
        for (const auto& [key, flips] : flips_by_position) {
            PauliWord implied;
            implied.reserve(flips.size());
            for (std::uint8_t f : flips) implied.push_back(candidate.for_bit(f));
            const auto candidates = eve_consistent_ops(flips);
            if (std::find(candidates.begin(), candidates.end(), implied) == candidates.end()) {
                ok = false;
                break;
            }
        }
        if (ok) survivors.push_back(candidate);
    }
    return survivors;
}

EveReport infer_from_observations(const ObservationMap& obs, bool knows_agreement,
                                  const EncodingConvention& actual, RandomStream& rng) {
    EveReport report;
    if (obs.empty()) return report;
    build_guesses(obs, report);
    report.has_convention_guess = true;
    if (knows_agreement) {
        report.convention_guess = actual;
    } else {
        const auto candidates = consistent_conventions(obs);
        if (candidates.empty()) throw std::logic_error("infer: no consistent convention");
        report.convention_guess = candidates[rng.uniform_int(
            static_cast<std::uint32_t>(candidates.size()))];
    }
    return report;
}

class NoAttack final : public AttackStrategy {
public:
    AttackKind kind() const override { return AttackKind::None; }
};

// Forward pass: one fresh |0> ancilla per transit particle, CNOT with the
// particle as control. Backward pass: second CNOT disentangles, z measurement
// of the ancilla reads the encoded flip.
class DoubleCnotAttack final : public AttackStrategy {
public:
    AttackKind kind() const override { return AttackKind::DoubleCnot; }

    void on_forward_block(TransitBlock& block, QuantumStore& store, RandomStream&) override {
        auto& slots = ancillae_[{block.owner, block.to}];
        for (std::size_t i = 0; i < block.positions.size(); ++i) {
            const ParticleRef particle = block.particles[i];
            const int anc_qubit = store.append_zero_qubit(particle.reg);
            const ParticleRef ancilla{particle.reg, anc_qubit};
            store.apply_cnot(particle, ancilla);
            slots[block.positions[i]] = ancilla;
        }
    }

    void on_backward_block(TransitBlock& block, QuantumStore& store, RandomStream& rng) override {
        auto it = ancillae_.find({block.owner, block.from});
        if (it == ancillae_.end()) throw std::logic_error("2cnot: missing ancilla block");
        auto& observed = observations_[{block.owner, block.from}];
        for (std::size_t i = 0; i < block.positions.size(); ++i) {
            auto anc = it->second.find(block.positions[i]);
            if (anc == it->second.end()) throw std::logic_error("2cnot: missing ancilla");
            store.apply_cnot(block.particles[i], anc->second);
            const int flip = store.measure(anc->second, MeasurementBasis::Z, rng);
            observed.emplace_back(block.positions[i], static_cast<std::uint8_t>(flip));
        }
    }

    EveReport infer_keys(bool knows_agreement, const EncodingConvention& actual,
                         RandomStream& rng) const override {
        return infer_from_observations(observations_, knows_agreement, actual, rng);
    }

private:
    std::map<std::pair<PartyId, int>, std::map<int, ParticleRef>> ancillae_;
    ObservationMap observations_;
};

// Stores the genuine blocks and substitutes particles of Eve's own GHZ
// triplets, keeping one particle of each. Backward, she reads the encodings
// off the fakes, re-applies them to the stored particles and passes those on.
class MitmGhzAttack final : public AttackStrategy {
public:
    explicit MitmGhzAttack(int num_parties) : num_parties_(num_parties) {}

    AttackKind kind() const override { return AttackKind::MitmGhz; }

    void on_forward_block(TransitBlock& block, QuantumStore& store, RandomStream& rng) override {
        for (std::size_t i = 0; i < block.positions.size(); ++i) {
            FakeTriplet& fake = fake_for(block.owner, block.positions[i], store, rng);
            stash_[{block.owner, block.to, block.positions[i]}] = block.particles[i];
            block.particles[i] = ParticleRef{fake.reg, fake.delivered_slot.at(block.to)};
        }
    }

    void on_backward_block(TransitBlock& block, QuantumStore& store, RandomStream& rng) override {
        const PartyId slot = block.from;
        auto& observed = observations_[{block.owner, slot}];
        for (std::size_t i = 0; i < block.positions.size(); ++i) {
            const int pos = block.positions[i];
            FakeTriplet& fake = fakes_.at({block.owner, pos});
            // Pin the superposition branch once via the particle Eve kept;
            // afterwards each fake particle's z outcome reveals its flip.
            if (fake.anchor < 0) {
                fake.anchor = store.measure(ParticleRef{fake.reg, fake.keep_slot},
                                            MeasurementBasis::Z, rng);
            }
            const bool complemented = fake.anchor != fake.label.pattern_bit(fake.keep_slot);
            const int fake_slot = fake.delivered_slot.at(slot);
            const int outcome =
                store.measure(ParticleRef{fake.reg, fake_slot}, MeasurementBasis::Z, rng);
            const std::uint8_t flip = static_cast<std::uint8_t>(
                outcome ^ fake.label.pattern_bit(fake_slot) ^ (complemented ? 1 : 0));
            observed.emplace_back(pos, flip);
            // Encode the same information into the stored particle and return it.
            const ParticleRef genuine = stash_.at({block.owner, slot, pos});
            if (flip) store.apply_gate(genuine, Gate::PauliX);
            block.particles[i] = genuine;
        }
    }

    EveReport infer_keys(bool knows_agreement, const EncodingConvention& actual,
                         RandomStream& rng) const override {
        EveReport report = infer_from_observations(observations_, knows_agreement, actual, rng);
        report.substitutions = static_cast<long>(fakes_.size());
        return report;
    }

    void score_substitutions(const Session& session, EveReport& report) const override {
        report.substitutions = static_cast<long>(fakes_.size());
        report.substitution_exact_matches = 0;
        for (const auto& [key, fake] : fakes_) {
            const auto& [owner, pos] = key;
            const GhzIndex& genuine =
                session.party(owner).prepared[static_cast<std::size_t>(pos)];
            if (fake.label == genuine && fake.keep_slot == owner) {
                ++report.substitution_exact_matches;
            }
        }
    }

private:
    struct FakeTriplet {
        GhzIndex label;
        int reg = -1;
        int keep_slot = -1;
        int anchor = -1;  // z outcome of the kept particle; -1 until measured
        std::map<PartyId, int> delivered_slot;  // recipient -> fake particle slot
    };

    FakeTriplet& fake_for(PartyId owner, int pos, QuantumStore& store, RandomStream& rng) {
        auto it = fakes_.find({owner, pos});
        if (it != fakes_.end()) return it->second;
        const auto family = ghz_family_indices(num_parties_);
        FakeTriplet fake;
        fake.label = family[rng.uniform_int(static_cast<std::uint32_t>(family.size()))];
        fake.keep_slot = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(num_parties_)));
        fake.reg = store.add(to_state_vector(fake.label));
        // Remaining fake particles go to the recipients in ascending order;
        // when Eve keeps the owner's slot the roles line up exactly.
        std::vector<int> fake_slots;
        std::vector<PartyId> recipients;
        for (int s = 0; s < num_parties_; ++s) {
            if (s != fake.keep_slot) fake_slots.push_back(s);
            if (s != owner) recipients.push_back(s);
        }
        for (std::size_t i = 0; i < recipients.size(); ++i) {
            fake.delivered_slot[recipients[i]] = fake_slots[i];
        }
        return fakes_.emplace(std::make_pair(owner, pos), std::move(fake)).first->second;
    }

    int num_parties_;
    std::map<std::pair<PartyId, int>, FakeTriplet> fakes_;
    std::map<std::tuple<PartyId, PartyId, int>, ParticleRef> stash_;
    ObservationMap observations_;
};

// Substitutes configured z-basis ancillae. An X encoding shows up
// deterministically in Eve's z measurement of the returning substitute.
class MitmZAttack final : public AttackStrategy {
public:
    MitmZAttack(int num_parties, std::vector<std::uint8_t> pattern)
        : num_parties_(num_parties), pattern_(std::move(pattern)) {
        if (pattern_.empty()) {
            pattern_.assign(static_cast<std::size_t>(num_parties_ - 1), 0);
        }
        if (pattern_.size() != static_cast<std::size_t>(num_parties_ - 1)) {
            throw std::invalid_argument("mitm-z: ancilla pattern needs one bit per recipient");
        }
    }

    AttackKind kind() const override { return AttackKind::MitmZ; }

    void on_forward_block(TransitBlock& block, QuantumStore& store, RandomStream&) override {
        const std::uint8_t bit = pattern_[static_cast<std::size_t>(recipient_rank(block))];
        for (std::size_t i = 0; i < block.positions.size(); ++i) {
            sent_[{block.owner, block.to, block.positions[i]}] =
                std::make_pair(bit, block.particles[i]);
            const int reg = store.add(bit ? StateVector::basis_state(1, 1)
                                          : StateVector::ground(1));
            block.particles[i] = ParticleRef{reg, 0};
            ++substitutions_;
        }
    }

    void on_backward_block(TransitBlock& block, QuantumStore& store, RandomStream& rng) override {
        auto& observed = observations_[{block.owner, block.from}];
        for (std::size_t i = 0; i < block.positions.size(); ++i) {
            const int pos = block.positions[i];
            const auto& [sent_bit, genuine] = sent_.at({block.owner, block.from, pos});
            const int outcome = store.measure(block.particles[i], MeasurementBasis::Z, rng);
            const std::uint8_t flip = static_cast<std::uint8_t>(outcome ^ sent_bit);
            observed.emplace_back(pos, flip);
            if (flip) store.apply_gate(genuine, Gate::PauliX);
            block.particles[i] = genuine;
        }
    }

    EveReport infer_keys(bool knows_agreement, const EncodingConvention& actual,
                         RandomStream& rng) const override {
        EveReport report = infer_from_observations(observations_, knows_agreement, actual, rng);
        report.substitutions = substitutions_;
        return report;
    }

    void score_substitutions(const Session&, EveReport& report) const override {
        report.substitutions = substitutions_;
    }

private:
    int recipient_rank(const TransitBlock& block) const {
        int rank = 0;
        for (PartyId p = 0; p < block.to; ++p) {
            if (p != block.owner) ++rank;
        }
        return rank;
    }

    int num_parties_;
    std::vector<std::uint8_t> pattern_;
    std::map<std::tuple<PartyId, PartyId, int>, std::pair<std::uint8_t, ParticleRef>> sent_;
    ObservationMap observations_;
    long substitutions_ = 0;
};

// Measures each forward particle in a random basis and resends the eigenstate.
class InterceptResendAttack final : public AttackStrategy {
public:
    AttackKind kind() const override { return AttackKind::InterceptResend; }

    void on_forward_block(TransitBlock& block, QuantumStore& store, RandomStream& rng) override {
        for (const ParticleRef& particle : block.particles) {
            const MeasurementBasis basis =
                rng.coin() ? MeasurementBasis::X : MeasurementBasis::Z;
            store.measure(particle, basis, rng);
        }
    }
};

}  // namespace

std::unique_ptr<AttackStrategy> make_attack(AttackKind kind, int num_parties,
                                            const std::vector<std::uint8_t>& mitmz_pattern) {
    switch (kind) {
        case AttackKind::None: return std::make_unique<NoAttack>();
        case AttackKind::DoubleCnot: return std::make_unique<DoubleCnotAttack>();
        case AttackKind::MitmGhz: return std::make_unique<MitmGhzAttack>(num_parties);
        case AttackKind::MitmZ: return std::make_unique<MitmZAttack>(num_parties, mitmz_pattern);
        case AttackKind::InterceptResend: return std::make_unique<InterceptResendAttack>();
    }
    throw std::invalid_argument("make_attack: unknown attack kind");
}

void score_eve_report(EveReport& report, const Session& session, const AttackStrategy& attack,
                      bool eve_knows_agreement) {
    const auto& session_report = session.report();
    report.detected = std::any_of(session_report.detected_at_step4.begin(),
                                  session_report.detected_at_step4.end(),
                                  [](std::uint8_t d) { return d != 0; });
    report.bits_guessed_count = 0;
    report.bits_correct = 0;
    bool full_coverage = static_cast<int>(report.bits_guessed.size()) == session.num_parties();
    for (const auto& [target, guess] : report.bits_guessed) {
        const Bitstring& truth = session.party(target).own_key;
        if (guess.size() != truth.size()) full_coverage = false;
        report.bits_guessed_count += static_cast<long>(guess.size());
        for (std::size_t j = 0; j < std::min(guess.size(), truth.size()); ++j) {
            if (guess[j] == truth[j]) ++report.bits_correct;
        }
    }
    report.convention_correct =
        report.has_convention_guess && report.convention_guess == session.convention();
    const bool all_bits_correct =
        report.bits_guessed_count > 0 && report.bits_correct == report.bits_guessed_count;
    report.whole_key_recovered = full_coverage && all_bits_correct &&
                                 (eve_knows_agreement || report.convention_correct);
    attack.score_substitutions(session, report);
}

bool audit_leakage(const Transcript& transcript) {
    for (const ClassicalMessage& m : transcript.messages) {
        if (m.kind == MsgKind::StateAnnouncement) return false;
        if (m.state_label >= 0) return false;
    }
    return true;
}

}  // namespace ghzkd
