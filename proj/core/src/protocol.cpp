#include "ghzkd/protocol.hpp"

#include <algorithm>
#include <stdexcept>

#include "ghzkd/adversary.hpp"

namespace ghzkd {

namespace {

// Salts for the per-purpose child streams. Keeping legitimate and adversary
// randomness on separate streams makes attacked and unattacked runs of the
// same seed comparable position-by-position.
constexpr std::uint64_t kSaltPrepare = 0x100;
constexpr std::uint64_t kSaltKeys = 0x200;
constexpr std::uint64_t kSaltCheck = 0x300;
constexpr std::uint64_t kSaltDecode = 0x400;
constexpr std::uint64_t kSaltDprime = 0x500;
constexpr std::uint64_t kSaltAttack = 0x600;
constexpr std::uint64_t kSaltConvention = 0x700;

}  // namespace

void SequencePlan::validate() const {
    if (n < 1 || d < 1 || d_prime < 1) {
        throw std::invalid_argument("SequencePlan: n, d and d' must all be >= 1");
    }
}

void SessionConfig::validate() const {
    plan.validate();
    if (num_parties < 3) throw std::invalid_argument("SessionConfig: need at least 3 parties");
    // Worst case register: N particles plus one adversary ancilla per
    // traveling particle.
    if (2 * num_parties - 1 > kMaxQubits) {
        throw std::invalid_argument("SessionConfig: party count exceeds register budget");
    }
    if (error_threshold < 0.0 || error_threshold > 1.0) {
        throw std::invalid_argument("SessionConfig: error threshold must be in [0,1]");
    }
}

int QuantumStore::add(StateVector state) {
    regs_.push_back(std::move(state));
    return static_cast<int>(regs_.size()) - 1;
}

StateVector& QuantumStore::reg(int id) {
    if (id < 0 || id >= static_cast<int>(regs_.size())) {
        throw std::out_of_range("QuantumStore: bad register id");
    }
    return regs_[static_cast<std::size_t>(id)];
}

const StateVector& QuantumStore::reg(int id) const {
    return const_cast<QuantumStore*>(this)->reg(id);
}

int QuantumStore::append_zero_qubit(int id) {
    StateVector& r = reg(id);
    const int new_qubit = r.num_qubits();
    r = r.tensor(StateVector::ground(1));
    return new_qubit;
}

void QuantumStore::apply_gate(ParticleRef p, Gate g) {
    reg(p.reg).apply_gate(g, p.qubit);
}

void QuantumStore::apply_cnot(ParticleRef control, ParticleRef target) {
    if (control.reg != target.reg) {
        throw std::invalid_argument("QuantumStore: CNOT across registers");
    }
    reg(control.reg).apply_cnot(control.qubit, target.qubit);
}

int QuantumStore::measure(ParticleRef p, MeasurementBasis basis, RandomStream& rng) {
    return reg(p.reg).measure_qubit(p.qubit, basis, rng);
}

Session::Session(const SessionConfig& config, AttackStrategy& attack, RandomStream rng)
    : config_(config),
      attack_(attack),
      root_rng_(rng),
      attack_rng_(rng.derive(kSaltAttack)) {
    config_.validate();
    const int n = config_.num_parties;
    parties_.resize(static_cast<std::size_t>(n));
    bindings_.assign(static_cast<std::size_t>(n),
                     std::vector<std::vector<ParticleRef>>(static_cast<std::size_t>(n)));
    surviving_.resize(static_cast<std::size_t>(n));
    final_key_indices_.resize(static_cast<std::size_t>(n));
    if (config_.encoding == EncodingMode::FourOp) {
        RandomStream conv_rng = root_rng_.derive(kSaltConvention);
        convention_ = all_conventions()[conv_rng.uniform_int(4)];
    } else {
        convention_ = two_op_convention();
    }
    family_indices_ = ghz_family_indices(n);
    ghz_projector_.emplace(ghz_family_states(n));
}

const Party& Session::party(PartyId p) const {
    return parties_.at(static_cast<std::size_t>(p));
}

Party& Session::party_mutable(PartyId p) {
    return parties_.at(static_cast<std::size_t>(p));
}

const std::vector<int>& Session::surviving(PartyId owner) const {
    return surviving_.at(static_cast<std::size_t>(owner));
}

const std::vector<int>& Session::final_key_indices(PartyId owner) const {
    return final_key_indices_.at(static_cast<std::size_t>(owner));
}

ParticleRef Session::binding(PartyId owner, int slot, int position) const {
    return bindings_.at(static_cast<std::size_t>(owner))
        .at(static_cast<std::size_t>(slot))
        .at(static_cast<std::size_t>(position));
}

void Session::prepare_sequences() {
    if (prepared_) throw std::logic_error("prepare_sequences: already prepared");
    const int n_parties = config_.num_parties;
    const int total = config_.plan.total();
    const std::uint32_t family_size = std::uint32_t{1} << n_parties;
    for (PartyId p = 0; p < n_parties; ++p) {
        Party& party = parties_[static_cast<std::size_t>(p)];
        party.id = p;
        RandomStream prep_rng = root_rng_.derive(kSaltPrepare + static_cast<std::uint64_t>(p));
        RandomStream key_rng = root_rng_.derive(kSaltKeys + static_cast<std::uint64_t>(p));
        party.prepared.reserve(static_cast<std::size_t>(total));
        party.triplet_reg.reserve(static_cast<std::size_t>(total));
        for (int k = 0; k < total; ++k) {
            const GhzIndex g = family_indices_[prep_rng.uniform_int(family_size)];
            party.prepared.push_back(g);
            party.triplet_reg.push_back(store_.add(to_state_vector(g)));
        }
        party.own_key.resize(static_cast<std::size_t>(config_.plan.key_len()));
        for (auto& b : party.own_key) b = static_cast<std::uint8_t>(key_rng.coin());
        auto& slots = bindings_[static_cast<std::size_t>(p)];
        for (int slot = 0; slot < n_parties; ++slot) {
            slots[static_cast<std::size_t>(slot)].resize(static_cast<std::size_t>(total));
            for (int k = 0; k < total; ++k) {
                slots[static_cast<std::size_t>(slot)][static_cast<std::size_t>(k)] =
                    ParticleRef{party.triplet_reg[static_cast<std::size_t>(k)], slot};
            }
        }
        auto& survivors = surviving_[static_cast<std::size_t>(p)];
        survivors.resize(static_cast<std::size_t>(total));
        for (int k = 0; k < total; ++k) survivors[static_cast<std::size_t>(k)] = k;
    }
    // Snapshot of home bindings; adversaries must never be able to touch them.
    for (PartyId p = 0; p < n_parties; ++p) {
        for (int k = 0; k < total; ++k) home_refs_.push_back(binding(p, p, k));
    }
    prepared_ = true;
}

void Session::override_prepared(PartyId owner, int position, const GhzIndex& state) {
    if (!prepared_ || distributed_) {
        throw std::logic_error("override_prepared: only between prepare and distribute");
    }
    if (state.num_parties != config_.num_parties) {
        throw std::invalid_argument("override_prepared: party count mismatch");
    }
    Party& party = parties_.at(static_cast<std::size_t>(owner));
    party.prepared.at(static_cast<std::size_t>(position)) = state;
    store_.reg(party.triplet_reg.at(static_cast<std::size_t>(position))) = to_state_vector(state);
}

void Session::log_transfer(PartyId owner, PartyId from, PartyId to) {
    ClassicalMessage announce;
    announce.sender = from;
    announce.sequence_owner = owner;
    announce.kind = MsgKind::AnnounceTransmission;
    announce.counterparty = to;
    transcript_.push(std::move(announce));
}

void Session::distribute() {
    if (!prepared_) throw std::logic_error("distribute: sequences not prepared");
    if (distributed_) throw std::logic_error("distribute: already distributed");
    const int n = config_.num_parties;
    for (PartyId owner = 0; owner < n; ++owner) {
        for (PartyId to = 0; to < n; ++to) {
            if (to == owner) continue;
            log_transfer(owner, owner, to);
            TransitBlock block;
            block.owner = owner;
            block.from = owner;
            block.to = to;
            block.positions = surviving_[static_cast<std::size_t>(owner)];
            block.particles = bindings_[static_cast<std::size_t>(owner)][static_cast<std::size_t>(to)];
            attack_.on_forward_block(block, store_, attack_rng_);
            bindings_[static_cast<std::size_t>(owner)][static_cast<std::size_t>(to)] =
                block.particles;
            ClassicalMessage confirm;
            confirm.sender = to;
            confirm.sequence_owner = owner;
            confirm.kind = MsgKind::ConfirmReception;
            confirm.counterparty = owner;
            transcript_.push(std::move(confirm));
        }
    }
    distributed_ = true;
}

CheckReport Session::check_d(PartyId owner) {
    if (!distributed_) throw std::logic_error("check_d: blocks not distributed");
    const int n = config_.num_parties;
    auto& survivors = surviving_[static_cast<std::size_t>(owner)];
    RandomStream check_rng = root_rng_.derive(kSaltCheck + static_cast<std::uint64_t>(owner));

    // A designated non-owner draws the positions and a basis per position.
    const PartyId chooser = (owner + 1) % n;
    const std::vector<int> picks = sample_without_replacement(
        check_rng, static_cast<int>(survivors.size()), config_.plan.d);
    std::vector<int> positions;
    positions.reserve(picks.size());
    for (int idx : picks) positions.push_back(survivors[static_cast<std::size_t>(idx)]);
    std::vector<MeasurementBasis> bases;
    bases.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        bases.push_back(check_rng.coin() ? MeasurementBasis::X : MeasurementBasis::Z);
    }

    ClassicalMessage pos_msg;
    pos_msg.sender = chooser;
    pos_msg.sequence_owner = owner;
    pos_msg.kind = MsgKind::CheckPositions;
    pos_msg.positions = positions;
    transcript_.push(std::move(pos_msg));
    ClassicalMessage basis_msg;
    basis_msg.sender = chooser;
    basis_msg.sequence_owner = owner;
    basis_msg.kind = MsgKind::CheckBasis;
    basis_msg.positions = positions;
    basis_msg.bases = bases;
    transcript_.push(std::move(basis_msg));

    // Non-owners measure and announce; the owner measures the home particles
    // last and is the one to evaluate consistency (only the owner knows the
    // prepared states).
    std::vector<std::vector<std::uint8_t>> outcomes(
        static_cast<std::size_t>(n), std::vector<std::uint8_t>(positions.size()));
    auto run_measurements = [&](PartyId participant) {
        for (std::size_t i = 0; i < positions.size(); ++i) {
            const ParticleRef ref = binding(owner, participant, positions[i]);
            outcomes[static_cast<std::size_t>(participant)][i] =
                static_cast<std::uint8_t>(store_.measure(ref, bases[i], check_rng));
        }
        ClassicalMessage out_msg;
        out_msg.sender = participant;
        out_msg.sequence_owner = owner;
        out_msg.kind = MsgKind::CheckOutcome;
        out_msg.positions = positions;
        out_msg.bases = bases;
        out_msg.bits = outcomes[static_cast<std::size_t>(participant)];
        transcript_.push(std::move(out_msg));
    };
    for (PartyId p = 0; p < n; ++p) {
        if (p != owner) run_measurements(p);
    }
    run_measurements(owner);

    CheckReport report;
    report.owner = owner;
    const Party& owner_party = parties_[static_cast<std::size_t>(owner)];
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const GhzIndex& prepared = owner_party.prepared[static_cast<std::size_t>(positions[i])];
        bool passed = false;
        if (bases[i] == MeasurementBasis::Z) {
            std::uint32_t packed = 0;
            for (PartyId p = 0; p < n; ++p) {
                packed = (packed << 1) | outcomes[static_cast<std::size_t>(p)][i];
            }
            passed = z_pattern_consistent(prepared, packed);
            ++report_.z_checks;
            if (!passed) ++report_.z_failures;
        } else {
            int ones = 0;
            for (PartyId p = 0; p < n; ++p) ones += outcomes[static_cast<std::size_t>(p)][i];
            passed = (ones % 2 == 0) == (x_parity(prepared) > 0);
            ++report_.x_checks;
            if (!passed) ++report_.x_failures;
        }
        report.runs.push_back(CheckRun{positions[i], bases[i], passed});
        if (!passed) report.detected = true;
    }

    // Checked triplets are consumed: drop the positions from every slot of
    // this owner's sequence.
    std::vector<std::uint8_t> is_checked(static_cast<std::size_t>(config_.plan.total()), 0);
    for (int pos : positions) is_checked[static_cast<std::size_t>(pos)] = 1;
    std::erase_if(survivors, [&](int pos) { return is_checked[static_cast<std::size_t>(pos)]; });
    return report;
}

void Session::encode_keys() {
    const int n = config_.num_parties;
    for (PartyId encoder = 0; encoder < n; ++encoder) {
        const Bitstring& key = parties_[static_cast<std::size_t>(encoder)].own_key;
        for (PartyId owner = 0; owner < n; ++owner) {
            if (owner == encoder) continue;
            const auto& survivors = surviving_[static_cast<std::size_t>(owner)];
            if (key.size() != survivors.size()) {
                throw std::logic_error("encode_keys: key length != surviving positions");
            }
            // Same operator, same order, across every held sequence.
            for (std::size_t j = 0; j < survivors.size(); ++j) {
                const Gate g = convention_.for_bit(key[j]);
                if (g == Gate::Identity) continue;
                store_.apply_gate(binding(owner, encoder, survivors[j]), g);
            }
        }
    }
}

void Session::return_blocks() {
    const int n = config_.num_parties;
    for (PartyId owner = 0; owner < n; ++owner) {
        for (PartyId holder = 0; holder < n; ++holder) {
            if (holder == owner) continue;
            log_transfer(owner, holder, owner);
            TransitBlock block;
            block.owner = owner;
            block.from = holder;
            block.to = owner;
            block.positions = surviving_[static_cast<std::size_t>(owner)];
            block.particles.clear();
            block.particles.reserve(block.positions.size());
            for (int pos : block.positions) block.particles.push_back(binding(owner, holder, pos));
            attack_.on_backward_block(block, store_, attack_rng_);
            auto& bound = bindings_[static_cast<std::size_t>(owner)][static_cast<std::size_t>(holder)];
            for (std::size_t i = 0; i < block.positions.size(); ++i) {
                bound[static_cast<std::size_t>(block.positions[i])] = block.particles[i];
            }
            ClassicalMessage confirm;
            confirm.sender = owner;
            confirm.sequence_owner = owner;
            confirm.kind = MsgKind::ConfirmReception;
            confirm.counterparty = holder;
            transcript_.push(std::move(confirm));
        }
    }
}

void Session::decode_keys(PartyId owner) {
    const int n = config_.num_parties;
    Party& party = parties_[static_cast<std::size_t>(owner)];
    RandomStream decode_rng = root_rng_.derive(kSaltDecode + static_cast<std::uint64_t>(owner));
    party.decoded_keys.clear();
    for (PartyId p = 0; p < n; ++p) {
        if (p != owner) party.decoded_keys[p] = {};
    }
    for (int pos : surviving_[static_cast<std::size_t>(owner)]) {
        std::vector<int> qubits(static_cast<std::size_t>(n));
        const int reg = binding(owner, 0, pos).reg;
        for (int slot = 0; slot < n; ++slot) {
            const ParticleRef ref = binding(owner, slot, pos);
            if (ref.reg != reg) {
                throw std::logic_error("decode_keys: triplet spread across registers");
            }
            qubits[static_cast<std::size_t>(slot)] = ref.qubit;
        }
        const int k = ghz_projector_->measure(store_.reg(reg), qubits, decode_rng);
        const GhzIndex measured = family_indices_[static_cast<std::size_t>(k)];
        const FlipDecode decoded =
            decode_flips(party.prepared[static_cast<std::size_t>(pos)], measured, owner);
        bool expected_sign_change = false;
        std::size_t flip_idx = 0;
        for (PartyId p = 0; p < n; ++p) {
            if (p == owner) continue;
            const std::uint8_t bit = decoded.flips[flip_idx++];
            party.decoded_keys[p].push_back(bit);
            expected_sign_change ^= gate_flips_sign(convention_.for_bit(bit));
        }
        if (decoded.sign_changed != expected_sign_change) party.tamper = true;
    }
}

DprimeResult Session::verify_dprime(PartyId owner) {
    const int n = config_.num_parties;
    Party& party = parties_[static_cast<std::size_t>(owner)];
    const auto& survivors = surviving_[static_cast<std::size_t>(owner)];
    RandomStream dp_rng = root_rng_.derive(kSaltDprime + static_cast<std::uint64_t>(owner));

    DprimeResult result;
    result.owner = owner;
    result.indices = sample_without_replacement(dp_rng, static_cast<int>(survivors.size()),
                                                config_.plan.d_prime);
    std::sort(result.indices.begin(), result.indices.end());
    result.error_per_partner.assign(static_cast<std::size_t>(n), 0.0);

    ClassicalMessage pos_msg;
    pos_msg.sender = owner;
    pos_msg.sequence_owner = owner;
    pos_msg.kind = MsgKind::DPrimePositions;
    pos_msg.positions = result.indices;
    transcript_.push(std::move(pos_msg));

    std::vector<PartyId> responders;
    for (PartyId p = 0; p < n; ++p) {
        const PartyId candidate = (owner + 1 + p) % n;
        if (candidate != owner) responders.push_back(candidate);
    }
    std::vector<int> reveals(static_cast<std::size_t>(n), 0);
    std::vector<int> mismatches(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 0; i < result.indices.size(); ++i) {
        // Strict alternation: partners take turns, one position each.
        const PartyId responder = responders[i % responders.size()];
        const int idx = result.indices[i];
        const std::uint8_t revealed =
            parties_[static_cast<std::size_t>(responder)].own_key[static_cast<std::size_t>(idx)];
        ClassicalMessage reveal;
        reveal.sender = responder;
        reveal.sequence_owner = owner;
        reveal.kind = MsgKind::DPrimeReveal;
        reveal.positions = {idx};
        reveal.bits = {revealed};
        transcript_.push(std::move(reveal));
        ++reveals[static_cast<std::size_t>(responder)];
        if (party.decoded_keys.at(responder)[static_cast<std::size_t>(idx)] != revealed) {
            ++mismatches[static_cast<std::size_t>(responder)];
        }
    }
    for (PartyId p = 0; p < n; ++p) {
        if (p == owner || reveals[static_cast<std::size_t>(p)] == 0) continue;
        result.error_per_partner[static_cast<std::size_t>(p)] =
            static_cast<double>(mismatches[static_cast<std::size_t>(p)]) /
            static_cast<double>(reveals[static_cast<std::size_t>(p)]);
        result.max_error =
            std::max(result.max_error, result.error_per_partner[static_cast<std::size_t>(p)]);
    }
    ClassicalMessage rate_msg;
    rate_msg.sender = owner;
    rate_msg.sequence_owner = owner;
    rate_msg.kind = MsgKind::ErrorRateReport;
    rate_msg.rates = result.error_per_partner;
    transcript_.push(std::move(rate_msg));

    // Sacrificed positions drop out of the generic key.
    auto& final_indices = final_key_indices_[static_cast<std::size_t>(owner)];
    final_indices.clear();
    std::vector<std::uint8_t> sacrificed(survivors.size(), 0);
    for (int idx : result.indices) sacrificed[static_cast<std::size_t>(idx)] = 1;
    for (std::size_t j = 0; j < survivors.size(); ++j) {
        if (!sacrificed[j]) final_indices.push_back(static_cast<int>(j));
    }
    return result;
}

const SessionReport& Session::run() {
    prepare_sequences();
    distribute();
    const int n = config_.num_parties;
    report_.num_parties = n;
    report_.detected_at_step4.assign(static_cast<std::size_t>(n), 0);
    bool any_detected = false;
    for (PartyId owner = 0; owner < n; ++owner) {
        const CheckReport check = check_d(owner);
        report_.detected_at_step4[static_cast<std::size_t>(owner)] = check.detected;
        any_detected = any_detected || check.detected;
    }
    if (config_.abort_on_detection && any_detected) {
        report_.aborted = true;
        finalize_report({});
        return report_;
    }
    encode_keys();
    return_blocks();
    std::vector<DprimeResult> dprime;
    for (PartyId owner = 0; owner < n; ++owner) decode_keys(owner);
    for (PartyId owner = 0; owner < n; ++owner) dprime.push_back(verify_dprime(owner));
    finalize_report(dprime);
    check_home_integrity();
    return report_;
}

void Session::finalize_report(std::span<const DprimeResult> dprime) {
    const int n = config_.num_parties;
    report_.num_parties = n;
    report_.dprime_error.assign(static_cast<std::size_t>(n),
                                std::vector<double>(static_cast<std::size_t>(n), 0.0));
    report_.dprime_max_error.assign(static_cast<std::size_t>(n), 0.0);
    report_.key_accepted.assign(static_cast<std::size_t>(n), 0);
    report_.key_agreement.assign(static_cast<std::size_t>(n),
                                 std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
    report_.tamper.assign(static_cast<std::size_t>(n), 0);
    for (PartyId p = 0; p < n; ++p) {
        report_.tamper[static_cast<std::size_t>(p)] = parties_[static_cast<std::size_t>(p)].tamper;
        report_.key_agreement[static_cast<std::size_t>(p)][static_cast<std::size_t>(p)] = 1;
    }
    if (report_.aborted) {
        report_.all_keys_agree = false;
        report_.transcript = transcript_;
        return;
    }
    for (const DprimeResult& r : dprime) {
        report_.dprime_error[static_cast<std::size_t>(r.owner)] = r.error_per_partner;
        report_.dprime_max_error[static_cast<std::size_t>(r.owner)] = r.max_error;
        report_.key_accepted[static_cast<std::size_t>(r.owner)] =
            r.max_error <= config_.error_threshold;
    }
    report_.selected_key_owner = select_best_key(report_.dprime_max_error);
    report_.all_keys_agree = true;
    for (PartyId owner = 0; owner < n; ++owner) {
        const Party& op = parties_[static_cast<std::size_t>(owner)];
        for (PartyId partner = 0; partner < n; ++partner) {
            if (partner == owner) continue;
            const Bitstring& decoded = op.decoded_keys.at(partner);
            const Bitstring& truth = parties_[static_cast<std::size_t>(partner)].own_key;
            bool agree = true;
            for (int j : final_key_indices_[static_cast<std::size_t>(owner)]) {
                if (decoded[static_cast<std::size_t>(j)] != truth[static_cast<std::size_t>(j)]) {
                    agree = false;
                    break;
                }
            }
            report_.key_agreement[static_cast<std::size_t>(owner)][static_cast<std::size_t>(partner)] =
                agree;
            report_.all_keys_agree = report_.all_keys_agree && agree;
        }
    }
    report_.reveal_order_violation = false;
    for (PartyId owner = 0; owner < n; ++owner) {
        if (!dprime_reveals_in_turn(transcript_, owner, n)) {
            report_.reveal_order_violation = true;
        }
    }
    report_.transcript = transcript_;
}

void Session::check_home_integrity() const {
    std::size_t idx = 0;
    for (PartyId p = 0; p < config_.num_parties; ++p) {
        for (int k = 0; k < config_.plan.total(); ++k) {
            if (binding(p, p, k) != home_refs_[idx++]) {
                throw std::logic_error("session: home particle binding was mutated");
            }
        }
    }
}

PartyId select_best_key(std::span<const double> error_per_owner) {
    if (error_per_owner.empty()) throw std::invalid_argument("select_best_key: no owners");
    PartyId best = 0;
    for (PartyId p = 1; p < static_cast<PartyId>(error_per_owner.size()); ++p) {
        if (error_per_owner[static_cast<std::size_t>(p)] <
            error_per_owner[static_cast<std::size_t>(best)]) {
            best = p;
        }
    }
    return best;
}

SessionReport run_session(const SessionConfig& config, AttackStrategy& attack, RandomStream rng) {
    Session session(config, attack, rng);
    return session.run();
}

bool dprime_reveals_in_turn(const Transcript& transcript, PartyId owner, int num_parties) {
    std::vector<PartyId> responders;
    for (PartyId p = 0; p < num_parties; ++p) {
        const PartyId candidate = (owner + 1 + p) % num_parties;
        if (candidate != owner) responders.push_back(candidate);
    }
    std::size_t turn = 0;
    for (const ClassicalMessage& m : transcript.messages) {
        if (m.kind != MsgKind::DPrimeReveal || m.sequence_owner != owner) continue;
        if (m.sender != responders[turn % responders.size()]) return false;
        ++turn;
    }
    return true;
}

}  // namespace ghzkd
