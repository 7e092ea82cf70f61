#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ghzkd/statevec.hpp"

namespace ghzkd {

// Scalar in {1, i, -1, -i}, tracked exactly as quarter turns of i.
class Phase {
public:
    constexpr Phase() = default;
    static constexpr Phase from_quarters(int q) { return Phase(((q % 4) + 4) % 4); }
    static constexpr Phase one() { return Phase(0); }
    static constexpr Phase i() { return Phase(1); }
    static constexpr Phase minus_one() { return Phase(2); }
    static constexpr Phase minus_i() { return Phase(3); }

    constexpr Phase operator*(Phase other) const { return Phase((q_ + other.q_) & 3); }
    constexpr Phase& operator*=(Phase other) {
        q_ = (q_ + other.q_) & 3;
        return *this;
    }
    friend constexpr bool operator==(Phase, Phase) = default;

    int quarter_turns() const { return q_; }
    Complex value() const {
        switch (q_) {
            case 0: return {1, 0};
            case 1: return {0, 1};
            case 2: return {-1, 0};
            default: return {0, -1};
        }
    }

private:
    constexpr explicit Phase(int q) : q_(q) {}
    int q_ = 0;
};

// Canonical label of an N-party GHZ-class basis state
// (|pattern> + sign*|~pattern>)/sqrt(2). Particle p sits at integer bit
// N-1-p (particle 0 most significant), matching StateVector indexing. The
// stored branch is the one whose last particle's bit is 0.
struct GhzIndex {
    int num_parties = 3;
    std::uint32_t pattern = 0;
    int sign = +1;

    friend bool operator==(const GhzIndex&, const GhzIndex&) = default;

    std::uint32_t full_mask() const { return (std::uint32_t{1} << num_parties) - 1; }
    std::uint32_t complement() const { return ~pattern & full_mask(); }
    int pattern_bit(int particle) const {
        return static_cast<int>((pattern >> (num_parties - 1 - particle)) & 1u);
    }
};

// Validates invariants (canonical branch, range, sign in {-1,+1}).
GhzIndex make_ghz_index(int num_parties, std::uint32_t pattern, int sign);

// The eight three-party states, numbered 1..8.
GhzIndex index_from_label(int label);
int label_from_index(const GhzIndex& g);

// All 2^N canonical indices; for N == 3 the order matches labels 1..8.
std::vector<GhzIndex> ghz_family_indices(int num_parties);

StateVector to_state_vector(const GhzIndex& g);
std::vector<StateVector> ghz_family_states(int num_parties);

// One Pauli per particle; Hadamard is not a member.
using PauliWord = std::vector<Gate>;

struct PauliAction {
    GhzIndex index;
    Phase phase;
};

// Closed-form action of a Pauli word on a GHZ index, phase included. Agrees
// exactly with applying the gates to to_state_vector(g).
PauliAction apply_pauli(const GhzIndex& g, const PauliWord& word);
PauliAction apply_pauli(const GhzIndex& g, Gate gate, int particle);

// Product of two Pauli words (b applied first), with the scalar it picks up.
std::pair<PauliWord, Phase> compose(const PauliWord& a, const PauliWord& b);

struct FlipDecode {
    // One bit per traveling particle, ascending particle order, home skipped.
    std::vector<std::uint8_t> flips;
    bool sign_changed = false;
};

// Pattern difference between a prepared and a measured index, anchored on the
// home particle (which provably received no encoding, so its flip bit is 0).
FlipDecode decode_flips(const GhzIndex& prepared, const GhzIndex& measured, int home_particle);

// True iff the joint z outcomes equal the pattern or its complement.
bool z_pattern_consistent(const GhzIndex& g, std::uint32_t outcomes);
bool z_pattern_consistent(const GhzIndex& g, std::span<const std::uint8_t> outcomes);

// Expected product of +-1 x-measurement outcomes over all particles.
int x_parity(const GhzIndex& g);

// Operator words consistent with Eve's per-particle flip observations:
// flip=0 admits {I, Z}, flip=1 admits {X, Y}; Cartesian over particles.
std::vector<PauliWord> eve_consistent_ops(std::span<const std::uint8_t> flips);

enum class EncodingMode { TwoOp, FourOp };

// Bit -> operator pairing agreed before a session. The no-flip operator
// encodes 0 and the flip operator encodes 1.
struct EncodingConvention {
    Gate zero_op = Gate::Identity;  // Identity or PauliZ
    Gate one_op = Gate::PauliX;     // PauliX or PauliY

    Gate for_bit(int bit) const { return bit ? one_op : zero_op; }
    friend bool operator==(const EncodingConvention&, const EncodingConvention&) = default;
};

const std::array<EncodingConvention, 4>& all_conventions();
EncodingConvention two_op_convention();

bool gate_flips_pattern(Gate g);  // X, Y
bool gate_flips_sign(Gate g);     // Z, Y

}  // namespace ghzkd
