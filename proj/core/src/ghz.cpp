#include "ghzkd/ghz.hpp"

#include <cmath>
#include <stdexcept>

namespace ghzkd {

namespace {

void check_parties(int num_parties) {
    if (num_parties < 2 || num_parties > kMaxQubits) {
        throw std::out_of_range("GhzIndex: party count out of range");
    }
}

// psi_1..psi_8 patterns in label order: 000, 100, 010, 110.
constexpr std::uint32_t kLabelPatterns[4] = {0b000, 0b100, 0b010, 0b110};

}  // namespace

GhzIndex make_ghz_index(int num_parties, std::uint32_t pattern, int sign) {
    check_parties(num_parties);
    if (sign != 1 && sign != -1) throw std::invalid_argument("GhzIndex: sign must be +-1");
    if (pattern >> num_parties) throw std::invalid_argument("GhzIndex: pattern out of range");
    if (pattern & 1u) throw std::invalid_argument("GhzIndex: pattern not canonical");
    return GhzIndex{num_parties, pattern, sign};
}

GhzIndex index_from_label(int label) {
    if (label < 1 || label > 8) throw std::out_of_range("index_from_label: label must be 1..8");
    return GhzIndex{3, kLabelPatterns[(label - 1) / 2], label % 2 == 1 ? +1 : -1};
}

int label_from_index(const GhzIndex& g) {
    if (g.num_parties != 3) throw std::invalid_argument("label_from_index: labels are 3-party");
    for (int row = 0; row < 4; ++row) {
        if (kLabelPatterns[row] == g.pattern) return 2 * row + (g.sign > 0 ? 1 : 2);
    }
    throw std::invalid_argument("label_from_index: non-canonical pattern");
}

std::vector<GhzIndex> ghz_family_indices(int num_parties) {
    check_parties(num_parties);
    std::vector<GhzIndex> family;
    family.reserve(std::size_t{1} << num_parties);
    for (std::uint32_t x = 0; x < (std::uint32_t{1} << (num_parties - 1)); ++x) {
        std::uint32_t pattern = 0;
        for (int p = 0; p < num_parties - 1; ++p) {
            pattern |= ((x >> p) & 1u) << (num_parties - 1 - p);
        }
        family.push_back(GhzIndex{num_parties, pattern, +1});
        family.push_back(GhzIndex{num_parties, pattern, -1});
    }
    return family;
}

StateVector to_state_vector(const GhzIndex& g) {
    check_parties(g.num_parties);
    std::vector<Complex> amps(std::size_t{1} << g.num_parties);
    const double a = 1.0 / std::sqrt(2.0);
    amps[g.pattern] = Complex{a, 0};
    amps[g.complement()] = Complex{g.sign * a, 0};
    return StateVector::from_amplitudes(g.num_parties, std::move(amps));
}

std::vector<StateVector> ghz_family_states(int num_parties) {
    std::vector<StateVector> states;
    for (const GhzIndex& g : ghz_family_indices(num_parties)) {
        states.push_back(to_state_vector(g));
    }
    return states;
}

PauliAction apply_pauli(const GhzIndex& g, const PauliWord& word) {
    if (static_cast<int>(word.size()) != g.num_parties) {
        throw std::invalid_argument("apply_pauli: word length != party count");
    }
    GhzIndex cur = g;
    Phase phase = Phase::one();
    for (int p = 0; p < g.num_parties; ++p) {
        const Gate gate = word[static_cast<std::size_t>(p)];
        const std::uint32_t m = std::uint32_t{1} << (g.num_parties - 1 - p);
        switch (gate) {
            case Gate::Identity:
                continue;
            case Gate::PauliX:
                cur.pattern ^= m;
                break;
            case Gate::PauliZ:
                if (cur.pattern & m) phase *= Phase::minus_one();
                cur.sign = -cur.sign;
                break;
            case Gate::PauliY:
                // Y = i X Z: Z phase off the pre-flip bit, then flip.
                phase *= Phase::i();
                if (cur.pattern & m) phase *= Phase::minus_one();
                cur.sign = -cur.sign;
                cur.pattern ^= m;
                break;
            case Gate::Hadamard:
                throw std::invalid_argument("apply_pauli: Hadamard is not a Pauli");
        }
        if (cur.pattern & 1u) {
            // Swap branches back to canonical: (|a> + s|~a>) = s (|~a> + s|a>).
            cur.pattern = cur.complement();
            if (cur.sign < 0) phase *= Phase::minus_one();
        }
    }
    return PauliAction{cur, phase};
}

PauliAction apply_pauli(const GhzIndex& g, Gate gate, int particle) {
    if (particle < 0 || particle >= g.num_parties) {
        throw std::out_of_range("apply_pauli: particle out of range");
    }
    PauliWord word(static_cast<std::size_t>(g.num_parties), Gate::Identity);
    word[static_cast<std::size_t>(particle)] = gate;
    return apply_pauli(g, word);
}

std::pair<PauliWord, Phase> compose(const PauliWord& a, const PauliWord& b) {
    if (a.size() != b.size()) throw std::invalid_argument("compose: length mismatch");
    PauliWord out(a.size(), Gate::Identity);
    Phase phase = Phase::one();
    for (std::size_t p = 0; p < a.size(); ++p) {
        // Match a*b against phase * pauli over the four candidates.
        const auto ma = gate_matrix(a[p]);
        const auto mb = gate_matrix(b[p]);
        std::array<Complex, 4> prod{};
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                prod[static_cast<std::size_t>(r * 2 + c)] =
                    ma[static_cast<std::size_t>(r * 2)] * mb[static_cast<std::size_t>(c)] +
                    ma[static_cast<std::size_t>(r * 2 + 1)] * mb[static_cast<std::size_t>(2 + c)];
            }
        }
        bool matched = false;
        for (Gate cand : {Gate::Identity, Gate::PauliX, Gate::PauliY, Gate::PauliZ}) {
            const auto mc = gate_matrix(cand);
            for (int q = 0; q < 4 && !matched; ++q) {
                const Complex f = Phase::from_quarters(q).value();
                bool equal = true;
                for (int k = 0; k < 4; ++k) {
                    if (std::abs(prod[static_cast<std::size_t>(k)] -
                                 f * mc[static_cast<std::size_t>(k)]) > kExactTolerance) {
                        equal = false;
                        break;
                    }
                }
                if (equal) {
                    out[p] = cand;
                    phase *= Phase::from_quarters(q);
                    matched = true;
                }
            }
            if (matched) break;
        }
        if (!matched) throw std::logic_error("compose: product is not a Pauli");
    }
    return {std::move(out), phase};
}

FlipDecode decode_flips(const GhzIndex& prepared, const GhzIndex& measured, int home_particle) {
    if (prepared.num_parties != measured.num_parties) {
        throw std::invalid_argument("decode_flips: party count mismatch");
    }
    const int n = prepared.num_parties;
    if (home_particle < 0 || home_particle >= n) {
        throw std::out_of_range("decode_flips: home particle out of range");
    }
    std::uint32_t diff = prepared.pattern ^ measured.pattern;
    const std::uint32_t home_mask = std::uint32_t{1} << (n - 1 - home_particle);
    if (diff & home_mask) diff = ~diff & prepared.full_mask();
    FlipDecode out;
    out.flips.reserve(static_cast<std::size_t>(n - 1));
    for (int p = 0; p < n; ++p) {
        if (p == home_particle) continue;
        out.flips.push_back(static_cast<std::uint8_t>((diff >> (n - 1 - p)) & 1u));
    }
    out.sign_changed = prepared.sign != measured.sign;
    return out;
}

bool z_pattern_consistent(const GhzIndex& g, std::uint32_t outcomes) {
    if (outcomes >> g.num_parties) {
        throw std::invalid_argument("z_pattern_consistent: outcome length mismatch");
    }
    return outcomes == g.pattern || outcomes == g.complement();
}

bool z_pattern_consistent(const GhzIndex& g, std::span<const std::uint8_t> outcomes) {
    if (static_cast<int>(outcomes.size()) != g.num_parties) {
        throw std::invalid_argument("z_pattern_consistent: outcome length mismatch");
    }
    std::uint32_t packed = 0;
    for (std::uint8_t b : outcomes) packed = (packed << 1) | (b & 1u);
    return z_pattern_consistent(g, packed);
}

int x_parity(const GhzIndex& g) {
    return g.sign;
}

std::vector<PauliWord> eve_consistent_ops(std::span<const std::uint8_t> flips) {
    std::vector<PauliWord> words{PauliWord{}};
    for (std::uint8_t f : flips) {
        const std::array<Gate, 2> options =
            f ? std::array<Gate, 2>{Gate::PauliX, Gate::PauliY}
              : std::array<Gate, 2>{Gate::Identity, Gate::PauliZ};
        std::vector<PauliWord> next;
        next.reserve(words.size() * 2);
        for (const PauliWord& w : words) {
            for (Gate g : options) {
                PauliWord extended = w;
                extended.push_back(g);
                next.push_back(std::move(extended));
            }
        }
        words = std::move(next);
    }
    return words;
}

const std::array<EncodingConvention, 4>& all_conventions() {
    static const std::array<EncodingConvention, 4> conventions = {
        EncodingConvention{Gate::Identity, Gate::PauliX},
        EncodingConvention{Gate::Identity, Gate::PauliY},
        EncodingConvention{Gate::PauliZ, Gate::PauliX},
        EncodingConvention{Gate::PauliZ, Gate::PauliY},
    };
    return conventions;
}

EncodingConvention two_op_convention() {
    return EncodingConvention{Gate::Identity, Gate::PauliX};
}

bool gate_flips_pattern(Gate g) {
    return g == Gate::PauliX || g == Gate::PauliY;
}

bool gate_flips_sign(Gate g) {
    return g == Gate::PauliZ || g == Gate::PauliY;
}

}  // namespace ghzkd
