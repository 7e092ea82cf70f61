#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ghzkd/rng.hpp"

namespace ghzkd {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 24;
inline constexpr double kNormTolerance = 1e-9;    // norm / orthonormality checks
inline constexpr double kExactTolerance = 1e-12;  // exact-algebra comparisons

enum class Gate { Identity, PauliX, PauliY, PauliZ, Hadamard };
enum class MeasurementBasis { Z, X };

// 2x2 unitary for a gate, row-major.
std::array<Complex, 4> gate_matrix(Gate g);

// Dense state vector over an ordered qubit register. Qubit 0 is the most
// significant position of the basis label: for |abc>, amplitude index is
// a*4 + b*2 + c.
class StateVector {
public:
    // |0...0> register of `num_qubits` qubits, 1 <= num_qubits <= kMaxQubits.
    static StateVector ground(int num_qubits);

    // Computational basis state |index>.
    static StateVector basis_state(int num_qubits, std::uint64_t index);

    // Takes ownership of an explicit amplitude list; must already be
    // normalized within kNormTolerance.
    static StateVector from_amplitudes(int num_qubits, std::vector<Complex> amps);

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amps_.size(); }

    const Complex& operator[](std::size_t i) const { return amps_[i]; }
    Complex& operator[](std::size_t i) { return amps_[i]; }
    std::span<const Complex> amplitudes() const { return amps_; }

    double norm_sqr() const;

    // Bit of basis index `index` at qubit position `qubit`.
    int bit(std::uint64_t index, int qubit) const;

    void apply_gate(Gate g, int qubit);
    void apply_cnot(int control, int target);

    // Born-sampled single-qubit measurement; collapses and renormalizes.
    int measure_qubit(int qubit, MeasurementBasis basis, RandomStream& rng);

    // |psi> (x) |phi>, with this register on the most significant qubits.
    StateVector tensor(const StateVector& other) const;

private:
    StateVector(int num_qubits, std::vector<Complex> amps)
        : num_qubits_(num_qubits), amps_(std::move(amps)) {}

    std::uint64_t qubit_mask(int qubit) const;
    void check_qubit(int qubit) const;

    int num_qubits_ = 0;
    std::vector<Complex> amps_;
};

Complex inner_product(const StateVector& a, const StateVector& b);

// |<a|b>| == 1 within tol; the comparator for states that differ only by a
// global phase.
bool equal_up_to_global_phase(const StateVector& a, const StateVector& b,
                              double tol = kExactTolerance);

bool approx_equal(const StateVector& a, const StateVector& b, double tol = kExactTolerance);

// Complete orthonormal family over a qubit subset; validated once, then usable
// for repeated projective measurements.
class ProjectiveFamily {
public:
    // `members` must all span the same number of qubits m, contain exactly 2^m
    // states and be pairwise orthonormal within kNormTolerance.
    explicit ProjectiveFamily(std::vector<StateVector> members);

    int size() const { return static_cast<int>(members_.size()); }
    int subspace_qubits() const { return sub_qubits_; }
    const StateVector& member(int k) const { return members_[static_cast<std::size_t>(k)]; }

    // Projective measurement of `target` restricted to `qubits` (qubits[j]
    // carries the family's qubit j). Samples the Born distribution over the
    // projectors, collapses in place, returns the member index.
    int measure(StateVector& target, std::span<const int> qubits, RandomStream& rng) const;

private:
    std::vector<StateVector> members_;
    int sub_qubits_ = 0;
};

// One-shot convenience: validates the family, measures a copy.
std::pair<int, StateVector> measure_in_family(const StateVector& state,
                                              const std::vector<StateVector>& family,
                                              std::span<const int> qubits,
                                              RandomStream& rng);

}  // namespace ghzkd
