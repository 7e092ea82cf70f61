#include "ghzkd/statevec.hpp"

#include <cmath>
#include <stdexcept>

namespace ghzkd {

namespace {

constexpr Complex kI{0.0, 1.0};
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

std::array<Complex, 4> gate_matrix(Gate g) {
    const Complex zero{0, 0};
    const Complex one{1, 0};
    switch (g) {
        case Gate::Identity: return {one, zero, zero, one};
        case Gate::PauliX: return {zero, one, one, zero};
        case Gate::PauliY: return {zero, -kI, kI, zero};
        case Gate::PauliZ: return {one, zero, zero, -one};
        case Gate::Hadamard:
            return {Complex{kInvSqrt2, 0}, Complex{kInvSqrt2, 0}, Complex{kInvSqrt2, 0},
                    Complex{-kInvSqrt2, 0}};
    }
    throw std::invalid_argument("gate_matrix: unknown gate");
}

StateVector StateVector::ground(int num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw std::out_of_range("StateVector: register size out of range");
    }
    std::vector<Complex> amps(std::size_t{1} << num_qubits);
    amps[0] = Complex{1, 0};
    return StateVector(num_qubits, std::move(amps));
}

StateVector StateVector::basis_state(int num_qubits, std::uint64_t index) {
    StateVector s = ground(num_qubits);
    if (index >= s.dim()) throw std::out_of_range("StateVector: basis index out of range");
    s.amps_[0] = Complex{};
    s.amps_[index] = Complex{1, 0};
    return s;
}

StateVector StateVector::from_amplitudes(int num_qubits, std::vector<Complex> amps) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw std::out_of_range("StateVector: register size out of range");
    }
    if (amps.size() != (std::size_t{1} << num_qubits)) {
        throw std::invalid_argument("StateVector: amplitude count != 2^num_qubits");
    }
    StateVector s(num_qubits, std::move(amps));
    if (std::abs(s.norm_sqr() - 1.0) > kNormTolerance) {
        throw std::invalid_argument("StateVector: amplitudes not normalized");
    }
    return s;
}

double StateVector::norm_sqr() const {
    double total = 0.0;
    for (const Complex& a : amps_) total += std::norm(a);
    return total;
}

int StateVector::bit(std::uint64_t index, int qubit) const {
    return static_cast<int>((index >> (num_qubits_ - 1 - qubit)) & 1u);
}

std::uint64_t StateVector::qubit_mask(int qubit) const {
    return std::uint64_t{1} << (num_qubits_ - 1 - qubit);
}

void StateVector::check_qubit(int qubit) const {
    if (qubit < 0 || qubit >= num_qubits_) {
        throw std::out_of_range("StateVector: qubit index out of range");
    }
}

void StateVector::apply_gate(Gate g, int qubit) {
    check_qubit(qubit);
    if (g == Gate::Identity) return;
    const std::uint64_t step = qubit_mask(qubit);
    const std::uint64_t block = step << 1;
    const std::uint64_t n = dim();
    for (std::uint64_t base = 0; base < n; base += block) {
        for (std::uint64_t off = 0; off < step; ++off) {
            Complex& a0 = amps_[base + off];
            Complex& a1 = amps_[base + off + step];
            switch (g) {
                case Gate::PauliX: std::swap(a0, a1); break;
                case Gate::PauliY: {
                    const Complex t0 = a0;
                    a0 = -kI * a1;
                    a1 = kI * t0;
                    break;
                }
                case Gate::PauliZ: a1 = -a1; break;
                case Gate::Hadamard: {
                    const Complex t0 = a0;
                    a0 = (t0 + a1) * kInvSqrt2;
                    a1 = (t0 - a1) * kInvSqrt2;
                    break;
                }
                case Gate::Identity: break;
            }
        }
    }
}

void StateVector::apply_cnot(int control, int target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw std::invalid_argument("apply_cnot: control == target");
    const std::uint64_t cm = qubit_mask(control);
    const std::uint64_t tm = qubit_mask(target);
    const std::uint64_t n = dim();
    for (std::uint64_t i = 0; i < n; ++i) {
        if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
    }
}

int StateVector::measure_qubit(int qubit, MeasurementBasis basis, RandomStream& rng) {
    check_qubit(qubit);
    if (basis == MeasurementBasis::X) {
        // X measurement is Hadamard conjugation of the Z measurement.
        apply_gate(Gate::Hadamard, qubit);
        const int outcome = measure_qubit(qubit, MeasurementBasis::Z, rng);
        apply_gate(Gate::Hadamard, qubit);
        return outcome;
    }
    const std::uint64_t m = qubit_mask(qubit);
    double p_one = 0.0;
    for (std::uint64_t i = 0; i < dim(); ++i) {
        if (i & m) p_one += std::norm(amps_[i]);
    }
    const int outcome = rng.uniform() < p_one ? 1 : 0;
    const double p = outcome ? p_one : 1.0 - p_one;
    if (p < 1e-15) {
        throw std::logic_error("measure_qubit: zero-norm branch (state corrupted)");
    }
    const double scale = 1.0 / std::sqrt(p);
    for (std::uint64_t i = 0; i < dim(); ++i) {
        if (static_cast<int>((i & m) != 0) != outcome) {
            amps_[i] = Complex{};
        } else {
            amps_[i] *= scale;
        }
    }
    return outcome;
}

StateVector StateVector::tensor(const StateVector& other) const {
    const int n = num_qubits_ + other.num_qubits_;
    if (n > kMaxQubits) throw std::out_of_range("tensor: register size out of range");
    std::vector<Complex> amps(std::size_t{1} << n);
    for (std::size_t i = 0; i < dim(); ++i) {
        if (amps_[i] == Complex{}) continue;
        for (std::size_t j = 0; j < other.dim(); ++j) {
            amps[(i << other.num_qubits_) | j] = amps_[i] * other.amps_[j];
        }
    }
    return StateVector(n, std::move(amps));
}

Complex inner_product(const StateVector& a, const StateVector& b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw std::invalid_argument("inner_product: dimension mismatch");
    }
    Complex result{};
    for (std::size_t i = 0; i < a.dim(); ++i) result += std::conj(a[i]) * b[i];
    return result;
}

bool equal_up_to_global_phase(const StateVector& a, const StateVector& b, double tol) {
    if (a.num_qubits() != b.num_qubits()) return false;
    return std::abs(std::abs(inner_product(a, b)) - 1.0) <= tol;
}

bool approx_equal(const StateVector& a, const StateVector& b, double tol) {
    if (a.num_qubits() != b.num_qubits()) return false;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        if (std::abs(a[i] - b[i]) > tol) return false;
    }
    return true;
}

ProjectiveFamily::ProjectiveFamily(std::vector<StateVector> members)
    : members_(std::move(members)) {
    if (members_.empty()) throw std::invalid_argument("ProjectiveFamily: empty family");
    sub_qubits_ = members_[0].num_qubits();
    if (members_.size() != (std::size_t{1} << sub_qubits_)) {
        throw std::invalid_argument("ProjectiveFamily: family does not span the subspace");
    }
    for (const StateVector& m : members_) {
        if (m.num_qubits() != sub_qubits_) {
            throw std::invalid_argument("ProjectiveFamily: mixed member sizes");
        }
    }
    for (std::size_t i = 0; i < members_.size(); ++i) {
        for (std::size_t j = i; j < members_.size(); ++j) {
            const Complex g = inner_product(members_[i], members_[j]);
            const double expected = i == j ? 1.0 : 0.0;
            if (std::abs(g - Complex{expected, 0}) > kNormTolerance) {
                throw std::invalid_argument("ProjectiveFamily: family not orthonormal");
            }
        }
    }
}

int ProjectiveFamily::measure(StateVector& target, std::span<const int> qubits,
                              RandomStream& rng) const {
    if (static_cast<int>(qubits.size()) != sub_qubits_) {
        throw std::invalid_argument("ProjectiveFamily::measure: qubit count mismatch");
    }
    std::uint64_t subset_mask = 0;
    for (int q : qubits) {
        if (q < 0 || q >= target.num_qubits()) {
            throw std::out_of_range("ProjectiveFamily::measure: qubit out of range");
        }
        const std::uint64_t m = std::uint64_t{1} << (target.num_qubits() - 1 - q);
        if (subset_mask & m) {
            throw std::invalid_argument("ProjectiveFamily::measure: duplicate qubit");
        }
        subset_mask |= m;
    }

    const std::size_t dim = target.dim();
    auto gather = [&](std::uint64_t i) {
        std::uint64_t u = 0;
        for (int q : qubits) u = (u << 1) | ((i >> (target.num_qubits() - 1 - q)) & 1u);
        return u;
    };

    // Overlap coefficients of one member against the rest of the register:
    // c[v] = sum_u conj(f[u]) psi[u,v], keyed by the index with subset bits
    // cleared.
    std::vector<Complex> overlap(dim);
    auto project = [&](const StateVector& member) {
        std::fill(overlap.begin(), overlap.end(), Complex{});
        double prob = 0.0;
        for (std::uint64_t i = 0; i < dim; ++i) {
            overlap[i & ~subset_mask] += std::conj(member[gather(i)]) * target[i];
        }
        for (const Complex& c : overlap) prob += std::norm(c);
        return prob;
    };

    std::vector<double> probs(members_.size());
    double total = 0.0;
    for (std::size_t k = 0; k < members_.size(); ++k) {
        probs[k] = project(members_[k]);
        total += probs[k];
    }
    const double r = rng.uniform() * total;
    std::size_t picked = members_.size() - 1;
    double cum = 0.0;
    for (std::size_t k = 0; k < members_.size(); ++k) {
        cum += probs[k];
        if (r < cum) {
            picked = k;
            break;
        }
    }
    const double p = project(members_[picked]);
    if (p < 1e-15) {
        throw std::logic_error("ProjectiveFamily::measure: zero-norm projection");
    }
    const double scale = 1.0 / std::sqrt(p);
    for (std::uint64_t i = 0; i < dim; ++i) {
        target[i] = members_[picked][gather(i)] * overlap[i & ~subset_mask] * scale;
    }
    return static_cast<int>(picked);
}

std::pair<int, StateVector> measure_in_family(const StateVector& state,
                                              const std::vector<StateVector>& family,
                                              std::span<const int> qubits, RandomStream& rng) {
    ProjectiveFamily projector(family);
    StateVector collapsed = state;
    const int index = projector.measure(collapsed, qubits, rng);
    return {index, std::move(collapsed)};
}

}  // namespace ghzkd
