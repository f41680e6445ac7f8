// Copyright 2026 The QGCN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file statevector.hpp
 * Dense statevector simulation: gates, measurement probabilities and
 * ancilla post-selection.
 *
 * Conventions used throughout the library:
 *  - Qubit 0 is the most significant bit of a basis index (big-endian).
 *    Register stacks are laid out ancilla, then node, then dimension, so the
 *    basis index of |anc>|j>|d> is (anc * N + j) * D + d.
 *  - Ry(theta) = exp(-i theta Y) = [[cos, -sin], [sin, cos]]. This is the
 *    full-angle convention: it is HALF the angle most toolkits use, and the
 *    matching parameter-shift is pi/4 rather than pi/2.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qgcn {

using Complex = std::complex<double>;

/// Raised when a post-selected outcome has (numerically) zero probability.
class ZeroProbabilityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class GateKind { PauliX, PauliY, PauliZ, Hadamard, Ry, Unitary };

/// A control qubit; the gate fires when the qubit reads `on_one ? 1 : 0`.
struct Control {
    std::size_t qubit = 0;
    bool on_one = true;

    friend bool operator==(const Control &, const Control &) = default;
};

/**
 * @brief A (multi-)controlled gate acting on explicit qubit indices.
 *
 * Instances are validated on construction: targets and controls are
 * distinct and disjoint, named gates have a single target, and arbitrary
 * unitaries are checked with ||U^dag U - I||_max <= 1e-10.
 */
class GateOp {
  public:
    static GateOp x(std::size_t target, std::vector<Control> controls = {});
    static GateOp y(std::size_t target, std::vector<Control> controls = {});
    static GateOp z(std::size_t target, std::vector<Control> controls = {});
    static GateOp h(std::size_t target, std::vector<Control> controls = {});
    static GateOp ry(std::size_t target, double angle,
                     std::vector<Control> controls = {});
    static GateOp unitary(Eigen::MatrixXcd matrix,
                          std::vector<std::size_t> targets,
                          std::vector<Control> controls = {});

    [[nodiscard]] GateKind kind() const { return kind_; }
    [[nodiscard]] const std::vector<std::size_t> &targets() const {
        return targets_;
    }
    [[nodiscard]] const std::vector<Control> &controls() const {
        return controls_;
    }
    [[nodiscard]] double angle() const { return angle_; }
    [[nodiscard]] const Eigen::MatrixXcd &matrix() const { return matrix_; }

    /// The 2^t x 2^t matrix on the targets; targets()[0] is its top bit.
    [[nodiscard]] Eigen::MatrixXcd local_matrix() const;

    /// Largest qubit index touched (targets and controls).
    [[nodiscard]] std::size_t max_qubit() const;

    /// Copy with every qubit index increased by `offset`.
    [[nodiscard]] GateOp shifted(std::size_t offset) const;

    /// Copy with additional controls appended.
    [[nodiscard]] GateOp with_controls(std::span<const Control> extra) const;

    /// Copy of an Ry gate with a different angle.
    [[nodiscard]] GateOp with_angle(double angle) const;

    [[nodiscard]] std::string name() const;

  private:
    GateOp(GateKind kind, std::vector<std::size_t> targets,
           std::vector<Control> controls, double angle,
           Eigen::MatrixXcd matrix);
    void validate() const;

    GateKind kind_;
    std::vector<std::size_t> targets_;
    std::vector<Control> controls_;
    double angle_ = 0.0;
    Eigen::MatrixXcd matrix_;
};

using Circuit = std::vector<GateOp>;

/**
 * @brief Normalized amplitudes of an n-qubit register.
 *
 * Values are immutable once built; the simulation entry points below take a
 * state by value and return the evolved state.
 */
class StateVector {
  public:
    /// |0...0> on `num_qubits` qubits.
    explicit StateVector(std::size_t num_qubits = 0);

    static StateVector basis(std::size_t num_qubits, std::uint64_t index);

    /// Length must be a power of two and the squared norm 1 within 1e-10.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    /// Normalizes a nonzero vector; throws std::invalid_argument on zero.
    static StateVector normalized(std::vector<Complex> amplitudes);

    [[nodiscard]] std::size_t num_qubits() const { return num_qubits_; }
    [[nodiscard]] std::size_t size() const { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amps_; }
    [[nodiscard]] const Complex &operator[](std::size_t i) const {
        return amps_[i];
    }
    [[nodiscard]] double norm() const;

    /// |this> (x) |rhs>, with this register on the more significant qubits.
    [[nodiscard]] StateVector tensor(const StateVector &rhs) const;

    /// Releases the amplitude storage.
    [[nodiscard]] std::vector<Complex> take() && { return std::move(amps_); }

  private:
    friend StateVector apply_gate(StateVector, const GateOp &);
    friend StateVector apply_circuit(StateVector, std::span<const GateOp>);

    std::size_t num_qubits_;
    std::vector<Complex> amps_;
};

/// Bit mask of `qubit` inside an n-qubit basis index.
constexpr std::uint64_t qubit_mask(std::size_t qubit, std::size_t num_qubits) {
    return std::uint64_t{1} << (num_qubits - 1 - qubit);
}

/// Number of qubits needed to index `count` items (0 for count <= 1).
std::size_t qubits_for(std::size_t count);

/// Throws std::out_of_range if `op` touches a qubit >= num_qubits.
void check_gate_fits(const GateOp &op, std::size_t num_qubits);

/**
 * @brief Applies `op` in place to raw amplitudes of an n-qubit register.
 *
 * The amplitudes need not be normalized; this is the kernel the adjoint
 * gradient code runs on cotangent vectors.
 */
void apply_gate_to(std::span<Complex> amps, std::size_t num_qubits,
                   const GateOp &op);

/// Applies the conjugate transpose of `op` in place.
void apply_gate_adjoint_to(std::span<Complex> amps, std::size_t num_qubits,
                           const GateOp &op);

/// U|psi> for the full-register embedding of `op`.
StateVector apply_gate(StateVector state, const GateOp &op);

/// Applies `ops` left to right.
StateVector apply_circuit(StateVector state, std::span<const GateOp> ops);

struct Postselection {
    StateVector state;
    double probability = 0.0;
};

/// Probability below which a post-selection outcome counts as impossible.
inline constexpr double kZeroProbability = 1e-14;

/**
 * @brief Projects `qubits` onto `outcome` and renormalizes.
 *
 * The returned state lives on the remaining qubits, in their original order.
 * Throws ZeroProbabilityError when the projection probability is below
 * kZeroProbability.
 */
Postselection postselect(const StateVector &state,
                         std::span<const std::size_t> qubits,
                         std::span<const int> outcome);

/// Squared magnitudes of the amplitudes.
std::vector<double> probabilities(const StateVector &state);

/**
 * @brief Qubit counts of the ancilla (x) node (x) dimension register stack.
 */
struct RegisterLayout {
    std::size_t ancilla_qubits = 0;
    std::size_t node_qubits = 0;
    std::size_t dim_qubits = 0;

    [[nodiscard]] std::size_t total() const {
        return ancilla_qubits + node_qubits + dim_qubits;
    }
    [[nodiscard]] std::size_t node_offset() const { return ancilla_qubits; }
    [[nodiscard]] std::size_t dim_offset() const {
        return ancilla_qubits + node_qubits;
    }
    [[nodiscard]] std::vector<std::size_t> ancilla() const;
    [[nodiscard]] std::vector<std::size_t> node() const;
    [[nodiscard]] std::vector<std::size_t> dim() const;

    /// Layout sized for `num_ancilla` ancillas, N nodes and D dimensions.
    static RegisterLayout for_sizes(std::size_t num_ancilla,
                                    std::size_t num_nodes, std::size_t dims);
};

} // namespace qgcn
