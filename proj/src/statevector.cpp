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
#include "qgcn/statevector.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qgcn {

namespace {

constexpr double kUnitaryTolerance = 1e-10;
constexpr double kNormTolerance = 1e-10;

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

struct ControlMask {
    std::uint64_t mask = 0;
    std::uint64_t value = 0;
};

ControlMask control_mask(const std::vector<Control> &controls,
                         std::size_t num_qubits) {
    ControlMask cm;
    for (const auto &c : controls) {
        const auto bit = qubit_mask(c.qubit, num_qubits);
        cm.mask |= bit;
        if (c.on_one) {
            cm.value |= bit;
        }
    }
    return cm;
}

void apply_matrix(std::span<Complex> amps, std::size_t num_qubits,
                  const GateOp &op, const Eigen::MatrixXcd &m) {
    check_gate_fits(op, num_qubits);
    if (amps.size() != (std::size_t{1} << num_qubits)) {
        throw std::invalid_argument("amplitude count does not match qubits");
    }
    const auto cm = control_mask(op.controls(), num_qubits);
    const auto &targets = op.targets();

    if (targets.size() == 1) {
        const auto tbit = qubit_mask(targets[0], num_qubits);
        const Complex m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0),
                      m11 = m(1, 1);
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            if ((i & tbit) != 0 || (i & cm.mask) != cm.value) {
                continue;
            }
            const Complex a0 = amps[i];
            const Complex a1 = amps[i | tbit];
            amps[i] = m00 * a0 + m01 * a1;
            amps[i | tbit] = m10 * a0 + m11 * a1;
        }
        return;
    }

    const std::size_t k = targets.size();
    const std::size_t dim = std::size_t{1} << k;
    std::uint64_t target_union = 0;
    std::vector<std::uint64_t> offsets(dim, 0);
    for (std::size_t t = 0; t < k; ++t) {
        const auto bit = qubit_mask(targets[t], num_qubits);
        target_union |= bit;
        for (std::size_t r = 0; r < dim; ++r) {
            if ((r >> (k - 1 - t)) & 1U) {
                offsets[r] |= bit;
            }
        }
    }
    Eigen::VectorXcd in(dim);
    Eigen::VectorXcd out(dim);
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if ((i & target_union) != 0 || (i & cm.mask) != cm.value) {
            continue;
        }
        for (std::size_t r = 0; r < dim; ++r) {
            in[static_cast<Eigen::Index>(r)] = amps[i | offsets[r]];
        }
        out.noalias() = m * in;
        for (std::size_t r = 0; r < dim; ++r) {
            amps[i | offsets[r]] = out[static_cast<Eigen::Index>(r)];
        }
    }
}

} // namespace

// ---------------------------------------------------------------- GateOp --

GateOp::GateOp(GateKind kind, std::vector<std::size_t> targets,
               std::vector<Control> controls, double angle,
               Eigen::MatrixXcd matrix)
    : kind_(kind), targets_(std::move(targets)),
      controls_(std::move(controls)), angle_(angle),
      matrix_(std::move(matrix)) {
    validate();
}

GateOp GateOp::x(std::size_t target, std::vector<Control> controls) {
    return {GateKind::PauliX, {target}, std::move(controls), 0.0, {}};
}
GateOp GateOp::y(std::size_t target, std::vector<Control> controls) {
    return {GateKind::PauliY, {target}, std::move(controls), 0.0, {}};
}
GateOp GateOp::z(std::size_t target, std::vector<Control> controls) {
    return {GateKind::PauliZ, {target}, std::move(controls), 0.0, {}};
}
GateOp GateOp::h(std::size_t target, std::vector<Control> controls) {
    return {GateKind::Hadamard, {target}, std::move(controls), 0.0, {}};
}
GateOp GateOp::ry(std::size_t target, double angle,
                  std::vector<Control> controls) {
    return {GateKind::Ry, {target}, std::move(controls), angle, {}};
}
GateOp GateOp::unitary(Eigen::MatrixXcd matrix,
                       std::vector<std::size_t> targets,
                       std::vector<Control> controls) {
    return {GateKind::Unitary, std::move(targets), std::move(controls), 0.0,
            std::move(matrix)};
}

void GateOp::validate() const {
    if (targets_.empty()) {
        throw std::invalid_argument("gate needs at least one target");
    }
    if (kind_ != GateKind::Unitary && targets_.size() != 1) {
        throw std::invalid_argument(name() + " takes exactly one target");
    }
    std::vector<std::size_t> all(targets_);
    for (const auto &c : controls_) {
        all.push_back(c.qubit);
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        throw std::invalid_argument(
            "gate targets and controls must be distinct qubits");
    }
    if (kind_ == GateKind::Unitary) {
        const auto dim = Eigen::Index{1} << targets_.size();
        if (matrix_.rows() != dim || matrix_.cols() != dim) {
            throw std::invalid_argument(
                "unitary matrix size does not match its target count");
        }
        const Eigen::MatrixXcd defect =
            matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(dim, dim);
        if (defect.cwiseAbs().maxCoeff() > kUnitaryTolerance) {
            throw std::invalid_argument("matrix is not unitary");
        }
    }
}

Eigen::MatrixXcd GateOp::local_matrix() const {
    using namespace std::complex_literals;
    Eigen::MatrixXcd m(2, 2);
    switch (kind_) {
    case GateKind::PauliX:
        m << 0.0, 1.0, 1.0, 0.0;
        return m;
    case GateKind::PauliY:
        m << 0.0, -1i, 1i, 0.0;
        return m;
    case GateKind::PauliZ:
        m << 1.0, 0.0, 0.0, -1.0;
        return m;
    case GateKind::Hadamard: {
        const double s = 1.0 / std::sqrt(2.0);
        m << s, s, s, -s;
        return m;
    }
    case GateKind::Ry: {
        const double c = std::cos(angle_);
        const double s = std::sin(angle_);
        m << c, -s, s, c;
        return m;
    }
    case GateKind::Unitary:
        return matrix_;
    }
    return m;
}

std::size_t GateOp::max_qubit() const {
    std::size_t q = *std::max_element(targets_.begin(), targets_.end());
    for (const auto &c : controls_) {
        q = std::max(q, c.qubit);
    }
    return q;
}

GateOp GateOp::shifted(std::size_t offset) const {
    auto targets = targets_;
    for (auto &t : targets) {
        t += offset;
    }
    auto controls = controls_;
    for (auto &c : controls) {
        c.qubit += offset;
    }
    return {kind_, std::move(targets), std::move(controls), angle_, matrix_};
}

GateOp GateOp::with_controls(std::span<const Control> extra) const {
    auto controls = controls_;
    controls.insert(controls.end(), extra.begin(), extra.end());
    return {kind_, targets_, std::move(controls), angle_, matrix_};
}

GateOp GateOp::with_angle(double angle) const {
    if (kind_ != GateKind::Ry) {
        throw std::invalid_argument("only Ry gates carry an angle");
    }
    return {kind_, targets_, controls_, angle, matrix_};
}

std::string GateOp::name() const {
    switch (kind_) {
    case GateKind::PauliX:
        return "X";
    case GateKind::PauliY:
        return "Y";
    case GateKind::PauliZ:
        return "Z";
    case GateKind::Hadamard:
        return "H";
    case GateKind::Ry:
        return "Ry";
    case GateKind::Unitary:
        return "U";
    }
    return "?";
}

// ----------------------------------------------------------- StateVector --

StateVector::StateVector(std::size_t num_qubits)
    : num_qubits_(num_qubits), amps_(std::size_t{1} << num_qubits) {
    amps_[0] = 1.0;
}

StateVector StateVector::basis(std::size_t num_qubits, std::uint64_t index) {
    StateVector s(num_qubits);
    if (index >= s.size()) {
        throw std::out_of_range("basis index out of range");
    }
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    if (!is_power_of_two(amplitudes.size())) {
        throw std::invalid_argument("amplitude count must be a power of two");
    }
    double sq = 0.0;
    for (const auto &a : amplitudes) {
        sq += std::norm(a);
    }
    if (std::abs(sq - 1.0) > kNormTolerance) {
        throw std::invalid_argument("amplitudes are not normalized");
    }
    StateVector s;
    s.num_qubits_ = static_cast<std::size_t>(std::countr_zero(amplitudes.size()));
    s.amps_ = std::move(amplitudes);
    return s;
}

StateVector StateVector::normalized(std::vector<Complex> amplitudes) {
    double sq = 0.0;
    for (const auto &a : amplitudes) {
        sq += std::norm(a);
    }
    if (sq == 0.0) {
        throw std::invalid_argument("cannot normalize a zero vector");
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (auto &a : amplitudes) {
        a *= inv;
    }
    return from_amplitudes(std::move(amplitudes));
}

double StateVector::norm() const {
    double sq = 0.0;
    for (const auto &a : amps_) {
        sq += std::norm(a);
    }
    return std::sqrt(sq);
}

StateVector StateVector::tensor(const StateVector &rhs) const {
    std::vector<Complex> out(size() * rhs.size());
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = 0; j < rhs.size(); ++j) {
            out[i * rhs.size() + j] = amps_[i] * rhs.amps_[j];
        }
    }
    StateVector s;
    s.num_qubits_ = num_qubits_ + rhs.num_qubits_;
    s.amps_ = std::move(out);
    return s;
}

// ------------------------------------------------------------- kernels --

std::size_t qubits_for(std::size_t count) {
    std::size_t q = 0;
    while ((std::size_t{1} << q) < count) {
        ++q;
    }
    return q;
}

void check_gate_fits(const GateOp &op, std::size_t num_qubits) {
    if (op.max_qubit() >= num_qubits) {
        std::ostringstream msg;
        msg << op.name() << " gate touches qubit " << op.max_qubit()
            << " of a " << num_qubits << "-qubit register";
        throw std::out_of_range(msg.str());
    }
}

void apply_gate_to(std::span<Complex> amps, std::size_t num_qubits,
                   const GateOp &op) {
    apply_matrix(amps, num_qubits, op, op.local_matrix());
}

void apply_gate_adjoint_to(std::span<Complex> amps, std::size_t num_qubits,
                           const GateOp &op) {
    apply_matrix(amps, num_qubits, op, op.local_matrix().adjoint());
}

StateVector apply_gate(StateVector state, const GateOp &op) {
    apply_gate_to(state.amps_, state.num_qubits_, op);
    return state;
}

StateVector apply_circuit(StateVector state, std::span<const GateOp> ops) {
    for (const auto &op : ops) {
        apply_gate_to(state.amps_, state.num_qubits_, op);
    }
    return state;
}

Postselection postselect(const StateVector &state,
                         std::span<const std::size_t> qubits,
                         std::span<const int> outcome) {
    const std::size_t n = state.num_qubits();
    if (qubits.size() != outcome.size()) {
        throw std::invalid_argument("outcome length does not match qubits");
    }
    std::uint64_t mask = 0;
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        if (qubits[i] >= n) {
            throw std::out_of_range("post-selected qubit out of range");
        }
        if (outcome[i] != 0 && outcome[i] != 1) {
            throw std::invalid_argument("outcome bits must be 0 or 1");
        }
        const auto bit = qubit_mask(qubits[i], n);
        if ((mask & bit) != 0) {
            throw std::invalid_argument("post-selected qubits must be distinct");
        }
        mask |= bit;
        if (outcome[i] == 1) {
            value |= bit;
        }
    }

    // Remaining qubits keep their relative order, so compacting the unmasked
    // bits of each selected index gives its position in the reduced state.
    const std::size_t kept = n - qubits.size();
    std::vector<Complex> reduced(std::size_t{1} << kept);
    double p = 0.0;
    for (std::uint64_t i = 0; i < state.size(); ++i) {
        if ((i & mask) != value) {
            continue;
        }
        std::uint64_t r = 0;
        std::size_t pos = 0;
        for (std::size_t b = 0; b < n; ++b) {
            const std::uint64_t bit = std::uint64_t{1} << b;
            if ((mask & bit) == 0) {
                if ((i & bit) != 0) {
                    r |= std::uint64_t{1} << pos;
                }
                ++pos;
            }
        }
        reduced[r] = state[i];
        p += std::norm(state[i]);
    }
    if (p < kZeroProbability) {
        throw ZeroProbabilityError("post-selected outcome has zero probability");
    }
    const double inv = 1.0 / std::sqrt(p);
    for (auto &a : reduced) {
        a *= inv;
    }
    return {StateVector::from_amplitudes(std::move(reduced)), p};
}

std::vector<double> probabilities(const StateVector &state) {
    std::vector<double> p(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        p[i] = std::norm(state[i]);
    }
    return p;
}

// -------------------------------------------------------- RegisterLayout --

namespace {
std::vector<std::size_t> iota_range(std::size_t first, std::size_t count) {
    std::vector<std::size_t> v(count);
    std::iota(v.begin(), v.end(), first);
    return v;
}
} // namespace

std::vector<std::size_t> RegisterLayout::ancilla() const {
    return iota_range(0, ancilla_qubits);
}
std::vector<std::size_t> RegisterLayout::node() const {
    return iota_range(node_offset(), node_qubits);
}
std::vector<std::size_t> RegisterLayout::dim() const {
    return iota_range(dim_offset(), dim_qubits);
}

RegisterLayout RegisterLayout::for_sizes(std::size_t num_ancilla,
                                         std::size_t num_nodes,
                                         std::size_t dims) {
    return {num_ancilla, qubits_for(num_nodes), qubits_for(dims)};
}

} // namespace qgcn
