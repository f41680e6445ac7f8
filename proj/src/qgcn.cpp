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
#include "qgcn/qgcn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "qgcn/parallel.hpp"

namespace qgcn {

namespace {

std::size_t width_of(const QgclQuantumLayer &layer) {
    return layer.layout.node_qubits + layer.layout.dim_qubits;
}

double squared_norm(std::span<const Complex> v) {
    double s = 0.0;
    for (const auto &x : v) {
        s += std::norm(x);
    }
    return s;
}

struct ReadoutData {
    Eigen::MatrixXd slots;     // S, traced class slots
    Eigen::VectorXd row_mass;  // R_j
    double total = 0.0;        // T
    Eigen::MatrixXd e;
};

ReadoutData read_out(const QgclQuantumLayer &layer, std::span<const Complex> psi) {
    const std::size_t dq = layer.layout.dim_qubits;
    const std::size_t d_pad = std::size_t{1} << dq;
    const std::size_t rows = std::size_t{1} << layer.layout.node_qubits;
    const std::size_t drop = dq - layer.kept_qubits();
    const auto n = static_cast<Eigen::Index>(layer.num_nodes);
    const auto k = static_cast<Eigen::Index>(layer.output_dim);
    ReadoutData r;
    r.slots = Eigen::MatrixXd::Zero(n, k);
    r.row_mass = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t d = 0; d < d_pad; ++d) {
            const double p = std::norm(psi[j * d_pad + d]);
            r.total += p;
            if (j >= layer.num_nodes) {
                continue;
            }
            const auto jj = static_cast<Eigen::Index>(j);
            r.row_mass[jj] += p;
            const auto slot = static_cast<Eigen::Index>(d >> drop);
            if (slot < k) {
                r.slots(jj, slot) += p;
            }
        }
    }
    switch (layer.readout) {
    case Readout::Joint:
        r.e = r.slots;
        break;
    case Readout::Postselected:
        if (r.total < kZeroProbability) {
            throw ZeroProbabilityError("ancilla success probability is zero");
        }
        r.e = r.slots / r.total;
        break;
    case Readout::NodeConditional:
        r.e = r.slots;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (r.row_mass[j] > 0.0) {
                r.e.row(j) /= r.row_mass[j];
            } else {
                r.e.row(j).setZero();
            }
        }
        break;
    }
    return r;
}

// dL/dP for every amplitude given dL/dE.
std::vector<double> read_out_backward(const QgclQuantumLayer &layer,
                                      const ReadoutData &r,
                                      const Eigen::MatrixXd &g) {
    const std::size_t dq = layer.layout.dim_qubits;
    const std::size_t d_pad = std::size_t{1} << dq;
    const std::size_t rows = std::size_t{1} << layer.layout.node_qubits;
    const std::size_t drop = dq - layer.kept_qubits();
    const auto k = static_cast<Eigen::Index>(layer.output_dim);
    std::vector<double> w(rows * d_pad, 0.0);
    auto slot_grad = [&](std::size_t j, std::size_t d) {
        const auto slot = static_cast<Eigen::Index>(d >> drop);
        return slot < k ? g(static_cast<Eigen::Index>(j), slot) : 0.0;
    };
    switch (layer.readout) {
    case Readout::Joint:
        for (std::size_t j = 0; j < layer.num_nodes; ++j) {
            for (std::size_t d = 0; d < d_pad; ++d) {
                w[j * d_pad + d] = slot_grad(j, d);
            }
        }
        break;
    case Readout::Postselected: {
        const double t = r.total;
        const double common = g.cwiseProduct(r.slots).sum() / (t * t);
        for (std::size_t j = 0; j < rows; ++j) {
            for (std::size_t d = 0; d < d_pad; ++d) {
                const double direct = j < layer.num_nodes ? slot_grad(j, d) / t : 0.0;
                w[j * d_pad + d] = direct - common;
            }
        }
        break;
    }
    case Readout::NodeConditional:
        for (std::size_t j = 0; j < layer.num_nodes; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double rj = r.row_mass[jj];
            if (!(rj > 0.0)) {
                continue;
            }
            const double common = g.row(jj).dot(r.slots.row(jj)) / (rj * rj);
            for (std::size_t d = 0; d < d_pad; ++d) {
                w[j * d_pad + d] = slot_grad(j, d) / rj - common;
            }
        }
        break;
    }
    return w;
}

std::vector<Complex> apply_all(std::vector<Complex> amps, std::size_t width,
                               std::span<const GateOp> circuit) {
    for (const auto &g : circuit) {
        apply_gate_to(amps, width, g);
    }
    return amps;
}

std::vector<Complex> adjacency_block(const QgclQuantumLayer &layer,
                                     std::span<const Complex> input) {
    if (input.size() != layer.amplitude_count()) {
        throw std::invalid_argument("input does not span node and dim registers");
    }
    auto phi = layer.adjacency.apply(input, layer.layout.dim_qubits);
    if (squared_norm(phi) < kZeroProbability) {
        throw ZeroProbabilityError("ancilla success probability is zero");
    }
    return phi;
}

// Q with controlled-Ry rewritten into plain Ry and CX. For each phase the
// gates it drives and d(angle)/d(theta).
struct ExpandedCircuit {
    Circuit gates;
    std::vector<std::vector<std::pair<std::size_t, double>>> uses;
};

ExpandedCircuit expand_for_shift(const QgclQuantumLayer &layer) {
    ExpandedCircuit out;
    const std::size_t offset = layer.layout.node_qubits;
    for (const auto &block : layer.blocks) {
        const auto block_gates = pqc_block_circuit(block);
        for (std::size_t i = 0; i < block_gates.size(); ++i) {
            const auto g = block_gates[i].shifted(offset);
            const double theta = g.angle();
            if (g.controls().empty()) {
                out.uses.push_back({{out.gates.size(), 1.0}});
                out.gates.push_back(g);
                continue;
            }
            const std::size_t target = g.targets()[0];
            const auto controls = g.controls();
            const std::size_t first = out.gates.size();
            out.gates.push_back(GateOp::ry(target, theta / 2.0));
            out.gates.push_back(GateOp::x(target, controls));
            out.gates.push_back(GateOp::ry(target, -theta / 2.0));
            out.gates.push_back(GateOp::x(target, controls));
            out.uses.push_back({{first, 0.5}, {first + 2, -0.5}});
        }
    }
    return out;
}

double contract(const Eigen::MatrixXd &g, const Eigen::MatrixXd &de) {
    return g.cwiseProduct(de).sum();
}

double shifted_contribution(const QgclQuantumLayer &layer,
                            const std::vector<Complex> &phi,
                            const ExpandedCircuit &ex, const Eigen::MatrixXd &g,
                            std::size_t tau, double shift) {
    const std::size_t width = width_of(layer);
    double total = 0.0;
    for (const auto &[index, coef] : ex.uses[tau]) {
        Circuit c = ex.gates;
        const double angle = c[index].angle();
        c[index] = ex.gates[index].with_angle(angle + shift);
        const auto plus = read_out(layer, apply_all(phi, width, c)).e;
        c[index] = ex.gates[index].with_angle(angle - shift);
        const auto minus = read_out(layer, apply_all(phi, width, c)).e;
        total += coef * contract(g, plus - minus);
    }
    return total;
}

double accuracy(const std::vector<int> &pred, std::span<const int> labels,
                const std::vector<bool> &mask) {
    std::size_t hit = 0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < pred.size(); ++j) {
        if (mask[j]) {
            ++count;
            hit += pred[j] == labels[j] ? 1 : 0;
        }
    }
    return count == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(count);
}

void check_finite(const TrainState &s, double loss) {
    bool ok = std::isfinite(loss) && s.weight.allFinite();
    for (double t : s.theta) {
        ok = ok && std::isfinite(t);
    }
    if (!ok) {
        throw DivergenceError("training diverged at epoch " +
                              std::to_string(s.epoch) + " (loss " +
                              std::to_string(loss) + "); lower the learning rate");
    }
}

} // namespace

// --------------------------------------------------------------- blocks --

std::size_t PqcBlock::phase_count(std::size_t num_qubits) {
    return num_qubits <= 1 ? num_qubits : 2 * num_qubits;
}

Circuit pqc_block_circuit(const PqcBlock &block) {
    const std::size_t q = block.num_qubits;
    if (block.phases.size() != PqcBlock::phase_count(q)) {
        throw std::invalid_argument("block has " +
                                    std::to_string(block.phases.size()) +
                                    " phases, expected " +
                                    std::to_string(PqcBlock::phase_count(q)));
    }
    Circuit c;
    for (std::size_t i = 0; i < q; ++i) {
        c.push_back(GateOp::ry(i, block.phases[i]));
    }
    if (q >= 2) {
        for (std::size_t i = 0; i < q; ++i) {
            c.push_back(GateOp::ry((i + 1) % q, block.phases[q + i], {{i, true}}));
        }
    }
    return c;
}

// ------------------------------------------------------------ adjacency --

AdjacencyStage AdjacencyStage::circuit(LcuPlan plan) {
    AdjacencyStage s;
    s.node_qubits_ = plan.layout.node_qubits;
    s.ancilla_count_ = plan.ancilla_count;
    s.term_count_ = plan.controlled_terms.size();
    s.scale_ = plan.scale;
    s.plan_ = std::move(plan);
    return s;
}

AdjacencyStage AdjacencyStage::from_operator(Eigen::SparseMatrix<double> weighted_sum,
                                             double weight_norm,
                                             std::size_t ancilla_count) {
    const auto n = static_cast<std::size_t>(weighted_sum.rows());
    if (weighted_sum.rows() != weighted_sum.cols() || n == 0 ||
        (n & (n - 1)) != 0) {
        throw std::invalid_argument("operator must be square with power-of-two size");
    }
    if (!(weight_norm > 0.0)) {
        throw std::invalid_argument("weight norm must be positive");
    }
    AdjacencyStage s;
    s.node_qubits_ = qubits_for(n);
    s.ancilla_count_ = ancilla_count;
    s.term_count_ = std::size_t{1} << ancilla_count;
    s.scale_ = weight_norm * std::sqrt(static_cast<double>(std::size_t{1} << ancilla_count));
    s.op_ = weighted_sum;
    s.op_t_ = weighted_sum.transpose();
    s.op_.makeCompressed();
    s.op_t_.makeCompressed();
    return s;
}

AdjacencyStage AdjacencyStage::from_matrix(const Eigen::MatrixXd &a, double drop_tol) {
    const auto tr = pauli_truncate(a, drop_tol);
    if (tr.term_count == 0) {
        throw std::invalid_argument("truncation removed every Pauli term");
    }
    const Eigen::MatrixXd &op = tr.dropped_count == 0 ? a : tr.kept;
    auto s = from_operator(op.sparseView(1.0, 1e-15), tr.weight_norm,
                           ancilla_count_for(tr.term_count));
    s.term_count_ = tr.term_count;
    s.residual_norm_ = tr.residual_norm;
    return s;
}

AdjacencyStage AdjacencyStage::identity(std::size_t node_qubits) {
    const auto n = static_cast<Eigen::Index>(std::size_t{1} << node_qubits);
    Eigen::SparseMatrix<double> eye(n, n);
    eye.setIdentity();
    auto s = from_operator(eye, 1.0, 0);
    s.term_count_ = 1;
    return s;
}

std::vector<Complex> AdjacencyStage::apply(std::span<const Complex> amps,
                                           std::size_t dim_qubits,
                                           bool transpose) const {
    if (plan_) {
        if (plan_->layout.dim_qubits != dim_qubits) {
            throw std::invalid_argument("LCU plan was built for another dim width");
        }
        return lcu_block_apply(*plan_, amps, transpose);
    }
    const std::size_t d = std::size_t{1} << dim_qubits;
    const auto &m = transpose ? op_t_ : op_;
    const auto rows = static_cast<std::size_t>(m.rows());
    if (amps.size() != rows * d) {
        throw std::invalid_argument("amplitudes do not match the adjacency size");
    }
    std::vector<Complex> out(amps.size(), Complex(0.0, 0.0));
    const double inv = 1.0 / scale_;
    for (Eigen::Index j = 0; j < m.outerSize(); ++j) {
        Complex *dst = out.data() + static_cast<std::size_t>(j) * d;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, j); it;
             ++it) {
            const Complex *src = amps.data() + static_cast<std::size_t>(it.col()) * d;
            const double v = it.value() * inv;
            for (std::size_t c = 0; c < d; ++c) {
                dst[c] += v * src[c];
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- layer --

std::size_t QgclQuantumLayer::num_phases() const {
    std::size_t t = 0;
    for (const auto &b : blocks) {
        t += b.phases.size();
    }
    return t;
}

std::vector<double> QgclQuantumLayer::phases() const {
    std::vector<double> out;
    out.reserve(num_phases());
    for (const auto &b : blocks) {
        out.insert(out.end(), b.phases.begin(), b.phases.end());
    }
    return out;
}

void QgclQuantumLayer::set_phases(std::span<const double> theta) {
    if (theta.size() != num_phases()) {
        throw std::invalid_argument("phase vector has the wrong length");
    }
    std::size_t k = 0;
    for (auto &b : blocks) {
        for (auto &p : b.phases) {
            p = theta[k++];
        }
    }
}

Circuit QgclQuantumLayer::pqc_circuit() const {
    Circuit c;
    for (const auto &b : blocks) {
        for (const auto &g : pqc_block_circuit(b)) {
            c.push_back(g.shifted(layout.node_qubits));
        }
    }
    return c;
}

std::size_t QgclQuantumLayer::kept_qubits() const { return qubits_for(output_dim); }

QgclQuantumLayer make_quantum_layer(AdjacencyStage adjacency, std::size_t num_nodes,
                                    std::size_t dim_qubits, std::size_t output_dim,
                                    std::size_t num_blocks, Readout readout) {
    if (output_dim == 0 || output_dim > (std::size_t{1} << dim_qubits)) {
        throw std::invalid_argument("output dimension does not fit the dim register");
    }
    if (num_nodes == 0 || num_nodes > (std::size_t{1} << adjacency.node_qubits())) {
        throw std::invalid_argument("node count does not fit the node register");
    }
    QgclQuantumLayer layer;
    layer.layout = {adjacency.ancilla_count(), adjacency.node_qubits(), dim_qubits};
    layer.adjacency = std::move(adjacency);
    layer.num_nodes = num_nodes;
    layer.output_dim = output_dim;
    layer.readout = readout;
    for (std::size_t b = 0; b < num_blocks; ++b) {
        layer.blocks.push_back(
            {dim_qubits, std::vector<double>(PqcBlock::phase_count(dim_qubits), 0.0)});
    }
    return layer;
}

QgclOutput qgcl_forward(const QgclQuantumLayer &layer, const StateVector &input) {
    auto phi = adjacency_block(layer, input.amplitudes());
    const auto q = layer.pqc_circuit();
    auto psi = apply_all(std::move(phi), width_of(layer), q);
    QgclOutput out;
    out.success_probability = squared_norm(psi);
    out.conditional = StateVector::normalized(psi);
    out.joint_block = std::move(psi);
    return out;
}

Eigen::MatrixXd expectations(const QgclQuantumLayer &layer, const StateVector &input) {
    auto phi = adjacency_block(layer, input.amplitudes());
    const auto q = layer.pqc_circuit();
    return read_out(layer, apply_all(std::move(phi), width_of(layer), q)).e;
}

// ----------------------------------------------------------------- loss --

namespace {

void check_loss_inputs(const Eigen::MatrixXd &e, std::span<const int> labels,
                       const std::vector<bool> &mask) {
    const auto rows = static_cast<std::size_t>(e.rows());
    if (labels.size() < rows || mask.size() < rows) {
        throw std::invalid_argument("labels and mask must cover every row");
    }
    std::size_t count = 0;
    for (std::size_t j = 0; j < rows; ++j) {
        if (!mask[j]) {
            continue;
        }
        ++count;
        if (labels[j] < 0 || labels[j] >= e.cols()) {
            throw std::invalid_argument("masked row " + std::to_string(j) +
                                        " has an invalid label");
        }
    }
    if (count == 0) {
        throw std::invalid_argument("loss mask is empty");
    }
}

std::size_t mask_count(const std::vector<bool> &mask, std::size_t rows) {
    return static_cast<std::size_t>(
        std::count(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(rows), true));
}

} // namespace

double loss(const Eigen::MatrixXd &e, std::span<const int> labels,
            const std::vector<bool> &mask) {
    check_loss_inputs(e, labels, mask);
    const auto rows = static_cast<std::size_t>(e.rows());
    double total = 0.0;
    for (std::size_t j = 0; j < rows; ++j) {
        if (!mask[j]) {
            continue;
        }
        const auto row = e.row(static_cast<Eigen::Index>(j));
        const double m = row.maxCoeff();
        const double lse = m + std::log((row.array() - m).exp().sum());
        total += lse - row[labels[j]];
    }
    return total / static_cast<double>(mask_count(mask, rows));
}

Eigen::MatrixXd loss_gradient(const Eigen::MatrixXd &e, std::span<const int> labels,
                              const std::vector<bool> &mask) {
    check_loss_inputs(e, labels, mask);
    const auto rows = static_cast<std::size_t>(e.rows());
    const double inv = 1.0 / static_cast<double>(mask_count(mask, rows));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(e.rows(), e.cols());
    for (std::size_t j = 0; j < rows; ++j) {
        if (!mask[j]) {
            continue;
        }
        const auto jj = static_cast<Eigen::Index>(j);
        const double m = e.row(jj).maxCoeff();
        Eigen::RowVectorXd p = (e.row(jj).array() - m).exp();
        p /= p.sum();
        p[labels[j]] -= 1.0;
        g.row(jj) = p * inv;
    }
    return g;
}

std::vector<int> predict(const Eigen::MatrixXd &e) {
    std::vector<int> out(static_cast<std::size_t>(e.rows()), 0);
    for (Eigen::Index j = 0; j < e.rows(); ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < e.cols(); ++c) {
            if (e(j, c) > e(j, best)) {
                best = c;
            }
        }
        out[static_cast<std::size_t>(j)] = static_cast<int>(best);
    }
    return out;
}

// ------------------------------------------------------------ gradients --

double psr_gradient(const QgclQuantumLayer &layer, const StateVector &input,
                    std::span<const int> labels, const std::vector<bool> &mask,
                    std::size_t tau, double shift) {
    if (tau >= layer.num_phases()) {
        throw std::out_of_range("phase index " + std::to_string(tau) +
                                " out of range");
    }
    const auto phi = adjacency_block(layer, input.amplitudes());
    const auto ex = expand_for_shift(layer);
    const auto e = read_out(layer, apply_all(phi, width_of(layer), ex.gates)).e;
    const auto g = loss_gradient(e, labels, mask);
    return shifted_contribution(layer, phi, ex, g, tau, shift);
}

std::vector<double> psr_gradients(const QgclQuantumLayer &layer,
                                  const StateVector &input, std::span<const int> labels,
                                  const std::vector<bool> &mask, double shift,
                                  std::size_t threads) {
    const auto phi = adjacency_block(layer, input.amplitudes());
    const auto ex = expand_for_shift(layer);
    const auto e = read_out(layer, apply_all(phi, width_of(layer), ex.gates)).e;
    const auto g = loss_gradient(e, labels, mask);
    std::vector<double> out(layer.num_phases(), 0.0);
    parallel_for(out.size(), threads, [&](std::size_t tau) {
        out[tau] = shifted_contribution(layer, phi, ex, g, tau, shift);
    });
    return out;
}

QuantumGradient analytic_gradient(const QgclQuantumLayer &layer,
                                  std::span<const Complex> input,
                                  std::span<const int> labels,
                                  const std::vector<bool> &mask) {
    const std::size_t width = width_of(layer);
    const auto phi = adjacency_block(layer, input);
    const auto q = layer.pqc_circuit();
    auto psi = apply_all(phi, width, q);
    const auto r = read_out(layer, psi);

    QuantumGradient out;
    out.expectations = r.e;
    out.loss = loss(r.e, labels, mask);
    out.success_probability = squared_norm(phi);
    const auto w = read_out_backward(layer, r, loss_gradient(r.e, labels, mask));

    std::vector<Complex> lambda(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        lambda[i] = w[i] * psi[i];
    }
    out.phases.assign(q.size(), 0.0);
    for (std::size_t k = q.size(); k-- > 0;) {
        const auto &g = q[k];
        const auto tbit = qubit_mask(g.targets()[0], width);
        std::uint64_t cmask = 0;
        for (const auto &c : g.controls()) {
            cmask |= qubit_mask(c.qubit, width);
        }
        // <lambda| P_controls (x) (-iY) |psi>
        double acc = 0.0;
        for (std::uint64_t i = 0; i < psi.size(); ++i) {
            if ((i & tbit) != 0 || (i & cmask) != cmask) {
                continue;
            }
            const std::uint64_t i1 = i | tbit;
            acc += (std::conj(lambda[i]) * (-psi[i1]) +
                    std::conj(lambda[i1]) * psi[i])
                       .real();
        }
        out.phases[k] = 2.0 * acc;
        apply_gate_adjoint_to(psi, width, g);
        apply_gate_adjoint_to(lambda, width, g);
    }

    std::vector<Complex> dphi(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        dphi[i] = Complex(2.0 * lambda[i].real(), 0.0);
    }
    const auto dmu = layer.adjacency.apply(dphi, layer.layout.dim_qubits, true);
    out.input.resize(dmu.size());
    for (std::size_t i = 0; i < dmu.size(); ++i) {
        out.input[i] = dmu[i].real();
    }
    return out;
}

std::vector<double> finite_difference_gradient(const QgclQuantumLayer &layer,
                                               const StateVector &input,
                                               std::span<const int> labels,
                                               const std::vector<bool> &mask,
                                               double step) {
    QgclQuantumLayer probe = layer;
    auto theta = layer.phases();
    std::vector<double> out(theta.size(), 0.0);
    for (std::size_t tau = 0; tau < theta.size(); ++tau) {
        const double keep = theta[tau];
        theta[tau] = keep + step;
        probe.set_phases(theta);
        const double up = loss(expectations(probe, input), labels, mask);
        theta[tau] = keep - step;
        probe.set_phases(theta);
        const double down = loss(expectations(probe, input), labels, mask);
        theta[tau] = keep;
        out[tau] = (up - down) / (2.0 * step);
    }
    return out;
}

bool gradients_agree(double a, double b, double rel, double abs_floor) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= std::max(rel * scale, abs_floor);
}

// ---------------------------------------------------------------- model --

NormalizedAdjacency perturb_adjacency(const NormalizedAdjacency &adj, double e_delta,
                                      std::uint64_t seed) {
    if (!(e_delta >= 0.0 && e_delta <= 1.0)) {
        throw std::invalid_argument("e_delta must lie in [0, 1]");
    }
    NormalizedAdjacency out = adj;
    if (e_delta == 0.0) {
        return out;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(adj.num_nodes);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (adj.matrix(i, j) == 0.0) {
                continue;
            }
            if (unit(rng) < e_delta) {
                const double delta = unit(rng) < 0.5 ? -e_delta : e_delta;
                out.matrix(i, j) += delta;
                out.matrix(j, i) += delta;
            }
        }
    }
    return out;
}

QgcnModel build_model(const GraphDataset &dataset, const ModelOptions &options) {
    dataset.validate();
    if (options.hidden_dim == 0) {
        throw std::invalid_argument("hidden dimension must be positive");
    }
    const auto adj = normalize_adjacency(dataset);
    const auto n = static_cast<Eigen::Index>(dataset.num_nodes);
    const Eigen::SparseMatrix<double> a_hat =
        adj.matrix.topLeftCorner(n, n).sparseView();

    QgcnModel model;
    model.hidden_dim = options.hidden_dim;
    model.propagated_features = a_hat * dataset.features;

    const std::size_t node_qubits = qubits_for(adj.padded_size());
    const std::size_t dim_qubits = qubits_for(options.hidden_dim);
    AdjacencyStage stage = AdjacencyStage::identity(node_qubits);
    if (options.backend != AdjacencyBackend::Identity) {
        const auto noisy = perturb_adjacency(adj, options.e_delta, options.noise_seed);
        if (options.backend == AdjacencyBackend::Operator) {
            stage = AdjacencyStage::from_matrix(noisy.matrix, options.drop_tol);
        } else {
            const auto decomp = pauli_decompose(noisy.matrix, options.drop_tol);
            stage = AdjacencyStage::circuit(
                assemble_lcu(decomp, RegisterLayout{0, node_qubits, dim_qubits}));
        }
    }
    model.quantum =
        make_quantum_layer(std::move(stage), dataset.num_nodes, dim_qubits,
                           dataset.num_classes(), options.num_blocks, options.readout);
    return model;
}

TrainState init_state(const QgcnModel &model, std::uint64_t seed,
                      double learning_rate) {
    TrainState s;
    s.seed = seed;
    s.learning_rate = learning_rate;
    s.classical_learning_rate =
        learning_rate * std::sqrt(static_cast<double>(model.quantum.num_nodes));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(-std::numbers::pi / 4.0,
                                                 std::numbers::pi / 4.0);
    s.theta.resize(model.quantum.num_phases());
    for (auto &t : s.theta) {
        t = phase(rng);
    }
    const auto d0 = model.propagated_features.cols();
    const auto h = static_cast<Eigen::Index>(model.hidden_dim);
    const double limit = std::sqrt(6.0 / static_cast<double>(d0 + h));
    std::uniform_real_distribution<double> glorot(-limit, limit);
    s.weight.resize(d0, h);
    for (Eigen::Index c = 0; c < h; ++c) {
        for (Eigen::Index r = 0; r < d0; ++r) {
            s.weight(r, c) = glorot(rng);
        }
    }
    return s;
}

ClassicalForward classical_forward(const QgcnModel &model, const TrainState &state) {
    ClassicalForward f;
    f.pre = model.propagated_features * state.weight;
    f.hidden = f.pre.cwiseMax(0.0);
    f.norm = f.hidden.norm();
    if (!(f.norm > 0.0)) {
        throw DivergenceError("every hidden activation is zero");
    }
    const auto &layer = model.quantum;
    const std::size_t d_pad = std::size_t{1} << layer.layout.dim_qubits;
    f.amplitudes.assign(layer.amplitude_count(), Complex(0.0, 0.0));
    for (Eigen::Index j = 0; j < f.hidden.rows(); ++j) {
        for (Eigen::Index c = 0; c < f.hidden.cols(); ++c) {
            f.amplitudes[static_cast<std::size_t>(j) * d_pad +
                         static_cast<std::size_t>(c)] = f.hidden(j, c) / f.norm;
        }
    }
    return f;
}

Eigen::MatrixXd model_expectations(QgcnModel &model, const TrainState &state) {
    model.quantum.set_phases(state.theta);
    const auto f = classical_forward(model, state);
    return expectations(model.quantum, StateVector::from_amplitudes(f.amplitudes));
}

ModelGradient model_gradient(QgcnModel &model, const GraphDataset &dataset,
                             const TrainState &state, std::size_t threads) {
    auto &layer = model.quantum;
    layer.set_phases(state.theta);
    const auto f = classical_forward(model, state);
    auto qg = analytic_gradient(layer, f.amplitudes, dataset.labels, dataset.train_mask);

    ModelGradient out;
    out.loss = qg.loss;
    if (state.grad_mode == GradMode::Psr) {
        out.theta = psr_gradients(layer, StateVector::from_amplitudes(f.amplitudes),
                                  dataset.labels, dataset.train_mask, state.psr_shift,
                                  threads);
    } else {
        out.theta = std::move(qg.phases);
    }

    const auto pred = predict(qg.expectations);
    out.metrics.epoch = state.epoch;
    out.metrics.loss = qg.loss;
    out.metrics.train_acc = accuracy(pred, dataset.labels, dataset.train_mask);
    out.metrics.test_acc = accuracy(pred, dataset.labels, dataset.test_mask);
    out.metrics.success_prob = qg.success_probability;

    out.weight = Eigen::MatrixXd::Zero(state.weight.rows(), state.weight.cols());
    if (state.freeze_classical) {
        return out;
    }
    const std::size_t d_pad = std::size_t{1} << layer.layout.dim_qubits;
    const auto rows = f.hidden.rows();
    const auto cols = f.hidden.cols();
    Eigen::MatrixXd g_mu(rows, cols);
    for (Eigen::Index j = 0; j < rows; ++j) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            g_mu(j, c) = qg.input[static_cast<std::size_t>(j) * d_pad +
                                  static_cast<std::size_t>(c)];
        }
    }
    const Eigen::MatrixXd mu = f.hidden / f.norm;
    const Eigen::MatrixXd g_hidden = (g_mu - mu * mu.cwiseProduct(g_mu).sum()) / f.norm;
    const Eigen::MatrixXd g_pre =
        g_hidden.cwiseProduct((f.pre.array() > 0.0).cast<double>().matrix());
    out.weight = model.propagated_features.transpose() * g_pre;
    return out;
}

EpochMetrics evaluate_model(QgcnModel &model, const GraphDataset &dataset,
                            const TrainState &state) {
    auto &layer = model.quantum;
    layer.set_phases(state.theta);
    const auto f = classical_forward(model, state);
    const auto phi = adjacency_block(layer, f.amplitudes);
    const auto psi = apply_all(phi, width_of(layer), layer.pqc_circuit());
    const auto e = read_out(layer, psi).e;
    EpochMetrics m;
    m.epoch = state.epoch;
    m.loss = loss(e, dataset.labels, dataset.train_mask);
    const auto pred = predict(e);
    m.train_acc = accuracy(pred, dataset.labels, dataset.train_mask);
    m.test_acc = accuracy(pred, dataset.labels, dataset.test_mask);
    m.success_prob = squared_norm(phi);
    return m;
}

std::pair<TrainState, EpochMetrics> train_epoch(QgcnModel &model,
                                                const GraphDataset &dataset,
                                                TrainState state, std::size_t threads) {
    const auto grad = model_gradient(model, dataset, state, threads);
    check_finite(state, grad.loss);
    for (std::size_t k = 0; k < state.theta.size(); ++k) {
        state.theta[k] -= state.learning_rate * grad.theta[k];
    }
    if (!state.freeze_classical) {
        state.weight -= state.classical_learning_rate * grad.weight;
    }
    ++state.epoch;
    auto metrics = evaluate_model(model, dataset, state);
    check_finite(state, metrics.loss);
    state.history.push_back(metrics);
    return {std::move(state), metrics};
}

} // namespace qgcn
