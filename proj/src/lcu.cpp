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
#include "qgcn/lcu.hpp"

#include <cmath>
#include <stdexcept>

namespace qgcn {

namespace {

std::vector<Control> basis_controls(std::size_t index, std::size_t a) {
    std::vector<Control> controls;
    controls.reserve(a);
    for (std::size_t q = 0; q < a; ++q) {
        controls.push_back({q, (index & qubit_mask(q, a)) != 0});
    }
    return controls;
}

// Z X Z X on `qubit`: -I.
void append_global_sign(Circuit &c, std::size_t qubit) {
    for (int rep = 0; rep < 2; ++rep) {
        c.push_back(GateOp::z(qubit));
        c.push_back(GateOp::x(qubit));
    }
}

} // namespace

std::size_t ancilla_count_for(std::size_t term_count) {
    if (term_count == 0) {
        throw std::invalid_argument("an LCU needs at least one term");
    }
    return qubits_for(term_count);
}

GateOp v_kappa(double kappa, std::size_t target) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("kappa must be positive and finite");
    }
    const double s = std::sqrt(kappa);
    const double c = 1.0 / std::sqrt(kappa + 1.0);
    Eigen::MatrixXcd m(2, 2);
    m << s * c, -c, c, s * c;
    return GateOp::unitary(m, {target});
}

Eigen::MatrixXd build_prep_operator(const Eigen::VectorXd &h,
                                    std::size_t ancilla_count) {
    const std::size_t dim = std::size_t{1} << ancilla_count;
    if (static_cast<std::size_t>(h.size()) > dim) {
        throw std::invalid_argument("too many weights for the ancilla count");
    }
    const double norm = h.norm();
    if (!(norm > 0.0)) {
        throw std::invalid_argument("weight vector must be nonzero");
    }
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    s.col(0).head(h.size()) = h / norm;
    Eigen::Index filled = 1;
    for (Eigen::Index e = 0; e < d && filled < d; ++e) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(d, e);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index c = 0; c < filled; ++c) {
                v -= s.col(c).dot(v) * s.col(c);
            }
        }
        const double vn = v.norm();
        if (vn > 1e-8) {
            s.col(filled++) = v / vn;
        }
    }
    if (filled != d) {
        throw std::logic_error("Gram-Schmidt completion failed");
    }
    return s;
}

Circuit LcuPlan::circuit() const {
    Circuit c;
    const std::size_t a = ancilla_count;
    std::vector<std::size_t> anc(a);
    for (std::size_t q = 0; q < a; ++q) {
        anc[q] = q;
    }
    if (a > 0) {
        c.push_back(GateOp::unitary(prep_matrix.cast<Complex>(), anc));
    }
    for (const auto &term : controlled_terms) {
        const auto controls = basis_controls(term.index, a);
        for (const auto &g : term.circuit) {
            c.push_back(g.shifted(layout.node_offset()).with_controls(controls));
        }
    }
    for (std::size_t q = 0; q < a; ++q) {
        c.push_back(GateOp::h(q));
    }
    return c;
}

LcuPlan assemble_lcu(const Decomposition &decomp, RegisterLayout layout) {
    const std::size_t m = decomp.terms.size();
    const std::size_t a = ancilla_count_for(m);
    if (layout.node_qubits != decomp.num_qubits) {
        throw std::invalid_argument(
            "decomposition width does not match the node register");
    }
    layout.ancilla_qubits = a;
    LcuPlan plan;
    plan.layout = layout;
    plan.ancilla_count = a;
    plan.weights = decomp.weights();
    plan.prep_matrix = build_prep_operator(plan.weights, a);
    plan.scale = plan.weights.norm() * std::sqrt(static_cast<double>(1ULL << a));
    for (std::size_t k = 0; k < m; ++k) {
        ControlledTerm t{k, decomp.terms[k].circuit};
        if (a == 0 && plan.weights[0] < 0.0) {
            if (decomp.num_qubits + layout.dim_qubits == 0) {
                throw std::invalid_argument("no qubit to carry the sign");
            }
            append_global_sign(t.circuit, 0);
        }
        plan.controlled_terms.push_back(std::move(t));
    }

    const std::size_t n = decomp.num_qubits;
    const std::size_t dim = std::size_t{1} << n;
    if (n <= 12) {
        std::vector<Complex> uniform(dim,
                                     Complex(1.0 / std::sqrt(double(dim)), 0.0));
        RegisterLayout node_only{a, n, 0};
        LcuPlan probe = plan;
        probe.layout = node_only;
        const auto out = lcu_block_apply(probe, uniform);
        double p = 0.0;
        for (const auto &v : out) {
            p += std::norm(v);
        }
        plan.success_probability_estimate = p;
    }
    return plan;
}

StateVector run_lcu(const LcuPlan &plan, const StateVector &state) {
    const std::size_t width = plan.layout.node_qubits + plan.layout.dim_qubits;
    if (state.num_qubits() != width) {
        throw std::invalid_argument("state does not span node and dim registers");
    }
    const auto c = plan.circuit();
    return apply_circuit(StateVector(plan.ancilla_count).tensor(state), c);
}

Postselection apply_lcu(const LcuPlan &plan, const StateVector &state) {
    const auto joint = run_lcu(plan, state);
    std::vector<std::size_t> anc(plan.ancilla_count);
    for (std::size_t q = 0; q < anc.size(); ++q) {
        anc[q] = q;
    }
    const std::vector<int> zeros(anc.size(), 0);
    return postselect(joint, anc, zeros);
}

double success_probability(const LcuPlan &plan, const StateVector &state) {
    const auto joint = run_lcu(plan, state);
    const std::size_t block = state.size();
    double p = 0.0;
    for (std::size_t i = 0; i < block; ++i) {
        p += std::norm(joint[i]);
    }
    return p;
}

std::vector<Complex> lcu_block_apply(const LcuPlan &plan,
                                     std::span<const Complex> amps,
                                     bool adjoint) {
    const std::size_t width = plan.layout.node_qubits + plan.layout.dim_qubits;
    const std::size_t block = std::size_t{1} << width;
    if (amps.size() != block) {
        throw std::invalid_argument("amplitudes do not span node and dim");
    }
    const std::size_t total = width + plan.ancilla_count;
    std::vector<Complex> work(std::size_t{1} << total, Complex(0.0, 0.0));
    std::copy(amps.begin(), amps.end(), work.begin());
    const auto c = plan.circuit();
    if (adjoint) {
        for (auto it = c.rbegin(); it != c.rend(); ++it) {
            apply_gate_adjoint_to(work, total, *it);
        }
    } else {
        for (const auto &g : c) {
            apply_gate_to(work, total, g);
        }
    }
    work.resize(block);
    return work;
}

Eigen::MatrixXcd postselected_operator(const LcuPlan &plan) {
    const std::size_t width = plan.layout.node_qubits + plan.layout.dim_qubits;
    const std::size_t block = std::size_t{1} << width;
    const auto b = static_cast<Eigen::Index>(block);
    Eigen::MatrixXcd op(b, b);
    std::vector<Complex> e(block, Complex(0.0, 0.0));
    for (std::size_t col = 0; col < block; ++col) {
        e.assign(block, Complex(0.0, 0.0));
        e[col] = 1.0;
        const auto out = lcu_block_apply(plan, e);
        for (std::size_t row = 0; row < block; ++row) {
            op(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
                out[row];
        }
    }
    return op;
}

} // namespace qgcn
