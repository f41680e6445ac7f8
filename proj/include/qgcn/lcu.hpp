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
 * @file lcu.hpp
 * Linear combination of unitaries: prepare the ancilla with S, fan out the
 * terms controlled on ancilla basis states, recombine with Hadamards and
 * post-select the ancilla on |0...0>.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qgcn/decompose.hpp"
#include "qgcn/statevector.hpp"

namespace qgcn {

/// Term circuit (node-register local indices) selected by ancilla |index>.
struct ControlledTerm {
    std::size_t index = 0;
    Circuit circuit;
};

/**
 * @brief Everything needed to run sum_k h_k U_k on the node register.
 *
 * After post-selection the node register carries
 * (sum_k h_k U_k) / scale applied to the input, with
 * scale = ||h||_2 * sqrt(2^a).
 */
struct LcuPlan {
    RegisterLayout layout;
    std::size_t ancilla_count = 0;
    Eigen::MatrixXd prep_matrix;
    std::vector<ControlledTerm> controlled_terms;
    Eigen::VectorXd weights;
    double scale = 1.0;
    double success_probability_estimate = 0.0; ///< on the uniform node state

    /// Full gate list over layout.total() qubits.
    [[nodiscard]] Circuit circuit() const;

    /// First column of prep_matrix.
    [[nodiscard]] Eigen::VectorXd prep_first_column() const {
        return prep_matrix.col(0);
    }
};

/// Ancillas needed to index `term_count` terms: ceil(log2 M).
std::size_t ancilla_count_for(std::size_t term_count);

/// [[sqrt(k), -1], [1, sqrt(k)]] / sqrt(k + 1) on qubit `target`.
GateOp v_kappa(double kappa, std::size_t target = 0);

/**
 * @brief Real orthogonal 2^a x 2^a matrix with first column h / ||h||.
 *
 * The other columns come from Gram-Schmidt over the standard basis.
 */
Eigen::MatrixXd build_prep_operator(const Eigen::VectorXd &h,
                                    std::size_t ancilla_count);

/**
 * @brief Builds the LCU for `decomp` on `layout`.
 *
 * layout.node_qubits must equal decomp.num_qubits; layout.ancilla_qubits is
 * overwritten with ceil(log2 M). A single negative-weight term is realized
 * with a global sign on its circuit.
 */
LcuPlan assemble_lcu(const Decomposition &decomp, RegisterLayout layout);

/// Runs the plan on |0>_anc (x) `state`; `state` spans node (x) dim.
StateVector run_lcu(const LcuPlan &plan, const StateVector &state);

/// Post-selected output on node (x) dim, with its success probability.
Postselection apply_lcu(const LcuPlan &plan, const StateVector &state);

/// Probability of reading ancilla |0...0> after run_lcu.
double success_probability(const LcuPlan &plan, const StateVector &state);

/**
 * @brief <0_anc| LCU |0_anc> on node (x) dim, built by simulating every
 * basis input (no renormalization).
 */
Eigen::MatrixXcd postselected_operator(const LcuPlan &plan);

/**
 * @brief Ancilla-0 block of the LCU applied to unnormalized amplitudes.
 *
 * `amps` spans node (x) dim. With `adjoint` the conjugate-transposed block
 * is applied instead.
 */
std::vector<Complex> lcu_block_apply(const LcuPlan &plan,
                                     std::span<const Complex> amps,
                                     bool adjoint = false);

} // namespace qgcn
