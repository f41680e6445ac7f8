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
 * @file decompose.hpp
 * Unitary-sum decompositions A = sum_k h_k U_k + Delta of real matrices,
 * either over Pauli strings or over signed permutation matrices, together
 * with the gate sequences realizing each U_k.
 */
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qgcn/statevector.hpp"

namespace qgcn {

/// A Pauli string such as "XZI"; character q acts on qubit q.
struct PauliTerm {
    std::string axes;
    double coefficient = 0.0;
};

/**
 * @brief Matrix with exactly one +-1 in every row and column.
 *
 * Column x holds signs[x] in row mapping[x].
 */
struct SignedPermutation {
    std::vector<std::size_t> mapping;
    std::vector<int> signs;

    static SignedPermutation identity(std::size_t dim);

    [[nodiscard]] std::size_t dim() const { return mapping.size(); }
    [[nodiscard]] std::size_t num_qubits() const;
    [[nodiscard]] Eigen::MatrixXd matrix() const;

    /// Throws std::invalid_argument unless mapping is a bijection on a
    /// power-of-two range and all signs are +-1.
    void validate() const;

    friend bool operator==(const SignedPermutation &,
                           const SignedPermutation &) = default;
};

/// One weighted unitary of a decomposition and the gates that realize it.
struct UnitaryTerm {
    double weight = 0.0;
    std::variant<std::string, SignedPermutation> form; ///< Pauli axes or permutation
    Circuit circuit;

    [[nodiscard]] bool is_pauli() const {
        return std::holds_alternative<std::string>(form);
    }
    [[nodiscard]] Eigen::MatrixXcd dense() const;
};

/**
 * @brief target = sum_k weight_k U_k + residual.
 */
struct Decomposition {
    std::size_t num_qubits = 0;
    std::vector<UnitaryTerm> terms;
    Eigen::MatrixXd target;
    Eigen::MatrixXd residual;
    double residual_norm = 0.0;

    /// sum_k weight_k U_k (real part; every supported term set is real).
    [[nodiscard]] Eigen::MatrixXd reassemble() const;
    [[nodiscard]] Eigen::VectorXd weights() const;
    [[nodiscard]] std::size_t gate_cost() const;
};

/// Dense Kronecker product of a Pauli string.
Eigen::MatrixXcd pauli_matrix(const std::string &axes);

/// One uncontrolled X/Y/Z gate per non-identity axis.
Circuit pauli_circuit(const std::string &axes);

/**
 * @brief All nonzero Pauli coefficients h_P = trace(P A) / 2^n.
 *
 * Uses a Walsh-Hadamard transform per X-pattern, O(n 4^n). `a` must be real
 * symmetric with power-of-two size; strings with an odd number of Y axes
 * have zero coefficient and never appear. Terms are ordered by
 * (X-pattern, Z-pattern).
 */
std::vector<PauliTerm> pauli_coefficients(const Eigen::MatrixXd &a);

/// Inverse of pauli_coefficients: sum_P h_P P as a dense real matrix.
Eigen::MatrixXd pauli_reassemble(std::span<const PauliTerm> terms,
                                 std::size_t num_qubits);

/// Pauli expansion kept after truncation, without materializing the terms.
struct PauliTruncation {
    Eigen::MatrixXd kept;         ///< sum of the kept terms
    std::size_t term_count = 0;   ///< number of kept strings
    std::size_t dropped_count = 0;
    double weight_norm = 0.0;     ///< ||h||_2 over kept strings
    double residual_norm = 0.0;   ///< ||target - kept||_F
};

/**
 * @brief Same split as pauli_decompose, for matrices too large to hold one
 * UnitaryTerm per string.
 */
PauliTruncation pauli_truncate(const Eigen::MatrixXd &a, double drop_tol = 0.0);

/**
 * @brief Pauli expansion with terms |h| <= drop_tol moved into the residual.
 *
 * With drop_tol = 0 every nonzero coefficient is kept and the residual is
 * exactly zero.
 */
Decomposition pauli_decompose(const Eigen::MatrixXd &a, double drop_tol = 0.0);

/**
 * @brief Row -> column assignment of maximum total weight.
 *
 * Among optimal assignments returns the lexicographically smallest one
 * (row 0's column first). Hungarian algorithm per candidate; intended for
 * the small matrices the permutation route targets.
 */
std::vector<std::size_t> lex_max_weight_assignment(const Eigen::MatrixXd &w);

/**
 * @brief Greedy signed-permutation expansion.
 *
 * Each round picks lex_max_weight_assignment(|R|) on the current residual R,
 * takes h = the smallest nonzero magnitude among the picked entries, gives
 * each picked entry the sign of R there (+1 where R is zero), and subtracts
 * h times that signed permutation. Stops after `max_terms` rounds or when
 * max|R| <= tol. All weights are positive.
 */
Decomposition permutation_decompose(const Eigen::MatrixXd &a,
                                    std::size_t max_terms = 64,
                                    double tol = 1e-12);

/**
 * @brief Multi-controlled X / Z gates realizing a signed permutation.
 *
 * Signs come first as a diagonal: the sign pattern's algebraic normal form
 * gives one multi-controlled Z per monomial. The bijection follows as a
 * product of basis-state transpositions, each walked along a Gray-code path
 * of fully controlled X gates.
 */
Circuit synthesize_permutation_circuit(const SignedPermutation &perm);

/// Sum over gates of 2c + 1, c being the gate's control count.
std::size_t gate_complexity(std::span<const GateOp> circuit);

/// Frobenius norm.
double residual_norm(const Eigen::MatrixXd &delta);

/// Builds the decomposition of `target` by `terms`, computing the residual.
Decomposition make_decomposition(const Eigen::MatrixXd &target,
                                 std::vector<UnitaryTerm> terms);

/// Weighted term with its synthesized circuit.
UnitaryTerm pauli_term(const std::string &axes, double weight);
UnitaryTerm permutation_term(SignedPermutation perm, double weight);

} // namespace qgcn
