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
 * @file qgcn.hpp
 * Hybrid graph convolutional network: a classical first layer
 * ReLU(A_hat X W0) followed by a quantum layer that applies the adjacency
 * through an LCU and a trainable Ry circuit to the dimension register.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qgcn/decompose.hpp"
#include "qgcn/graphdata.hpp"
#include "qgcn/lcu.hpp"
#include "qgcn/statevector.hpp"

namespace qgcn {

/// Exact shift for Ry(theta) = exp(-i theta Y).
inline constexpr double kPsrShift = std::numbers::pi / 4.0;

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief How the class scores E_j are read from the output probabilities.
 *
 * All modes start from P(ancilla = 0, node = j, dim = d), trace out the
 * discarded dimension qubits and keep slots iota < output_dim.
 *  - Joint: those probabilities as they are.
 *  - Postselected: divided by the ancilla success probability.
 *  - NodeConditional: divided by P(ancilla = 0, node = j).
 */
enum class Readout { Joint, Postselected, NodeConditional };

enum class GradMode { Analytic, Psr };

/// One Ry per qubit followed by a ring of controlled-Ry gates.
struct PqcBlock {
    std::size_t num_qubits = 0;
    std::vector<double> phases;

    /// 2q phases, or 1 for a single qubit.
    static std::size_t phase_count(std::size_t num_qubits);
};

/// Gates of one block on qubits 0..q-1. Throws on a phase count mismatch.
Circuit pqc_block_circuit(const PqcBlock &block);

/**
 * @brief The adjacency stage of a quantum layer.
 *
 * Maps node (x) dim amplitudes to the ancilla-0 block of the LCU output,
 * i.e. (sum_k h_k U_k (x) I) amps / scale. The circuit backend simulates the
 * full LCU gate by gate; the operator backend multiplies by the weighted sum
 * directly and keeps only the LCU bookkeeping (ancilla count, ||h||).
 */
class AdjacencyStage {
  public:
    /// Gate-level backend. The plan's dim register width is fixed.
    static AdjacencyStage circuit(LcuPlan plan);

    /// Operator backend for sum_k h_k U_k given explicitly.
    static AdjacencyStage from_operator(Eigen::SparseMatrix<double> weighted_sum,
                                        double weight_norm,
                                        std::size_t ancilla_count);

    /// Operator backend for the Pauli expansion of `a` truncated at drop_tol.
    static AdjacencyStage from_matrix(const Eigen::MatrixXd &a,
                                      double drop_tol = 0.0);

    /// No adjacency: identity on `node_qubits`, scale 1, no ancilla.
    static AdjacencyStage identity(std::size_t node_qubits);

    [[nodiscard]] bool is_circuit() const { return plan_.has_value(); }
    [[nodiscard]] std::size_t node_qubits() const { return node_qubits_; }
    [[nodiscard]] std::size_t ancilla_count() const { return ancilla_count_; }
    [[nodiscard]] double scale() const { return scale_; }
    [[nodiscard]] double residual_norm() const { return residual_norm_; }
    [[nodiscard]] std::size_t term_count() const { return term_count_; }
    [[nodiscard]] const std::optional<LcuPlan> &plan() const { return plan_; }

    /// Applies the stage (or its transpose) to node (x) dim amplitudes.
    [[nodiscard]] std::vector<Complex> apply(std::span<const Complex> amps,
                                             std::size_t dim_qubits,
                                             bool transpose = false) const;

  private:
    std::optional<LcuPlan> plan_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> op_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> op_t_;
    std::size_t node_qubits_ = 0;
    std::size_t ancilla_count_ = 0;
    std::size_t term_count_ = 0;
    double scale_ = 1.0;
    double residual_norm_ = 0.0;
};

/**
 * @brief Second layer: adjacency stage, then the PQC blocks on the
 * dimension register, then the readout.
 */
struct QgclQuantumLayer {
    AdjacencyStage adjacency;
    std::vector<PqcBlock> blocks;
    RegisterLayout layout;
    std::size_t num_nodes = 0;   ///< real (unpadded) nodes
    std::size_t output_dim = 0;  ///< D^(1), number of class slots read
    Readout readout = Readout::NodeConditional;

    [[nodiscard]] std::size_t num_phases() const;
    [[nodiscard]] std::vector<double> phases() const;
    void set_phases(std::span<const double> theta);

    /// Q on the node (x) dim register.
    [[nodiscard]] Circuit pqc_circuit() const;

    /// Leading dimension qubits that are read; the rest are traced out.
    [[nodiscard]] std::size_t kept_qubits() const;
    [[nodiscard]] std::size_t amplitude_count() const {
        return std::size_t{1} << (layout.node_qubits + layout.dim_qubits);
    }
};

/**
 * @brief Layer with `num_blocks` zero-phase blocks.
 *
 * layout.ancilla_qubits is taken from the adjacency stage.
 */
QgclQuantumLayer make_quantum_layer(AdjacencyStage adjacency,
                                    std::size_t num_nodes, std::size_t dim_qubits,
                                    std::size_t output_dim, std::size_t num_blocks,
                                    Readout readout = Readout::NodeConditional);

struct QgclOutput {
    StateVector conditional;          ///< renormalized output on node (x) dim
    std::vector<Complex> joint_block; ///< ancilla-0 amplitudes, unnormalized
    double success_probability = 0.0;
};

/// Throws ZeroProbabilityError when the ancilla-0 outcome is impossible.
QgclOutput qgcl_forward(const QgclQuantumLayer &layer, const StateVector &input);

/// num_nodes x output_dim class scores under layer.readout.
Eigen::MatrixXd expectations(const QgclQuantumLayer &layer,
                             const StateVector &input);

/// Mean cross-entropy of softmax(E_j) over masked rows.
double loss(const Eigen::MatrixXd &e, std::span<const int> labels,
            const std::vector<bool> &mask);

/// dL/dE = (softmax(E_j) - onehot(y_j)) / |mask| on masked rows.
Eigen::MatrixXd loss_gradient(const Eigen::MatrixXd &e,
                              std::span<const int> labels,
                              const std::vector<bool> &mask);

/// Row-wise argmax, ties to the lowest index.
std::vector<int> predict(const Eigen::MatrixXd &e);

/**
 * @brief dL/dtheta_tau by the parameter-shift rule.
 *
 * Controlled-Ry gates are rewritten as Ry(theta/2), CX, Ry(-theta/2), CX
 * and every plain Ry is shifted by +-shift.
 */
double psr_gradient(const QgclQuantumLayer &layer, const StateVector &input,
                    std::span<const int> labels, const std::vector<bool> &mask,
                    std::size_t tau, double shift = kPsrShift);

/// psr_gradient for every phase, evaluated on `threads` workers.
std::vector<double> psr_gradients(const QgclQuantumLayer &layer,
                                  const StateVector &input,
                                  std::span<const int> labels,
                                  const std::vector<bool> &mask,
                                  double shift = kPsrShift,
                                  std::size_t threads = 1);

struct QuantumGradient {
    double loss = 0.0;
    Eigen::MatrixXd expectations;
    double success_probability = 0.0;
    std::vector<double> phases;     ///< dL/dtheta
    std::vector<double> input;      ///< dL/d(real input amplitude)
};

/// Exact gradients by one adjoint sweep through Q.
QuantumGradient analytic_gradient(const QgclQuantumLayer &layer,
                                  std::span<const Complex> input,
                                  std::span<const int> labels,
                                  const std::vector<bool> &mask);

/// Central differences of the loss in every phase.
std::vector<double> finite_difference_gradient(const QgclQuantumLayer &layer,
                                               const StateVector &input,
                                               std::span<const int> labels,
                                               const std::vector<bool> &mask,
                                               double step = 1e-5);

/// True when |a - b| <= max(rel * max(|a|, |b|), abs_floor).
bool gradients_agree(double a, double b, double rel = 1e-6,
                     double abs_floor = 1e-9);

// ------------------------------------------------------------- model --

enum class AdjacencyBackend { Operator, Circuit, Identity };

struct ModelOptions {
    std::size_t hidden_dim = 16;
    std::size_t num_blocks = 10;
    Readout readout = Readout::NodeConditional;
    AdjacencyBackend backend = AdjacencyBackend::Operator;
    double drop_tol = 0.0;
    double e_delta = 0.0;           ///< noise on the quantum-layer adjacency
    std::uint64_t noise_seed = 0;
};

/**
 * @brief Model structure; trainable values live in TrainState.
 *
 * The classical layer uses the unperturbed A_hat; A_hat X is cached.
 */
struct QgcnModel {
    Eigen::MatrixXd propagated_features; ///< A_hat X, N x D0
    QgclQuantumLayer quantum;
    std::size_t hidden_dim = 0;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double success_prob = 0.0;
};

struct TrainState {
    std::vector<double> theta;
    Eigen::MatrixXd weight;     ///< W0, D0 x hidden
    double learning_rate = 0.2;           ///< step size for theta
    double classical_learning_rate = 0.2;  ///< step size for W0
    std::size_t epoch = 0;
    std::uint64_t seed = 0;
    bool freeze_classical = false;
    GradMode grad_mode = GradMode::Analytic;
    double psr_shift = kPsrShift;
    std::vector<EpochMetrics> history;
};

/// e_delta must lie in [0, 1]; e_delta = 0 returns `adj` unchanged.
NormalizedAdjacency perturb_adjacency(const NormalizedAdjacency &adj,
                                      double e_delta, std::uint64_t seed);

QgcnModel build_model(const GraphDataset &dataset, const ModelOptions &options);

/**
 * @brief Phases uniform in [-pi/4, pi/4], W0 Glorot-uniform.
 *
 * The W0 step size defaults to learning_rate * sqrt(N): input amplitudes
 * scale as 1/sqrt(N), and so do the gradients reaching W0.
 */
TrainState init_state(const QgcnModel &model, std::uint64_t seed,
                      double learning_rate);

/// Quantum-layer input amplitudes for the state's W0.
struct ClassicalForward {
    Eigen::MatrixXd pre;     ///< A_hat X W0
    Eigen::MatrixXd hidden;  ///< ReLU(pre)
    double norm = 0.0;       ///< ||hidden||_F
    std::vector<Complex> amplitudes;
};
ClassicalForward classical_forward(const QgcnModel &model, const TrainState &state);

/// Expectations of the full model.
Eigen::MatrixXd model_expectations(QgcnModel &model, const TrainState &state);

struct ModelGradient {
    double loss = 0.0;
    std::vector<double> theta;
    Eigen::MatrixXd weight;
    EpochMetrics metrics;
};

/// Loss, metrics and gradients at the current parameters.
ModelGradient model_gradient(QgcnModel &model, const GraphDataset &dataset,
                             const TrainState &state, std::size_t threads = 1);

/// Metrics at the current parameters.
EpochMetrics evaluate_model(QgcnModel &model, const GraphDataset &dataset,
                            const TrainState &state);

/**
 * @brief One full-batch gradient step.
 *
 * Returns the updated state and the metrics after the step. Throws
 * DivergenceError if the loss or any parameter is not finite.
 */
std::pair<TrainState, EpochMetrics> train_epoch(QgcnModel &model,
                                                const GraphDataset &dataset,
                                                TrainState state,
                                                std::size_t threads = 1);

} // namespace qgcn
