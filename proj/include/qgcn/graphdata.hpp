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
 * @file graphdata.hpp
 * Graph datasets, the self-connected normalized adjacency and amplitude
 * encoding of node features.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qgcn/statevector.hpp"

namespace qgcn {

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// File was readable but its contents are malformed.
class ParseError : public IoError {
  public:
    using IoError::IoError;
};

using Edge = std::pair<std::size_t, std::size_t>;

/**
 * @brief Node-classification dataset on an undirected graph.
 *
 * Edges are stored once with first < second; self-connections are never
 * stored, normalization adds them.
 */
struct GraphDataset {
    std::size_t num_nodes = 0;
    std::vector<Edge> edges;
    Eigen::MatrixXd features;         ///< N x D
    std::vector<int> labels;          ///< class id per node, -1 if unknown
    std::vector<bool> train_mask;
    std::vector<bool> test_mask;
    std::vector<std::string> class_names;
    std::vector<std::string> node_ids; ///< identifiers from the source file

    [[nodiscard]] std::size_t feature_dim() const {
        return static_cast<std::size_t>(features.cols());
    }
    [[nodiscard]] std::size_t num_classes() const;
    [[nodiscard]] std::size_t count(const std::vector<bool> &mask) const;

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
};

/// Normalized adjacency zero-padded to a power-of-two dimension.
struct NormalizedAdjacency {
    Eigen::MatrixXd matrix;  ///< N_pad x N_pad, symmetric
    std::size_t num_nodes = 0;
    std::size_t pad_count = 0;

    [[nodiscard]] std::size_t padded_size() const {
        return static_cast<std::size_t>(matrix.rows());
    }
};

std::size_t next_power_of_two(std::size_t n);

/**
 * @brief Loads a Cora-layout dataset.
 *
 * `.content` lines are `id<TAB>f_1 ... f_D<TAB>label`; `.cites` lines are
 * `cited<TAB>citing`. Direction is dropped and duplicate or self citations
 * are ignored. Class ids follow the sorted label names. The first
 * `train_per_class` labeled nodes of each class in file order form the train
 * mask; every other labeled node is a test node.
 */
GraphDataset load_cora(const std::filesystem::path &content_path,
                       const std::filesystem::path &cites_path,
                       std::size_t train_per_class = 20);

/// Writes a dataset back out in the `.content` / `.cites` layout.
void save_cora(const GraphDataset &dataset,
               const std::filesystem::path &content_path,
               const std::filesystem::path &cites_path);

/// A + I as a dense N x N matrix (no padding).
Eigen::MatrixXd self_connected_adjacency(const GraphDataset &dataset);

/// D^{-1/2} A D^{-1/2} with D the row sums of `a`; rows must sum to > 0.
Eigen::MatrixXd symmetric_normalize(const Eigen::MatrixXd &a);

/**
 * @brief D^{-1/2}(A + I)D^{-1/2}, zero-padded to the next power of two.
 *
 * Padded (phantom) nodes carry a unit self-loop so the padded matrix keeps a
 * well-defined degree normalization.
 */
NormalizedAdjacency normalize_adjacency(const GraphDataset &dataset);

/// Pads `m` with zeros to `rows` x `cols`.
Eigen::MatrixXd zero_pad(const Eigen::MatrixXd &m, std::size_t rows,
                         std::size_t cols);

/**
 * @brief Amplitudes X / ||X||_F, node index major, dimension index minor.
 *
 * Both dimensions must be powers of two; an all-zero matrix is rejected.
 */
StateVector amplitude_encode(const Eigen::MatrixXd &features);

/// Tridiagonal band of ones: each frame sees itself and its neighbours.
Eigen::MatrixXd grid_adjacency_1d(std::size_t n);

/**
 * @brief N^2 x N^2 pixel adjacency, assembled block by block.
 *
 * Block row 0 and block row N-1 hold a single identity block on the
 * diagonal; every interior block row r holds V1, V2, V3 at block columns
 * r-1, r, r+1. Inside V1 and V3 the first and last rows are zero and interior
 * rows are the 1-1-1 band; V2 is the same band with ones at its two corner
 * diagonal entries. Interior pixels therefore see their full 3x3
 * neighbourhood while border pixels only see themselves, which makes the
 * matrix non-symmetric for N >= 3.
 */
Eigen::MatrixXd grid_adjacency_2d(std::size_t n);

/// Dataset whose adjacency with self-loops is `a_tilde` (symmetric 0/1).
GraphDataset dataset_from_adjacency(const Eigen::MatrixXd &a_tilde);

/**
 * @brief The 8-node worked example.
 *
 * The graph's self-connected adjacency is the sum of four signed
 * permutation matrices. Nodes are labeled by parity (two classes) with
 * two-dimensional noisy one-hot features; nodes 0-3 train, nodes 4-7 test.
 */
GraphDataset demo_graph8();

/// Self-connected adjacency of demo_graph8().
Eigen::MatrixXd demo_adjacency8();

/**
 * @brief Planted-partition graph with class-conditioned bag-of-words
 * features, a small stand-in for citation datasets.
 */
struct PlantedPartitionConfig {
    std::size_t num_nodes = 256;
    std::size_t num_classes = 4;
    std::size_t feature_dim = 64;
    double p_in = 0.06;
    double p_out = 0.006;
    double word_rate = 0.08;     ///< base probability of any word
    double topic_boost = 0.25;   ///< extra probability for class-topic words
    std::size_t train_per_class = 10;
    std::uint64_t seed = 1;
};
GraphDataset planted_partition(const PlantedPartitionConfig &config);

} // namespace qgcn
