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
 * @file cli.hpp
 * Command-line front end: dataset resolution, the gradient check and the
 * `qgcn` subcommand dispatcher.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgcn/graphdata.hpp"
#include "qgcn/qgcn.hpp"

namespace qgcn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/**
 * @brief Resolves a dataset name.
 *
 * Accepted forms: `demo`, `planted`, `cora-proxy`, `cora:<dir>` (reads
 * `<dir>/cora.content` and `<dir>/cora.cites`) and `<prefix>` (reads
 * `<prefix>.content` and `<prefix>.cites`). `seed` drives the generators.
 */
GraphDataset load_dataset(const std::string &spec, std::uint64_t seed,
                          std::size_t train_per_class = 20);

/// Size of a generated matrix source such as `grid2d:4`.
struct MatrixSource {
    Eigen::MatrixXd matrix;
    std::string description;
};

/**
 * @brief Matrix to decompose.
 *
 * `grid1d:<n>` and `grid2d:<n>` give the grid adjacencies; anything else is
 * a dataset spec whose self-connected (`normalized == false`) or normalized
 * adjacency is used. The result is zero-padded to a power of two.
 */
MatrixSource load_matrix(const std::string &spec, bool normalized,
                         std::uint64_t seed);

struct GradcheckConfig {
    std::string dataset = "demo";
    std::size_t blocks = 2;
    std::size_t hidden = 2;
    std::size_t samples = 50;
    Readout readout = Readout::NodeConditional;
    AdjacencyBackend backend = AdjacencyBackend::Operator;
    bool zero_phase = false;
    double psr_shift = kPsrShift;
    double fd_step = 1e-5;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

struct GradcheckEntry {
    std::size_t sample = 0;
    std::size_t phase = 0;
    double psr = 0.0;
    double analytic = 0.0;
    double finite_difference = 0.0;
    double relative_error = 0.0;
};

struct GradcheckReport {
    std::size_t samples = 0;
    std::size_t comparisons = 0;
    GradcheckEntry worst;
    [[nodiscard]] bool passed(double tolerance = 1e-6) const {
        return comparisons > 0 && worst.relative_error < tolerance;
    }
};

/// |a - b| / max(|a|, |b|, 1e-3).
double relative_error(double a, double b);

/**
 * @brief Compares PSR, analytic and central-difference phase gradients.
 *
 * Each sample draws fresh phases in [-pi, pi] (zero when `zero_phase`) and a
 * fresh W0. Throws std::invalid_argument when node and dimension registers
 * exceed six qubits.
 */
GradcheckReport run_gradcheck(const GradcheckConfig &config);

/// Runs the `qgcn` command line; returns the process exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace qgcn::cli
