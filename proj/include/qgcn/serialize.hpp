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
 * @file serialize.hpp
 * JSON documents for decompositions, LCU plans, checkpoints and metrics.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "qgcn/decompose.hpp"
#include "qgcn/lcu.hpp"
#include "qgcn/nsga2.hpp"
#include "qgcn/qgcn.hpp"

namespace qgcn {

using Json = nlohmann::ordered_json;

Json gate_to_json(const GateOp &gate);
Json circuit_to_json(std::span<const GateOp> circuit);

/**
 * @brief {target_dim, terms, residual_norm} plus an `lcu` object
 * {ancilla_count, prep_first_column, scale, success_probability} when a plan
 * is given.
 */
Json decomposition_to_json(const Decomposition &decomp,
                           const LcuPlan *plan = nullptr);

/// Rebuilds the terms of a decomposition document against `target`.
Decomposition decomposition_from_json(const Json &doc,
                                      const Eigen::MatrixXd &target);

Json objectives_to_json(const ObjectiveVector &o);

Json metrics_to_json(const EpochMetrics &m);
EpochMetrics metrics_from_json(const Json &j);

/// {epoch, theta, W0 {rows, cols, data (row-major)}, lr, classical_lr, seed, metrics}.
Json checkpoint_to_json(const TrainState &state);
TrainState checkpoint_from_json(const Json &j);

/// Throws IoError when the file cannot be written.
void write_json(const std::filesystem::path &path, const Json &doc);

/// Throws IoError / ParseError.
Json read_json(const std::filesystem::path &path);

} // namespace qgcn
