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
 * @file nsga2.hpp
 * NSGA-II search over decompositions, minimizing gate cost, negated LCU
 * success probability and residual norm.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qgcn/decompose.hpp"

namespace qgcn {

enum class GenomeMode { PauliSubset, PermutationSet };

/**
 * @brief Search individual.
 *
 * PauliSubset genomes keep `selection[i]` for candidate Pauli term i;
 * PermutationSet genomes hold signed permutations with their weights.
 */
struct Genome {
    GenomeMode mode = GenomeMode::PauliSubset;
    std::vector<bool> selection;
    std::vector<SignedPermutation> permutations;
    std::vector<double> weights;

    friend bool operator==(const Genome &, const Genome &) = default;
};

struct ObjectiveVector {
    double gate_cost = 0.0;
    double neg_success_prob = 0.0;
    double residual = 0.0;

    [[nodiscard]] double operator[](std::size_t i) const {
        return i == 0 ? gate_cost : (i == 1 ? neg_success_prob : residual);
    }
    static constexpr std::size_t size() { return 3; }

    friend bool operator==(const ObjectiveVector &,
                           const ObjectiveVector &) = default;
};

struct Individual {
    Genome genome;
    ObjectiveVector objectives;
    std::size_t rank = 0;
    double crowding = 0.0;
};

struct Population {
    std::vector<Individual> individuals;
    std::size_t generation = 0;
    std::uint64_t rng_seed = 0;
};

/**
 * @brief Fixed data shared by every genome of one search.
 *
 * Pauli candidates are the exact expansion's support ordered by decreasing
 * |h|; the greedy permutation expansion seeds permutation genomes.
 */
struct SearchProblem {
    Eigen::MatrixXd target;
    std::vector<UnitaryTerm> pauli_candidates;
    std::vector<UnitaryTerm> greedy_permutations;

    static SearchProblem for_target(const Eigen::MatrixXd &target);

    [[nodiscard]] Genome full_pauli_genome() const;
    [[nodiscard]] Genome greedy_permutation_genome() const;
};

/// Throws std::invalid_argument if the genome does not fit the problem.
Decomposition decode(const Genome &genome, const SearchProblem &problem);

/// LCU success probability of `decomp` on the uniform node state (0 if empty).
double uniform_success_probability(const Decomposition &decomp);

ObjectiveVector evaluate(const Genome &genome, const SearchProblem &problem);

/// a <= b everywhere and a < b somewhere.
bool dominates(const ObjectiveVector &a, const ObjectiveVector &b);

/// Pareto rank per entry; rank 0 is the non-dominated front.
std::vector<std::size_t> non_dominated_sort(std::span<const ObjectiveVector> objs);

/// Crowding distance within one front; boundary points get +infinity.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

struct SearchConfig {
    std::size_t population_size = 64;
    std::size_t generations = 100;
    double mutation_rate = 0.1;
    double crossover_rate = 0.9;
    std::size_t tournament_size = 2;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

struct SearchResult {
    /// Rank-0 decompositions sorted by residual, then gate cost.
    std::vector<Decomposition> front;
    std::vector<ObjectiveVector> front_objectives;
    Population population;
    /// Smallest residual in the population after each generation.
    std::vector<double> best_residual_history;
};

/// Deterministic for a given seed, independent of `threads`.
SearchResult search(const Eigen::MatrixXd &target, const SearchConfig &config);

} // namespace qgcn
