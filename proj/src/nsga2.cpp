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
#include "qgcn/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qgcn/lcu.hpp"
#include "qgcn/parallel.hpp"

namespace qgcn {

namespace {

using Rng = std::mt19937_64;

std::size_t uniform_index(Rng &rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool coin(Rng &rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// Least-squares weights of `perms` against `target`.
std::vector<double> fit_weights(const std::vector<SignedPermutation> &perms,
                                const Eigen::MatrixXd &target) {
    if (perms.empty()) {
        return {};
    }
    const Eigen::Index cells = target.size();
    Eigen::MatrixXd basis(cells, static_cast<Eigen::Index>(perms.size()));
    for (std::size_t k = 0; k < perms.size(); ++k) {
        const Eigen::MatrixXd m = perms[k].matrix();
        basis.col(static_cast<Eigen::Index>(k)) =
            Eigen::Map<const Eigen::VectorXd>(m.data(), cells);
    }
    const Eigen::VectorXd rhs =
        Eigen::Map<const Eigen::VectorXd>(target.data(), cells);
    const Eigen::VectorXd w = basis.colPivHouseholderQr().solve(rhs);
    return {w.data(), w.data() + w.size()};
}

SignedPermutation random_permutation(Rng &rng, std::size_t dim) {
    auto p = SignedPermutation::identity(dim);
    for (std::size_t i = dim; i > 1; --i) {
        std::swap(p.mapping[i - 1], p.mapping[uniform_index(rng, i)]);
    }
    return p;
}

void mutate(Genome &g, const SearchProblem &problem, double rate, Rng &rng) {
    if (g.mode == GenomeMode::PauliSubset) {
        for (std::size_t i = 0; i < g.selection.size(); ++i) {
            if (coin(rng, rate)) {
                g.selection[i] = !g.selection[i];
            }
        }
        return;
    }
    const auto dim = static_cast<std::size_t>(problem.target.rows());
    for (auto &p : g.permutations) {
        if (dim > 1 && coin(rng, rate)) {
            const std::size_t a = uniform_index(rng, dim);
            const std::size_t b = uniform_index(rng, dim);
            std::swap(p.mapping[a], p.mapping[b]);
            std::swap(p.signs[a], p.signs[b]);
        }
        if (coin(rng, rate)) {
            auto &s = p.signs[uniform_index(rng, dim)];
            s = -s;
        }
    }
    if (g.permutations.size() > 1 && coin(rng, rate)) {
        g.permutations.erase(g.permutations.begin() +
                             static_cast<std::ptrdiff_t>(
                                 uniform_index(rng, g.permutations.size())));
    }
    if (coin(rng, rate)) {
        const auto &pool = problem.greedy_permutations;
        if (!pool.empty() && coin(rng, 0.5)) {
            g.permutations.push_back(std::get<SignedPermutation>(
                pool[uniform_index(rng, pool.size())].form));
        } else {
            g.permutations.push_back(random_permutation(rng, dim));
        }
    }
    g.weights = fit_weights(g.permutations, problem.target);
}

std::pair<Genome, Genome> crossover(const Genome &a, const Genome &b,
                                    const SearchProblem &problem, Rng &rng) {
    Genome c1 = a;
    Genome c2 = b;
    if (a.mode == GenomeMode::PauliSubset) {
        const std::size_t len = a.selection.size();
        if (len < 2) {
            return {c1, c2};
        }
        const std::size_t cut = 1 + uniform_index(rng, len - 1);
        for (std::size_t i = cut; i < len; ++i) {
            c1.selection[i] = b.selection[i];
            c2.selection[i] = a.selection[i];
        }
        return {c1, c2};
    }
    const std::size_t ca = uniform_index(rng, a.permutations.size() + 1);
    const std::size_t cb = uniform_index(rng, b.permutations.size() + 1);
    c1.permutations.assign(a.permutations.begin(),
                           a.permutations.begin() + static_cast<std::ptrdiff_t>(ca));
    c1.permutations.insert(c1.permutations.end(),
                           b.permutations.begin() + static_cast<std::ptrdiff_t>(cb),
                           b.permutations.end());
    c2.permutations.assign(b.permutations.begin(),
                           b.permutations.begin() + static_cast<std::ptrdiff_t>(cb));
    c2.permutations.insert(c2.permutations.end(),
                           a.permutations.begin() + static_cast<std::ptrdiff_t>(ca),
                           a.permutations.end());
    c1.weights = fit_weights(c1.permutations, problem.target);
    c2.weights = fit_weights(c2.permutations, problem.target);
    return {c1, c2};
}

bool better(const Individual &a, const Individual &b) {
    if (a.rank != b.rank) {
        return a.rank < b.rank;
    }
    return a.crowding > b.crowding;
}

// Assigns rank and crowding to every member of `pool`.
void rank_and_crowd(std::vector<Individual> &pool) {
    std::vector<ObjectiveVector> objs;
    objs.reserve(pool.size());
    for (const auto &ind : pool) {
        objs.push_back(ind.objectives);
    }
    const auto ranks = non_dominated_sort(objs);
    const std::size_t max_rank = *std::max_element(ranks.begin(), ranks.end());
    for (std::size_t r = 0; r <= max_rank; ++r) {
        std::vector<std::size_t> members;
        std::vector<ObjectiveVector> front;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (ranks[i] == r) {
                members.push_back(i);
                front.push_back(objs[i]);
            }
        }
        const auto crowd = crowding_distance(front);
        for (std::size_t k = 0; k < members.size(); ++k) {
            pool[members[k]].rank = r;
            pool[members[k]].crowding = crowd[k];
        }
    }
}

void evaluate_all(std::vector<Individual> &inds, const SearchProblem &problem,
                  std::size_t threads) {
    parallel_for(inds.size(), threads, [&](std::size_t i) {
        inds[i].objectives = evaluate(inds[i].genome, problem);
    });
}

double best_residual(const std::vector<Individual> &inds) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto &ind : inds) {
        best = std::min(best, ind.objectives.residual);
    }
    return best;
}

} // namespace

SearchProblem SearchProblem::for_target(const Eigen::MatrixXd &target) {
    SearchProblem p;
    p.target = target;
    auto coeffs = pauli_coefficients(target);
    std::stable_sort(coeffs.begin(), coeffs.end(),
                     [](const PauliTerm &a, const PauliTerm &b) {
                         return std::abs(a.coefficient) > std::abs(b.coefficient);
                     });
    for (const auto &c : coeffs) {
        p.pauli_candidates.push_back(pauli_term(c.axes, c.coefficient));
    }
    p.greedy_permutations = permutation_decompose(target).terms;
    return p;
}

Genome SearchProblem::full_pauli_genome() const {
    Genome g;
    g.mode = GenomeMode::PauliSubset;
    g.selection.assign(pauli_candidates.size(), true);
    return g;
}

Genome SearchProblem::greedy_permutation_genome() const {
    Genome g;
    g.mode = GenomeMode::PermutationSet;
    for (const auto &t : greedy_permutations) {
        g.permutations.push_back(std::get<SignedPermutation>(t.form));
        g.weights.push_back(t.weight);
    }
    return g;
}

Decomposition decode(const Genome &genome, const SearchProblem &problem) {
    std::vector<UnitaryTerm> terms;
    if (genome.mode == GenomeMode::PauliSubset) {
        if (genome.selection.size() != problem.pauli_candidates.size()) {
            throw std::invalid_argument("selection mask has the wrong length");
        }
        for (std::size_t i = 0; i < genome.selection.size(); ++i) {
            if (genome.selection[i]) {
                terms.push_back(problem.pauli_candidates[i]);
            }
        }
    } else {
        if (genome.weights.size() != genome.permutations.size()) {
            throw std::invalid_argument("one weight per permutation is required");
        }
        for (std::size_t k = 0; k < genome.permutations.size(); ++k) {
            if (genome.permutations[k].dim() !=
                static_cast<std::size_t>(problem.target.rows())) {
                throw std::invalid_argument("permutation size mismatch");
            }
            terms.push_back(
                permutation_term(genome.permutations[k], genome.weights[k]));
        }
    }
    return make_decomposition(problem.target, std::move(terms));
}

double uniform_success_probability(const Decomposition &decomp) {
    if (decomp.terms.empty()) {
        return 0.0;
    }
    const double hn = decomp.weights().norm();
    if (!(hn > 0.0)) {
        return 0.0;
    }
    const auto dim = decomp.target.rows();
    const Eigen::VectorXd u =
        Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    const Eigen::VectorXd out = decomp.reassemble() * u;
    const double a_dim =
        static_cast<double>(std::size_t{1} << ancilla_count_for(decomp.terms.size()));
    return out.squaredNorm() / (hn * hn * a_dim);
}

ObjectiveVector evaluate(const Genome &genome, const SearchProblem &problem) {
    const auto d = decode(genome, problem);
    ObjectiveVector o;
    o.gate_cost = static_cast<double>(d.gate_cost());
    o.neg_success_prob = -uniform_success_probability(d);
    o.residual = d.residual_norm;
    return o;
}

bool dominates(const ObjectiveVector &a, const ObjectiveVector &b) {
    bool strict = false;
    for (std::size_t i = 0; i < ObjectiveVector::size(); ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        strict = strict || a[i] < b[i];
    }
    return strict;
}

std::vector<std::size_t> non_dominated_sort(std::span<const ObjectiveVector> objs) {
    const std::size_t n = objs.size();
    if (n == 0) {
        throw std::invalid_argument("cannot sort an empty population");
    }
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && dominates(objs[i], objs[j])) {
                dominated[i].push_back(j);
                ++count[j];
            }
        }
    }
    std::vector<std::size_t> rank(n, 0);
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (count[i] == 0) {
            current.push_back(i);
        }
    }
    for (std::size_t r = 0; !current.empty(); ++r) {
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            rank[i] = r;
            for (std::size_t j : dominated[i]) {
                if (--count[j] == 0) {
                    next.push_back(j);
                }
            }
        }
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return rank;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
    const std::size_t n = front.size();
    if (n == 0) {
        throw std::invalid_argument("cannot crowd an empty front");
    }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < ObjectiveVector::size(); ++m) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return front[a][m] < front[b][m];
                         });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        const double span = front[order.back()][m] - front[order.front()][m];
        if (!(span > 0.0)) {
            continue;
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            dist[order[k]] +=
                (front[order[k + 1]][m] - front[order[k - 1]][m]) / span;
        }
    }
    return dist;
}

SearchResult search(const Eigen::MatrixXd &target, const SearchConfig &config) {
    if (config.population_size < 2 || config.tournament_size == 0) {
        throw std::invalid_argument("population and tournament must be positive");
    }
    const auto problem = SearchProblem::for_target(target);
    Rng rng(config.seed);
    const std::size_t pop_size = config.population_size;

    std::vector<Individual> pop;
    pop.push_back({problem.full_pauli_genome(), {}, 0, 0.0});
    pop.push_back({problem.greedy_permutation_genome(), {}, 0, 0.0});
    while (pop.size() < pop_size) {
        Genome g;
        if (pop.size() % 2 == 0) {
            g.mode = GenomeMode::PauliSubset;
            g.selection.resize(problem.pauli_candidates.size());
            for (std::size_t i = 0; i < g.selection.size(); ++i) {
                g.selection[i] = coin(rng, 0.5);
            }
        } else {
            g = problem.greedy_permutation_genome();
            mutate(g, problem, std::max(config.mutation_rate, 0.5), rng);
        }
        pop.push_back({std::move(g), {}, 0, 0.0});
    }
    evaluate_all(pop, problem, config.threads);
    rank_and_crowd(pop);

    SearchResult result;
    auto tournament = [&]() -> const Individual & {
        std::size_t best = uniform_index(rng, pop.size());
        for (std::size_t t = 1; t < config.tournament_size; ++t) {
            const std::size_t c = uniform_index(rng, pop.size());
            if (better(pop[c], pop[best]) ||
                (!better(pop[best], pop[c]) && c < best)) {
                best = c;
            }
        }
        return pop[best];
    };

    for (std::size_t gen = 0; gen < config.generations; ++gen) {
        std::vector<Individual> offspring;
        while (offspring.size() < pop_size) {
            const Individual &pa = tournament();
            const Individual &pb = tournament();
            Genome c1 = pa.genome;
            Genome c2 = pb.genome;
            if (pa.genome.mode == pb.genome.mode &&
                coin(rng, config.crossover_rate)) {
                std::tie(c1, c2) = crossover(pa.genome, pb.genome, problem, rng);
            }
            mutate(c1, problem, config.mutation_rate, rng);
            mutate(c2, problem, config.mutation_rate, rng);
            offspring.push_back({std::move(c1), {}, 0, 0.0});
            if (offspring.size() < pop_size) {
                offspring.push_back({std::move(c2), {}, 0, 0.0});
            }
        }
        evaluate_all(offspring, problem, config.threads);

        std::vector<Individual> merged = std::move(pop);
        for (auto &o : offspring) {
            merged.push_back(std::move(o));
        }
        rank_and_crowd(merged);
        std::vector<std::size_t> order(merged.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return better(merged[a], merged[b]);
                         });
        pop.clear();
        for (std::size_t k = 0; k < pop_size; ++k) {
            pop.push_back(std::move(merged[order[k]]));
        }
        rank_and_crowd(pop);
        result.best_residual_history.push_back(best_residual(pop));
    }

    std::vector<const Individual *> front;
    for (const auto &ind : pop) {
        if (ind.rank != 0) {
            continue;
        }
        const bool dup = std::any_of(front.begin(), front.end(),
                                     [&](const Individual *f) {
                                         return f->genome == ind.genome;
                                     });
        if (!dup) {
            front.push_back(&ind);
        }
    }
    std::stable_sort(front.begin(), front.end(),
                     [](const Individual *a, const Individual *b) {
                         if (a->objectives.residual != b->objectives.residual) {
                             return a->objectives.residual < b->objectives.residual;
                         }
                         return a->objectives.gate_cost < b->objectives.gate_cost;
                     });
    for (const auto *f : front) {
        result.front.push_back(decode(f->genome, problem));
        result.front_objectives.push_back(f->objectives);
    }
    result.population.individuals = std::move(pop);
    result.population.generation = config.generations;
    result.population.rng_seed = config.seed;
    return result;
}

} // namespace qgcn
