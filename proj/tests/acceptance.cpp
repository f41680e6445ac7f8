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
// Acceptance suite: one line per criterion. Run all criteria, or a single
// one with `--criterion N`. Exit status is 0 when every criterion that ran
// passed, 1 on any failure and 77 when the requested criterion cannot run
// here (Cora-based criteria without QGCN_CORA_DIR).
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "instances.hpp"
#include "oracles.hpp"
#include "qgcn/cli.hpp"
#include "qgcn/decompose.hpp"
#include "qgcn/graphdata.hpp"
#include "qgcn/lcu.hpp"
#include "qgcn/nsga2.hpp"
#include "qgcn/qgcn.hpp"

namespace {

using Clock = std::chrono::steady_clock;

enum class Status { Pass, Fail, NotRun };

struct Outcome {
    Status status = Status::Fail;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    std::function<Outcome()> run;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double v, int p = 3) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(p) << v;
    return os.str();
}

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

std::optional<std::string> cora_spec;

// ---------------------------------------------------------------- C1 --

Eigen::MatrixXd worked_example_u(int k) {
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(8, 8);
    const int cols[4][8] = {{0, 1, 2, 3, 4, 5, 6, 7},
                            {1, 0, 6, 7, 5, 4, 2, 3},
                            {2, 3, 4, 5, 1, 0, 6, 7},
                            {5, 4, 0, 1, 2, 3, 6, 7}};
    for (int r = 0; r < 8; ++r) u(r, cols[k][r]) = 1.0;
    if (k == 3) u(6, 6) = u(7, 7) = -1.0;
    return u;
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    const auto a = qgcn::demo_adjacency8();
    const auto perm = qgcn::permutation_decompose(a);
    std::vector<bool> matched(4, false);
    bool unit_weights = true;
    for (const auto &t : perm.terms) {
        unit_weights = unit_weights && t.weight == 1.0;
        const auto m = std::get<qgcn::SignedPermutation>(t.form).matrix();
        for (int k = 0; k < 4; ++k) {
            if (m == worked_example_u(k)) matched[static_cast<std::size_t>(k)] = true;
        }
    }
    const bool perm_ok = perm.terms.size() == 4 && unit_weights &&
                         std::all_of(matched.begin(), matched.end(), [](bool b) { return b; }) &&
                         perm.residual_norm == 0.0;

    const auto pauli = qgcn::pauli_decompose(a);
    std::set<std::string> got;
    for (const auto &t : pauli.terms) got.insert(std::get<std::string>(t.form));
    const std::set<std::string> want{"III", "IIX", "IXI", "IXZ", "XII", "XIX",
                                     "XXI", "XZI", "XZX", "YYI", "ZXI"};
    const bool pauli_ok = got == want;
    const double secs = seconds_since(t0);

    std::ostringstream d;
    d << "permutation: " << perm.terms.size() << " terms, residual " << perm.residual_norm
      << (perm_ok ? " (matches U0..U3)" : " (MISMATCH)") << "; pauli: " << got.size()
      << " strings";
    if (!pauli_ok) {
        std::vector<std::string> extra, missing;
        std::set_difference(got.begin(), got.end(), want.begin(), want.end(),
                            std::back_inserter(extra));
        std::set_difference(want.begin(), want.end(), got.begin(), got.end(),
                            std::back_inserter(missing));
        d << " (computed-only:";
        for (const auto &s : extra) d << ' ' << s;
        d << "; expected-only:";
        for (const auto &s : missing) d << ' ' << s;
        d << ')';
    } else {
        d << " (matches)";
    }
    d << "; " << fixed(secs) << " s";
    return {perm_ok && pauli_ok && secs < 1.0 ? Status::Pass : Status::Fail, d.str()};
}

// ---------------------------------------------------------------- C2 --

Outcome criterion2() {
    const auto t0 = Clock::now();
    const auto a = qgcn::demo_adjacency8();
    const auto decomp = qgcn::permutation_decompose(a);
    const auto plan = qgcn::assemble_lcu(decomp, qgcn::RegisterLayout{0, 3, 0});
    // Column by column: run the full circuit on |0>_anc |col> and read the
    // ancilla-0 block.
    const auto circuit = plan.circuit();
    const std::size_t total = plan.layout.total();
    Eigen::MatrixXcd block(8, 8);
    for (std::uint64_t col = 0; col < 8; ++col) {
        const auto out = qgcn::apply_circuit(qgcn::StateVector::basis(total, col), circuit);
        for (Eigen::Index row = 0; row < 8; ++row) {
            block(row, static_cast<Eigen::Index>(col)) = out[static_cast<std::size_t>(row)];
        }
    }
    const double err = (block - (a / 4.0).cast<std::complex<double>>()).cwiseAbs().maxCoeff();
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << plan.ancilla_count << " ancillas, scale " << plan.scale << ", max |block - A/4| "
      << sci(err) << "; " << fixed(secs) << " s";
    return {err <= 1e-10 && secs < 1.0 ? Status::Pass : Status::Fail, d.str()};
}

// ---------------------------------------------------------------- C3 --

Outcome criterion3() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    std::size_t instances = 0, comparisons = 0, failures = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto in = testing_support::random_instance(rng, 8);
        const auto readout = static_cast<qgcn::Readout>(trial % 3);
        auto layer = testing_support::layer_for(in, trial % 2 == 1, 1 + trial % 4, readout);
        std::vector<double> theta(layer.num_phases());
        for (auto &t : theta) t = phase(rng);
        layer.set_phases(theta);
        const auto input = qgcn::amplitude_encode(in.x);
        const auto an = qgcn::analytic_gradient(layer, input.amplitudes(), in.ds.labels,
                                                in.ds.train_mask);
        const auto ps = qgcn::psr_gradients(layer, input, in.ds.labels, in.ds.train_mask);
        const auto fd = qgcn::finite_difference_gradient(layer, input, in.ds.labels,
                                                         in.ds.train_mask);
        for (std::size_t t = 0; t < theta.size(); ++t) {
            const bool ok = qgcn::gradients_agree(ps[t], an.phases[t]) &&
                            qgcn::gradients_agree(ps[t], fd[t]) &&
                            qgcn::gradients_agree(an.phases[t], fd[t]);
            failures += ok ? 0 : 1;
            worst = std::max({worst, qgcn::cli::relative_error(ps[t], an.phases[t]),
                              qgcn::cli::relative_error(ps[t], fd[t]),
                              qgcn::cli::relative_error(an.phases[t], fd[t])});
            ++comparisons;
        }
        ++instances;
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << instances << " instances, " << comparisons << " phase gradients, " << failures
      << " disagreements, worst relative error " << sci(worst) << "; " << fixed(secs) << " s";
    return {instances >= 50 && failures == 0 && secs < 60.0 ? Status::Pass : Status::Fail,
            d.str()};
}

// ---------------------------------------------------------------- C4 --

Outcome criterion4() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(4242);
    double worst = 0.0;
    std::size_t graphs = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const auto in = testing_support::random_instance(rng, 16, 2);
        const auto readout = static_cast<qgcn::Readout>(trial % 3);
        const auto layer = testing_support::layer_for(in, trial % 2 == 1, 2, readout);
        const auto got = qgcn::expectations(layer, qgcn::amplitude_encode(in.x));
        const auto want = testing_support::dense_scores(
            in, oracle::eye(Eigen::Index{1} << in.dim_qubits), readout);
        worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
        ++graphs;
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << graphs << " random graphs (<= 16 nodes, <= 4 dims, three readouts, both backends), "
      << "max deviation " << sci(worst) << "; " << fixed(secs) << " s";
    return {worst <= 1e-10 && secs < 10.0 ? Status::Pass : Status::Fail, d.str()};
}

// ------------------------------------------------------------- C5, C6 --

double train_run(const qgcn::GraphDataset &ds, std::size_t blocks, double e_delta,
                 bool identity, std::uint64_t seed, std::size_t epochs) {
    qgcn::ModelOptions o;
    o.hidden_dim = 16;
    o.num_blocks = blocks;
    o.e_delta = e_delta;
    o.noise_seed = seed;
    if (identity) o.backend = qgcn::AdjacencyBackend::Identity;
    auto model = qgcn::build_model(ds, o);
    auto st = qgcn::init_state(model, seed, 0.2);
    qgcn::EpochMetrics m = qgcn::evaluate_model(model, ds, st);
    for (std::size_t e = 0; e < epochs; ++e) {
        std::tie(st, m) = qgcn::train_epoch(model, ds, std::move(st), 0);
    }
    return m.test_acc;
}

std::size_t experiment_epochs() {
    if (const char *e = std::getenv("QGCN_ACCEPT_EPOCHS")) return std::stoul(e);
    return 200;
}

std::string dataset_note(const std::string &spec) {
    return spec.rfind("cora:", 0) == 0 ? "" : " [dataset " + spec + ", not canonical Cora]";
}

Outcome criterion5() {
    if (!cora_spec) return {Status::NotRun, "set QGCN_CORA_DIR to the directory holding cora.content/cora.cites"};
    const auto t0 = Clock::now();
    const auto ds = qgcn::cli::load_dataset(*cora_spec, 1);
    const std::size_t epochs = experiment_epochs();
    const std::vector<std::size_t> blocks{1, 2, 5, 10};
    std::vector<double> best;
    for (auto b : blocks) {
        double top = 0.0;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            top = std::max(top, train_run(ds, b, 0.0, false, seed, epochs));
        }
        best.push_back(top);
    }
    bool ordered = true;
    for (std::size_t i = 0; i + 1 < best.size(); ++i) ordered = ordered && best[i] < best[i + 1] + 0.02;
    const bool high = best[3] >= 0.75;
    const bool low = best[0] <= 0.60;
    std::ostringstream d;
    d << "3-seed best test accuracy, " << epochs << " epochs: blocks 1/2/5/10 = ";
    for (std::size_t i = 0; i < best.size(); ++i) d << (i ? "/" : "") << fixed(best[i]);
    d << "; blocks=10 >= 0.75 " << (high ? "ok" : "NO") << ", blocks=1 <= 0.60 "
      << (low ? "ok" : "NO") << ", ordering " << (ordered ? "ok" : "NO") << "; "
      << fixed(seconds_since(t0), 0) << " s" << dataset_note(*cora_spec);
    return {high && low && ordered ? Status::Pass : Status::Fail, d.str()};
}

Outcome criterion6() {
    if (!cora_spec) return {Status::NotRun, "set QGCN_CORA_DIR to the directory holding cora.content/cora.cites"};
    const auto t0 = Clock::now();
    const auto ds = qgcn::cli::load_dataset(*cora_spec, 1);
    const std::size_t epochs = experiment_epochs();
    const std::vector<double> levels{0.01, 0.05, 0.1, 0.2};
    std::vector<double> means;
    for (std::size_t s = 0; s <= levels.size(); ++s) {
        const bool identity = s == levels.size();
        double sum = 0.0;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            sum += train_run(ds, 10, identity ? 0.0 : levels[s], identity, seed, epochs);
        }
        means.push_back(sum / 3.0);
    }
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < means.size(); ++i) monotone = monotone && means[i + 1] <= means[i] + 0.02;
    const bool minimum = means.back() <= *std::min_element(means.begin(), means.end() - 1);
    std::ostringstream d;
    d << "seed-mean test accuracy, " << epochs << " epochs: e=0.01/0.05/0.1/0.2/no-A = ";
    for (std::size_t i = 0; i < means.size(); ++i) d << (i ? "/" : "") << fixed(means[i]);
    d << "; non-increasing " << (monotone ? "ok" : "NO") << ", no-A minimum "
      << (minimum ? "ok" : "NO") << "; " << fixed(seconds_since(t0), 0) << " s"
      << dataset_note(*cora_spec);
    return {monotone && minimum ? Status::Pass : Status::Fail, d.str()};
}

// ---------------------------------------------------------------- C7 --

Outcome criterion7() {
    const auto t0 = Clock::now();
    qgcn::SearchConfig c;
    c.population_size = 64;
    c.generations = 100;
    c.seed = 7;
    c.threads = 0;
    const auto r = qgcn::search(qgcn::demo_adjacency8(), c);
    double best = std::numeric_limits<double>::infinity();
    for (const auto &o : r.front_objectives) best = std::min(best, o.residual);

    // Exhaustive pairwise dominance over the final population: peel fronts
    // and compare with the stored ranks.
    const auto &pop = r.population.individuals;
    const std::size_t n = pop.size();
    std::vector<std::size_t> rank(n, std::numeric_limits<std::size_t>::max());
    std::size_t assigned = 0;
    for (std::size_t level = 0; assigned < n; ++level) {
        std::vector<std::size_t> front;
        for (std::size_t i = 0; i < n; ++i) {
            if (rank[i] != std::numeric_limits<std::size_t>::max()) continue;
            bool dominated = false;
            for (std::size_t j = 0; j < n && !dominated; ++j) {
                if (j == i || rank[j] < level) continue;
                bool le = true, lt = false;
                for (std::size_t k = 0; k < 3; ++k) {
                    le = le && pop[j].objectives[k] <= pop[i].objectives[k];
                    lt = lt || pop[j].objectives[k] < pop[i].objectives[k];
                }
                dominated = le && lt;
            }
            if (!dominated) front.push_back(i);
        }
        for (auto i : front) rank[i] = level;
        assigned += front.size();
    }
    std::size_t rank_mismatch = 0;
    for (std::size_t i = 0; i < n; ++i) rank_mismatch += rank[i] == pop[i].rank ? 0 : 1;
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "front size " << r.front.size() << ", best residual " << best << ", "
      << n * (n - 1) << " ordered pairs checked, " << rank_mismatch << " rank mismatches; "
      << fixed(secs) << " s";
    return {best <= 1e-12 && rank_mismatch == 0 && secs < 60.0 ? Status::Pass : Status::Fail,
            d.str()};
}

// ---------------------------------------------------------------- C8 --

Outcome criterion8() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(88);
    std::size_t checks = 0, failures = 0;
    auto check = [&](bool ok) {
        ++checks;
        failures += ok ? 0 : 1;
    };

    // Statevector: norm preservation and exact inversion.
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        qgcn::Circuit c;
        for (std::size_t k = 0, d = 1 + rng() % 10; k < d; ++k) c.push_back(oracle::random_gate(n, rng));
        auto amps = oracle::random_amplitudes(n, rng);
        const auto orig = amps;
        for (const auto &g : c) qgcn::apply_gate_to(amps, n, g);
        double norm = 0.0;
        for (const auto &x : amps) norm += std::norm(x);
        check(std::abs(norm - 1.0) < 1e-12);
        for (auto it = c.rbegin(); it != c.rend(); ++it) qgcn::apply_gate_adjoint_to(amps, n, *it);
        double diff = 0.0;
        for (std::size_t i = 0; i < amps.size(); ++i) diff = std::max(diff, std::abs(amps[i] - orig[i]));
        check(diff < 1e-12);
    }
    // Decomposition round trips.
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 5;
        const auto a = oracle::random_symmetric(std::size_t{1} << n, rng, 0.5);
        const auto p = qgcn::pauli_decompose(a);
        check((p.reassemble() - a).cwiseAbs().maxCoeff() < 1e-12);
        const auto q = qgcn::permutation_decompose(a, 16);
        check((q.reassemble() + q.residual - a).cwiseAbs().maxCoeff() < 1e-12);
    }
    // Post-selection conservation across both ancilla outcomes.
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng() % 5;
        const auto s = qgcn::StateVector::from_amplitudes(oracle::random_amplitudes(n, rng));
        const std::vector<std::size_t> q{rng() % n};
        double total = 0.0;
        for (int o : {0, 1}) {
            const std::vector<int> outcome{o};
            total += qgcn::postselect(s, q, outcome).probability;
        }
        check(std::abs(total - 1.0) < 1e-12);
    }
    // Loss against the dense pipeline.
    for (int trial = 0; trial < 100; ++trial) {
        const auto in = testing_support::random_instance(rng, 16, 2);
        const auto readout = static_cast<qgcn::Readout>(trial % 3);
        const auto layer = testing_support::layer_for(in, false, 1, readout);
        const auto e = qgcn::expectations(layer, qgcn::amplitude_encode(in.x));
        const auto ref = testing_support::dense_scores(
            in, oracle::eye(Eigen::Index{1} << in.dim_qubits), readout);
        double want = 0.0;
        std::size_t count = 0;
        for (Eigen::Index j = 0; j < ref.rows(); ++j) {
            if (!in.ds.train_mask[static_cast<std::size_t>(j)]) continue;
            double z = 0.0;
            for (Eigen::Index k = 0; k < ref.cols(); ++k) z += std::exp(ref(j, k));
            want += std::log(z) - ref(j, in.ds.labels[static_cast<std::size_t>(j)]);
            ++count;
        }
        want /= static_cast<double>(count);
        check(std::abs(qgcn::loss(e, in.ds.labels, in.ds.train_mask) - want) < 1e-10);
    }
    std::ostringstream d;
    d << checks << " property checks, " << failures << " failures; " << fixed(seconds_since(t0))
      << " s";
    return {failures == 0 ? Status::Pass : Status::Fail, d.str()};
}

} // namespace

int main(int argc, char **argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (arg == "--dataset" && i + 1 < argc) {
            cora_spec = argv[++i];
        } else {
            std::cerr << "usage: qgcn_acceptance [--criterion N] [--dataset SPEC]\n";
            return 2;
        }
    }
    if (!cora_spec) {
        if (const char *dir = std::getenv("QGCN_CORA_DIR"); dir && *dir) {
            cora_spec = std::string("cora:") + dir;
        }
    }

    const std::vector<Criterion> criteria{
        {1, "worked-example fidelity", criterion1},
        {2, "LCU operator equality", criterion2},
        {3, "gradient suite", criterion3},
        {4, "small-instance oracle equivalence", criterion4},
        {5, "evaluation 1 (block count)", criterion5},
        {6, "evaluation 2 (adjacency noise)", criterion6},
        {7, "NSGA-II sanity", criterion7},
        {8, "property suites", criterion8},
    };

    bool any_fail = false;
    bool any_run = false;
    for (const auto &c : criteria) {
        if (only != 0 && c.id != only) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const char *tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "NOT RUN";
        std::cout << "criterion " << c.id << " [" << tag << "] " << c.title << ": " << o.detail
                  << std::endl;
        any_fail = any_fail || o.status == Status::Fail;
        any_run = any_run || o.status != Status::NotRun;
    }
    if (any_fail) return 1;
    return any_run ? 0 : 77;
}
