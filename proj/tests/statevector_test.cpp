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
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qgcn/statevector.hpp"

namespace {

using qgcn::Complex;
using qgcn::Control;
using qgcn::GateOp;
using qgcn::StateVector;

TEST(GateOp, RejectsOverlappingQubits) {
    EXPECT_THROW(GateOp::x(1, {{1, true}}), std::invalid_argument);
    EXPECT_THROW(GateOp::x(0, {{2, true}, {2, false}}), std::invalid_argument);
    Eigen::MatrixXcd not_unitary = Eigen::MatrixXcd::Ones(2, 2);
    EXPECT_THROW(GateOp::unitary(not_unitary, {0}), std::invalid_argument);
}

TEST(GateOp, RyIsFullAngleRotation) {
    // exp(-i theta Y) sends |0> to cos(theta)|0> + sin(theta)|1>.
    const auto s = qgcn::apply_gate(StateVector(1), GateOp::ry(0, 0.3));
    EXPECT_NEAR(s[0].real(), std::cos(0.3), 1e-15);
    EXPECT_NEAR(s[1].real(), std::sin(0.3), 1e-15);
}

TEST(StateVector, QubitZeroIsMostSignificant) {
    const auto s = qgcn::apply_gate(StateVector(3), GateOp::x(0));
    EXPECT_EQ(std::abs(s[4]), 1.0);
    EXPECT_EQ(qgcn::qubit_mask(0, 3), 4u);
    EXPECT_EQ(qgcn::qubit_mask(2, 3), 1u);
}

TEST(StateVector, FromAmplitudesChecksNormAndLength) {
    EXPECT_THROW(StateVector::from_amplitudes({1.0, 0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(StateVector::from_amplitudes({1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(StateVector::normalized({0.0, 0.0}), std::invalid_argument);
    const auto s = StateVector::normalized({3.0, 4.0});
    EXPECT_NEAR(s[1].real(), 0.8, 1e-15);
}

TEST(StateVector, GateOutsideRegisterThrows) {
    EXPECT_THROW(qgcn::apply_gate(StateVector(2), GateOp::x(2)), std::out_of_range);
    EXPECT_THROW(qgcn::apply_gate(StateVector(2), GateOp::x(0, {{3, true}})),
                 std::out_of_range);
}

TEST(StateVector, TensorPutsLeftRegisterOnTop) {
    const auto a = StateVector::basis(1, 1);
    const auto b = StateVector::basis(2, 2);
    const auto t = a.tensor(b);
    EXPECT_EQ(t.num_qubits(), 3u);
    EXPECT_EQ(std::abs(t[6]), 1.0);
}

// Every gate against its Kronecker-product matrix.
TEST(StateVectorProperty, GatesMatchKroneckerOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 5);
        const auto g = oracle::random_gate(n, rng);
        const auto amps = oracle::random_amplitudes(n, rng);
        const auto out = qgcn::apply_gate(StateVector::from_amplitudes(amps), g);
        const Eigen::VectorXcd expect = oracle::gate_matrix(g, n) * oracle::to_vec(amps);
        ASSERT_LT(oracle::max_abs_diff(out.amplitudes(), expect), 1e-12)
            << "gate " << g.name() << " on " << n << " qubits";
    }
}

// Norm preservation and exact inversion over 10^4 random circuits.
TEST(StateVectorProperty, RandomCircuitsAreUnitary) {
    std::mt19937_64 rng(2026);
    std::uniform_int_distribution<std::size_t> qubits(1, 6);
    std::uniform_int_distribution<std::size_t> depth(1, 12);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = qubits(rng);
        qgcn::Circuit c;
        const std::size_t d = depth(rng);
        for (std::size_t k = 0; k < d; ++k) {
            c.push_back(oracle::random_gate(n, rng));
        }
        const auto amps = oracle::random_amplitudes(n, rng);
        auto work = amps;
        for (const auto &g : c) {
            qgcn::apply_gate_to(work, n, g);
        }
        double norm = 0.0;
        for (const auto &x : work) norm += std::norm(x);
        ASSERT_NEAR(norm, 1.0, 1e-12);
        for (auto it = c.rbegin(); it != c.rend(); ++it) {
            qgcn::apply_gate_adjoint_to(work, n, *it);
        }
        for (std::size_t i = 0; i < amps.size(); ++i) {
            ASSERT_LT(std::abs(work[i] - amps[i]), 1e-12);
        }
    }
}

TEST(StateVectorProperty, CircuitMatchesProductOfGateMatrices) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
        qgcn::Circuit c;
        for (int k = 0; k < 8; ++k) c.push_back(oracle::random_gate(n, rng));
        const auto amps = oracle::random_amplitudes(n, rng);
        const auto out = qgcn::apply_circuit(StateVector::from_amplitudes(amps), c);
        const Eigen::VectorXcd expect = oracle::circuit_matrix(c, n) * oracle::to_vec(amps);
        ASSERT_LT(oracle::max_abs_diff(out.amplitudes(), expect), 1e-12);
    }
}

TEST(Postselect, ProjectsAndRenormalizes) {
    // (|00> + |01> + |10>)/sqrt3, keep qubit 0 = 0.
    const auto s = StateVector::normalized({1.0, 1.0, 1.0, 0.0});
    const std::vector<std::size_t> q{0};
    const std::vector<int> o{0};
    const auto p = qgcn::postselect(s, q, o);
    EXPECT_NEAR(p.probability, 2.0 / 3.0, 1e-15);
    EXPECT_EQ(p.state.num_qubits(), 1u);
    EXPECT_NEAR(std::abs(p.state[0]), std::sqrt(0.5), 1e-15);
}

TEST(Postselect, ZeroProbabilityThrows) {
    const auto s = StateVector::basis(2, 0);
    const std::vector<std::size_t> q{1};
    const std::vector<int> o{1};
    EXPECT_THROW((void)qgcn::postselect(s, q, o), qgcn::ZeroProbabilityError);
}

// Outcome probabilities over all settings of the measured qubits sum to one,
// and each post-selected state is the normalized projection.
TEST(PostselectProperty, ProbabilitiesAreConserved) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
        const auto amps = oracle::random_amplitudes(n, rng);
        const auto s = StateVector::from_amplitudes(amps);
        std::vector<std::size_t> qs;
        for (std::size_t q = 0; q < n; ++q) {
            if (rng() % 2 == 0) qs.push_back(q);
        }
        if (qs.empty() || qs.size() == n) qs = {0};
        double total = 0.0;
        for (std::size_t pattern = 0; pattern < (std::size_t{1} << qs.size()); ++pattern) {
            std::vector<int> outcome;
            for (std::size_t k = 0; k < qs.size(); ++k) {
                outcome.push_back(static_cast<int>((pattern >> (qs.size() - 1 - k)) & 1));
            }
            // Oracle: sum |amp|^2 over matching basis states.
            double expect = 0.0;
            std::vector<Complex> kept;
            for (std::size_t i = 0; i < amps.size(); ++i) {
                bool match = true;
                for (std::size_t k = 0; k < qs.size(); ++k) {
                    const bool bit = (i >> (n - 1 - qs[k])) & 1;
                    match = match && bit == (outcome[k] == 1);
                }
                if (match) {
                    expect += std::norm(amps[i]);
                    kept.push_back(amps[i]);
                }
            }
            const auto p = qgcn::postselect(s, qs, outcome);
            ASSERT_NEAR(p.probability, expect, 1e-12);
            for (std::size_t i = 0; i < kept.size(); ++i) {
                ASSERT_NEAR(std::abs(p.state[i] - kept[i] / std::sqrt(expect)), 0.0, 1e-10);
            }
            total += p.probability;
        }
        ASSERT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Probabilities, SumToOne) {
    std::mt19937_64 rng(3);
    const auto s = StateVector::from_amplitudes(oracle::random_amplitudes(4, rng));
    double t = 0.0;
    for (double p : qgcn::probabilities(s)) t += p;
    EXPECT_NEAR(t, 1.0, 1e-14);
}

TEST(QubitsFor, RoundsUp) {
    EXPECT_EQ(qgcn::qubits_for(1), 0u);
    EXPECT_EQ(qgcn::qubits_for(2), 1u);
    EXPECT_EQ(qgcn::qubits_for(5), 3u);
    EXPECT_EQ(qgcn::qubits_for(8), 3u);
}

} // namespace
