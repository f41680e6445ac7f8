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
// Test-side reference implementations. Nothing here calls the simulator:
// gates are built from Kronecker products of 2x2 blocks and dense algebra.
#pragma once

#include <algorithm>
#include <complex>
#include <span>
#include <stdexcept>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgcn/statevector.hpp"

namespace oracle {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat kron(const Mat &a, const Mat &b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline Mat eye(Eigen::Index n) { return Mat::Identity(n, n); }

inline Mat pauli(char c) {
    Mat m(2, 2);
    const Complex i(0.0, 1.0);
    switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1; break;
    }
    return m;
}

inline Mat hadamard() {
    Mat m(2, 2);
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

/// exp(-i theta Y).
inline Mat ry(double theta) {
    Mat m(2, 2);
    m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return m;
}

/// Kronecker product of Pauli factors, character 0 most significant.
inline Mat pauli_string(const std::string &axes) {
    Mat out = eye(1);
    for (char c : axes) {
        out = kron(out, pauli(c));
    }
    return out;
}

/**
 * Dense matrix of a (multi-)controlled single-target gate:
 * I + (prod of control projectors) (x) (G - I) on the target.
 */
inline Mat controlled_single(const Mat &g, std::size_t target,
                             const std::vector<qgcn::Control> &controls,
                             std::size_t n) {
    Mat p0(2, 2), p1(2, 2);
    p0 << 1, 0, 0, 0;
    p1 << 0, 0, 0, 1;
    Mat term = eye(1);
    for (std::size_t q = 0; q < n; ++q) {
        Mat f = eye(2);
        if (q == target) {
            f = g - eye(2);
        }
        for (const auto &c : controls) {
            if (c.qubit == q) {
                f = c.on_one ? p1 : p0;
            }
        }
        term = kron(term, f);
    }
    return eye(Eigen::Index{1} << n) + term;
}

inline Mat gate_matrix(const qgcn::GateOp &g, std::size_t n) {
    Mat local;
    switch (g.kind()) {
    case qgcn::GateKind::PauliX: local = pauli('X'); break;
    case qgcn::GateKind::PauliY: local = pauli('Y'); break;
    case qgcn::GateKind::PauliZ: local = pauli('Z'); break;
    case qgcn::GateKind::Hadamard: local = hadamard(); break;
    case qgcn::GateKind::Ry: local = ry(g.angle()); break;
    case qgcn::GateKind::Unitary:
        if (g.targets().size() != 1) {
            throw std::logic_error("oracle handles single-target unitaries only");
        }
        local = g.matrix();
        break;
    }
    return controlled_single(local, g.targets()[0], g.controls(), n);
}

inline Mat circuit_matrix(const qgcn::Circuit &c, std::size_t n) {
    Mat u = eye(Eigen::Index{1} << n);
    for (const auto &g : c) {
        u = gate_matrix(g, n) * u;
    }
    return u;
}

inline Eigen::VectorXcd to_vec(std::span<const Complex> a) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = a[i];
    }
    return v;
}

inline double max_abs_diff(std::span<const Complex> a, const Eigen::VectorXcd &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b(static_cast<Eigen::Index>(i))));
    }
    return m;
}

// ------------------------------------------------------------ generators --

inline Mat random_su2(std::mt19937_64 &rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat m(2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            m(i, j) = Complex(n(rng), n(rng));
        }
    }
    Eigen::HouseholderQR<Mat> qr(m);
    return qr.householderQ();
}

inline std::vector<Complex> random_amplitudes(std::size_t n, std::mt19937_64 &rng,
                                              bool real = false) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<Complex> a(std::size_t{1} << n);
    double norm = 0.0;
    for (auto &x : a) {
        x = Complex(d(rng), real ? 0.0 : d(rng));
        norm += std::norm(x);
    }
    for (auto &x : a) {
        x /= std::sqrt(norm);
    }
    return a;
}

/// Random gate on n qubits: kind, target and up to `max_controls` controls.
inline qgcn::GateOp random_gate(std::size_t n, std::mt19937_64 &rng,
                                std::size_t max_controls = 3) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<int> kind(0, 5);
    std::uniform_real_distribution<double> angle(-3.2, 3.2);
    std::bernoulli_distribution coin(0.5);
    const std::size_t target = pick(rng);
    std::vector<qgcn::Control> controls;
    std::uniform_int_distribution<std::size_t> count(0, std::min(max_controls, n - 1));
    const std::size_t nc = count(rng);
    while (controls.size() < nc) {
        const std::size_t q = pick(rng);
        if (q == target) continue;
        bool dup = false;
        for (const auto &c : controls) dup = dup || c.qubit == q;
        if (!dup) controls.push_back({q, coin(rng)});
    }
    switch (kind(rng)) {
    case 0: return qgcn::GateOp::x(target, controls);
    case 1: return qgcn::GateOp::y(target, controls);
    case 2: return qgcn::GateOp::z(target, controls);
    case 3: return qgcn::GateOp::h(target, controls);
    case 4: return qgcn::GateOp::ry(target, angle(rng), controls);
    default: return qgcn::GateOp::unitary(random_su2(rng), {target}, controls);
    }
}

inline Eigen::MatrixXd random_symmetric(std::size_t dim, std::mt19937_64 &rng,
                                        double density = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution keep(density);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = i; j < a.cols(); ++j) {
            if (keep(rng)) {
                a(i, j) = a(j, i) = u(rng);
            }
        }
    }
    return a;
}

/// Random undirected 0/1 adjacency (no self loops), given as edge list.
inline std::vector<std::pair<std::size_t, std::size_t>>
random_edges(std::size_t n, double p, std::mt19937_64 &rng) {
    std::bernoulli_distribution e(p);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (e(rng)) edges.emplace_back(i, j);
        }
    }
    return edges;
}

} // namespace oracle
