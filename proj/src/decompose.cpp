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
#include "qgcn/decompose.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace qgcn {

namespace {

// Coefficients below this fraction of max|A| are rounding noise of the
// transform and are treated as exact zeros.
constexpr double kPauliNumericalZero = 1e-14;

std::size_t checked_qubits(Eigen::Index rows, Eigen::Index cols) {
    if (rows != cols || rows <= 0) {
        throw std::invalid_argument("matrix must be square and nonempty");
    }
    const auto n = static_cast<std::size_t>(rows);
    if ((n & (n - 1)) != 0) {
        throw std::invalid_argument("matrix dimension must be a power of two");
    }
    return static_cast<std::size_t>(std::countr_zero(n));
}

void check_symmetric(const Eigen::MatrixXd &a) {
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("matrix is not symmetric");
    }
}

// In-place Walsh-Hadamard transform (unnormalized).
void fwht(std::vector<double> &v) {
    for (std::size_t len = 1; len < v.size(); len <<= 1U) {
        for (std::size_t i = 0; i < v.size(); i += len << 1U) {
            for (std::size_t j = i; j < i + len; ++j) {
                const double a = v[j];
                const double b = v[j + len];
                v[j] = a + b;
                v[j + len] = a - b;
            }
        }
    }
}

std::string axes_from_masks(std::uint64_t x, std::uint64_t z, std::size_t n) {
    std::string axes(n, 'I');
    for (std::size_t q = 0; q < n; ++q) {
        const auto bit = qubit_mask(q, n);
        const bool xb = (x & bit) != 0;
        const bool zb = (z & bit) != 0;
        axes[q] = xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
    }
    return axes;
}

void masks_from_axes(const std::string &axes, std::uint64_t &x,
                     std::uint64_t &z) {
    const std::size_t n = axes.size();
    x = 0;
    z = 0;
    for (std::size_t q = 0; q < n; ++q) {
        const auto bit = qubit_mask(q, n);
        switch (axes[q]) {
        case 'I':
            break;
        case 'X':
            x |= bit;
            break;
        case 'Y':
            x |= bit;
            z |= bit;
            break;
        case 'Z':
            z |= bit;
            break;
        default:
            throw std::invalid_argument("unknown Pauli axis '" +
                                        std::string(1, axes[q]) + "'");
        }
    }
}

// i^{#Y} for an even Y count.
double y_phase(std::uint64_t x, std::uint64_t z) {
    const int y = std::popcount(x & z);
    if (y % 2 != 0) {
        throw std::invalid_argument(
            "Pauli strings with an odd number of Y axes are not real");
    }
    return (y % 4 == 0) ? 1.0 : -1.0;
}

// Hungarian algorithm (potentials, O(n^3)) for a square minimum-cost
// assignment. Returns row -> column.
std::vector<std::size_t> hungarian_min(const Eigen::MatrixXd &cost) {
    const auto n = static_cast<std::size_t>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur =
                    cost(static_cast<Eigen::Index>(i0 - 1),
                         static_cast<Eigen::Index>(j - 1)) -
                    u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assign(n);
    for (std::size_t j = 1; j <= n; ++j) {
        assign[p[j] - 1] = j - 1;
    }
    return assign;
}

double max_weight(const Eigen::MatrixXd &w) {
    if (w.rows() == 0) {
        return 0.0;
    }
    const auto assign = hungarian_min(-w);
    double total = 0.0;
    for (std::size_t r = 0; r < assign.size(); ++r) {
        total += w(static_cast<Eigen::Index>(r),
                   static_cast<Eigen::Index>(assign[r]));
    }
    return total;
}

} // namespace

// ----------------------------------------------------- SignedPermutation --

SignedPermutation SignedPermutation::identity(std::size_t dim) {
    SignedPermutation p;
    p.mapping.resize(dim);
    std::iota(p.mapping.begin(), p.mapping.end(), std::size_t{0});
    p.signs.assign(dim, 1);
    return p;
}

std::size_t SignedPermutation::num_qubits() const {
    return checked_qubits(static_cast<Eigen::Index>(dim()),
                          static_cast<Eigen::Index>(dim()));
}

void SignedPermutation::validate() const {
    (void)num_qubits();
    if (signs.size() != mapping.size()) {
        throw std::invalid_argument("one sign per column is required");
    }
    std::vector<bool> hit(mapping.size(), false);
    for (std::size_t x = 0; x < mapping.size(); ++x) {
        if (mapping[x] >= mapping.size() || hit[mapping[x]]) {
            throw std::invalid_argument("mapping is not a bijection");
        }
        hit[mapping[x]] = true;
        if (signs[x] != 1 && signs[x] != -1) {
            throw std::invalid_argument("signs must be +1 or -1");
        }
    }
}

Eigen::MatrixXd SignedPermutation::matrix() const {
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t x = 0; x < dim(); ++x) {
        m(static_cast<Eigen::Index>(mapping[x]), static_cast<Eigen::Index>(x)) =
            signs[x];
    }
    return m;
}

// ---------------------------------------------------------- terms --

Eigen::MatrixXcd UnitaryTerm::dense() const {
    if (const auto *axes = std::get_if<std::string>(&form)) {
        return pauli_matrix(*axes);
    }
    return std::get<SignedPermutation>(form).matrix().cast<Complex>();
}

Eigen::MatrixXd Decomposition::reassemble() const {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(target.rows(), target.cols());
    for (const auto &t : terms) {
        sum += t.weight * t.dense().real();
    }
    return sum;
}

Eigen::VectorXd Decomposition::weights() const {
    Eigen::VectorXd h(static_cast<Eigen::Index>(terms.size()));
    for (std::size_t k = 0; k < terms.size(); ++k) {
        h[static_cast<Eigen::Index>(k)] = terms[k].weight;
    }
    return h;
}

std::size_t Decomposition::gate_cost() const {
    std::size_t cost = 0;
    for (const auto &t : terms) {
        cost += gate_complexity(t.circuit);
    }
    return cost;
}

Eigen::MatrixXcd pauli_matrix(const std::string &axes) {
    using namespace std::complex_literals;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (char c : axes) {
        Eigen::Matrix2cd p;
        switch (c) {
        case 'I':
            p << 1.0, 0.0, 0.0, 1.0;
            break;
        case 'X':
            p << 0.0, 1.0, 1.0, 0.0;
            break;
        case 'Y':
            p << 0.0, -1i, 1i, 0.0;
            break;
        case 'Z':
            p << 1.0, 0.0, 0.0, -1.0;
            break;
        default:
            throw std::invalid_argument("unknown Pauli axis");
        }
        Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            for (Eigen::Index j = 0; j < out.cols(); ++j) {
                next.block(i * 2, j * 2, 2, 2) = out(i, j) * p;
            }
        }
        out = std::move(next);
    }
    return out;
}

Circuit pauli_circuit(const std::string &axes) {
    Circuit c;
    for (std::size_t q = 0; q < axes.size(); ++q) {
        switch (axes[q]) {
        case 'I':
            break;
        case 'X':
            c.push_back(GateOp::x(q));
            break;
        case 'Y':
            c.push_back(GateOp::y(q));
            break;
        case 'Z':
            c.push_back(GateOp::z(q));
            break;
        default:
            throw std::invalid_argument("unknown Pauli axis");
        }
    }
    return c;
}

std::vector<PauliTerm> pauli_coefficients(const Eigen::MatrixXd &a) {
    const std::size_t n = checked_qubits(a.rows(), a.cols());
    check_symmetric(a);
    const std::size_t dim = std::size_t{1} << n;
    const double zero = kPauliNumericalZero * std::max(1.0, a.cwiseAbs().maxCoeff());
    std::vector<PauliTerm> out;
    std::vector<double> v(dim);
    for (std::uint64_t x = 0; x < dim; ++x) {
        for (std::uint64_t b = 0; b < dim; ++b) {
            v[b] = a(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b ^ x));
        }
        fwht(v);
        for (std::uint64_t z = 0; z < dim; ++z) {
            if (std::popcount(x & z) % 2 != 0) {
                continue;
            }
            const double h = y_phase(x, z) * v[z] / static_cast<double>(dim);
            if (std::abs(h) > zero) {
                out.push_back({axes_from_masks(x, z, n), h});
            }
        }
    }
    return out;
}

Eigen::MatrixXd pauli_reassemble(std::span<const PauliTerm> terms,
                                 std::size_t num_qubits) {
    const std::size_t dim = std::size_t{1} << num_qubits;
    std::map<std::uint64_t, std::vector<double>> by_x;
    for (const auto &t : terms) {
        if (t.axes.size() != num_qubits) {
            throw std::invalid_argument("Pauli string length mismatch");
        }
        std::uint64_t x = 0;
        std::uint64_t z = 0;
        masks_from_axes(t.axes, x, z);
        auto &row = by_x[x];
        if (row.empty()) {
            row.assign(dim, 0.0);
        }
        row[z] += y_phase(x, z) * t.coefficient;
    }
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (auto &[x, c] : by_x) {
        fwht(c);
        for (std::uint64_t b = 0; b < dim; ++b) {
            out(static_cast<Eigen::Index>(b ^ x), static_cast<Eigen::Index>(b)) +=
                c[b];
        }
    }
    return out;
}

PauliTruncation pauli_truncate(const Eigen::MatrixXd &a, double drop_tol) {
    if (drop_tol < 0.0) {
        throw std::invalid_argument("drop tolerance must be non-negative");
    }
    const std::size_t n = checked_qubits(a.rows(), a.cols());
    check_symmetric(a);
    const std::size_t dim = std::size_t{1} << n;
    const double zero = kPauliNumericalZero * std::max(1.0, a.cwiseAbs().maxCoeff());
    PauliTruncation out;
    out.kept = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    double weight_sq = 0.0;
    std::vector<double> v(dim);
    for (std::uint64_t x = 0; x < dim; ++x) {
        for (std::uint64_t b = 0; b < dim; ++b) {
            v[b] = a(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b ^ x));
        }
        fwht(v);
        bool any = false;
        for (std::uint64_t z = 0; z < dim; ++z) {
            const double h = v[z] / static_cast<double>(dim);
            if (std::popcount(x & z) % 2 != 0 || std::abs(h) <= zero) {
                v[z] = 0.0;
            } else if (std::abs(h) <= drop_tol) {
                ++out.dropped_count;
                v[z] = 0.0;
            } else {
                ++out.term_count;
                weight_sq += h * h;
                v[z] = h;
                any = true;
            }
        }
        if (!any) {
            continue;
        }
        fwht(v);
        for (std::uint64_t b = 0; b < dim; ++b) {
            out.kept(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b ^ x)) =
                v[b];
        }
    }
    out.weight_norm = std::sqrt(weight_sq);
    out.residual_norm = (a - out.kept).norm();
    return out;
}

UnitaryTerm pauli_term(const std::string &axes, double weight) {
    UnitaryTerm t;
    t.weight = weight;
    t.form = axes;
    t.circuit = pauli_circuit(axes);
    return t;
}

UnitaryTerm permutation_term(SignedPermutation perm, double weight) {
    perm.validate();
    UnitaryTerm t;
    t.weight = weight;
    t.circuit = synthesize_permutation_circuit(perm);
    t.form = std::move(perm);
    return t;
}

Decomposition pauli_decompose(const Eigen::MatrixXd &a, double drop_tol) {
    if (drop_tol < 0.0) {
        throw std::invalid_argument("drop tolerance must be non-negative");
    }
    auto coeffs = pauli_coefficients(a);
    std::sort(coeffs.begin(), coeffs.end(),
              [](const PauliTerm &l, const PauliTerm &r) { return l.axes < r.axes; });
    const std::size_t n = checked_qubits(a.rows(), a.cols());
    std::vector<PauliTerm> dropped;
    Decomposition d;
    d.num_qubits = n;
    d.target = a;
    for (const auto &c : coeffs) {
        if (std::abs(c.coefficient) <= drop_tol) {
            dropped.push_back(c);
        } else {
            d.terms.push_back(pauli_term(c.axes, c.coefficient));
        }
    }
    d.residual = pauli_reassemble(dropped, n);
    d.residual_norm = residual_norm(d.residual);
    return d;
}

std::vector<std::size_t> lex_max_weight_assignment(const Eigen::MatrixXd &w) {
    if (w.rows() != w.cols() || w.rows() == 0) {
        throw std::invalid_argument("weight matrix must be square and nonempty");
    }
    const auto n = static_cast<std::size_t>(w.rows());
    const double best = max_weight(w);
    const double tol = 1e-9 * (1.0 + std::abs(best));
    std::vector<std::size_t> assign(n);
    std::vector<bool> col_used(n, false);
    double fixed = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        bool placed = false;
        for (std::size_t c = 0; c < n && !placed; ++c) {
            if (col_used[c]) {
                continue;
            }
            // Best completion of rows r+1.. over the columns still free.
            const std::size_t rest = n - r - 1;
            Eigen::MatrixXd sub(static_cast<Eigen::Index>(rest),
                                static_cast<Eigen::Index>(rest));
            std::size_t jj = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (col_used[j] || j == c) {
                    continue;
                }
                for (std::size_t i = 0; i < rest; ++i) {
                    sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) =
                        w(static_cast<Eigen::Index>(r + 1 + i),
                          static_cast<Eigen::Index>(j));
                }
                ++jj;
            }
            const double here =
                w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (fixed + here + max_weight(sub) >= best - tol) {
                assign[r] = c;
                col_used[c] = true;
                fixed += here;
                placed = true;
            }
        }
        if (!placed) {
            throw std::logic_error("assignment search lost the optimum");
        }
    }
    return assign;
}

Decomposition permutation_decompose(const Eigen::MatrixXd &a,
                                    std::size_t max_terms, double tol) {
    const std::size_t n = checked_qubits(a.rows(), a.cols());
    Decomposition d;
    d.num_qubits = n;
    d.target = a;
    Eigen::MatrixXd r = a;
    const auto dim = static_cast<std::size_t>(a.rows());
    for (std::size_t k = 0; k < max_terms; ++k) {
        if (r.cwiseAbs().maxCoeff() <= tol) {
            break;
        }
        const auto assign = lex_max_weight_assignment(r.cwiseAbs());
        double h = std::numeric_limits<double>::infinity();
        for (std::size_t row = 0; row < dim; ++row) {
            const double v = std::abs(r(static_cast<Eigen::Index>(row),
                                        static_cast<Eigen::Index>(assign[row])));
            if (v > tol) {
                h = std::min(h, v);
            }
        }
        SignedPermutation p;
        p.mapping.resize(dim);
        p.signs.resize(dim);
        for (std::size_t row = 0; row < dim; ++row) {
            const std::size_t col = assign[row];
            p.mapping[col] = row;
            p.signs[col] = r(static_cast<Eigen::Index>(row),
                             static_cast<Eigen::Index>(col)) < -tol
                               ? -1
                               : 1;
        }
        r -= h * p.matrix();
        d.terms.push_back(permutation_term(std::move(p), h));
    }
    d.residual = r;
    d.residual_norm = residual_norm(r);
    return d;
}

Circuit synthesize_permutation_circuit(const SignedPermutation &perm) {
    perm.validate();
    const std::size_t n = perm.num_qubits();
    const std::size_t dim = perm.dim();
    Circuit c;

    // Diagonal sign layer: (-1)^f(x) = prod over ANF monomials m of
    // (-1)^{prod_{i in m} x_i}, one multi-controlled Z each.
    std::vector<std::uint8_t> anf(dim);
    for (std::size_t x = 0; x < dim; ++x) {
        anf[x] = perm.signs[x] < 0 ? 1 : 0;
    }
    for (std::size_t bit = 1; bit < dim; bit <<= 1U) {
        for (std::size_t x = 0; x < dim; ++x) {
            if ((x & bit) != 0) {
                anf[x] ^= anf[x ^ bit];
            }
        }
    }
    for (std::size_t m = 0; m < dim; ++m) {
        if (anf[m] == 0) {
            continue;
        }
        if (m == 0) {
            if (n == 0) {
                throw std::invalid_argument(
                    "a 1x1 sign flip has no qubit to act on");
            }
            // Z X Z X = -I
            for (int rep = 0; rep < 2; ++rep) {
                c.push_back(GateOp::z(0));
                c.push_back(GateOp::x(0));
            }
            continue;
        }
        std::vector<std::size_t> qubits;
        for (std::size_t q = 0; q < n; ++q) {
            if ((m & qubit_mask(q, n)) != 0) {
                qubits.push_back(q);
            }
        }
        std::vector<Control> controls;
        for (std::size_t i = 1; i < qubits.size(); ++i) {
            controls.push_back({qubits[i], true});
        }
        c.push_back(GateOp::z(qubits[0], std::move(controls)));
    }

    // Bijection: sort positions with transpositions t_1..t_m so that
    // t_m ... t_1 P = I, hence P = t_1 ... t_m and t_m is applied first.
    std::vector<std::size_t> loc = perm.mapping; // loc[input] = position
    std::vector<std::size_t> at(dim);            // at[position] = input
    for (std::size_t x = 0; x < dim; ++x) {
        at[loc[x]] = x;
    }
    std::vector<std::pair<std::size_t, std::size_t>> swaps;
    for (std::size_t p = 0; p < dim; ++p) {
        if (at[p] == p) {
            continue;
        }
        const std::size_t q = loc[p];
        const std::size_t other = at[p];
        swaps.emplace_back(p, q);
        at[q] = other;
        loc[other] = q;
        at[p] = p;
        loc[p] = p;
    }
    auto elementary = [&](std::size_t from, std::size_t qubit) {
        std::vector<Control> controls;
        for (std::size_t q = 0; q < n; ++q) {
            if (q != qubit) {
                controls.push_back({q, (from & qubit_mask(q, n)) != 0});
            }
        }
        return GateOp::x(qubit, std::move(controls));
    };
    for (auto it = swaps.rbegin(); it != swaps.rend(); ++it) {
        const auto [a, b] = *it;
        std::vector<GateOp> path;
        std::size_t g = a;
        for (std::size_t q = 0; q < n; ++q) {
            if (((a ^ b) & qubit_mask(q, n)) != 0) {
                path.push_back(elementary(g, q));
                g ^= qubit_mask(q, n);
            }
        }
        for (const auto &gate : path) {
            c.push_back(gate);
        }
        for (std::size_t i = path.size() - 1; i-- > 0;) {
            c.push_back(path[i]);
        }
    }
    return c;
}

std::size_t gate_complexity(std::span<const GateOp> circuit) {
    std::size_t cost = 0;
    for (const auto &g : circuit) {
        cost += 2 * g.controls().size() + 1;
    }
    return cost;
}

double residual_norm(const Eigen::MatrixXd &delta) { return delta.norm(); }

Decomposition make_decomposition(const Eigen::MatrixXd &target,
                                 std::vector<UnitaryTerm> terms) {
    Decomposition d;
    d.num_qubits = checked_qubits(target.rows(), target.cols());
    d.target = target;
    d.terms = std::move(terms);
    d.residual = target - d.reassemble();
    d.residual_norm = residual_norm(d.residual);
    return d;
}

} // namespace qgcn
