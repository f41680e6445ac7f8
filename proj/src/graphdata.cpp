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
#include "qgcn/graphdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace qgcn {

namespace {

std::vector<std::string> split_fields(const std::string &line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

std::ifstream open_input(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return in;
}

} // namespace

std::size_t GraphDataset::num_classes() const {
    if (!class_names.empty()) {
        return class_names.size();
    }
    int hi = -1;
    for (int l : labels) {
        hi = std::max(hi, l);
    }
    return static_cast<std::size_t>(hi + 1);
}

std::size_t GraphDataset::count(const std::vector<bool> &mask) const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

void GraphDataset::validate() const {
    if (static_cast<std::size_t>(features.rows()) != num_nodes ||
        labels.size() != num_nodes || train_mask.size() != num_nodes ||
        test_mask.size() != num_nodes) {
        throw std::invalid_argument("dataset arrays disagree with node count");
    }
    for (const auto &[a, b] : edges) {
        if (a >= num_nodes || b >= num_nodes) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        if (a == b) {
            throw std::invalid_argument("self-loops are not stored as edges");
        }
    }
    for (std::size_t i = 0; i < num_nodes; ++i) {
        if (train_mask[i] && test_mask[i]) {
            throw std::invalid_argument("train and test masks overlap");
        }
        if (train_mask[i] && labels[i] < 0) {
            throw std::invalid_argument("train node without a label");
        }
    }
}

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) {
        p <<= 1U;
    }
    return p;
}

GraphDataset load_cora(const std::filesystem::path &content_path,
                       const std::filesystem::path &cites_path,
                       std::size_t train_per_class) {
    GraphDataset ds;
    std::unordered_map<std::string, std::size_t> index_of;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> label_names;
    std::size_t dim = 0;
    bool dim_known = false;

    {
        auto in = open_input(content_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto fields = split_fields(line);
            if (fields.empty()) {
                continue;
            }
            if (fields.size() < 2) {
                throw ParseError(content_path.string() + ":" +
                                 std::to_string(line_no) +
                                 ": expected id, features and label");
            }
            const std::size_t d = fields.size() - 2;
            if (!dim_known) {
                dim = d;
                dim_known = true;
            } else if (d != dim) {
                throw ParseError(content_path.string() + ":" +
                                 std::to_string(line_no) + ": expected " +
                                 std::to_string(dim) + " features, found " +
                                 std::to_string(d));
            }
            const auto &id = fields.front();
            if (!index_of.emplace(id, rows.size()).second) {
                throw ParseError(content_path.string() + ":" +
                                 std::to_string(line_no) +
                                 ": duplicate node id " + id);
            }
            std::vector<double> row(d);
            for (std::size_t k = 0; k < d; ++k) {
                const auto &tok = fields[k + 1];
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(tok, &used);
                } catch (const std::exception &) {
                    used = 0;
                }
                if (used != tok.size()) {
                    throw ParseError(content_path.string() + ":" +
                                     std::to_string(line_no) +
                                     ": bad feature value '" + tok + "'");
                }
                row[k] = v;
            }
            rows.push_back(std::move(row));
            ds.node_ids.push_back(id);
            label_names.push_back(fields.back());
        }
    }

    ds.num_nodes = rows.size();
    ds.features.resize(static_cast<Eigen::Index>(ds.num_nodes),
                       static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < ds.num_nodes; ++i) {
        for (std::size_t k = 0; k < dim; ++k) {
            ds.features(static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(k)) = rows[i][k];
        }
    }

    std::set<std::string> distinct(label_names.begin(), label_names.end());
    ds.class_names.assign(distinct.begin(), distinct.end());
    ds.labels.resize(ds.num_nodes);
    for (std::size_t i = 0; i < ds.num_nodes; ++i) {
        const auto it = std::lower_bound(ds.class_names.begin(),
                                         ds.class_names.end(), label_names[i]);
        ds.labels[i] = static_cast<int>(it - ds.class_names.begin());
    }

    {
        auto in = open_input(cites_path);
        std::set<Edge> seen;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto fields = split_fields(line);
            if (fields.empty()) {
                continue;
            }
            if (fields.size() != 2) {
                throw ParseError(cites_path.string() + ":" +
                                 std::to_string(line_no) +
                                 ": expected two node ids");
            }
            std::size_t ends[2];
            for (int k = 0; k < 2; ++k) {
                const auto it = index_of.find(fields[k]);
                if (it == index_of.end()) {
                    throw ParseError(cites_path.string() + ":" +
                                     std::to_string(line_no) +
                                     ": unknown node id " + fields[k]);
                }
                ends[k] = it->second;
            }
            if (ends[0] == ends[1]) {
                continue;
            }
            Edge e{std::min(ends[0], ends[1]), std::max(ends[0], ends[1])};
            if (seen.insert(e).second) {
                ds.edges.push_back(e);
            }
        }
    }

    ds.train_mask.assign(ds.num_nodes, false);
    ds.test_mask.assign(ds.num_nodes, false);
    std::vector<std::size_t> taken(ds.class_names.size(), 0);
    for (std::size_t i = 0; i < ds.num_nodes; ++i) {
        const auto c = static_cast<std::size_t>(ds.labels[i]);
        if (taken[c] < train_per_class) {
            ++taken[c];
            ds.train_mask[i] = true;
        } else {
            ds.test_mask[i] = true;
        }
    }
    ds.validate();
    return ds;
}

void save_cora(const GraphDataset &dataset,
               const std::filesystem::path &content_path,
               const std::filesystem::path &cites_path) {
    std::ofstream content(content_path);
    std::ofstream cites(cites_path);
    if (!content || !cites) {
        throw IoError("cannot write dataset files next to " +
                      content_path.string());
    }
    auto id_of = [&](std::size_t i) {
        return i < dataset.node_ids.size() ? dataset.node_ids[i]
                                           : std::to_string(i);
    };
    auto label_of = [&](std::size_t i) {
        const int l = dataset.labels[i];
        if (l >= 0 && static_cast<std::size_t>(l) < dataset.class_names.size()) {
            return dataset.class_names[static_cast<std::size_t>(l)];
        }
        return "class_" + std::to_string(l);
    };
    content.precision(17);
    for (std::size_t i = 0; i < dataset.num_nodes; ++i) {
        content << id_of(i);
        for (Eigen::Index k = 0; k < dataset.features.cols(); ++k) {
            content << '\t' << dataset.features(static_cast<Eigen::Index>(i), k);
        }
        content << '\t' << label_of(i) << '\n';
    }
    for (const auto &[a, b] : dataset.edges) {
        cites << id_of(a) << '\t' << id_of(b) << '\n';
    }
    if (!content || !cites) {
        throw IoError("failed while writing " + content_path.string());
    }
}

Eigen::MatrixXd self_connected_adjacency(const GraphDataset &dataset) {
    const auto n = static_cast<Eigen::Index>(dataset.num_nodes);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (const auto &[i, j] : dataset.edges) {
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
        a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
    }
    return a;
}

Eigen::MatrixXd symmetric_normalize(const Eigen::MatrixXd &a) {
    const Eigen::VectorXd deg = a.rowwise().sum();
    if ((deg.array() <= 0.0).any()) {
        throw std::invalid_argument("every row needs a positive degree");
    }
    const Eigen::VectorXd s = deg.array().rsqrt();
    return s.asDiagonal() * a * s.asDiagonal();
}

NormalizedAdjacency normalize_adjacency(const GraphDataset &dataset) {
    NormalizedAdjacency out;
    out.num_nodes = dataset.num_nodes;
    const std::size_t padded = next_power_of_two(dataset.num_nodes);
    out.pad_count = padded - dataset.num_nodes;

    // Degrees straight from the edge list keeps this O(E) for large graphs.
    std::vector<double> deg(dataset.num_nodes, 1.0);
    for (const auto &[i, j] : dataset.edges) {
        deg[i] += 1.0;
        deg[j] += 1.0;
    }
    const auto np = static_cast<Eigen::Index>(padded);
    out.matrix = Eigen::MatrixXd::Zero(np, np);
    for (std::size_t i = 0; i < dataset.num_nodes; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        out.matrix(ii, ii) = 1.0 / deg[i];
    }
    for (const auto &[i, j] : dataset.edges) {
        const double v = 1.0 / std::sqrt(deg[i] * deg[j]);
        out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        out.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
    for (std::size_t i = dataset.num_nodes; i < padded; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        out.matrix(ii, ii) = 1.0;
    }
    return out;
}

Eigen::MatrixXd zero_pad(const Eigen::MatrixXd &m, std::size_t rows,
                         std::size_t cols) {
    if (rows < static_cast<std::size_t>(m.rows()) ||
        cols < static_cast<std::size_t>(m.cols())) {
        throw std::invalid_argument("padding cannot shrink a matrix");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                                static_cast<Eigen::Index>(cols));
    out.topLeftCorner(m.rows(), m.cols()) = m;
    return out;
}

StateVector amplitude_encode(const Eigen::MatrixXd &features) {
    const auto rows = static_cast<std::size_t>(features.rows());
    const auto cols = static_cast<std::size_t>(features.cols());
    if (rows == 0 || cols == 0 || next_power_of_two(rows) != rows ||
        next_power_of_two(cols) != cols) {
        throw std::invalid_argument(
            "amplitude encoding needs power-of-two matrix dimensions");
    }
    const double fro = features.norm();
    if (fro == 0.0) {
        throw std::invalid_argument("cannot amplitude-encode a zero matrix");
    }
    std::vector<Complex> amps(rows * cols);
    for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t d = 0; d < cols; ++d) {
            amps[j * cols + d] = features(static_cast<Eigen::Index>(j),
                                          static_cast<Eigen::Index>(d)) /
                                 fro;
        }
    }
    return StateVector::normalized(std::move(amps));
}

Eigen::MatrixXd grid_adjacency_1d(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("grid needs at least one node");
    }
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        a(i, i + 1) = 1.0;
        a(i + 1, i) = 1.0;
    }
    return a;
}

Eigen::MatrixXd grid_adjacency_2d(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("grid needs at least one node");
    }
    const auto m = static_cast<Eigen::Index>(n);
    const Eigen::MatrixXd band = grid_adjacency_1d(n);
    Eigen::MatrixXd v_side = band;  // V1 and V3
    Eigen::MatrixXd v_mid = band;   // V2
    v_side.row(0).setZero();
    v_side.row(m - 1).setZero();
    v_mid.row(0).setZero();
    v_mid.row(m - 1).setZero();
    v_mid(0, 0) = 1.0;
    v_mid(m - 1, m - 1) = 1.0;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m * m, m * m);
    a.block(0, 0, m, m).setIdentity();
    a.block((m - 1) * m, (m - 1) * m, m, m).setIdentity();
    for (Eigen::Index r = 1; r + 1 < m; ++r) {
        a.block(r * m, (r - 1) * m, m, m) = v_side;
        a.block(r * m, r * m, m, m) = v_mid;
        a.block(r * m, (r + 1) * m, m, m) = v_side;
    }
    return a;
}

GraphDataset dataset_from_adjacency(const Eigen::MatrixXd &a_tilde) {
    if (a_tilde.rows() != a_tilde.cols()) {
        throw std::invalid_argument("adjacency must be square");
    }
    GraphDataset ds;
    ds.num_nodes = static_cast<std::size_t>(a_tilde.rows());
    for (Eigen::Index i = 0; i < a_tilde.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < a_tilde.cols(); ++j) {
            if (a_tilde(i, j) != a_tilde(j, i)) {
                throw std::invalid_argument("adjacency must be symmetric");
            }
            if (a_tilde(i, j) != 0.0) {
                ds.edges.emplace_back(static_cast<std::size_t>(i),
                                      static_cast<std::size_t>(j));
            }
        }
    }
    ds.features = Eigen::MatrixXd::Ones(a_tilde.rows(), 1);
    ds.labels.assign(ds.num_nodes, -1);
    ds.train_mask.assign(ds.num_nodes, false);
    ds.test_mask.assign(ds.num_nodes, false);
    for (std::size_t i = 0; i < ds.num_nodes; ++i) {
        ds.node_ids.push_back(std::to_string(i));
    }
    return ds;
}

Eigen::MatrixXd demo_adjacency8() {
    Eigen::MatrixXd a(8, 8);
    a << 1, 1, 1, 0, 0, 1, 0, 0,  //
        1, 1, 0, 1, 1, 0, 0, 0,   //
        1, 0, 1, 0, 1, 0, 1, 0,   //
        0, 1, 0, 1, 0, 1, 0, 1,   //
        0, 1, 1, 0, 1, 1, 0, 0,   //
        1, 0, 0, 1, 1, 1, 0, 0,   //
        0, 0, 1, 0, 0, 0, 1, 0,   //
        0, 0, 0, 1, 0, 0, 0, 1;
    return a;
}

GraphDataset demo_graph8() {
    GraphDataset ds = dataset_from_adjacency(demo_adjacency8());
    ds.features.resize(8, 2);
    ds.class_names = {"even", "odd"};
    for (Eigen::Index j = 0; j < 8; ++j) {
        const int c = static_cast<int>(j % 2);
        const double off = 0.1 + 0.05 * static_cast<double>(j % 3);
        ds.features(j, c) = 1.0;
        ds.features(j, 1 - c) = off;
        ds.labels[static_cast<std::size_t>(j)] = c;
        ds.train_mask[static_cast<std::size_t>(j)] = j < 4;
        ds.test_mask[static_cast<std::size_t>(j)] = j >= 4;
    }
    ds.validate();
    return ds;
}

GraphDataset planted_partition(const PlantedPartitionConfig &config) {
    if (config.num_nodes == 0 || config.num_classes == 0 ||
        config.feature_dim == 0) {
        throw std::invalid_argument("planted partition needs positive sizes");
    }
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GraphDataset ds;
    ds.num_nodes = config.num_nodes;
    ds.labels.resize(ds.num_nodes);
    for (std::size_t i = 0; i < ds.num_nodes; ++i) {
        ds.labels[i] = static_cast<int>(rng() % config.num_classes);
        ds.node_ids.push_back(std::to_string(i));
    }
    for (std::size_t c = 0; c < config.num_classes; ++c) {
        ds.class_names.push_back("topic_" + std::to_string(c));
    }
    for (std::size_t i = 0; i < ds.num_nodes; ++i) {
        for (std::size_t j = i + 1; j < ds.num_nodes; ++j) {
            const double p =
                ds.labels[i] == ds.labels[j] ? config.p_in : config.p_out;
            if (unit(rng) < p) {
                ds.edges.emplace_back(i, j);
            }
        }
    }
    // Each class owns a contiguous slice of the vocabulary.
    const std::size_t slice =
        std::max<std::size_t>(1, config.feature_dim / config.num_classes);
    ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.num_nodes),
                                        static_cast<Eigen::Index>(config.feature_dim));
    for (std::size_t i = 0; i < ds.num_nodes; ++i) {
        const auto c = static_cast<std::size_t>(ds.labels[i]);
        for (std::size_t k = 0; k < config.feature_dim; ++k) {
            const bool topical = k / slice == c;
            const double p = config.word_rate + (topical ? config.topic_boost : 0.0);
            if (unit(rng) < p) {
                ds.features(static_cast<Eigen::Index>(i),
                            static_cast<Eigen::Index>(k)) = 1.0;
            }
        }
    }
    ds.train_mask.assign(ds.num_nodes, false);
    ds.test_mask.assign(ds.num_nodes, false);
    std::vector<std::size_t> taken(config.num_classes, 0);
    for (std::size_t i = 0; i < ds.num_nodes; ++i) {
        const auto c = static_cast<std::size_t>(ds.labels[i]);
        if (taken[c] < config.train_per_class) {
            ++taken[c];
            ds.train_mask[i] = true;
        } else {
            ds.test_mask[i] = true;
        }
    }
    ds.validate();
    return ds;
}

} // namespace qgcn
