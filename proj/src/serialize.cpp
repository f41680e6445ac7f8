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
#include "qgcn/serialize.hpp"

#include <fstream>
#include <iomanip>

#include "qgcn/graphdata.hpp"

namespace qgcn {

Json gate_to_json(const GateOp &gate) {
    Json j;
    j["gate"] = gate.name();
    j["targets"] = gate.targets();
    Json controls = Json::array();
    for (const auto &c : gate.controls()) {
        controls.push_back({{"qubit", c.qubit}, {"on_one", c.on_one}});
    }
    j["controls"] = controls;
    if (gate.kind() == GateKind::Ry) {
        j["angle"] = gate.angle();
    }
    if (gate.kind() == GateKind::Unitary) {
        Json rows = Json::array();
        const auto &m = gate.matrix();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                row.push_back({m(r, c).real(), m(r, c).imag()});
            }
            rows.push_back(row);
        }
        j["matrix"] = rows;
    }
    return j;
}

Json circuit_to_json(std::span<const GateOp> circuit) {
    Json out = Json::array();
    for (const auto &g : circuit) {
        out.push_back(gate_to_json(g));
    }
    return out;
}

Json decomposition_to_json(const Decomposition &decomp, const LcuPlan *plan) {
    Json doc;
    doc["target_dim"] = decomp.target.rows();
    Json terms = Json::array();
    for (const auto &t : decomp.terms) {
        Json j;
        j["h"] = t.weight;
        if (const auto *axes = std::get_if<std::string>(&t.form)) {
            j["kind"] = "pauli";
            j["axes"] = *axes;
        } else {
            const auto &p = std::get<SignedPermutation>(t.form);
            j["kind"] = "perm";
            j["mapping"] = p.mapping;
            j["signs"] = p.signs;
        }
        j["gate_cost"] = gate_complexity(t.circuit);
        j["circuit"] = circuit_to_json(t.circuit);
        terms.push_back(j);
    }
    doc["terms"] = terms;
    doc["residual_norm"] = decomp.residual_norm;
    if (plan != nullptr) {
        const Eigen::VectorXd first = plan->prep_first_column();
        doc["lcu"] = {{"ancilla_count", plan->ancilla_count},
                      {"prep_first_column",
                       std::vector<double>(first.data(), first.data() + first.size())},
                      {"scale", plan->scale},
                      {"success_probability", plan->success_probability_estimate}};
    }
    return doc;
}

Decomposition decomposition_from_json(const Json &doc, const Eigen::MatrixXd &target) {
    try {
        if (doc.at("target_dim").get<Eigen::Index>() != target.rows()) {
            throw ParseError("decomposition does not match the target size");
        }
        std::vector<UnitaryTerm> terms;
        for (const auto &t : doc.at("terms")) {
            const double h = t.at("h").get<double>();
            const auto kind = t.at("kind").get<std::string>();
            if (kind == "pauli") {
                terms.push_back(pauli_term(t.at("axes").get<std::string>(), h));
            } else if (kind == "perm") {
                SignedPermutation p;
                p.mapping = t.at("mapping").get<std::vector<std::size_t>>();
                p.signs = t.at("signs").get<std::vector<int>>();
                terms.push_back(permutation_term(std::move(p), h));
            } else {
                throw ParseError("unknown term kind '" + kind + "'");
            }
        }
        return make_decomposition(target, std::move(terms));
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("malformed decomposition: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw ParseError(std::string("invalid decomposition: ") + e.what());
    }
}

Json objectives_to_json(const ObjectiveVector &o) {
    return {{"gate_cost", o.gate_cost},
            {"neg_success_prob", o.neg_success_prob},
            {"residual", o.residual}};
}

Json metrics_to_json(const EpochMetrics &m) {
    return {{"epoch", m.epoch},
            {"loss", m.loss},
            {"train_acc", m.train_acc},
            {"test_acc", m.test_acc},
            {"success_prob", m.success_prob}};
}

EpochMetrics metrics_from_json(const Json &j) {
    EpochMetrics m;
    m.epoch = j.at("epoch").get<std::size_t>();
    m.loss = j.at("loss").get<double>();
    m.train_acc = j.at("train_acc").get<double>();
    m.test_acc = j.at("test_acc").get<double>();
    m.success_prob = j.at("success_prob").get<double>();
    return m;
}

Json checkpoint_to_json(const TrainState &state) {
    Json j;
    j["epoch"] = state.epoch;
    j["theta"] = state.theta;
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(state.weight.size()));
    for (Eigen::Index r = 0; r < state.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < state.weight.cols(); ++c) {
            data.push_back(state.weight(r, c));
        }
    }
    j["W0"] = {{"rows", state.weight.rows()},
               {"cols", state.weight.cols()},
               {"data", data}};
    j["lr"] = state.learning_rate;
    j["classical_lr"] = state.classical_learning_rate;
    j["seed"] = state.seed;
    Json history = Json::array();
    for (const auto &m : state.history) {
        history.push_back(metrics_to_json(m));
    }
    j["metrics"] = history;
    return j;
}

TrainState checkpoint_from_json(const Json &j) {
    try {
        TrainState s;
        s.epoch = j.at("epoch").get<std::size_t>();
        s.theta = j.at("theta").get<std::vector<double>>();
        const auto &w = j.at("W0");
        const auto rows = w.at("rows").get<Eigen::Index>();
        const auto cols = w.at("cols").get<Eigen::Index>();
        const auto data = w.at("data").get<std::vector<double>>();
        if (rows < 0 || cols < 0 ||
            data.size() != static_cast<std::size_t>(rows * cols)) {
            throw ParseError("W0 data does not match its shape");
        }
        s.weight.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                s.weight(r, c) = data[static_cast<std::size_t>(r * cols + c)];
            }
        }
        s.learning_rate = j.at("lr").get<double>();
        s.classical_learning_rate = j.value("classical_lr", s.learning_rate);
        s.seed = j.at("seed").get<std::uint64_t>();
        for (const auto &m : j.at("metrics")) {
            s.history.push_back(metrics_from_json(m));
        }
        return s;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }
}

void write_json(const std::filesystem::path &path, const Json &doc) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << std::setw(2) << doc << '\n';
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

Json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace qgcn
