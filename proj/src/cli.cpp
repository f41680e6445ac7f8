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
#include "qgcn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "qgcn/decompose.hpp"
#include "qgcn/lcu.hpp"
#include "qgcn/nsga2.hpp"
#include "qgcn/serialize.hpp"

namespace qgcn::cli {
namespace fs = std::filesystem;

namespace {

constexpr const char *kVersion = "1.0.0";

PlantedPartitionConfig cora_proxy_config(std::uint64_t seed) {
    PlantedPartitionConfig c;
    c.num_nodes = 2708;
    c.num_classes = 7;
    c.feature_dim = 1433;
    c.p_in = 0.0082;
    c.p_out = 0.00032;
    c.word_rate = 0.01;
    c.topic_boost = 0.02;
    c.train_per_class = 20;
    c.seed = seed;
    return c;
}

std::size_t parse_size(const std::string &text, const std::string &what) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos != text.size() || text.empty()) {
        throw std::invalid_argument("bad " + what + " '" + text + "'");
    }
    return static_cast<std::size_t>(v);
}

Eigen::MatrixXd pad_square(const Eigen::MatrixXd &m) {
    const auto n = next_power_of_two(static_cast<std::size_t>(m.rows()));
    return zero_pad(m, n, n);
}

Readout parse_readout(const std::string &s) {
    if (s == "node") return Readout::NodeConditional;
    if (s == "postselected") return Readout::Postselected;
    if (s == "joint") return Readout::Joint;
    throw std::invalid_argument("unknown readout '" + s + "'");
}

AdjacencyBackend parse_backend(const std::string &s) {
    if (s == "operator") return AdjacencyBackend::Operator;
    if (s == "circuit") return AdjacencyBackend::Circuit;
    if (s == "identity") return AdjacencyBackend::Identity;
    throw std::invalid_argument("unknown backend '" + s + "'");
}

GradMode parse_grad_mode(const std::string &s) {
    if (s == "analytic") return GradMode::Analytic;
    if (s == "psr") return GradMode::Psr;
    throw std::invalid_argument("unknown gradient mode '" + s + "'");
}

std::string compiler_id() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
}

Json versions() {
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
          << EIGEN_MINOR_VERSION;
    std::ostringstream json;
    json << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
         << NLOHMANN_JSON_VERSION_PATCH;
    return {{"qgcn", kVersion},
            {"eigen", eigen.str()},
            {"nlohmann_json", json.str()},
            {"cli11", CLI11_VERSION},
            {"compiler", compiler_id()},
            {"cxx_standard", __cplusplus}};
}

void write_manifest(const fs::path &dir, const std::string &command,
                    const std::vector<std::string> &argv, Json settings) {
    Json m;
    m["command"] = command;
    m["argv"] = argv;
    m["settings"] = std::move(settings);
    m["versions"] = versions();
    write_json(dir / "manifest.json", m);
}

fs::path prepare_out(const std::string &out) {
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    return dir;
}

std::ofstream open_out(const fs::path &path) {
    std::ofstream f(path);
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    return f;
}

// ------------------------------------------------------------ settings --

struct ModelSettings {
    std::string dataset = "demo";
    std::size_t blocks = 10;
    std::size_t hidden = 16;
    double lr = 0.2;
    double classical_lr = 0.0;  // 0: lr * sqrt(N)
    std::size_t epochs = 200;
    double drop_tol = 0.0;
    std::string grad_mode = "analytic";
    std::string readout = "node";
    std::string backend = "operator";
    bool freeze_classical = false;
    double psr_shift = kPsrShift;
    std::size_t train_per_class = 20;
    std::size_t log_every = 10;
};

Json model_settings_json(const ModelSettings &s) {
    return {{"dataset", s.dataset},
            {"blocks", s.blocks},
            {"hidden", s.hidden},
            {"lr", s.lr},
            {"classical_lr", s.classical_lr},
            {"epochs", s.epochs},
            {"drop_tol", s.drop_tol},
            {"grad_mode", s.grad_mode},
            {"readout", s.readout},
            {"backend", s.backend},
            {"freeze_classical", s.freeze_classical},
            {"psr_shift", s.psr_shift},
            {"train_per_class", s.train_per_class}};
}

void add_model_options(CLI::App *cmd, ModelSettings &s) {
    cmd->add_option("--dataset", s.dataset,
                    "demo | planted | cora-proxy | cora:<dir> | <prefix>")
        ->capture_default_str();
    cmd->add_option("--blocks", s.blocks, "PQC blocks in the quantum layer")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000}))
        ->capture_default_str();
    cmd->add_option("--hidden", s.hidden, "width of the classical layer")
        ->check(CLI::Range(std::size_t{1}, std::size_t{4096}))
        ->capture_default_str();
    cmd->add_option("--lr", s.lr, "step size for the circuit phases")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--classical-lr", s.classical_lr,
                    "step size for W0 (0 = lr * sqrt(nodes))")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--epochs", s.epochs, "training epochs")
        ->check(CLI::Range(std::size_t{0}, std::size_t{1000000}))
        ->capture_default_str();
    cmd->add_option("--drop-tol", s.drop_tol, "drop Pauli terms with |h| <= tol")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--grad-mode", s.grad_mode, "phase gradients")
        ->check(CLI::IsMember({"analytic", "psr"}))
        ->capture_default_str();
    cmd->add_option("--readout", s.readout, "class-score readout")
        ->check(CLI::IsMember({"node", "postselected", "joint"}))
        ->capture_default_str();
    cmd->add_option("--backend", s.backend, "adjacency stage")
        ->check(CLI::IsMember({"operator", "circuit", "identity"}))
        ->capture_default_str();
    cmd->add_flag("--freeze-classical", s.freeze_classical,
                  "keep W0 at its initial value");
    cmd->add_option("--train-per-class", s.train_per_class,
                    "labeled training nodes per class for file datasets")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--log-every", s.log_every, "progress line interval (0 = off)")
        ->capture_default_str();
    cmd->add_option("--psr-shift", s.psr_shift)->group("");
}

ModelOptions model_options(const ModelSettings &s) {
    ModelOptions o;
    o.hidden_dim = s.hidden;
    o.num_blocks = s.blocks;
    o.readout = parse_readout(s.readout);
    o.backend = parse_backend(s.backend);
    o.drop_tol = s.drop_tol;
    return o;
}

TrainState initial_state(const QgcnModel &model, const ModelSettings &s,
                         std::uint64_t seed) {
    TrainState st = init_state(model, seed, s.lr);
    if (s.classical_lr > 0.0) {
        st.classical_learning_rate = s.classical_lr;
    }
    st.grad_mode = parse_grad_mode(s.grad_mode);
    st.psr_shift = s.psr_shift;
    st.freeze_classical = s.freeze_classical;
    return st;
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

/// Trains for `epochs`, reporting every metrics row to `sink` (epoch 0 first).
template <typename Sink>
TrainState train_loop(QgcnModel &model, const GraphDataset &ds, TrainState st,
                      std::size_t epochs, std::size_t threads, Sink &&sink) {
    EpochMetrics m = evaluate_model(model, ds, st);
    m.epoch = st.epoch;
    st.history.push_back(m);
    sink(m);
    for (std::size_t e = 0; e < epochs; ++e) {
        auto [next, metrics] = train_epoch(model, ds, std::move(st), threads);
        st = std::move(next);
        sink(metrics);
    }
    return st;
}

// ------------------------------------------------------------ decompose --

struct DecomposeSettings {
    std::string dataset = "demo";
    std::string matrix = "self-connected";
    std::string mode = "pauli";
    bool optimize = false;
    double drop_tol = 0.0;
    std::size_t max_terms = 64;
    std::size_t population = 64;
    std::size_t generations = 100;
    double mutation_rate = 0.1;
    double crossover_rate = 0.9;
    std::size_t tournament = 2;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::string out = "out";
};

int cmd_decompose(const DecomposeSettings &s, const std::vector<std::string> &argv,
                  std::ostream &out) {
    const auto src = load_matrix(s.dataset, s.matrix == "normalized", s.seed);
    const std::size_t nq = qubits_for(static_cast<std::size_t>(src.matrix.rows()));
    if (nq > 10) {
        throw std::invalid_argument(
            "decompose handles at most 10 qubits; train uses the operator backend "
            "for larger graphs");
    }
    const bool nsga = s.optimize || s.mode == "nsga2";
    const auto dir = prepare_out(s.out);

    Decomposition decomp;
    Json front_doc;
    if (nsga) {
        SearchConfig cfg;
        cfg.population_size = s.population;
        cfg.generations = s.generations;
        cfg.mutation_rate = s.mutation_rate;
        cfg.crossover_rate = s.crossover_rate;
        cfg.tournament_size = s.tournament;
        cfg.seed = s.seed;
        cfg.threads = s.threads;
        auto result = search(src.matrix, cfg);
        if (result.front.empty()) {
            throw std::runtime_error("search returned an empty front");
        }
        front_doc = Json::array();
        for (std::size_t i = 0; i < result.front.size(); ++i) {
            front_doc.push_back(
                {{"objectives", objectives_to_json(result.front_objectives[i])},
                 {"decomposition", decomposition_to_json(result.front[i])}});
        }
        decomp = result.front.front();
    } else if (s.mode == "permutation") {
        decomp = permutation_decompose(src.matrix, s.max_terms);
    } else {
        decomp = pauli_decompose(src.matrix, s.drop_tol);
    }

    std::optional<LcuPlan> plan;
    if (!decomp.terms.empty()) {
        plan = assemble_lcu(decomp, RegisterLayout{0, nq, 0});
    }
    write_json(dir / "decomposition.json",
               decomposition_to_json(decomp, plan ? &*plan : nullptr));
    if (nsga) {
        write_json(dir / "front.json", front_doc);
    }

    const double p = plan ? plan->success_probability_estimate : 0.0;
    Json report = {{"matrix", src.description},
                   {"mode", nsga ? "nsga2" : s.mode},
                   {"terms", decomp.terms.size()},
                   {"residual_norm", decomp.residual_norm},
                   {"gate_cost", decomp.gate_cost()},
                   {"ancilla_count", plan ? plan->ancilla_count : 0},
                   {"success_probability", p}};
    if (nsga) {
        report["front_size"] = front_doc.size();
    }
    write_json(dir / "report.json", report);
    write_manifest(dir, "decompose", argv,
                   {{"dataset", s.dataset},
                    {"matrix", s.matrix},
                    {"mode", s.mode},
                    {"optimize", s.optimize},
                    {"drop_tol", s.drop_tol},
                    {"max_terms", s.max_terms},
                    {"population", s.population},
                    {"generations", s.generations},
                    {"mutation_rate", s.mutation_rate},
                    {"crossover_rate", s.crossover_rate},
                    {"tournament", s.tournament},
                    {"seed", s.seed},
                    {"threads", s.threads}});

    out << "matrix:              " << src.description << '\n'
        << "mode:                " << (nsga ? "nsga2" : s.mode) << '\n'
        << "terms:               " << decomp.terms.size() << '\n'
        << "residual (Frobenius): " << decomp.residual_norm << '\n'
        << "gate cost:           " << decomp.gate_cost() << '\n'
        << "ancilla qubits:      " << (plan ? plan->ancilla_count : 0) << '\n'
        << "success probability: " << p << '\n';
    if (nsga) {
        out << "front size:          " << front_doc.size() << '\n';
    }
    out << "wrote " << (dir / "decomposition.json").string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- train --

int cmd_train(const ModelSettings &s, std::uint64_t seed, double e_delta,
              std::size_t threads, const std::string &out_dir,
              const std::vector<std::string> &argv, std::ostream &out) {
    const auto ds = load_dataset(s.dataset, seed, s.train_per_class);
    auto opts = model_options(s);
    opts.e_delta = e_delta;
    opts.noise_seed = seed;
    auto model = build_model(ds, opts);
    auto state = initial_state(model, s, seed);

    const auto dir = prepare_out(out_dir);
    Json settings = model_settings_json(s);
    settings["seed"] = seed;
    settings["e_delta"] = e_delta;
    settings["threads"] = threads;
    settings["effective_classical_lr"] = state.classical_learning_rate;
    write_manifest(dir, "train", argv, settings);

    auto jsonl = open_out(dir / "metrics.jsonl");
    auto csv = open_out(dir / "metrics.csv");
    csv << "epoch,loss,train_acc,test_acc,success_prob\n";
    csv << std::setprecision(17);
    out << "nodes " << ds.num_nodes << ", classes " << ds.num_classes()
        << ", adjacency terms " << model.quantum.adjacency.term_count()
        << ", ancillas " << model.quantum.adjacency.ancilla_count()
        << ", phases " << model.quantum.num_phases() << '\n';

    auto sink = [&](const EpochMetrics &m) {
        jsonl << metrics_to_json(m).dump() << '\n';
        csv << m.epoch << ',' << m.loss << ',' << m.train_acc << ',' << m.test_acc
            << ',' << m.success_prob << '\n';
        jsonl.flush();
        csv.flush();
        if (s.log_every > 0 && (m.epoch % s.log_every == 0 || m.epoch == s.epochs)) {
            out << "epoch " << m.epoch << "  loss " << fmt(m.loss) << "  train "
                << fmt(m.train_acc) << "  test " << fmt(m.test_acc) << '\n';
        }
    };
    state = train_loop(model, ds, std::move(state), s.epochs, threads, sink);
    write_json(dir / "checkpoint.json", checkpoint_to_json(state));
    out << "final test accuracy: " << fmt(state.history.back().test_acc) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------- noise sweep --

int cmd_noise_sweep(const ModelSettings &s, std::uint64_t seed,
                    const std::vector<double> &e_deltas, std::size_t seeds,
                    bool ablation, std::size_t threads, const std::string &out_dir,
                    const std::vector<std::string> &argv, std::ostream &out) {
    for (double e : e_deltas) {
        if (!(e >= 0.0 && e <= 1.0)) {
            throw std::invalid_argument("e-delta values must lie in [0, 1]");
        }
    }
    const auto dir = prepare_out(out_dir);
    Json settings = model_settings_json(s);
    settings["seed"] = seed;
    settings["seeds"] = seeds;
    settings["e_deltas"] = e_deltas;
    settings["ablation"] = ablation;
    settings["threads"] = threads;
    write_manifest(dir, "noise-sweep", argv, settings);

    auto rows = open_out(dir / "sweep.jsonl");
    auto summary = open_out(dir / "summary.csv");
    summary << "setting,e_delta,mean_test_acc,min_test_acc,max_test_acc\n";

    struct Setting {
        std::string name;
        double e_delta;
        bool identity;
    };
    std::vector<Setting> grid;
    for (double e : e_deltas) {
        grid.push_back({"e_delta=" + fmt(e, 3), e, false});
    }
    if (ablation) {
        grid.push_back({"no_adjacency", 0.0, true});
    }

    // The dataset depends only on the first seed so every setting sees the
    // same graph.
    const auto ds = load_dataset(s.dataset, seed, s.train_per_class);
    for (const auto &g : grid) {
        std::vector<double> accs;
        for (std::size_t k = 0; k < seeds; ++k) {
            const std::uint64_t run_seed = seed + k;
            auto opts = model_options(s);
            opts.e_delta = g.e_delta;
            opts.noise_seed = run_seed;
            if (g.identity) {
                opts.backend = AdjacencyBackend::Identity;
            }
            auto model = build_model(ds, opts);
            auto st = initial_state(model, s, run_seed);
            st = train_loop(model, ds, std::move(st), s.epochs, threads,
                            [](const EpochMetrics &) {});
            const auto &m = st.history.back();
            Json row = {{"setting", g.name},
                        {"e_delta", g.identity ? Json(nullptr) : Json(g.e_delta)},
                        {"seed", run_seed}};
            const Json metrics = metrics_to_json(m);
            row.update(metrics);
            rows << row.dump() << '\n';
            rows.flush();
            accs.push_back(m.test_acc);
            out << g.name << "  seed " << run_seed << "  test " << fmt(m.test_acc)
                << '\n';
        }
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(std::max<std::size_t>(accs.size(), 1));
        const auto [lo, hi] = std::minmax_element(accs.begin(), accs.end());
        summary << g.name << ',' << (g.identity ? std::string() : fmt(g.e_delta, 6))
                << ',' << fmt(mean, 6) << ',' << (accs.empty() ? 0.0 : *lo) << ','
                << (accs.empty() ? 0.0 : *hi) << '\n';
        out << g.name << "  mean test " << fmt(mean) << '\n';
    }
    return kExitOk;
}

// ------------------------------------------------------------ gradcheck --

int cmd_gradcheck(const GradcheckConfig &c, const std::string &out_dir,
                  const std::vector<std::string> &argv, std::ostream &out) {
    const auto report = run_gradcheck(c);
    if (!out_dir.empty()) {
        const auto dir = prepare_out(out_dir);
        write_manifest(dir, "gradcheck", argv,
                       {{"dataset", c.dataset},
                        {"blocks", c.blocks},
                        {"hidden", c.hidden},
                        {"samples", c.samples},
                        {"zero_phase", c.zero_phase},
                        {"psr_shift", c.psr_shift},
                        {"seed", c.seed},
                        {"threads", c.threads}});
    }
    const auto &w = report.worst;
    out << "samples " << report.samples << ", comparisons " << report.comparisons
        << ", max relative error " << std::scientific << std::setprecision(3)
        << w.relative_error << std::defaultfloat << '\n';
    out << "worst: sample " << w.sample << " phase " << w.phase << "  psr "
        << std::setprecision(12) << w.psr << "  analytic " << w.analytic << "  fd "
        << w.finite_difference << std::setprecision(6) << '\n';
    out << (report.passed() ? "PASS" : "FAIL") << '\n';
    return report.passed() ? kExitOk : kExitValidation;
}

// ------------------------------------------------------------- generate --

int cmd_generate(const std::string &kind, std::size_t size, std::uint64_t seed,
                 const std::string &out_dir, const std::vector<std::string> &argv,
                 std::ostream &out) {
    const auto dir = prepare_out(out_dir);
    Eigen::MatrixXd adjacency;
    std::optional<GraphDataset> ds;
    if (kind == "demo") {
        ds = demo_graph8();
    } else if (kind == "planted") {
        PlantedPartitionConfig c;
        c.num_nodes = size;
        c.seed = seed;
        ds = planted_partition(c);
    } else if (kind == "cora-proxy") {
        ds = planted_partition(cora_proxy_config(seed));
    } else if (kind == "grid1d") {
        adjacency = grid_adjacency_1d(size);
        ds = dataset_from_adjacency(adjacency);
    } else {
        adjacency = grid_adjacency_2d(size);
    }
    if (ds && adjacency.size() == 0) {
        adjacency = self_connected_adjacency(*ds);
    }
    if (ds) {
        save_cora(*ds, dir / (kind + ".content"), dir / (kind + ".cites"));
    }
    std::vector<double> data;
    for (Eigen::Index r = 0; r < adjacency.rows(); ++r) {
        for (Eigen::Index c = 0; c < adjacency.cols(); ++c) {
            data.push_back(adjacency(r, c));
        }
    }
    write_json(dir / (kind + "_adjacency.json"),
               {{"rows", adjacency.rows()}, {"cols", adjacency.cols()}, {"data", data}});
    write_manifest(dir, "generate", argv,
                   {{"kind", kind}, {"size", size}, {"seed", seed}});
    out << "generated " << kind << " (" << adjacency.rows() << " nodes) in "
        << dir.string() << '\n';
    return kExitOk;
}

/**
 * Folds `--config FILE` into the argument list. Each `key = value` line
 * becomes `--key=value` right after the subcommand unless `--key` is given
 * on the command line; blank lines and `#` comments are skipped.
 */
std::vector<std::string> merge_config(const std::vector<std::string> &args) {
    std::string path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty() || rest.size() < 2) {
        return rest;
    }
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path);
    }
    auto given = [&](const std::string &key) {
        const std::string flag = "--" + key;
        return std::any_of(rest.begin() + 2, rest.end(), [&](const std::string &a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    };
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::vector<std::string> injected;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config") {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad key");
        }
        if (!given(key)) {
            injected.push_back("--" + key + "=" + value);
        }
    }
    rest.insert(rest.begin() + 2, injected.begin(), injected.end());
    return rest;
}

} // namespace

// ---------------------------------------------------------------- public --

GraphDataset load_dataset(const std::string &spec, std::uint64_t seed,
                          std::size_t train_per_class) {
    if (spec == "demo") {
        return demo_graph8();
    }
    if (spec == "planted") {
        PlantedPartitionConfig c;
        c.seed = seed;
        return planted_partition(c);
    }
    if (spec == "cora-proxy") {
        return planted_partition(cora_proxy_config(seed));
    }
    if (spec.rfind("cora:", 0) == 0) {
        const fs::path dir = spec.substr(5);
        return load_cora(dir / "cora.content", dir / "cora.cites", train_per_class);
    }
    return load_cora(spec + ".content", spec + ".cites", train_per_class);
}

MatrixSource load_matrix(const std::string &spec, bool normalized,
                         std::uint64_t seed) {
    if (spec.rfind("grid1d:", 0) == 0) {
        const auto n = parse_size(spec.substr(7), "grid size");
        return {pad_square(grid_adjacency_1d(n)), spec};
    }
    if (spec.rfind("grid2d:", 0) == 0) {
        const auto n = parse_size(spec.substr(7), "grid size");
        return {pad_square(grid_adjacency_2d(n)), spec};
    }
    const auto ds = load_dataset(spec, seed);
    if (normalized) {
        return {normalize_adjacency(ds).matrix, spec + " (normalized)"};
    }
    return {pad_square(self_connected_adjacency(ds)), spec + " (self-connected)"};
}

double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

GradcheckReport run_gradcheck(const GradcheckConfig &c) {
    if (c.samples == 0) {
        throw std::invalid_argument("gradcheck needs at least one sample");
    }
    const auto ds = load_dataset(c.dataset, c.seed);
    ModelOptions opts;
    opts.hidden_dim = c.hidden;
    opts.num_blocks = c.blocks;
    opts.readout = c.readout;
    opts.backend = c.backend;
    auto model = build_model(ds, opts);
    const auto &layout = model.quantum.layout;
    if (layout.node_qubits + layout.dim_qubits > 6) {
        throw std::invalid_argument("gradcheck is limited to six node + dimension qubits");
    }

    GradcheckReport report;
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    for (std::size_t s = 0; s < c.samples; ++s) {
        TrainState st = init_state(model, c.seed + 1 + s, 0.2);
        for (auto &t : st.theta) {
            t = c.zero_phase ? 0.0 : phase(rng);
        }
        model.quantum.set_phases(st.theta);
        const auto fwd = classical_forward(model, st);
        const StateVector input = StateVector::from_amplitudes(fwd.amplitudes);

        const auto analytic = analytic_gradient(model.quantum, fwd.amplitudes,
                                                ds.labels, ds.train_mask);
        const auto psr = psr_gradients(model.quantum, input, ds.labels, ds.train_mask,
                                       c.psr_shift, c.threads);
        const auto fd = finite_difference_gradient(model.quantum, input, ds.labels,
                                                   ds.train_mask, c.fd_step);
        for (std::size_t t = 0; t < psr.size(); ++t) {
            GradcheckEntry e{s, t, psr[t], analytic.phases[t], fd[t], 0.0};
            e.relative_error = std::max({relative_error(e.psr, e.analytic),
                                         relative_error(e.psr, e.finite_difference),
                                         relative_error(e.analytic, e.finite_difference)});
            if (report.comparisons == 0 || e.relative_error > report.worst.relative_error) {
                report.worst = e;
            }
            ++report.comparisons;
        }
        ++report.samples;
    }
    return report;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Quantum graph convolutional network toolkit", "qgcn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // decompose
    DecomposeSettings dec;
    auto *decompose = app.add_subcommand("decompose", "decompose an adjacency matrix");
    decompose->add_option("--dataset", dec.dataset,
                          "dataset spec, grid1d:<n> or grid2d:<n>")
        ->capture_default_str();
    decompose->add_option("--matrix", dec.matrix, "which adjacency to decompose")
        ->check(CLI::IsMember({"self-connected", "normalized"}))
        ->capture_default_str();
    decompose->add_option("--mode", dec.mode, "decomposition route")
        ->check(CLI::IsMember({"pauli", "permutation", "nsga2"}))
        ->capture_default_str();
    decompose->add_flag("--optimize", dec.optimize, "run the multi-objective search");
    decompose->add_option("--drop-tol", dec.drop_tol, "drop Pauli terms with |h| <= tol")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    decompose->add_option("--max-terms", dec.max_terms, "permutation rounds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    decompose->add_option("--population", dec.population)
        ->check(CLI::Range(std::size_t{4}, std::size_t{100000}))
        ->capture_default_str();
    decompose->add_option("--generations", dec.generations)->capture_default_str();
    decompose->add_option("--mutation-rate", dec.mutation_rate)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    decompose->add_option("--crossover-rate", dec.crossover_rate)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    decompose->add_option("--tournament", dec.tournament)
        ->check(CLI::Range(std::size_t{1}, std::size_t{64}))
        ->capture_default_str();
    decompose->add_option("--seed", dec.seed, "search seed")->capture_default_str();
    decompose->add_option("--threads", dec.threads, "0 = all cores")
        ->capture_default_str();
    decompose->add_option("--out", dec.out, "output directory")->capture_default_str();

    // train
    ModelSettings tr;
    std::uint64_t train_seed = 0;
    double train_e_delta = 0.0;
    std::size_t train_threads = 1;
    std::string train_out = "out";
    auto *train = app.add_subcommand("train", "train the hybrid model");
    add_model_options(train, tr);
    train->add_option("--seed", train_seed, "run seed")->required();
    train->add_option("--e-delta", train_e_delta, "adjacency noise level")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    train->add_option("--threads", train_threads, "0 = all cores")->capture_default_str();
    train->add_option("--out", train_out, "output directory")->capture_default_str();

    // noise-sweep
    ModelSettings sw;
    std::uint64_t sweep_seed = 0;
    std::vector<double> e_deltas{0.01, 0.05, 0.1, 0.2};
    std::size_t sweep_seeds = 3;
    bool no_ablation = false;
    std::size_t sweep_threads = 1;
    std::string sweep_out = "out";
    auto *sweep = app.add_subcommand("noise-sweep", "accuracy against adjacency noise");
    add_model_options(sweep, sw);
    sweep->add_option("--seed", sweep_seed, "first seed")->required();
    sweep->add_option("--e-delta", e_deltas, "noise levels")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--seeds", sweep_seeds, "seeds per setting")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_flag("--no-ablation", no_ablation, "skip the run without adjacency");
    sweep->add_option("--threads", sweep_threads, "0 = all cores")->capture_default_str();
    sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();

    // gradcheck
    GradcheckConfig gc;
    std::string gc_readout = "node";
    std::string gc_backend = "operator";
    std::string gc_out;
    auto *gradcheck = app.add_subcommand("gradcheck", "compare gradient routes");
    gradcheck->add_option("--dataset", gc.dataset)->capture_default_str();
    gradcheck->add_option("--blocks", gc.blocks)
        ->check(CLI::Range(std::size_t{1}, std::size_t{100}))
        ->capture_default_str();
    gradcheck->add_option("--hidden", gc.hidden)
        ->check(CLI::Range(std::size_t{1}, std::size_t{64}))
        ->capture_default_str();
    gradcheck->add_option("--samples", gc.samples)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gradcheck->add_option("--readout", gc_readout)
        ->check(CLI::IsMember({"node", "postselected", "joint"}))
        ->capture_default_str();
    gradcheck->add_option("--backend", gc_backend)
        ->check(CLI::IsMember({"operator", "circuit"}))
        ->capture_default_str();
    gradcheck->add_flag("--zero-phase", gc.zero_phase, "all phases zero");
    gradcheck->add_option("--seed", gc.seed)->capture_default_str();
    gradcheck->add_option("--threads", gc.threads)->capture_default_str();
    gradcheck->add_option("--out", gc_out, "directory for the manifest");
    gradcheck->add_option("--psr-shift", gc.psr_shift)->group("");

    // generate
    std::string gen_kind = "demo";
    std::size_t gen_size = 8;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "out";
    auto *generate = app.add_subcommand("generate", "write a synthetic graph");
    generate->add_option("--kind", gen_kind)
        ->check(CLI::IsMember({"demo", "grid1d", "grid2d", "planted", "cora-proxy"}))
        ->capture_default_str();
    generate->add_option("--size", gen_size, "nodes (grid1d, planted) or side (grid2d)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 16))
        ->capture_default_str();
    generate->add_option("--seed", gen_seed)->capture_default_str();
    generate->add_option("--out", gen_out)->capture_default_str();

    std::string config_path;
    for (auto *sub : {decompose, train, sweep, gradcheck, generate}) {
        sub->add_option("--config", config_path, "flat key = value settings file");
    }

    std::vector<std::string> merged;
    try {
        merged = merge_config(args);
    } catch (const IoError &e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    std::vector<const char *> merged_argv;
    for (const auto &a : merged) {
        merged_argv.push_back(a.c_str());
    }

    try {
        app.parse(static_cast<int>(merged_argv.size()), merged_argv.data());
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*decompose) {
            return cmd_decompose(dec, args, out);
        }
        if (*train) {
            return cmd_train(tr, train_seed, train_e_delta, train_threads, train_out,
                             args, out);
        }
        if (*sweep) {
            return cmd_noise_sweep(sw, sweep_seed, e_deltas, sweep_seeds, !no_ablation,
                                   sweep_threads, sweep_out, args, out);
        }
        if (*gradcheck) {
            gc.readout = parse_readout(gc_readout);
            gc.backend = parse_backend(gc_backend);
            return cmd_gradcheck(gc, gc_out, args, out);
        }
        return cmd_generate(gen_kind, gen_size, gen_seed, gen_out, args, out);
    } catch (const IoError &e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const DivergenceError &e) {
        err << "diverged: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

} // namespace qgcn::cli
