// Copyright 2026 The qcdft Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// qcdft command-line driver.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <qcdft/qcdft.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::string out = ".";
    std::uint64_t seed = 0;
    int verbosity = 1;
};

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Collects outputs of one run and writes `<subcommand>.manifest.json`.
class Run {
  public:
    Run(std::string subcommand, const Globals &g, std::vector<std::string> args)
        : sub_(std::move(subcommand)), g_(g), args_(std::move(args)), started_(utc_now()) {
        fs::create_directories(g_.out);
    }

    json params = json::object();

    fs::path path(const std::string &name) const { return fs::path(g_.out) / name; }

    std::ofstream open(const std::string &name) {
        const fs::path p = path(name);
        std::ofstream os(p, std::ios::binary);
        if (!os) {
            throw qcdft::Error("cannot write " + p.string());
        }
        outputs_.push_back(p.string());
        return os;
    }

    void note_output(const fs::path &p) { outputs_.push_back(p.string()); }

    void log(const std::string &msg) const {
        if (g_.verbosity > 0) {
            std::cerr << msg << '\n';
        }
    }

    void finish() const {
        json m;
        m["tool_version"] = QCDFT_VERSION;
        m["subcommand"] = sub_;
        m["params"] = params;
        m["seed"] = g_.seed;
        m["started_at"] = started_;
        m["outputs"] = outputs_;
        m["args"] = args_;
        const fs::path p = path(sub_ + ".manifest.json");
        std::ofstream os(p, std::ios::binary);
        os << m.dump(2) << '\n';
        if (!os) {
            throw qcdft::Error("cannot write " + p.string());
        }
        log("manifest: " + p.string());
    }

  private:
    std::string sub_;
    Globals g_;
    std::vector<std::string> args_;
    std::string started_;
    std::vector<std::string> outputs_;
};

std::vector<std::size_t> parse_widths(const std::string &s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        const unsigned long v = std::stoul(tok, &used);
        if (used != tok.size() || v == 0) {
            throw qcdft::InvalidParameterError("invalid layer width '" + tok + "'");
        }
        out.push_back(v);
    }
    return out;
}

qcdft::CnotFunctional load_functional(const std::string &model_c, const std::string &model_t) {
    return qcdft::corrected_functional(qcdft::load_model(model_c), qcdft::load_model(model_t));
}

// ---------------------------------------------------------------------------

struct GenDataOpts {
    std::size_t n_samples = 300;
};

void run_gen_data(Run &run, const Globals &g, const GenDataOpts &o) {
    run.params = {{"n_samples", o.n_samples}};
    const auto data =
        qcdft::generate_dataset(o.n_samples, qcdft::TrainSeeds::derive(g.seed).data);
    auto os = run.open("dataset.csv");
    qcdft::write_dataset_csv(os, data);
    run.log("wrote " + std::to_string(data.size()) + " samples");
}

struct TrainOpts {
    std::size_t n_samples = 300;
    std::size_t epochs = 500;
    double lr = 1e-5;
    std::size_t batch_size = 1;
    std::string layers = "6,64,64,128,256,512,1024,16";
    std::string data;
};

void run_train(Run &run, const Globals &g, const TrainOpts &o) {
    qcdft::TrainConfig cfg;
    cfg.n_samples = o.n_samples;
    cfg.epochs = o.epochs;
    cfg.learning_rate = o.lr;
    cfg.batch_size = o.batch_size;
    cfg.seed = g.seed;
    cfg.layer_widths = parse_widths(o.layers);
    cfg.validate();
    run.params = {{"n_samples", o.n_samples}, {"epochs", o.epochs},
                  {"learning_rate", o.lr},    {"batch_size", o.batch_size},
                  {"layer_widths", cfg.layer_widths}, {"data", o.data}};

    std::vector<qcdft::TrainingSample> data;
    if (o.data.empty()) {
        data = qcdft::generate_dataset(cfg.n_samples, qcdft::TrainSeeds::derive(g.seed).data);
    } else {
        std::ifstream in(o.data);
        if (!in) {
            throw qcdft::Error("cannot read " + o.data);
        }
        data = qcdft::read_dataset_csv(in);
    }
    const auto result = qcdft::train(cfg, data, [&](std::size_t epoch, const qcdft::EpochLoss &l) {
        if (g.verbosity > 1 || (g.verbosity > 0 && epoch % 50 == 0)) {
            std::cerr << "epoch " << epoch << " rms1f " << l.combined << '\n';
        }
    });
    qcdft::save_model(result.model_c, run.path("model_c.json").string());
    run.note_output(run.path("model_c.json"));
    qcdft::save_model(result.model_t, run.path("model_t.json").string());
    run.note_output(run.path("model_t.json"));
    auto os = run.open("history.csv");
    os << std::setprecision(17) << "epoch,rms1f_control,rms1f_target,rms1f\n";
    os << 0 << ',' << result.initial.control << ',' << result.initial.target << ','
       << result.initial.combined << '\n';
    for (std::size_t e = 0; e < result.history.size(); ++e) {
        const auto &l = result.history[e];
        os << e + 1 << ',' << l.control << ',' << l.target << ',' << l.combined << '\n';
    }
}

struct BenchOpts {
    std::string model_c, model_t;
    bool zero_theta = false;
    std::size_t n_qubits = 10;
    std::size_t steps = 150;
    std::size_t circuits = 300;
    double cnot_weight = 8.0;
};

void run_bench(Run &run, const Globals &g, const BenchOpts &o) {
    if (!o.zero_theta && (o.model_c.empty() || o.model_t.empty())) {
        throw qcdft::InvalidParameterError("bench needs --model-c and --model-t, or --zero-theta");
    }
    run.params = {{"model_c", o.model_c},   {"model_t", o.model_t},
                  {"zero_theta", o.zero_theta}, {"n_qubits", o.n_qubits},
                  {"steps", o.steps},       {"circuits", o.circuits},
                  {"cnot_weight", o.cnot_weight}};
    const auto f = o.zero_theta ? qcdft::CnotFunctional::constant({})
                                : load_functional(o.model_c, o.model_t);
    qcdft::RandomCircuitConfig base{o.n_qubits, o.steps, o.cnot_weight, g.seed};
    base.validate();
    const auto result = qcdft::aggregate(qcdft::circuit_family(base, o.circuits), f);
    auto os = run.open("metrics.csv");
    qcdft::write_metrics_csv(os, result.metrics);
    const auto &last = result.metrics.back();
    run.log("final step: sqp_err_diff " + std::to_string(last.sqp_error_diff()) +
            ", mean_fid_diff " + std::to_string(last.mean_fid_diff()));
}

struct TimingOpts {
    std::string model_c, model_t;
    std::vector<std::size_t> qubits{2, 4, 6, 8, 10, 12, 14, 16};
    std::size_t gates = 10;
    std::size_t repeats = 10;
    double cnot_weight = 8.0;
};

void run_timing(Run &run, const Globals &g, const TimingOpts &o) {
    run.params = {{"model_c", o.model_c}, {"model_t", o.model_t}, {"qubits", o.qubits},
                  {"gates", o.gates},     {"repeats", o.repeats}, {"cnot_weight", o.cnot_weight}};
    // Untrained default-size networks have the same inference cost as trained ones.
    const auto f = (o.model_c.empty() || o.model_t.empty())
                       ? qcdft::corrected_functional(
                             qcdft::make_initialized_model(qcdft::default_layer_widths, g.seed),
                             qcdft::make_initialized_model(qcdft::default_layer_widths, g.seed + 1,
                                                           qcdft::ModelRole::target))
                       : load_functional(o.model_c, o.model_t);
    qcdft::TimingConfig cfg;
    cfg.qubit_counts = o.qubits;
    cfg.gates_per_point = o.gates;
    cfg.repeats = o.repeats;
    cfg.cnot_weight = o.cnot_weight;
    cfg.seed = g.seed;
    const auto recs = qcdft::timing_bench(cfg, f);
    auto os = run.open("timing.csv");
    qcdft::write_timing_csv(os, recs);
}

struct GroverOpts {
    std::size_t n = 5;
    std::vector<std::string> solutions{"10110"};
    std::size_t iterations = 4;
    std::size_t decode_iteration = 1;
    double tie_tolerance = 0.05;
};

void run_grover(Run &run, const Globals &, const GroverOpts &o) {
    run.params = {{"n", o.n},
                  {"solutions", o.solutions},
                  {"iterations", o.iterations},
                  {"decode_iteration", o.decode_iteration},
                  {"tie_tolerance", o.tie_tolerance}};
    const qcdft::GroverSpec spec{o.n, o.solutions, o.iterations};
    const auto table = qcdft::grover_sqp_table(spec);
    auto os = run.open("grover.csv");
    qcdft::write_grover_csv(os, table);
    if (o.decode_iteration > o.iterations) {
        throw qcdft::InvalidParameterError("--decode-iteration exceeds --iterations");
    }
    const auto &row = table[o.decode_iteration];
    if (o.solutions.size() == 1) {
        std::cout << "decoded " << qcdft::decode_single_solution(row) << '\n';
    } else {
        try {
            const auto [a, b] = qcdft::decode_two_solutions(row, o.tie_tolerance);
            std::cout << "decoded " << a << ' ' << b << '\n';
        } catch (const qcdft::NotApplicableError &e) {
            std::cout << "not decodable: " << e.what() << '\n';
        }
    }
}

struct CensusOpts {
    std::string kind = "squarefree";
    std::size_t k = 300;
    bool full = false;
};

void run_census(Run &run, const Globals &, CensusOpts o) {
    if (o.full) {
        o.k = 3000;
        run.log("running the 3000-semiprime census; this takes a long time");
    }
    const auto kind =
        o.kind == "square" ? qcdft::SemiprimeKind::square : qcdft::SemiprimeKind::squarefree;
    run.params = {{"kind", o.kind}, {"k", o.k}};
    const auto records = qcdft::census(kind, o.k);
    auto os = run.open("shor_census.csv");
    qcdft::write_census_csv(os, records);
    std::size_t with_as = 0;
    for (const auto &r : records) {
        with_as += r.count_as > 0 ? 1 : 0;
    }
    std::cout << with_as << " of " << records.size() << " semiprimes have at least one a_s\n";
}

struct FactorOpts {
    std::uint64_t n = 15;
    std::size_t max_attempts = 20;
};

void run_factor(Run &run, const Globals &g, const FactorOpts &o) {
    run.params = {{"n", o.n}, {"max_attempts", o.max_attempts}};
    const auto r = qcdft::factor_semiprime_sqp(o.n, g.seed, o.max_attempts);
    json trace = json::array();
    if (r.attempts.empty() && r.success) {
        std::cout << "square check: " << o.n << " = " << r.p << "^2\n";
    }
    for (const auto &a : r.attempts) {
        std::cout << "a=" << a.a << " gcd(a,N)=" << a.gcd_a_n;
        json t = {{"a", a.a}, {"gcd_a_n", a.gcd_a_n}, {"outcome", a.outcome}};
        if (a.period) {
            std::cout << " r=" << *a.period;
            t["period"] = *a.period;
        }
        if (a.gcd_half_plus) {
            std::cout << " gcd(a^(r/2)+1,N)=" << *a.gcd_half_plus;
            t["gcd_half_plus"] = *a.gcd_half_plus;
        }
        std::cout << " -> " << a.outcome << '\n';
        trace.push_back(std::move(t));
    }
    if (r.success) {
        std::cout << o.n << " = " << r.p << " * " << r.q << '\n';
    } else {
        std::cout << "no factor found in " << o.max_attempts << " attempts\n";
    }
    auto os = run.open("shor_factor.json");
    os << json{{"n", o.n}, {"success", r.success}, {"p", r.p}, {"q", r.q}, {"attempts", trace}}
              .dump(2)
       << '\n';
}

struct ShorSqpOpts {
    std::uint64_t n = 15;
    std::uint64_t a = 2;
    double zero_tolerance = 1e-6;
};

void run_shor_sqp(Run &run, const Globals &, const ShorSqpOpts &o) {
    run.params = {{"n", o.n}, {"a", o.a}, {"zero_tolerance", o.zero_tolerance}};
    const auto sqps = qcdft::shor_first_register_sqp({o.n, o.a});
    auto os = run.open("shor_sqp.csv");
    os << std::setprecision(17) << "qubit,sqp\n";
    for (std::size_t q = 0; q < sqps.size(); ++q) {
        os << q << ',' << sqps[q] << '\n';
    }
    std::cout << "recovered period " << qcdft::recover_period_from_sqp(sqps, o.zero_tolerance)
              << '\n';
}

// ---------------------------------------------------------------------------

int dispatch(std::vector<std::string> args);

int replay(const std::string &manifest, const std::string &out_override) {
    std::ifstream in(manifest);
    if (!in) {
        throw qcdft::Error("cannot read " + manifest);
    }
    json m;
    try {
        in >> m;
    } catch (const json::exception &e) {
        throw qcdft::SchemaError(std::string("manifest: ") + e.what());
    }
    if (!m.contains("args") || !m["args"].is_array()) {
        throw qcdft::SchemaError("manifest: missing args");
    }
    auto args = m["args"].get<std::vector<std::string>>();
    if (!out_override.empty()) {
        std::vector<std::string> kept;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--out") {
                ++i;
            } else if (args[i].rfind("--out=", 0) != 0) {
                kept.push_back(args[i]);
            }
        }
        args = std::move(kept);
        args.push_back("--out");
        args.push_back(out_override);
    }
    return dispatch(std::move(args));
}

int dispatch(std::vector<std::string> args) {
    CLI::App app{"QC-DFT simulation, training and SQP experiments", "qcdft"};
    app.set_version_flag("--version", std::string(QCDFT_VERSION));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--verbosity", g.verbosity, "0 quiet, 1 progress, 2 per-epoch")
        ->check(CLI::Range(0, 2))
        ->capture_default_str();

    GenDataOpts gen;
    auto *c_gen = app.add_subcommand("gen-data", "Generate a two-qubit training dataset");
    c_gen->add_option("--n-samples", gen.n_samples)->capture_default_str()->check(CLI::PositiveNumber);

    TrainOpts tr;
    auto *c_train = app.add_subcommand("train", "Train the control and target networks");
    c_train->add_option("--n-samples", tr.n_samples)->capture_default_str()->check(CLI::PositiveNumber);
    c_train->add_option("--epochs", tr.epochs)->capture_default_str();
    c_train->add_option("--lr", tr.lr)->capture_default_str()->check(CLI::PositiveNumber);
    c_train->add_option("--batch-size", tr.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
    c_train->add_option("--layers", tr.layers, "Comma-separated layer widths")->capture_default_str();
    c_train->add_option("--data", tr.data, "Dataset CSV (generated from --seed if omitted)");

    BenchOpts be;
    auto *c_bench = app.add_subcommand("bench", "Exact vs Bernardi vs corrected on random circuits");
    c_bench->add_option("--model-c", be.model_c, "Control model JSON");
    c_bench->add_option("--model-t", be.model_t, "Target model JSON");
    c_bench->add_flag("--zero-theta", be.zero_theta, "Use theta = 0 instead of models");
    c_bench->add_option("--n-qubits", be.n_qubits)->capture_default_str();
    c_bench->add_option("--steps", be.steps)->capture_default_str();
    c_bench->add_option("--circuits", be.circuits)->capture_default_str()->check(CLI::PositiveNumber);
    c_bench->add_option("--cnot-weight", be.cnot_weight)->capture_default_str();

    TimingOpts ti;
    auto *c_timing = app.add_subcommand("timing", "Per-gate wall time of the three simulators");
    c_timing->add_option("--model-c", ti.model_c, "Control model JSON");
    c_timing->add_option("--model-t", ti.model_t, "Target model JSON");
    c_timing->add_option("--qubits", ti.qubits)->delimiter(',')->capture_default_str();
    c_timing->add_option("--gates", ti.gates)->capture_default_str()->check(CLI::PositiveNumber);
    c_timing->add_option("--repeats", ti.repeats)->capture_default_str()->check(CLI::PositiveNumber);
    c_timing->add_option("--cnot-weight", ti.cnot_weight)->capture_default_str();

    GroverOpts gr;
    auto *c_grover = app.add_subcommand("grover", "Grover SQP table and decoding");
    c_grover->add_option("--n", gr.n)->capture_default_str();
    c_grover->add_option("--solutions", gr.solutions, "Bitstrings, most significant qubit first")
        ->delimiter(',')
        ->capture_default_str();
    c_grover->add_option("--iterations", gr.iterations)->capture_default_str();
    c_grover->add_option("--decode-iteration", gr.decode_iteration)->capture_default_str();
    c_grover->add_option("--tie-tolerance", gr.tie_tolerance)->capture_default_str();

    CensusOpts ce;
    auto *c_census = app.add_subcommand("shor-census", "Count a_s values over semiprimes");
    c_census->add_option("--kind", ce.kind)
        ->check(CLI::IsMember({"squarefree", "square"}))
        ->capture_default_str();
    c_census->add_option("--k", ce.k)->capture_default_str()->check(CLI::PositiveNumber);
    c_census->add_flag("--full", ce.full, "Census of the first 3000 semiprimes (slow)");

    FactorOpts fa;
    auto *c_factor = app.add_subcommand("shor-factor", "Factor a semiprime through SQPs");
    c_factor->add_option("--n", fa.n)->capture_default_str();
    c_factor->add_option("--max-attempts", fa.max_attempts)->capture_default_str();

    ShorSqpOpts ss;
    auto *c_sqp = app.add_subcommand("shor-sqp", "First-register SQPs for (N, a)");
    c_sqp->add_option("--n", ss.n)->capture_default_str();
    c_sqp->add_option("--a", ss.a)->capture_default_str();
    c_sqp->add_option("--zero-tolerance", ss.zero_tolerance)->capture_default_str();

    std::string manifest;
    auto *c_replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    c_replay->add_option("--manifest", manifest)->required();

    // CLI11 parses a reversed vector.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    if (c_replay->parsed()) {
        const bool out_given = app.count("--out") > 0;
        return replay(manifest, out_given ? g.out : std::string{});
    }

    auto *sub = app.get_subcommands().front();
    Run run(sub->get_name(), g, args);
    if (sub == c_gen) {
        run_gen_data(run, g, gen);
    } else if (sub == c_train) {
        run_train(run, g, tr);
    } else if (sub == c_bench) {
        run_bench(run, g, be);
    } else if (sub == c_timing) {
        run_timing(run, g, ti);
    } else if (sub == c_grover) {
        run_grover(run, g, gr);
    } else if (sub == c_census) {
        run_census(run, g, ce);
    } else if (sub == c_factor) {
        run_factor(run, g, fa);
    } else if (sub == c_sqp) {
        run_shor_sqp(run, g, ss);
    }
    run.finish();
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    try {
        return dispatch(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
