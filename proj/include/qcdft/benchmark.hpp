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
/**
 * @file
 * Random-circuit comparison of the exact simulator against the Bernardi
 * and corrected QC-DFT functionals, and per-gate timing.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "exact_sim.hpp"

namespace qcdft {

struct RandomCircuitConfig {
    std::size_t n_qubits = 10;
    std::size_t n_steps = 150;
    double cnot_weight = 8.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_qubits < 2) {
            throw InvalidParameterError("RandomCircuitConfig: n_qubits must be >= 2");
        }
        if (n_steps < 1) {
            throw InvalidParameterError("RandomCircuitConfig: n_steps must be >= 1");
        }
        if (!(cnot_weight > 0.0) || !std::isfinite(cnot_weight)) {
            throw InvalidParameterError("RandomCircuitConfig: cnot_weight must be positive");
        }
    }
};

/// splitmix64 finalizer, used to derive per-circuit seeds.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Draws one gate: each of H, X, Y, Z, RX, RY, RZ has weight 1 and CNOT has
 * weight `cnot_weight`. Rotation angles are uniform in [0, 2π).
 */
template <class Rng>
[[nodiscard]] GateOp sample_gate(Rng &rng, const RandomCircuitConfig &config) {
    static constexpr GateKind singles[] = {GateKind::H,  GateKind::X,  GateKind::Y, GateKind::Z,
                                           GateKind::RX, GateKind::RY, GateKind::RZ};
    const double total = 7.0 + config.cnot_weight;
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    const auto n = config.n_qubits;
    if (u >= 7.0) {
        const std::size_t c = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        std::size_t t = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
        if (t >= c) {
            ++t;
        }
        return GateOp::cnot(c, t);
    }
    const GateKind kind = singles[std::min<std::size_t>(static_cast<std::size_t>(u), 6)];
    const std::size_t q = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    double angle = 0.0;
    if (is_rotation(kind)) {
        angle = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    }
    return GateOp::single(kind, q, angle);
}

[[nodiscard]] inline Circuit random_circuit(const RandomCircuitConfig &config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    Circuit c{config.n_qubits, {}};
    c.ops.reserve(config.n_steps);
    for (std::size_t s = 0; s < config.n_steps; ++s) {
        c.ops.push_back(sample_gate(rng, config));
    }
    return c;
}

/// Per-qubit raw data of one step of one circuit.
struct StepRaw {
    std::vector<double> p_exact;
    std::vector<double> p_bernardi;
    std::vector<double> p_corrected;
    std::vector<double> fid_bernardi;
    std::vector<double> fid_corrected;
};

struct StepMetrics {
    std::size_t step = 0;
    double sqp_error_bernardi = 0.0;
    double sqp_error_corrected = 0.0;
    double mean_fid_bernardi = 0.0;
    double mean_fid_corrected = 0.0;
    double mean_sqp_corrected = 0.0;

    [[nodiscard]] double sqp_error_diff() const { return sqp_error_bernardi - sqp_error_corrected; }
    [[nodiscard]] double mean_fid_diff() const { return mean_fid_corrected - mean_fid_bernardi; }
};

/// Root-mean-square over qubits of (p_exact - p_pred).
[[nodiscard]] inline double sqp_error(const std::vector<double> &exact,
                                      const std::vector<double> &pred) {
    double s = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k) {
        const double d = exact[k] - pred[k];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(exact.size()));
}

[[nodiscard]] inline double mean_of(const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

[[nodiscard]] inline StepMetrics metrics_from_raw(std::size_t step, const StepRaw &raw) {
    return {step,
            sqp_error(raw.p_exact, raw.p_bernardi),
            sqp_error(raw.p_exact, raw.p_corrected),
            mean_of(raw.fid_bernardi),
            mean_of(raw.fid_corrected),
            mean_of(raw.p_corrected)};
}

struct CircuitComparison {
    std::uint64_t seed = 0;
    std::uint64_t circuit_hash = 0;
    std::vector<StepRaw> steps; ///< steps[0] is the initial register
    std::vector<StepMetrics> metrics;
};

/**
 * Runs the exact simulator and both QC-DFT functionals in lockstep over the
 * circuit drawn from `config`.
 */
[[nodiscard]] inline CircuitComparison run_comparison(const RandomCircuitConfig &config,
                                                      const CnotFunctional &corrected,
                                                      std::size_t max_qubits = default_max_qubits) {
    const Circuit circuit = random_circuit(config);
    StateVector exact(circuit.n_qubits, max_qubits);
    QcdftSimulator bern(circuit.n_qubits, CnotFunctional::bernardi());
    QcdftSimulator corr(circuit.n_qubits, corrected);

    CircuitComparison out;
    out.seed = config.seed;
    out.circuit_hash = circuit_hash(circuit);
    out.steps.reserve(circuit.ops.size() + 1);

    auto record = [&] {
        const std::size_t n = circuit.n_qubits;
        StepRaw raw;
        raw.p_exact.resize(n);
        raw.p_bernardi.resize(n);
        raw.p_corrected.resize(n);
        raw.fid_bernardi.resize(n);
        raw.fid_corrected.resize(n);
        for (std::size_t q = 0; q < n; ++q) {
            const OneRdm ex = exact.reduced_density(q);
            const OneRdm &rb = bern.reg().rdms[q];
            const OneRdm &rc = corr.reg().rdms[q];
            raw.p_exact[q] = ex.sqp();
            raw.p_bernardi[q] = rb.sqp();
            raw.p_corrected[q] = rc.sqp();
            raw.fid_bernardi[q] = fidelity(ex, rb);
            raw.fid_corrected[q] = fidelity(ex, rc);
        }
        out.metrics.push_back(metrics_from_raw(out.steps.size(), raw));
        out.steps.push_back(std::move(raw));
    };

    record();
    for (const auto &g : circuit.ops) {
        exact.apply(g);
        bern.apply(g);
        corr.apply(g);
        record();
    }
    return out;
}

struct AggregateResult {
    std::vector<StepMetrics> metrics;
    std::vector<CircuitComparison> circuits;
};

/// Arithmetic mean of every metric over circuits, step by step.
[[nodiscard]] inline std::vector<StepMetrics>
average_metrics(const std::vector<CircuitComparison> &circuits) {
    if (circuits.empty()) {
        throw InvalidParameterError("average_metrics: no circuits");
    }
    const std::size_t n_steps = circuits.front().metrics.size();
    std::vector<StepMetrics> avg(n_steps);
    for (const auto &c : circuits) {
        if (c.metrics.size() != n_steps) {
            throw InvalidParameterError("average_metrics: circuits differ in step count");
        }
        for (std::size_t s = 0; s < n_steps; ++s) {
            avg[s].sqp_error_bernardi += c.metrics[s].sqp_error_bernardi;
            avg[s].sqp_error_corrected += c.metrics[s].sqp_error_corrected;
            avg[s].mean_fid_bernardi += c.metrics[s].mean_fid_bernardi;
            avg[s].mean_fid_corrected += c.metrics[s].mean_fid_corrected;
            avg[s].mean_sqp_corrected += c.metrics[s].mean_sqp_corrected;
        }
    }
    const double n = static_cast<double>(circuits.size());
    for (std::size_t s = 0; s < n_steps; ++s) {
        avg[s].step = s;
        avg[s].sqp_error_bernardi /= n;
        avg[s].sqp_error_corrected /= n;
        avg[s].mean_fid_bernardi /= n;
        avg[s].mean_fid_corrected /= n;
        avg[s].mean_sqp_corrected /= n;
    }
    return avg;
}

[[nodiscard]] inline AggregateResult aggregate(const std::vector<RandomCircuitConfig> &configs,
                                               const CnotFunctional &corrected,
                                               std::size_t max_qubits = default_max_qubits) {
    if (configs.empty()) {
        throw InvalidParameterError("aggregate: no circuit configs");
    }
    for (const auto &c : configs) {
        if (c.n_steps != configs.front().n_steps) {
            throw InvalidParameterError("aggregate: configs must share n_steps");
        }
    }
    AggregateResult out;
    out.circuits.reserve(configs.size());
    for (const auto &c : configs) {
        out.circuits.push_back(run_comparison(c, corrected, max_qubits));
    }
    out.metrics = average_metrics(out.circuits);
    return out;
}

/// `count` configs sharing `base` except for seeds derived from base.seed.
[[nodiscard]] inline std::vector<RandomCircuitConfig> circuit_family(const RandomCircuitConfig &base,
                                                                     std::size_t count) {
    std::vector<RandomCircuitConfig> out(count, base);
    for (std::size_t i = 0; i < count; ++i) {
        out[i].seed = mix_seed(base.seed, i);
    }
    return out;
}

inline const char *metrics_csv_header =
    "step,sqp_err_bernardi,sqp_err_corrected,sqp_err_diff,mean_fid_bernardi,"
    "mean_fid_corrected,mean_fid_diff,mean_sqp_corrected";

inline void write_metrics_csv(std::ostream &os, const std::vector<StepMetrics> &metrics) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << metrics_csv_header << '\n';
    for (const auto &m : metrics) {
        os << m.step << ',' << m.sqp_error_bernardi << ',' << m.sqp_error_corrected << ','
           << m.sqp_error_diff() << ',' << m.mean_fid_bernardi << ',' << m.mean_fid_corrected
           << ',' << m.mean_fid_diff() << ',' << m.mean_sqp_corrected << '\n';
    }
}

// ---------------------------------------------------------------------------
// Timing

struct TimingRecord {
    std::string method;
    std::size_t n_qubits = 0;
    double seconds_per_gate = 0.0;
};

struct TimingConfig {
    std::vector<std::size_t> qubit_counts{2, 4, 6, 8, 10, 12, 14, 16};
    std::size_t gates_per_point = 10;
    std::size_t repeats = 10;
    double cnot_weight = 8.0;
    std::uint64_t seed = 0;
    std::size_t max_exact_qubits = default_max_qubits;
};

namespace detail {
template <class Sim>
double time_circuit(Sim &sim, const Circuit &c) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto &g : c.ops) {
        sim.apply(g);
    }
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}
} // namespace detail

/**
 * Median over `repeats` random circuits (after one discarded warm-up) of
 * the wall time per gate, for every method and register width. The exact
 * method is skipped beyond its capacity.
 */
[[nodiscard]] inline std::vector<TimingRecord> timing_bench(const TimingConfig &config,
                                                            const CnotFunctional &corrected) {
    if (config.gates_per_point == 0 || config.repeats == 0) {
        throw InvalidParameterError("timing_bench: gates_per_point and repeats must be >= 1");
    }
    std::vector<TimingRecord> out;
    for (const std::string method : {"exact", "bernardi", "corrected"}) {
        for (std::size_t n : config.qubit_counts) {
            if (method == "exact" && n > config.max_exact_qubits) {
                continue;
            }
            std::vector<double> samples;
            for (std::size_t r = 0; r <= config.repeats; ++r) {
                RandomCircuitConfig rc{n, config.gates_per_point, config.cnot_weight,
                                       mix_seed(config.seed, n * 1000003 + r)};
                const Circuit c = random_circuit(rc);
                double t = 0.0;
                if (method == "exact") {
                    StateVector s(n, config.max_exact_qubits);
                    t = detail::time_circuit(s, c);
                } else {
                    QcdftSimulator sim(n, method == "bernardi" ? CnotFunctional::bernardi()
                                                               : corrected);
                    t = detail::time_circuit(sim, c);
                }
                if (r > 0) {
                    samples.push_back(t / static_cast<double>(config.gates_per_point));
                }
            }
            out.push_back({method, n, detail::median(samples)});
        }
    }
    return out;
}

inline void write_timing_csv(std::ostream &os, const std::vector<TimingRecord> &records) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "method,n_qubits,seconds_per_gate\n";
    for (const auto &r : records) {
        os << r.method << ',' << r.n_qubits << ',' << r.seconds_per_gate << '\n';
    }
}

} // namespace qcdft
