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
 * Dense statevector simulator used as the ground-truth oracle.
 *
 * Qubit 0 is the least significant bit of the basis index.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "errors.hpp"
#include "rdm.hpp"

namespace qcdft {

inline constexpr std::size_t default_max_qubits = 20;

class StateVector {
  public:
    /// |0...0> on n qubits.
    explicit StateVector(std::size_t n_qubits,
                         std::size_t max_qubits = default_max_qubits)
        : n_(n_qubits) {
        if (n_qubits == 0) {
            throw InvalidParameterError("StateVector: zero qubits");
        }
        if (n_qubits > max_qubits) {
            throw CapacityError("StateVector: " + std::to_string(n_qubits) +
                                " qubits exceeds the maximum of " +
                                std::to_string(max_qubits));
        }
        amps_.assign(std::size_t{1} << n_qubits, complex_t{0.0});
        amps_[0] = 1.0;
    }

    /// Takes ownership of amplitudes; the size must be a power of two.
    static StateVector from_amplitudes(std::vector<complex_t> amps) {
        std::size_t n = 0;
        while ((std::size_t{1} << n) < amps.size()) {
            ++n;
        }
        if (amps.size() < 2 || (std::size_t{1} << n) != amps.size()) {
            throw InvalidParameterError("StateVector: size is not a power of two >= 2");
        }
        StateVector s(n, n);
        s.amps_ = std::move(amps);
        return s;
    }

    [[nodiscard]] std::size_t n_qubits() const { return n_; }
    [[nodiscard]] std::size_t dim() const { return amps_.size(); }
    [[nodiscard]] const std::vector<complex_t> &amplitudes() const { return amps_; }
    [[nodiscard]] std::vector<complex_t> &amplitudes() { return amps_; }

    [[nodiscard]] double norm_squared() const {
        double s = 0.0;
        for (const auto &a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

    void apply_1q(std::size_t q, const CMat2 &u) {
        const std::size_t stride = std::size_t{1} << q;
        const complex_t u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const complex_t a0 = amps_[i];
                const complex_t a1 = amps_[i + stride];
                amps_[i] = u00 * a0 + u01 * a1;
                amps_[i + stride] = u10 * a0 + u11 * a1;
            }
        }
    }

    void apply_cnot(std::size_t control, std::size_t target) {
        const std::size_t cmask = std::size_t{1} << control;
        const std::size_t tmask = std::size_t{1} << target;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cmask) && !(i & tmask)) {
                std::swap(amps_[i], amps_[i | tmask]);
            }
        }
    }

    void apply_phase_flip(const std::vector<std::uint64_t> &marked) {
        for (auto m : marked) {
            amps_[m] = -amps_[m];
        }
    }

    /// 2|s><s| - I with |s> the uniform superposition.
    void apply_diffusion() {
        complex_t mean = 0.0;
        for (const auto &a : amps_) {
            mean += a;
        }
        mean /= static_cast<double>(amps_.size());
        for (auto &a : amps_) {
            a = 2.0 * mean - a;
        }
    }

    void apply(const GateOp &g) {
        validate_gate(g, n_);
        switch (g.kind) {
        case GateKind::CNOT: apply_cnot(g.qubit, g.target); break;
        case GateKind::PhaseFlipOracle: apply_phase_flip(g.marked); break;
        case GateKind::Diffusion: apply_diffusion(); break;
        default: apply_1q(g.qubit, gate_matrix(g));
        }
    }

    /// Partial trace over every qubit except `q`.
    [[nodiscard]] OneRdm reduced_density(std::size_t q) const {
        check_index(q);
        const std::size_t mask = std::size_t{1} << q;
        double p0 = 0.0, p1 = 0.0;
        complex_t c01 = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) {
                continue;
            }
            const complex_t a0 = amps_[i];
            const complex_t a1 = amps_[i | mask];
            p0 += std::norm(a0);
            p1 += std::norm(a1);
            c01 += a0 * std::conj(a1);
        }
        CMat2 m;
        m(0, 0) = p0;
        m(1, 1) = p1;
        m(0, 1) = c01;
        m(1, 0) = std::conj(c01);
        return OneRdm::project(m);
    }

    /// Marginal probability of measuring qubit q in |1>.
    [[nodiscard]] double sqp(std::size_t q) const {
        return reduced_density(q).sqp();
    }

  private:
    void check_index(std::size_t q) const {
        if (q >= n_) {
            throw IndexOutOfRangeError("qubit index " + std::to_string(q) +
                                       " out of range");
        }
    }

    std::size_t n_;
    std::vector<complex_t> amps_;
};

inline StateVector apply_gate(StateVector state, const GateOp &g) {
    state.apply(g);
    return state;
}

[[nodiscard]] inline OneRdm reduced_density(const StateVector &s, std::size_t q) {
    return s.reduced_density(q);
}

[[nodiscard]] inline double sqp(const StateVector &s, std::size_t q) {
    return s.sqp(q);
}

/// All 1-RDMs and SQPs of a register at one step.
struct StepRecord {
    std::vector<OneRdm> rdms;
    std::vector<double> sqps;
};

using Trace = std::vector<StepRecord>;

[[nodiscard]] inline StepRecord snapshot(const StateVector &s) {
    StepRecord r;
    r.rdms.reserve(s.n_qubits());
    r.sqps.reserve(s.n_qubits());
    for (std::size_t q = 0; q < s.n_qubits(); ++q) {
        r.rdms.push_back(s.reduced_density(q));
        r.sqps.push_back(r.rdms.back().sqp());
    }
    return r;
}

/// Runs the circuit from |0...0>, recording the initial state and every step.
[[nodiscard]] inline Trace run_exact(const Circuit &circuit,
                                     std::size_t max_qubits = default_max_qubits) {
    circuit.validate();
    StateVector s(circuit.n_qubits, max_qubits);
    Trace trace;
    trace.reserve(circuit.ops.size() + 1);
    trace.push_back(snapshot(s));
    for (const auto &g : circuit.ops) {
        s.apply(g);
        trace.push_back(snapshot(s));
    }
    return trace;
}

} // namespace qcdft
