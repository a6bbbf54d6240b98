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
 * Grover search on the exact simulator: per-iteration single-qubit
 * probability tables and decoding of solutions from those probabilities.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "errors.hpp"
#include "exact_sim.hpp"

namespace qcdft {

struct GroverSpec {
    std::size_t n_qubits = 0;
    std::vector<std::string> solutions; ///< most significant qubit first
    std::size_t iterations = 0;

    void validate(std::size_t max_qubits = default_max_qubits) const {
        if (n_qubits == 0) {
            throw InvalidParameterError("GroverSpec: n_qubits must be >= 1");
        }
        if (n_qubits > max_qubits) {
            throw CapacityError("GroverSpec: " + std::to_string(n_qubits) +
                                " qubits exceeds exact-simulator capacity");
        }
        if (solutions.empty()) {
            throw InvalidParameterError("GroverSpec: at least one solution required");
        }
        std::set<std::uint64_t> seen;
        for (const auto &s : solutions) {
            if (s.size() != n_qubits) {
                throw InvalidParameterError("GroverSpec: solution '" + s + "' has wrong length");
            }
            if (!seen.insert(bitstring_to_index(s)).second) {
                throw InvalidParameterError("GroverSpec: duplicate solution '" + s + "'");
            }
        }
        if (seen.size() >= (std::uint64_t{1} << n_qubits)) {
            throw InvalidParameterError("GroverSpec: every basis state is marked");
        }
    }

    [[nodiscard]] std::vector<std::uint64_t> marked() const {
        std::vector<std::uint64_t> m;
        for (const auto &s : solutions) {
            m.push_back(bitstring_to_index(s));
        }
        return m;
    }
};

/// Hadamards followed by `iterations` oracle + diffusion pairs.
[[nodiscard]] inline Circuit grover_circuit(const GroverSpec &spec) {
    spec.validate(63);
    Circuit c{spec.n_qubits, {}};
    for (std::size_t q = 0; q < spec.n_qubits; ++q) {
        c.ops.push_back(GateOp::h(q));
    }
    const auto oracle = GateOp::oracle(spec.marked());
    for (std::size_t i = 0; i < spec.iterations; ++i) {
        c.ops.push_back(oracle);
        c.ops.push_back(GateOp::diffusion());
    }
    return c;
}

/// table[i][q]: SQP of qubit q after i iterations (row 0 is the uniform superposition).
using SqpTable = std::vector<std::vector<double>>;

[[nodiscard]] inline SqpTable grover_sqp_table(const GroverSpec &spec,
                                               std::size_t max_qubits = default_max_qubits) {
    spec.validate(max_qubits);
    StateVector s(spec.n_qubits, max_qubits);
    for (std::size_t q = 0; q < spec.n_qubits; ++q) {
        s.apply(GateOp::h(q));
    }
    auto row = [&s] {
        std::vector<double> r(s.n_qubits());
        for (std::size_t q = 0; q < r.size(); ++q) {
            r[q] = s.sqp(q);
        }
        return r;
    };
    SqpTable table;
    table.push_back(row());
    const auto oracle = GateOp::oracle(spec.marked());
    for (std::size_t i = 0; i < spec.iterations; ++i) {
        s.apply(oracle);
        s.apply_diffusion();
        table.push_back(row());
    }
    return table;
}

/// Rounds each SQP; sqps[q] is qubit q, the result is most significant first.
[[nodiscard]] inline std::string decode_single_solution(const std::vector<double> &sqps,
                                                        double tie_tolerance = 1e-9) {
    const std::size_t n = sqps.size();
    std::string bits(n, '0');
    for (std::size_t q = 0; q < n; ++q) {
        if (std::abs(sqps[q] - 0.5) <= tie_tolerance) {
            throw AmbiguousDecodeError("decode: qubit " + std::to_string(q) +
                                       " has SQP 0.5");
        }
        if (sqps[q] > 0.5) {
            bits[n - 1 - q] = '1';
        }
    }
    return bits;
}

/// Two solutions differing on the single qubit whose SQP is within τ of 0.5.
[[nodiscard]] inline std::pair<std::string, std::string>
decode_two_solutions(const std::vector<double> &sqps, double tie_tolerance = 0.05) {
    const std::size_t n = sqps.size();
    std::string bits(n, '0');
    std::size_t tied = n;
    std::size_t n_tied = 0;
    for (std::size_t q = 0; q < n; ++q) {
        if (std::abs(sqps[q] - 0.5) <= tie_tolerance) {
            tied = q;
            ++n_tied;
        } else if (sqps[q] > 0.5) {
            bits[n - 1 - q] = '1';
        }
    }
    if (n_tied != 1) {
        throw NotApplicableError("decode_two_solutions: expected exactly one tied qubit, found " +
                                 std::to_string(n_tied));
    }
    std::string with_one = bits;
    with_one[n - 1 - tied] = '1';
    return {bits, with_one};
}

inline void write_grover_csv(std::ostream &os, const SqpTable &table) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "iteration,qubit,sqp\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (std::size_t q = 0; q < table[i].size(); ++q) {
            os << i << ',' << q << ',' << table[i][q] << '\n';
        }
    }
}

} // namespace qcdft
