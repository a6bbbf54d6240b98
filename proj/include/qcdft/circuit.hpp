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
 * Gate descriptions and circuits shared by the exact simulator and the
 * QC-DFT engine, plus the line-oriented circuit text format:
 *
 *     QUBITS 3
 *     H 0
 *     RX 0 1.5707963
 *     CNOT 0 1
 *     ORACLE 5 6        (phase flip on basis indices 5 and 6)
 *     DIFFUSION
 *
 * Blank lines and text after `#` are ignored. Without a QUBITS line the
 * register width is the largest referenced qubit plus one.
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace qcdft {

enum class GateKind { H, X, Y, Z, RX, RY, RZ, CNOT, PhaseFlipOracle, Diffusion };

[[nodiscard]] inline std::string_view gate_name(GateKind k) {
    switch (k) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::PhaseFlipOracle: return "ORACLE";
    case GateKind::Diffusion: return "DIFFUSION";
    }
    return "?";
}

[[nodiscard]] constexpr bool is_single_qubit(GateKind k) {
    return k == GateKind::H || k == GateKind::X || k == GateKind::Y ||
           k == GateKind::Z || k == GateKind::RX || k == GateKind::RY ||
           k == GateKind::RZ;
}

[[nodiscard]] constexpr bool is_rotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

/**
 * One gate. `qubit` is the acted-on qubit (the control for CNOT), `target`
 * is only meaningful for CNOT, `angle` only for rotations and `marked` only
 * for the phase-flip oracle.
 */
struct GateOp {
    GateKind kind = GateKind::H;
    std::size_t qubit = 0;
    std::size_t target = 0;
    double angle = 0.0;
    std::vector<std::uint64_t> marked;

    static GateOp single(GateKind k, std::size_t q, double angle = 0.0) {
        return GateOp{k, q, 0, angle, {}};
    }
    static GateOp h(std::size_t q) { return single(GateKind::H, q); }
    static GateOp x(std::size_t q) { return single(GateKind::X, q); }
    static GateOp y(std::size_t q) { return single(GateKind::Y, q); }
    static GateOp z(std::size_t q) { return single(GateKind::Z, q); }
    static GateOp rx(std::size_t q, double a) { return single(GateKind::RX, q, a); }
    static GateOp ry(std::size_t q, double a) { return single(GateKind::RY, q, a); }
    static GateOp rz(std::size_t q, double a) { return single(GateKind::RZ, q, a); }
    static GateOp cnot(std::size_t c, std::size_t t) {
        return GateOp{GateKind::CNOT, c, t, 0.0, {}};
    }
    static GateOp oracle(std::vector<std::uint64_t> marked) {
        std::sort(marked.begin(), marked.end());
        return GateOp{GateKind::PhaseFlipOracle, 0, 0, 0.0, std::move(marked)};
    }
    static GateOp diffusion() { return GateOp{GateKind::Diffusion, 0, 0, 0.0, {}}; }

    friend bool operator==(const GateOp &, const GateOp &) = default;
};

/// Throws InvalidGateError / IndexOutOfRangeError when `g` is not valid on n qubits.
inline void validate_gate(const GateOp &g, std::size_t n_qubits) {
    if (g.kind == GateKind::Diffusion) {
        return;
    }
    if (g.kind == GateKind::PhaseFlipOracle) {
        const std::uint64_t dim = std::uint64_t{1} << n_qubits;
        for (auto m : g.marked) {
            if (m >= dim) {
                throw IndexOutOfRangeError("oracle: marked index out of range");
            }
        }
        return;
    }
    if (g.qubit >= n_qubits) {
        throw IndexOutOfRangeError("gate " + std::string(gate_name(g.kind)) +
                                   ": qubit " + std::to_string(g.qubit) +
                                   " out of range");
    }
    if (g.kind == GateKind::CNOT) {
        if (g.target >= n_qubits) {
            throw IndexOutOfRangeError("CNOT: target out of range");
        }
        if (g.target == g.qubit) {
            throw InvalidGateError("CNOT: control equals target");
        }
    }
    if (is_rotation(g.kind) && !std::isfinite(g.angle)) {
        throw InvalidGateError("rotation angle is not finite");
    }
}

/// 2x2 unitary of a single-qubit gate kind.
[[nodiscard]] inline CMat2 gate_matrix(const GateOp &g) {
    const double c = std::cos(g.angle / 2.0);
    const double s = std::sin(g.angle / 2.0);
    const double r = 1.0 / std::sqrt(2.0);
    switch (g.kind) {
    case GateKind::H: return CMat2{{r, r, r, -r}};
    case GateKind::X: return pauli::X;
    case GateKind::Y: return pauli::Y;
    case GateKind::Z: return pauli::Z;
    case GateKind::RX: return CMat2{{c, complex_t{0.0, -s}, complex_t{0.0, -s}, c}};
    case GateKind::RY: return CMat2{{c, -s, s, c}};
    case GateKind::RZ:
        return CMat2{{std::polar(1.0, -g.angle / 2.0), 0.0, 0.0,
                      std::polar(1.0, g.angle / 2.0)}};
    default:
        throw UnsupportedGateError("gate_matrix: " + std::string(gate_name(g.kind)) +
                                   " is not a single-qubit gate");
    }
}

struct Circuit {
    std::size_t n_qubits = 0;
    std::vector<GateOp> ops;

    void validate() const {
        for (const auto &g : ops) {
            validate_gate(g, n_qubits);
        }
    }

    friend bool operator==(const Circuit &, const Circuit &) = default;
};

[[nodiscard]] inline std::string format_gate(const GateOp &g) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << gate_name(g.kind);
    switch (g.kind) {
    case GateKind::CNOT: os << ' ' << g.qubit << ' ' << g.target; break;
    case GateKind::PhaseFlipOracle:
        for (auto m : g.marked) {
            os << ' ' << m;
        }
        break;
    case GateKind::Diffusion: break;
    default:
        os << ' ' << g.qubit;
        if (is_rotation(g.kind)) {
            os << ' ' << g.angle;
        }
    }
    return os.str();
}

[[nodiscard]] inline std::string format_circuit(const Circuit &c) {
    std::string out = "QUBITS " + std::to_string(c.n_qubits) + "\n";
    for (const auto &g : c.ops) {
        out += format_gate(g);
        out += '\n';
    }
    return out;
}

/// FNV-1a hash of the text form; identifies a gate sequence.
[[nodiscard]] inline std::uint64_t circuit_hash(const Circuit &c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : format_circuit(c)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

[[nodiscard]] inline Circuit parse_circuit(std::string_view text) {
    Circuit c;
    bool have_width = false;
    std::size_t max_index = 0;
    bool any_index = false;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name)) {
            continue;
        }
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char ch) { return std::toupper(ch); });
        auto fail = [&](const std::string &why) {
            throw ParseError("circuit line " + std::to_string(line_no) + ": " + why);
        };
        auto read_index = [&](std::size_t &out) {
            long long v = -1;
            if (!(ls >> v) || v < 0) {
                fail("expected a non-negative qubit index");
            }
            out = static_cast<std::size_t>(v);
            max_index = std::max(max_index, out);
            any_index = true;
        };

        GateOp g;
        if (name == "QUBITS") {
            long long n = 0;
            if (!(ls >> n) || n <= 0) {
                fail("QUBITS expects a positive count");
            }
            c.n_qubits = static_cast<std::size_t>(n);
            have_width = true;
            continue;
        } else if (name == "CNOT" || name == "CX") {
            g.kind = GateKind::CNOT;
            read_index(g.qubit);
            read_index(g.target);
        } else if (name == "ORACLE") {
            g.kind = GateKind::PhaseFlipOracle;
            std::uint64_t m = 0;
            while (ls >> m) {
                g.marked.push_back(m);
            }
            std::sort(g.marked.begin(), g.marked.end());
        } else if (name == "DIFFUSION") {
            g.kind = GateKind::Diffusion;
        } else {
            static constexpr GateKind singles[] = {GateKind::H,  GateKind::X,  GateKind::Y,
                                                   GateKind::Z,  GateKind::RX, GateKind::RY,
                                                   GateKind::RZ};
            auto it = std::find_if(std::begin(singles), std::end(singles),
                                   [&](GateKind k) { return gate_name(k) == name; });
            if (it == std::end(singles)) {
                fail("unknown gate '" + name + "'");
            }
            g.kind = *it;
            read_index(g.qubit);
            if (is_rotation(g.kind) && !(ls >> g.angle)) {
                fail("rotation expects an angle");
            }
        }
        std::string extra;
        if (g.kind != GateKind::PhaseFlipOracle && (ls >> extra)) {
            fail("unexpected trailing token '" + extra + "'");
        }
        c.ops.push_back(std::move(g));
    }
    if (!have_width) {
        c.n_qubits = any_index ? max_index + 1 : 1;
    }
    c.validate();
    return c;
}

/**
 * Bitstrings are written most-significant qubit first: in "10110" the
 * leftmost character is qubit n-1 and the rightmost is qubit 0.
 */
[[nodiscard]] inline std::uint64_t bitstring_to_index(std::string_view bits) {
    if (bits.empty() || bits.size() > 63) {
        throw InvalidParameterError("bitstring: invalid length");
    }
    std::uint64_t v = 0;
    for (char ch : bits) {
        if (ch != '0' && ch != '1') {
            throw InvalidParameterError("bitstring: invalid character");
        }
        v = (v << 1) | static_cast<std::uint64_t>(ch - '0');
    }
    return v;
}

[[nodiscard]] inline std::string index_to_bitstring(std::uint64_t v, std::size_t n) {
    std::string s(n, '0');
    for (std::size_t q = 0; q < n; ++q) {
        if ((v >> q) & 1U) {
            s[n - 1 - q] = '1';
        }
    }
    return s;
}

} // namespace qcdft
