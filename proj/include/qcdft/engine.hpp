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
 * The QC-DFT simulator: a register of independent single-qubit reduced
 * density matrices evolved with exact single-qubit updates and a pluggable
 * CNOT functional.
 */
#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "errors.hpp"
#include "exact_sim.hpp"
#include "linalg.hpp"
#include "rdm.hpp"

namespace qcdft {

struct RdmRegister {
    std::vector<OneRdm> rdms;
    std::size_t step = 0;

    [[nodiscard]] std::size_t size() const { return rdms.size(); }
    [[nodiscard]] std::vector<double> sqps() const {
        std::vector<double> p;
        p.reserve(rdms.size());
        for (const auto &r : rdms) {
            p.push_back(r.sqp());
        }
        return p;
    }
};

[[nodiscard]] inline RdmRegister init_register(std::size_t n) {
    if (n == 0) {
        throw InvalidParameterError("init_register: register size must be >= 1");
    }
    return RdmRegister{std::vector<OneRdm>(n), 0};
}

inline constexpr double unitarity_tolerance = 1e-10;

/// rho_n <- U rho_n U^dagger.
inline void apply_1q_inplace(RdmRegister &reg, std::size_t n, const CMat2 &u) {
    if (n >= reg.size()) {
        throw IndexOutOfRangeError("apply_1q: qubit " + std::to_string(n) +
                                   " out of range");
    }
    if (!is_unitary(u, unitarity_tolerance)) {
        throw InvalidGateError("apply_1q: gate is not unitary");
    }
    reg.rdms[n] = OneRdm::project(u * reg.rdms[n].matrix() * u.adjoint());
    ++reg.step;
}

[[nodiscard]] inline RdmRegister apply_1q(RdmRegister reg, std::size_t n,
                                          const CMat2 &u) {
    apply_1q_inplace(reg, n, u);
    return reg;
}

struct ThetaPair {
    ThetaParams control;
    ThetaParams target;
};

/// Maps (control 1-RDM, target 1-RDM) to the correction parameters of both
/// branches. Must be safe to call concurrently.
using ThetaProvider = std::function<ThetaPair(const OneRdm &, const OneRdm &)>;

struct CnotOutput {
    OneRdm control;
    OneRdm target;
};

/// Tr_x[ CNOT U (rc ⊗ rt) U^dagger CNOT^dagger ] before re-projection.
[[nodiscard]] inline CMat2 cnot_branch(const CMat4 &product, const CMat4 &u,
                                       Keep keep) {
    const CMat4 cu = cnot_matrix * u;
    return partial_trace(cu * product * cu.adjoint(), keep);
}

[[nodiscard]] inline CnotOutput bernardi_cnot(const OneRdm &rc, const OneRdm &rt) {
    const CMat4 product = kron(rc.matrix(), rt.matrix());
    const CMat4 evolved = cnot_matrix * product * cnot_matrix;
    return {OneRdm::project(partial_trace(evolved, Keep::control)),
            OneRdm::project(partial_trace(evolved, Keep::target))};
}

class CnotFunctional {
  public:
    enum class Variant { bernardi, corrected };

    static CnotFunctional bernardi() { return CnotFunctional(Variant::bernardi, {}); }
    static CnotFunctional corrected(ThetaProvider provider) {
        if (!provider) {
            throw InvalidParameterError("corrected functional needs a theta provider");
        }
        return CnotFunctional(Variant::corrected, std::move(provider));
    }
    /// Corrected functional that always returns the same parameters.
    static CnotFunctional constant(ThetaPair pair) {
        return corrected([pair](const OneRdm &, const OneRdm &) { return pair; });
    }

    [[nodiscard]] Variant variant() const { return variant_; }
    [[nodiscard]] const ThetaProvider &provider() const { return provider_; }

    [[nodiscard]] CnotOutput operator()(const OneRdm &rc, const OneRdm &rt) const;

  private:
    CnotFunctional(Variant v, ThetaProvider p) : variant_(v), provider_(std::move(p)) {}

    Variant variant_;
    ThetaProvider provider_;
};

/// Control branch uses U_m(theta_c), target branch U_m(theta_t).
[[nodiscard]] inline CnotOutput corrected_cnot(const OneRdm &rc, const OneRdm &rt,
                                               const ThetaPair &theta) {
    if (!theta.control.all_finite() || !theta.target.all_finite()) {
        throw InvalidParameterError("corrected_cnot: provider returned non-finite theta");
    }
    const CMat4 product = kron(rc.matrix(), rt.matrix());
    return {OneRdm::project(cnot_branch(product, herm_expi(theta.control), Keep::control)),
            OneRdm::project(cnot_branch(product, herm_expi(theta.target), Keep::target))};
}

[[nodiscard]] inline CnotOutput corrected_cnot(const OneRdm &rc, const OneRdm &rt,
                                               const CnotFunctional &f) {
    if (f.variant() == CnotFunctional::Variant::bernardi) {
        return bernardi_cnot(rc, rt);
    }
    return corrected_cnot(rc, rt, f.provider()(rc, rt));
}

inline CnotOutput CnotFunctional::operator()(const OneRdm &rc, const OneRdm &rt) const {
    return corrected_cnot(rc, rt, *this);
}

/// Steps a register gate by gate; per-gate cost does not depend on width.
class QcdftSimulator {
  public:
    QcdftSimulator(std::size_t n_qubits, CnotFunctional f)
        : reg_(init_register(n_qubits)), f_(std::move(f)) {}

    void apply(const GateOp &g) {
        validate_gate(g, reg_.size());
        if (g.kind == GateKind::CNOT) {
            auto out = f_(reg_.rdms[g.qubit], reg_.rdms[g.target]);
            reg_.rdms[g.qubit] = out.control;
            reg_.rdms[g.target] = out.target;
            ++reg_.step;
        } else if (is_single_qubit(g.kind)) {
            apply_1q_inplace(reg_, g.qubit, gate_matrix(g));
        } else {
            throw UnsupportedGateError("QC-DFT engine does not support " +
                                       std::string(gate_name(g.kind)));
        }
    }

    [[nodiscard]] const RdmRegister &reg() const { return reg_; }

    [[nodiscard]] StepRecord snapshot() const {
        return StepRecord{reg_.rdms, reg_.sqps()};
    }

  private:
    RdmRegister reg_;
    CnotFunctional f_;
};

inline void require_supported(const Circuit &circuit) {
    for (const auto &g : circuit.ops) {
        if (!is_single_qubit(g.kind) && g.kind != GateKind::CNOT) {
            throw UnsupportedGateError("QC-DFT engine does not support " +
                                       std::string(gate_name(g.kind)));
        }
    }
}

[[nodiscard]] inline Trace run_qcdft(const Circuit &circuit, const CnotFunctional &f) {
    circuit.validate();
    require_supported(circuit);
    QcdftSimulator sim(circuit.n_qubits, f);
    Trace trace;
    trace.reserve(circuit.ops.size() + 1);
    trace.push_back(sim.snapshot());
    for (const auto &g : circuit.ops) {
        sim.apply(g);
        trace.push_back(sim.snapshot());
    }
    return trace;
}

/// Target SQP after a CNOT on a product state: pt + pc (1 - 2 pt).
[[nodiscard]] inline double target_sqp_update(double pc, double pt) {
    if (!(pc >= 0.0 && pc <= 1.0 && pt >= 0.0 && pt <= 1.0)) {
        throw InvalidParameterError("target_sqp_update: probabilities must lie in [0, 1]");
    }
    return pt + pc * (1.0 - 2.0 * pt);
}

/// Joint probability of `bits` (most significant qubit first) assuming a
/// product state.
[[nodiscard]] inline double product_joint_prob(const RdmRegister &reg,
                                               std::string_view bits) {
    if (bits.size() != reg.size()) {
        throw InvalidParameterError("product_joint_prob: bitstring length " +
                                    std::to_string(bits.size()) + " != register size " +
                                    std::to_string(reg.size()));
    }
    const std::size_t n = reg.size();
    double p = 1.0;
    for (std::size_t q = 0; q < n; ++q) {
        const char b = bits[n - 1 - q];
        if (b != '0' && b != '1') {
            throw InvalidParameterError("product_joint_prob: invalid bit character");
        }
        const double s = reg.rdms[q].sqp();
        p *= b == '1' ? s : 1.0 - s;
    }
    return p;
}

/// prod_i Tr[rho_i O_i], exact only for product states. obs[i] acts on qubit i.
[[nodiscard]] inline double product_expectation(const RdmRegister &reg,
                                                const std::vector<CMat2> &obs) {
    if (obs.size() != reg.size()) {
        throw InvalidParameterError("product_expectation: need one observable per qubit");
    }
    double value = 1.0;
    for (std::size_t q = 0; q < obs.size(); ++q) {
        if (!is_hermitian(obs[q], 1e-10)) {
            throw InvalidParameterError("product_expectation: observable " +
                                        std::to_string(q) + " is not Hermitian");
        }
        value *= (reg.rdms[q].matrix() * obs[q]).trace().real();
    }
    return value;
}

} // namespace qcdft
