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
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qcdft;
using cd = std::complex<double>;

namespace {

const CMat2 hadamard = gate_matrix(GateOp::h(0));

OneRdm plus_state() { return OneRdm::pure(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)); }

OneRdm random_rdm(std::mt19937_64 &rng, bool pure = false) {
    return OneRdm::project(oracle::random_density2(rng, pure));
}

ThetaParams random_theta(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    ThetaParams t;
    for (std::size_t k = 0; k < 16; ++k) {
        t.flat(k) = u(rng);
    }
    return t;
}

/// Direct composition with dense matrices and a series exponential.
CMat2 chain_oracle(const OneRdm &rc, const OneRdm &rt, const ThetaParams &theta, bool keep_c) {
    using namespace oracle;
    const Dense u = to_dense(expm_series(pauli_hamiltonian(theta) * cd{0.0, 1.0}));
    const Dense c = to_dense(cnot_matrix);
    const Dense prod = kron_formula(to_dense(rc.matrix()), to_dense(rt.matrix()));
    const Dense w = dense_mul(c, u);
    const Dense out = dense_mul(dense_mul(w, prod), dense_adjoint(w));
    return partial_trace_basis(from_dense<4>(out), keep_c);
}

void expect_valid(const OneRdm &r, double tol) {
    const CMat2 &m = r.matrix();
    EXPECT_TRUE(is_hermitian(m, tol));
    EXPECT_NEAR(m.trace().real(), 1.0, tol);
    for (double l : eigh(m).values) {
        EXPECT_GE(l, -tol);
    }
}

} // namespace

TEST(Register, InitSizes) {
    const auto one = init_register(1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.rdms[0].matrix(), OneRdm{}.matrix());
    const auto five = init_register(5);
    for (double p : five.sqps()) {
        EXPECT_EQ(p, 0.0);
    }
    EXPECT_EQ(init_register(20).size(), 20u);
    EXPECT_THROW((void)init_register(0), InvalidParameterError);
}

TEST(Register, SingleQubitGates) {
    auto reg = apply_1q(init_register(1), 0, pauli::X);
    EXPECT_EQ(reg.sqps()[0], 1.0);
    EXPECT_EQ(reg.step, 1u);

    std::mt19937_64 rng(1);
    RdmRegister r{{random_rdm(rng)}, 0};
    const auto twice = apply_1q(apply_1q(r, 0, hadamard), 0, hadamard);
    EXPECT_LE(max_abs_diff(twice.rdms[0].matrix(), r.rdms[0].matrix()), 1e-12);

    EXPECT_THROW((void)apply_1q(r, 0, CMat2::diagonal({1.0, 2.0})), InvalidGateError);
    EXPECT_THROW((void)apply_1q(r, 1, pauli::X), IndexOutOfRangeError);
}

TEST(BernardiCnot, ControlOffLeavesTargetUnchanged) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const OneRdm rt = random_rdm(rng);
        const auto out = bernardi_cnot(OneRdm{}, rt);
        EXPECT_LE(max_abs_diff(out.control.matrix(), OneRdm{}.matrix()), 1e-15);
        EXPECT_LE(max_abs_diff(out.target.matrix(), rt.matrix()), 1e-15);
    }
}

TEST(BernardiCnot, ControlOnFlipsTarget) {
    const auto out = bernardi_cnot(OneRdm::pure(0.0, 1.0), OneRdm{});
    EXPECT_EQ(out.target.sqp(), 1.0);
    EXPECT_EQ(out.control.sqp(), 1.0);
}

TEST(BernardiCnot, PlusControlGivesMixedMarginals) {
    const auto out = bernardi_cnot(plus_state(), OneRdm{});
    const CMat2 half = OneRdm::maximally_mixed().matrix();
    EXPECT_LE(max_abs_diff(out.control.matrix(), half), 1e-15);
    EXPECT_LE(max_abs_diff(out.target.matrix(), half), 1e-15);
    // Same via the explicit chain with U = I.
    EXPECT_LE(max_abs_diff(chain_oracle(plus_state(), OneRdm{}, {}, true), half), 1e-15);
    EXPECT_LE(max_abs_diff(chain_oracle(plus_state(), OneRdm{}, {}, false), half), 1e-15);
}

TEST(BernardiCnot, PreservesControlDiagonal) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 500; ++t) {
        const OneRdm rc = random_rdm(rng), rt = random_rdm(rng);
        const auto out = bernardi_cnot(rc, rt);
        EXPECT_NEAR(out.control(0, 0).real(), rc(0, 0).real(), 1e-12);
        EXPECT_NEAR(out.control(1, 1).real(), rc(1, 1).real(), 1e-12);
    }
}

TEST(CorrectedCnot, CnotStagePreservesControlDiagonalOfAnyInput) {
    // The corrected functional applies CNOT after U_m; the CNOT stage on its
    // own never alters the control populations.
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        const CMat4 u = herm_expi(random_theta(rng));
        const CMat4 rho = u * kron(random_rdm(rng).matrix(), random_rdm(rng).matrix()) * u.adjoint();
        const CMat2 before = partial_trace(rho, Keep::control);
        const CMat2 after = partial_trace(cnot_matrix * rho * cnot_matrix, Keep::control);
        EXPECT_NEAR(after(0, 0).real(), before(0, 0).real(), 1e-12);
        EXPECT_NEAR(after(1, 1).real(), before(1, 1).real(), 1e-12);
    }
}

TEST(CorrectedCnot, ZeroThetaEqualsBernardi) {
    std::mt19937_64 rng(5);
    const auto f = CnotFunctional::constant({});
    for (int t = 0; t < 100; ++t) {
        const OneRdm rc = random_rdm(rng), rt = random_rdm(rng);
        const auto a = f(rc, rt);
        const auto b = bernardi_cnot(rc, rt);
        EXPECT_LE(max_abs_diff(a.control.matrix(), b.control.matrix()), 1e-14);
        EXPECT_LE(max_abs_diff(a.target.matrix(), b.target.matrix()), 1e-14);
    }
}

TEST(CorrectedCnot, GlobalPhaseTermHasNoEffect) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
        const OneRdm rc = random_rdm(rng), rt = random_rdm(rng);
        ThetaPair phase;
        phase.control(0, 0) = 1.234;
        phase.target(0, 0) = -2.5;
        const auto a = corrected_cnot(rc, rt, phase);
        const auto b = corrected_cnot(rc, rt, ThetaPair{});
        EXPECT_LE(max_abs_diff(a.control.matrix(), b.control.matrix()), 1e-12);
        EXPECT_LE(max_abs_diff(a.target.matrix(), b.target.matrix()), 1e-12);
    }
}

TEST(CorrectedCnot, MatchesMatrixChainOracle) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        const OneRdm rc = random_rdm(rng), rt = random_rdm(rng);
        const ThetaPair theta{random_theta(rng), random_theta(rng)};
        const auto out = corrected_cnot(rc, rt, theta);
        EXPECT_LE(max_abs_diff(out.control.matrix(), chain_oracle(rc, rt, theta.control, true)),
                  1e-9);
        EXPECT_LE(max_abs_diff(out.target.matrix(), chain_oracle(rc, rt, theta.target, false)),
                  1e-9);
    }
}

TEST(CorrectedCnot, ProviderSeesInputsAndFailuresPropagate) {
    const auto f = CnotFunctional::corrected([](const OneRdm &rc, const OneRdm &) -> ThetaPair {
        if (rc.sqp() > 0.5) {
            throw std::runtime_error("provider failed");
        }
        return {};
    });
    EXPECT_NO_THROW((void)f(OneRdm{}, OneRdm{}));
    EXPECT_THROW((void)f(OneRdm::pure(0.0, 1.0), OneRdm{}), std::runtime_error);
    const auto bad = CnotFunctional::corrected([](const OneRdm &, const OneRdm &) {
        ThetaPair p;
        p.target(1, 1) = std::numeric_limits<double>::infinity();
        return p;
    });
    EXPECT_THROW((void)bad(OneRdm{}, OneRdm{}), InvalidParameterError);
    EXPECT_THROW((void)CnotFunctional::corrected({}), InvalidParameterError);
}

TEST(RunQcdft, HadamardThenCnot) {
    const Circuit c{2, {GateOp::h(0), GateOp::cnot(0, 1)}};
    const auto trace = run_qcdft(c, CnotFunctional::bernardi());
    ASSERT_EQ(trace.size(), 3u);
    EXPECT_NEAR(trace.back().sqps[0], 0.5, 1e-15);
    EXPECT_NEAR(trace.back().sqps[1], 0.5, 1e-15);
    const auto exact = run_exact(c);
    for (std::size_t q = 0; q < 2; ++q) {
        EXPECT_GE(fidelity(exact.back().rdms[q], trace.back().rdms[q]), 1.0 - 1e-12);
    }
}

TEST(RunQcdft, SingleQubitOnlyCircuitsAreExact) {
    RandomCircuitConfig cfg;
    cfg.n_qubits = 6;
    cfg.n_steps = 200;
    cfg.cnot_weight = 1e-300;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        cfg.seed = seed;
        const Circuit c = random_circuit(cfg);
        const auto a = run_qcdft(c, CnotFunctional::bernardi());
        const auto b = run_exact(c);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t s = 0; s < a.size(); ++s) {
            for (std::size_t q = 0; q < 6; ++q) {
                EXPECT_LE(max_abs_diff(a[s].rdms[q].matrix(), b[s].rdms[q].matrix()), 1e-10);
            }
        }
    }
}

TEST(RunQcdft, RejectsGroverOps) {
    EXPECT_THROW((void)run_qcdft(Circuit{2, {GateOp::h(0), GateOp::diffusion()}},
                                 CnotFunctional::bernardi()),
                 UnsupportedGateError);
    EXPECT_THROW((void)run_qcdft(Circuit{2, {GateOp::oracle({1})}}, CnotFunctional::bernardi()),
                 UnsupportedGateError);
}

TEST(RunQcdft, DeepCircuitsDriftTowardHalf) {
    RandomCircuitConfig cfg;
    cfg.n_qubits = 10;
    cfg.n_steps = 400;
    double mean = 0.0;
    const int n_circuits = 20;
    for (int i = 0; i < n_circuits; ++i) {
        cfg.seed = mix_seed(77, static_cast<std::uint64_t>(i));
        const auto trace = run_qcdft(random_circuit(cfg), CnotFunctional::bernardi());
        for (double p : trace.back().sqps) {
            mean += p;
        }
    }
    mean /= 10.0 * n_circuits;
    EXPECT_NEAR(mean, 0.5, 0.05);
}

TEST(RunQcdft, RegisterStaysPhysicalOverLongRuns) {
    RandomCircuitConfig cfg;
    cfg.n_qubits = 8;
    cfg.n_steps = 10000;
    cfg.seed = 3;
    std::mt19937_64 rng(8);
    const ThetaPair theta{random_theta(rng), random_theta(rng)};
    for (const auto &f : {CnotFunctional::bernardi(), CnotFunctional::constant(theta)}) {
        QcdftSimulator sim(8, f);
        for (const auto &g : random_circuit(cfg).ops) {
            sim.apply(g);
        }
        for (const auto &r : sim.reg().rdms) {
            expect_valid(r, 1e-9);
        }
    }
}

TEST(FirstCnot, BernardiIsExactOnProductStates) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 200; ++t) {
        const auto va = oracle::random_state(rng, 1);
        const auto vb = oracle::random_state(rng, 1);
        std::vector<cd> psi(4);
        for (std::size_t i = 0; i < 4; ++i) {
            psi[i] = va[i & 1U] * vb[(i >> 1) & 1U]; // qubit 0 control, qubit 1 target
        }
        auto s = StateVector::from_amplitudes(psi);
        s.apply(GateOp::cnot(0, 1));
        const auto out = bernardi_cnot(OneRdm::pure(va[0], va[1]), OneRdm::pure(vb[0], vb[1]));
        EXPECT_GE(fidelity(out.control, s.reduced_density(0)), 1.0 - 1e-10);
        EXPECT_GE(fidelity(out.target, s.reduced_density(1)), 1.0 - 1e-10);
    }
}

TEST(TargetSqpUpdate, Examples) {
    EXPECT_EQ(target_sqp_update(0.0, 0.37), 0.37);
    EXPECT_EQ(target_sqp_update(1.0, 0.0), 1.0);
    EXPECT_NEAR(target_sqp_update(0.3, 0.2), 0.38, 1e-15);
    EXPECT_THROW((void)target_sqp_update(-0.1, 0.2), InvalidParameterError);
    EXPECT_THROW((void)target_sqp_update(0.1, 1.2), InvalidParameterError);
}

TEST(TargetSqpUpdate, MatchesBernardiOnDiagonalStates) {
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
            const double pc = i / 20.0, pt = j / 20.0;
            const auto out = bernardi_cnot(OneRdm::from_components(pc, 0, 0),
                                           OneRdm::from_components(pt, 0, 0));
            EXPECT_NEAR(out.target.sqp(), target_sqp_update(pc, pt), 1e-14);
        }
    }
}

TEST(TargetSqpUpdate, ContractsTowardHalf) {
    for (int i = 0; i <= 100; ++i) {
        for (int j = 0; j <= 100; ++j) {
            const double pc = i / 100.0, pt = j / 100.0;
            EXPECT_LE(std::abs(0.5 - target_sqp_update(pc, pt)), std::abs(0.5 - pt) + 1e-15);
        }
    }
}

TEST(ProductJointProb, Examples) {
    RdmRegister half{std::vector<OneRdm>(4, OneRdm::maximally_mixed()), 0};
    EXPECT_DOUBLE_EQ(product_joint_prob(half, "0110"), 1.0 / 16.0);
    EXPECT_EQ(product_joint_prob(init_register(3), "000"), 1.0);
    EXPECT_EQ(product_joint_prob(init_register(3), "001"), 0.0);
    EXPECT_THROW((void)product_joint_prob(init_register(3), "00"), InvalidParameterError);
}

TEST(ProductJointProb, SumsToOne) {
    std::mt19937_64 rng(10);
    for (std::size_t n : {1u, 4u, 10u}) {
        RdmRegister reg;
        for (std::size_t q = 0; q < n; ++q) {
            reg.rdms.push_back(random_rdm(rng));
        }
        double total = 0.0;
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
            total += product_joint_prob(reg, index_to_bitstring(x, n));
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(ProductJointProb, BitOrderIsMostSignificantFirst) {
    auto reg = apply_1q(init_register(3), 2, pauli::X);
    EXPECT_EQ(product_joint_prob(reg, "100"), 1.0);
}

TEST(ProductExpectation, Examples) {
    const std::vector<CMat2> zs(3, pauli::Z);
    EXPECT_EQ(product_expectation(init_register(3), zs), 1.0);
    std::mt19937_64 rng(11);
    RdmRegister reg{{random_rdm(rng), random_rdm(rng)}, 0};
    const double z0 = (reg.rdms[0].matrix() * pauli::Z).trace().real();
    EXPECT_NEAR(product_expectation(reg, {pauli::Z, pauli::I}), z0, 1e-15);
    CMat2 bad;
    bad(0, 1) = 1.0;
    EXPECT_THROW((void)product_expectation(reg, {bad, pauli::I}), InvalidParameterError);
    EXPECT_THROW((void)product_expectation(reg, {pauli::I}), InvalidParameterError);
}

TEST(ProductExpectation, MatchesExactSimOnSingleQubitCircuits) {
    RandomCircuitConfig cfg;
    cfg.n_qubits = 3;
    cfg.n_steps = 30;
    cfg.cnot_weight = 1e-300;
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> pick(0, 3);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        const Circuit c = random_circuit(cfg);
        QcdftSimulator sim(3, CnotFunctional::bernardi());
        StateVector s(3);
        for (const auto &g : c.ops) {
            sim.apply(g);
            s.apply(g);
        }
        std::vector<CMat2> obs;
        for (int q = 0; q < 3; ++q) {
            obs.push_back(pauli::basis[static_cast<std::size_t>(pick(rng))]);
        }
        // <psi| O_2 ⊗ O_1 ⊗ O_0 |psi> via the dense oracle.
        cd value = 0.0;
        const auto &psi = s.amplitudes();
        for (std::size_t i = 0; i < 8; ++i) {
            for (std::size_t j = 0; j < 8; ++j) {
                cd m = 1.0;
                for (std::size_t q = 0; q < 3; ++q) {
                    m *= obs[q]((i >> q) & 1U, (j >> q) & 1U);
                }
                value += std::conj(psi[i]) * m * psi[j];
            }
        }
        EXPECT_NEAR(product_expectation(sim.reg(), obs), value.real(), 1e-9);
    }
}
