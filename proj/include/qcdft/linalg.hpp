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
 * Fixed-size dense complex matrices (2x2 and 4x4) and the handful of
 * operations the 1-RDM machinery needs: Kronecker products, partial traces
 * over a two-qubit space, Hermitian eigendecomposition, the Pauli-product
 * exponential and the Uhlmann fidelity.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace qcdft {

using complex_t = std::complex<double>;

/// Dense row-major N x N complex matrix.
template <std::size_t N> struct CMat {
    std::array<complex_t, N * N> data{};

    static constexpr std::size_t dim = N;

    constexpr complex_t &operator()(std::size_t i, std::size_t j) {
        return data[i * N + j];
    }
    constexpr const complex_t &operator()(std::size_t i, std::size_t j) const {
        return data[i * N + j];
    }

    static constexpr CMat identity() {
        CMat m;
        for (std::size_t i = 0; i < N; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    static constexpr CMat diagonal(const std::array<complex_t, N> &d) {
        CMat m;
        for (std::size_t i = 0; i < N; ++i) {
            m(i, i) = d[i];
        }
        return m;
    }

    [[nodiscard]] constexpr CMat adjoint() const {
        CMat r;
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < N; ++j) {
                r(i, j) = std::conj((*this)(j, i));
            }
        }
        return r;
    }

    [[nodiscard]] constexpr complex_t trace() const {
        complex_t t = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            t += (*this)(i, i);
        }
        return t;
    }

    constexpr CMat &operator+=(const CMat &o) {
        for (std::size_t k = 0; k < N * N; ++k) {
            data[k] += o.data[k];
        }
        return *this;
    }
    constexpr CMat &operator-=(const CMat &o) {
        for (std::size_t k = 0; k < N * N; ++k) {
            data[k] -= o.data[k];
        }
        return *this;
    }
    constexpr CMat &operator*=(complex_t s) {
        for (auto &v : data) {
            v *= s;
        }
        return *this;
    }

    friend constexpr CMat operator+(CMat a, const CMat &b) { return a += b; }
    friend constexpr CMat operator-(CMat a, const CMat &b) { return a -= b; }
    friend constexpr CMat operator*(CMat a, complex_t s) { return a *= s; }
    friend constexpr CMat operator*(complex_t s, CMat a) { return a *= s; }

    friend constexpr CMat operator*(const CMat &a, const CMat &b) {
        CMat r;
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t k = 0; k < N; ++k) {
                const complex_t aik = a(i, k);
                for (std::size_t j = 0; j < N; ++j) {
                    r(i, j) += aik * b(k, j);
                }
            }
        }
        return r;
    }

    friend constexpr bool operator==(const CMat &, const CMat &) = default;
};

using CMat2 = CMat<2>;
using CMat4 = CMat<4>;

/// Largest entrywise modulus of a - b.
template <std::size_t N>
[[nodiscard]] double max_abs_diff(const CMat<N> &a, const CMat<N> &b) {
    double m = 0.0;
    for (std::size_t k = 0; k < N * N; ++k) {
        m = std::max(m, std::abs(a.data[k] - b.data[k]));
    }
    return m;
}

template <std::size_t N> [[nodiscard]] CMat<N> hermitize(const CMat<N> &m) {
    return (m + m.adjoint()) * complex_t{0.5};
}

template <std::size_t N>
[[nodiscard]] bool is_hermitian(const CMat<N> &m, double tol) {
    return max_abs_diff(m, m.adjoint()) <= tol;
}

template <std::size_t N>
[[nodiscard]] bool is_unitary(const CMat<N> &u, double tol) {
    return max_abs_diff(u * u.adjoint(), CMat<N>::identity()) <= tol;
}

/// (a ⊗ b)[2i+k][2j+l] = a[i][j] * b[k][l]; `a` is the control (first) factor.
[[nodiscard]] inline CMat4 kron(const CMat2 &a, const CMat2 &b) {
    CMat4 r;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            for (std::size_t k = 0; k < 2; ++k) {
                for (std::size_t l = 0; l < 2; ++l) {
                    r(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
                }
            }
        }
    }
    return r;
}

/// Which factor of a two-qubit operator survives a partial trace.
enum class Keep { control, target };

[[nodiscard]] inline CMat2 partial_trace(const CMat4 &m, Keep keep) {
    CMat2 r;
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            complex_t s = 0.0;
            for (std::size_t k = 0; k < 2; ++k) {
                s += keep == Keep::control ? m(2 * a + k, 2 * b + k)
                                           : m(2 * k + a, 2 * k + b);
            }
            r(a, b) = s;
        }
    }
    return r;
}

namespace pauli {
inline constexpr CMat2 I = CMat2::identity();
inline constexpr CMat2 X{{0.0, 1.0, 1.0, 0.0}};
inline constexpr CMat2 Y{{0.0, complex_t{0.0, -1.0}, complex_t{0.0, 1.0}, 0.0}};
inline constexpr CMat2 Z{{1.0, 0.0, 0.0, -1.0}};

/// The ordered Pauli set {I, X, Y, Z} indexing ThetaParams.
inline constexpr std::array<CMat2, 4> basis{I, X, Y, Z};
} // namespace pauli

/// CNOT with the control as the first (most significant) tensor factor.
inline constexpr CMat4 cnot_matrix{{1.0, 0.0, 0.0, 0.0, //
                                    0.0, 1.0, 0.0, 0.0, //
                                    0.0, 0.0, 0.0, 1.0, //
                                    0.0, 0.0, 1.0, 0.0}};

/// Real coefficients of H = sum_ij theta[i][j] P_i ⊗ P_j over P = {I, X, Y, Z}.
struct ThetaParams {
    std::array<std::array<double, 4>, 4> theta{};

    double &operator()(std::size_t i, std::size_t j) { return theta[i][j]; }
    double operator()(std::size_t i, std::size_t j) const { return theta[i][j]; }

    /// Flat view in row-major order, index 4*i + j.
    double &flat(std::size_t k) { return theta[k / 4][k % 4]; }
    double flat(std::size_t k) const { return theta[k / 4][k % 4]; }

    [[nodiscard]] bool all_finite() const {
        for (const auto &row : theta) {
            for (double v : row) {
                if (!std::isfinite(v)) {
                    return false;
                }
            }
        }
        return true;
    }

    friend bool operator==(const ThetaParams &, const ThetaParams &) = default;
};

/// P_i ⊗ P_j.
[[nodiscard]] inline CMat4 pauli_product(std::size_t i, std::size_t j) {
    return kron(pauli::basis[i], pauli::basis[j]);
}

[[nodiscard]] inline CMat4 pauli_hamiltonian(const ThetaParams &theta) {
    CMat4 h;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            if (theta(i, j) != 0.0) {
                h += pauli_product(i, j) * complex_t{theta(i, j)};
            }
        }
    }
    return h;
}

/// Eigenvalues (ascending order not guaranteed) and eigenvectors (columns).
template <std::size_t N> struct HermitianEigen {
    std::array<double, N> values{};
    CMat<N> vectors;
};

/**
 * Cyclic complex Jacobi eigensolver for a Hermitian matrix.
 *
 * Each rotation first removes the phase of the pivot a_pq with a diagonal
 * unitary and then applies the classical real Jacobi rotation. Sweeps stop
 * once the off-diagonal Frobenius norm drops below `tol`.
 */
template <std::size_t N>
[[nodiscard]] HermitianEigen<N> eigh(const CMat<N> &m, double tol = 1e-13) {
    CMat<N> a = hermitize(m);
    CMat<N> v = CMat<N>::identity();

    auto off_norm = [&a] {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < N; ++j) {
                if (i != j) {
                    s += std::norm(a(i, j));
                }
            }
        }
        return std::sqrt(s);
    };

    constexpr int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && off_norm() >= tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < N; ++p) {
            for (std::size_t q = p + 1; q < N; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag == 0.0) {
                    continue;
                }
                const complex_t phase = a(p, q) / mag; // e^{i phi}
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
                const complex_t jpp = c;
                const complex_t jpq = s;
                const complex_t jqp = -s * std::conj(phase);
                const complex_t jqq = c * std::conj(phase);

                for (std::size_t k = 0; k < N; ++k) {
                    const complex_t akp = a(k, p);
                    const complex_t akq = a(k, q);
                    a(k, p) = akp * jpp + akq * jqp;
                    a(k, q) = akp * jpq + akq * jqq;
                }
                for (std::size_t k = 0; k < N; ++k) {
                    const complex_t apk = a(p, k);
                    const complex_t aqk = a(q, k);
                    a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
                    a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < N; ++k) {
                    const complex_t vkp = v(k, p);
                    const complex_t vkq = v(k, q);
                    v(k, p) = vkp * jpp + vkq * jqp;
                    v(k, q) = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    HermitianEigen<N> out;
    for (std::size_t i = 0; i < N; ++i) {
        out.values[i] = a(i, i).real();
    }
    out.vectors = v;
    return out;
}

/// V diag(f(lambda)) V^dagger.
template <std::size_t N, class F>
[[nodiscard]] CMat<N> apply_spectral(const HermitianEigen<N> &e, F &&f) {
    CMat<N> r;
    for (std::size_t k = 0; k < N; ++k) {
        const complex_t fk = f(e.values[k]);
        for (std::size_t i = 0; i < N; ++i) {
            const complex_t vik = e.vectors(i, k) * fk;
            for (std::size_t j = 0; j < N; ++j) {
                r(i, j) += vik * std::conj(e.vectors(j, k));
            }
        }
    }
    return r;
}

/// U_m = exp(i H(theta)).
[[nodiscard]] inline CMat4 herm_expi(const ThetaParams &theta) {
    if (!theta.all_finite()) {
        throw InvalidParameterError("herm_expi: non-finite theta");
    }
    const auto e = eigh(pauli_hamiltonian(theta));
    return apply_spectral(e, [](double lambda) {
        return std::polar(1.0, lambda);
    });
}

inline constexpr double psd_tolerance = 1e-10;

/// Eigenvalues in [-psd_tolerance, 0) are clamped to zero.
template <std::size_t N>
[[nodiscard]] HermitianEigen<N> eigh_psd(const CMat<N> &m,
                                         const char *who = "sqrtm_psd") {
    auto e = eigh(m);
    for (double &lambda : e.values) {
        if (lambda < -psd_tolerance) {
            throw NotPsdError(std::string(who) + ": eigenvalue " +
                              std::to_string(lambda) + " below tolerance");
        }
        lambda = std::max(lambda, 0.0);
    }
    return e;
}

template <std::size_t N> [[nodiscard]] CMat<N> sqrtm_psd(const CMat<N> &m) {
    const auto e = eigh_psd(m);
    return apply_spectral(e, [](double lambda) {
        return complex_t{std::sqrt(lambda)};
    });
}

/// Uhlmann fidelity Tr sqrt(sqrt(r1) r2 sqrt(r1)), clamped to [0, 1].
template <std::size_t N>
[[nodiscard]] double fidelity(const CMat<N> &r1, const CMat<N> &r2) {
    const CMat<N> s1 = sqrtm_psd(r1);
    (void)eigh_psd(r2, "fidelity");
    const auto e = eigh(s1 * r2 * s1);
    double f = 0.0;
    for (double lambda : e.values) {
        if (lambda < -psd_tolerance) {
            throw NotPsdError("fidelity: inner matrix not PSD");
        }
        f += std::sqrt(std::max(lambda, 0.0));
    }
    return std::clamp(f, 0.0, 1.0);
}

} // namespace qcdft
