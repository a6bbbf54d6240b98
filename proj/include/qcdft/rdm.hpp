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
 * Single-qubit reduced density matrix value type.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"

namespace qcdft {

/**
 * A 2x2 Hermitian, unit-trace, positive semidefinite matrix.
 *
 * Construction through `from_matrix` validates the invariants within
 * `tolerance`; `project` repairs small floating-point drift instead.
 * The SQP (probability of measuring |1>) is the lower-right entry.
 */
class OneRdm {
  public:
    static constexpr double tolerance = 1e-10;

    /// |0><0|.
    OneRdm() { m_(0, 0) = 1.0; }

    static OneRdm from_matrix(const CMat2 &m, double tol = tolerance) {
        if (!is_hermitian(m, tol)) {
            throw InvalidParameterError("OneRdm: matrix is not Hermitian");
        }
        if (std::abs(m.trace() - complex_t{1.0}) > tol) {
            throw InvalidParameterError("OneRdm: trace is not 1");
        }
        const auto e = eigh(m);
        for (double lambda : e.values) {
            if (lambda < -tol) {
                throw NotPsdError("OneRdm: negative eigenvalue " +
                                  std::to_string(lambda));
            }
        }
        OneRdm r;
        r.m_ = hermitize(m);
        return r;
    }

    /// Hermitize, clamp negative eigenvalues to zero and renormalize the trace.
    static OneRdm project(const CMat2 &m) {
        const CMat2 h = hermitize(m);
        // Fast path: a 2x2 Hermitian matrix with trace t and determinant d is
        // PSD iff t >= 0 and d >= 0.
        const double t = h.trace().real();
        const double d = (h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0)).real();
        OneRdm r;
        if (t > 0.0 && d >= 0.0 && h(0, 0).real() >= 0.0 && h(1, 1).real() >= 0.0) {
            r.m_ = h * complex_t{1.0 / t};
            return r;
        }
        auto e = eigh(h);
        double total = 0.0;
        for (double &lambda : e.values) {
            lambda = std::max(lambda, 0.0);
            total += lambda;
        }
        if (!(total > 0.0)) {
            throw InvalidParameterError("OneRdm::project: zero matrix");
        }
        r.m_ = hermitize(apply_spectral(e, [total](double lambda) {
            return complex_t{lambda / total};
        }));
        return r;
    }

    /// Pure state |psi><psi| from (unnormalized) amplitudes.
    static OneRdm pure(complex_t a0, complex_t a1) {
        const double n = std::norm(a0) + std::norm(a1);
        CMat2 m;
        m(0, 0) = std::norm(a0) / n;
        m(0, 1) = a0 * std::conj(a1) / n;
        m(1, 0) = std::conj(m(0, 1));
        m(1, 1) = std::norm(a1) / n;
        OneRdm r;
        r.m_ = m;
        return r;
    }

    static OneRdm maximally_mixed() {
        OneRdm r;
        r.m_ = CMat2::identity() * complex_t{0.5};
        return r;
    }

    /// Rebuild from (p, Re rho01, Im rho01).
    static OneRdm from_components(double p, double re01, double im01,
                                  double tol = 1e-9) {
        CMat2 m;
        m(0, 0) = 1.0 - p;
        m(1, 1) = p;
        m(0, 1) = complex_t{re01, im01};
        m(1, 0) = complex_t{re01, -im01};
        return from_matrix(m, tol);
    }

    [[nodiscard]] const CMat2 &matrix() const { return m_; }
    [[nodiscard]] complex_t operator()(std::size_t i, std::size_t j) const {
        return m_(i, j);
    }

    /// Probability of |1>, clamped to [0, 1].
    [[nodiscard]] double sqp() const {
        return std::clamp(m_(1, 1).real(), 0.0, 1.0);
    }

  private:
    CMat2 m_;
};

[[nodiscard]] inline double sqp_of(const OneRdm &r) { return r.sqp(); }

[[nodiscard]] inline double fidelity(const OneRdm &a, const OneRdm &b) {
    return fidelity(a.matrix(), b.matrix());
}

} // namespace qcdft
