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
 * Number theory and first-register simulation for factoring semiprimes
 * from single-qubit probabilities.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "exact_sim.hpp"

namespace qcdft {

using u64 = std::uint64_t;

[[nodiscard]] inline u64 mul_mod(u64 a, u64 b, u64 m) {
    return static_cast<u64>((static_cast<unsigned __int128>(a) * b) % m);
}

[[nodiscard]] inline u64 pow_mod(u64 base, u64 exp, u64 m) {
    u64 result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1U) {
            result = mul_mod(result, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1U;
    }
    return result;
}

/// Smallest r >= 1 with a^r = 1 (mod n), by iterated multiplication.
[[nodiscard]] inline u64 multiplicative_order(u64 a, u64 n) {
    if (n < 2) {
        throw InvalidParameterError("multiplicative_order: modulus must be >= 2");
    }
    if (std::gcd(a, n) != 1) {
        throw UndefinedOrderError("multiplicative_order: gcd(" + std::to_string(a) + ", " +
                                  std::to_string(n) + ") != 1");
    }
    const u64 base = a % n;
    u64 x = base;
    u64 r = 1;
    while (x != 1) {
        x = mul_mod(x, base, n);
        ++r;
    }
    return r;
}

/**
 * True when gcd(a, n) = 1, the order r of a is 2^y with y >= 1, and
 * gcd(a^{r/2} + 1, n) is a non-trivial factor. The order is probed by
 * repeated squaring, so only power-of-two orders are ever found.
 */
[[nodiscard]] inline bool is_as(u64 a, u64 n) {
    if (n < 2 || std::gcd(a, n) != 1) {
        return false;
    }
    u64 prev = a % n;
    if (prev == 1) {
        return false; // r = 1
    }
    const int max_y = static_cast<int>(std::bit_width(n)) + 1;
    for (int y = 1; y <= max_y; ++y) {
        const u64 next = mul_mod(prev, prev, n);
        if (next == 1) {
            const u64 g = std::gcd(prev + 1, n);
            return g != 1 && g != n;
        }
        prev = next;
    }
    return false;
}

/// |{a in [1, n] : is_as(a, n)}|.
[[nodiscard]] inline u64 count_as(u64 n) {
    u64 c = 0;
    for (u64 a = 1; a <= n; ++a) {
        c += is_as(a, n) ? 1 : 0;
    }
    return c;
}

enum class SemiprimeKind { squarefree, square };

struct Semiprime {
    u64 n = 0;
    u64 p = 0;
    u64 q = 0;
};

/// Smallest-prime-factor sieve over [0, limit].
[[nodiscard]] inline std::vector<u64> spf_sieve(u64 limit) {
    std::vector<u64> spf(limit + 1, 0);
    for (u64 i = 2; i <= limit; ++i) {
        if (spf[i] == 0) {
            for (u64 j = i; j <= limit; j += i) {
                if (spf[j] == 0) {
                    spf[j] = i;
                }
            }
        }
    }
    return spf;
}

/// First k semiprimes of the given kind in ascending order.
[[nodiscard]] inline std::vector<Semiprime> semiprimes(SemiprimeKind kind, std::size_t k) {
    if (k == 0) {
        throw InvalidParameterError("semiprimes: k must be >= 1");
    }
    u64 limit = 64;
    while (true) {
        const auto spf = spf_sieve(limit);
        std::vector<Semiprime> out;
        if (kind == SemiprimeKind::square) {
            for (u64 p = 2; p <= limit && out.size() < k; ++p) {
                if (spf[p] == p) {
                    out.push_back({p * p, p, p});
                }
            }
        } else {
            for (u64 n = 4; n <= limit && out.size() < k; ++n) {
                const u64 p = spf[n];
                const u64 q = n / p;
                if (q != p && q > 1 && spf[q] == q) {
                    out.push_back({n, p, q});
                }
            }
        }
        if (out.size() == k) {
            return out;
        }
        limit *= 2;
    }
}

struct SemiprimeRecord {
    std::size_t index = 0;
    u64 n = 0;
    u64 p = 0;
    u64 q = 0;
    bool squarefree = true;
    u64 count_as = 0;
    double prob_as = 0.0;
};

[[nodiscard]] inline std::vector<SemiprimeRecord> census(SemiprimeKind kind, std::size_t k) {
    std::vector<SemiprimeRecord> out;
    const auto list = semiprimes(kind, k);
    out.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto &s = list[i];
        const u64 c = count_as(s.n);
        out.push_back({i + 1, s.n, s.p, s.q, s.p != s.q, c,
                       static_cast<double>(c) / static_cast<double>(s.n)});
    }
    return out;
}

inline void write_census_csv(std::ostream &os, const std::vector<SemiprimeRecord> &records) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "index,N,p,q,squarefree,count_as,prob_as\n";
    for (const auto &r : records) {
        os << r.index << ',' << r.n << ',' << r.p << ',' << r.q << ','
           << (r.squarefree ? "true" : "false") << ',' << r.count_as << ',' << r.prob_as
           << '\n';
    }
}

// ---------------------------------------------------------------------------
// First-register simulation

/// Smallest n with 2^n >= value.
[[nodiscard]] inline std::size_t bits_for(u64 value) {
    std::size_t n = 0;
    while ((u64{1} << n) < value) {
        ++n;
    }
    return n;
}

struct ShorRegisterSpec {
    u64 modulus = 0;
    u64 base = 0;

    [[nodiscard]] std::size_t n_s() const { return bits_for(modulus); }
    [[nodiscard]] std::size_t register_width() const { return 2 * n_s(); }

    void validate() const {
        if (modulus < 3) {
            throw InvalidParameterError("ShorRegisterSpec: modulus must be >= 3");
        }
        if (base <= 1 || base >= modulus) {
            throw InvalidParameterError("ShorRegisterSpec: base must satisfy 1 < a < N");
        }
        if (std::gcd(base, modulus) != 1) {
            throw InvalidParameterError("ShorRegisterSpec: base must be coprime to N");
        }
    }
};

/// In-place radix-2 transform computing sum_x v[x] e^{2πi xk/M} (unnormalized).
inline void fft_inplace(std::vector<std::complex<double>> &v) {
    const std::size_t m = v.size();
    for (std::size_t i = 1, j = 0; i < m; ++i) {
        std::size_t bit = m >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(v[i], v[j]);
        }
    }
    for (std::size_t len = 2; len <= m; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t i = 0; i < m; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto w = std::polar(1.0, ang * static_cast<double>(k));
                const auto a = v[i + k];
                const auto b = v[i + k + len / 2] * w;
                v[i + k] = a + b;
                v[i + k + len / 2] = a - b;
            }
        }
    }
}

/**
 * SQPs of the 2 n_s first-register qubits (qubit 0 least significant) after
 * preparing (1/√M) Σ_x |x>|a^x mod N> and applying the quantum Fourier
 * transform to the first register. The second register is never stored:
 * the first register is split by the label a^x mod N and each slice is
 * transformed separately, since slices with different labels are
 * orthogonal.
 */
[[nodiscard]] inline std::vector<double> shor_first_register_sqp(const ShorRegisterSpec &spec,
                                                                 std::size_t max_qubits =
                                                                     default_max_qubits) {
    spec.validate();
    const std::size_t width = spec.register_width();
    if (width > max_qubits) {
        throw CapacityError("shor_first_register_sqp: " + std::to_string(width) +
                            " qubits exceeds the maximum of " + std::to_string(max_qubits));
    }
    const std::size_t m = std::size_t{1} << width;
    std::vector<u64> label(m);
    std::unordered_map<u64, std::size_t> slot;
    u64 f = 1 % spec.modulus;
    for (std::size_t x = 0; x < m; ++x) {
        label[x] = f;
        slot.try_emplace(f, slot.size());
        f = mul_mod(f, spec.base, spec.modulus);
    }

    const double amp = 1.0 / static_cast<double>(m); // (1/√M) from the state, (1/√M) from the QFT
    std::vector<double> prob(m, 0.0);
    std::vector<std::complex<double>> slice(m);
    for (const auto &[value, idx] : slot) {
        (void)idx;
        for (std::size_t x = 0; x < m; ++x) {
            slice[x] = label[x] == value ? amp : 0.0;
        }
        fft_inplace(slice);
        for (std::size_t k = 0; k < m; ++k) {
            prob[k] += std::norm(slice[k]);
        }
    }

    std::vector<double> sqps(width, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t q = 0; q < width; ++q) {
            if ((k >> q) & 1U) {
                sqps[q] += prob[k];
            }
        }
    }
    for (double &p : sqps) {
        p = std::clamp(p, 0.0, 1.0);
    }
    return sqps;
}

/// 2^(number of SQPs above `zero_tolerance`).
[[nodiscard]] inline u64 recover_period_from_sqp(const std::vector<double> &sqps,
                                                 double zero_tolerance = 1e-6) {
    u64 y0 = 0;
    for (double p : sqps) {
        if (p > zero_tolerance) {
            ++y0;
        }
    }
    if (y0 >= 64) {
        throw InvalidParameterError("recover_period_from_sqp: too many non-zero qubits");
    }
    return u64{1} << y0;
}

[[nodiscard]] inline u64 isqrt(u64 n) {
    auto r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) {
        --r;
    }
    while ((r + 1) * (r + 1) <= n) {
        ++r;
    }
    return r;
}

struct FactorAttempt {
    u64 a = 0;
    u64 gcd_a_n = 0;
    std::optional<u64> period;        ///< recovered from SQPs
    std::optional<u64> gcd_half_plus; ///< gcd(a^{r/2} + 1, N)
    std::string outcome;
};

struct FactorResult {
    bool success = false;
    u64 p = 0;
    u64 q = 0;
    std::vector<FactorAttempt> attempts;
};

/**
 * Factors a semiprime using only first-register SQPs for the quantum step.
 * Square semiprimes are caught by an integer square root; a drawn a that
 * shares a factor with N short-circuits through the gcd.
 */
template <class Draw>
[[nodiscard]] FactorResult factor_semiprime_sqp_with(u64 n, Draw &&draw, std::size_t max_attempts,
                                                     std::size_t max_qubits = default_max_qubits) {
    if (n < 4) {
        throw InvalidParameterError("factor_semiprime_sqp: N must be >= 4");
    }
    FactorResult res;
    const u64 s = isqrt(n);
    if (s * s == n) {
        res.success = true;
        res.p = res.q = s;
        return res;
    }
    for (std::size_t i = 0; i < max_attempts; ++i) {
        FactorAttempt at;
        at.a = draw();
        at.gcd_a_n = std::gcd(at.a, n);
        if (at.gcd_a_n > 1) {
            at.outcome = "gcd shortcut";
            res.attempts.push_back(at);
            res.success = true;
            res.p = std::min(at.gcd_a_n, n / at.gcd_a_n);
            res.q = std::max(at.gcd_a_n, n / at.gcd_a_n);
            return res;
        }
        const u64 r =
            recover_period_from_sqp(shor_first_register_sqp({n, at.a}, max_qubits));
        at.period = r;
        if (r < 2 || pow_mod(at.a, r, n) != 1) {
            at.outcome = "recovered period is not the order";
            res.attempts.push_back(at);
            continue;
        }
        const u64 g = std::gcd(pow_mod(at.a, r / 2, n) + 1, n);
        at.gcd_half_plus = g;
        if (g == 1 || g == n) {
            at.outcome = "trivial factor";
            res.attempts.push_back(at);
            continue;
        }
        at.outcome = "factor found";
        res.attempts.push_back(at);
        res.success = true;
        res.p = std::min(g, n / g);
        res.q = std::max(g, n / g);
        return res;
    }
    return res;
}

/// Draws a uniformly from [2, N-1] with a seeded generator.
[[nodiscard]] inline FactorResult factor_semiprime_sqp(u64 n, std::uint64_t seed,
                                                       std::size_t max_attempts,
                                                       std::size_t max_qubits = default_max_qubits) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<u64> dist(2, n > 3 ? n - 1 : 2);
    return factor_semiprime_sqp_with(n, [&] { return dist(rng); }, max_attempts, max_qubits);
}

} // namespace qcdft
