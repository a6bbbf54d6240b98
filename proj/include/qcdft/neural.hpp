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
 * Training of the corrected CNOT functional: feature encoding, the
 * root-mean-squared infidelity loss and its analytic gradient with respect
 * to the correction parameters, dataset generation and the SGD loop.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "engine.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "mlp.hpp"
#include "rdm.hpp"

namespace qcdft {

inline constexpr std::size_t feature_width = 6;

/// (p_c, Re rc01, Im rc01, p_t, Re rt01, Im rt01).
[[nodiscard]] inline Eigen::VectorXd encode_inputs(const OneRdm &rc, const OneRdm &rt) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(feature_width));
    f << rc(1, 1).real(), rc(0, 1).real(), rc(0, 1).imag(), rt(1, 1).real(),
        rt(0, 1).real(), rt(0, 1).imag();
    return f;
}

[[nodiscard]] inline Eigen::VectorXd encode_inputs(const OneRdm &rc, const OneRdm &rt,
                                                   const MlpModel &model) {
    check_input_width(model, feature_width);
    return encode_inputs(rc, rt);
}

/// Inverse of encode_inputs.
[[nodiscard]] inline std::pair<OneRdm, OneRdm> decode_inputs(const Eigen::VectorXd &f) {
    if (static_cast<std::size_t>(f.size()) != feature_width) {
        throw WidthMismatchError("decode_inputs: expected 6 features");
    }
    return {OneRdm::from_components(f[0], f[1], f[2]),
            OneRdm::from_components(f[3], f[4], f[5])};
}

/// sqrt(mean_l (1 - F(exact_l, predicted_l))^2).
[[nodiscard]] inline double rms1f(const std::vector<OneRdm> &predicted,
                                  const std::vector<OneRdm> &exact) {
    if (predicted.size() != exact.size() || predicted.empty()) {
        throw InvalidParameterError("rms1f: need equal, non-zero lengths");
    }
    double s = 0.0;
    for (std::size_t l = 0; l < predicted.size(); ++l) {
        const double inf = 1.0 - fidelity(exact[l], predicted[l]);
        s += inf * inf;
    }
    return std::clamp(std::sqrt(s / static_cast<double>(predicted.size())), 0.0, 1.0);
}

/// Marginals of a two-qubit state before and after an exact CNOT.
struct TrainingSample {
    OneRdm rho_c;
    OneRdm rho_t;
    OneRdm rho_c_after;
    OneRdm rho_t_after;
};

/// Fidelity of one corrected-functional branch and its derivative in theta.
struct BranchFidelity {
    double fidelity = 0.0;
    ThetaParams gradient; ///< dF / dtheta_ij
};

inline constexpr double fidelity_eigen_floor = 1e-12;

/**
 * F(exact, Tr_x[CNOT U (rc ⊗ rt) U^† CNOT^†]) with U = exp(i H(theta)) and
 * its exact derivative in every theta_ij.
 *
 * dF = 1/2 Tr[M^{-1/2} sqrt(exact) dρ sqrt(exact)] with
 * M = sqrt(exact) ρ sqrt(exact). The derivative of U along the Pauli
 * product Q is taken in the eigenbasis of H, where
 * dU = V (Φ ∘ V^† Q V) V^† and Φ_kl is the divided difference of e^{iλ}.
 * Eigenvalues of M below fidelity_eigen_floor are floored before the
 * inverse square root.
 */
[[nodiscard]] inline BranchFidelity branch_fidelity_grad(const OneRdm &rc, const OneRdm &rt,
                                                         const OneRdm &exact,
                                                         const ThetaParams &theta, Keep keep) {
    if (!theta.all_finite()) {
        throw InvalidParameterError("loss gradient: non-finite theta");
    }
    const CMat4 product = kron(rc.matrix(), rt.matrix());
    const auto eig_h = eigh(pauli_hamiltonian(theta));
    const CMat4 u = apply_spectral(eig_h, [](double l) { return std::polar(1.0, l); });
    const CMat2 pred = hermitize(cnot_branch(product, u, keep));

    const CMat2 s = sqrtm_psd(exact.matrix());
    const auto eig_m = eigh(s * pred * s);
    BranchFidelity out;
    for (double mu : eig_m.values) {
        out.fidelity += std::sqrt(std::max(mu, 0.0));
    }
    const CMat2 m_inv_sqrt = apply_spectral(eig_m, [](double mu) {
        return complex_t{1.0 / std::sqrt(std::max(mu, fidelity_eigen_floor))};
    });
    const CMat2 g = s * m_inv_sqrt * s * complex_t{0.5};
    const CMat4 g4 = keep == Keep::control ? kron(g, CMat2::identity())
                                           : kron(CMat2::identity(), g);

    // dF = 2 Re Tr[dU K], K = P U^† C^† G4 C.
    const CMat4 k = product * u.adjoint() * cnot_matrix.adjoint() * g4 * cnot_matrix;
    const CMat4 &v = eig_h.vectors;
    const CMat4 vh = v.adjoint();
    const CMat4 b = vh * k * v;

    CMat4 phi;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t c = 0; c < 4; ++c) {
            const double la = eig_h.values[a];
            const double lc = eig_h.values[c];
            const double half = 0.5 * (la - lc);
            const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0
                                                      : std::sin(half) / half;
            phi(a, c) = complex_t{0.0, 1.0} * std::polar(sinc, 0.5 * (la + lc));
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const CMat4 a = vh * pauli_product(i, j) * v;
            complex_t t = 0.0;
            for (std::size_t p = 0; p < 4; ++p) {
                for (std::size_t q = 0; q < 4; ++q) {
                    t += phi(p, q) * a(p, q) * b(q, p);
                }
            }
            out.gradient(i, j) = 2.0 * t.real();
        }
    }
    return out;
}

/// Gradient pair of the single-sample loss (1 - F) of each branch.
struct ThetaGradients {
    ThetaParams control;
    ThetaParams target;
};

[[nodiscard]] inline ThetaParams negate(ThetaParams t) {
    for (auto &row : t.theta) {
        for (double &v : row) {
            v = -v;
        }
    }
    return t;
}

[[nodiscard]] inline ThetaGradients loss_grad_theta(const TrainingSample &s,
                                                    const ThetaParams &theta_c,
                                                    const ThetaParams &theta_t) {
    const auto fc = branch_fidelity_grad(s.rho_c, s.rho_t, s.rho_c_after, theta_c, Keep::control);
    const auto ft = branch_fidelity_grad(s.rho_c, s.rho_t, s.rho_t_after, theta_t, Keep::target);
    return {negate(fc.gradient), negate(ft.gradient)};
}

/// Single-sample branch loss 1 - F, as differentiated by loss_grad_theta.
[[nodiscard]] inline double branch_loss(const TrainingSample &s, const ThetaParams &theta,
                                        Keep keep) {
    const CMat4 product = kron(s.rho_c.matrix(), s.rho_t.matrix());
    const CMat2 pred = hermitize(cnot_branch(product, herm_expi(theta), keep));
    const CMat2 sq = sqrtm_psd((keep == Keep::control ? s.rho_c_after : s.rho_t_after).matrix());
    const auto e = eigh(sq * pred * sq);
    double f = 0.0;
    for (double mu : e.values) {
        f += std::sqrt(std::max(mu, 0.0));
    }
    return 1.0 - f;
}

[[nodiscard]] inline const OneRdm &exact_for(const TrainingSample &s, ModelRole role) {
    return role == ModelRole::control ? s.rho_c_after : s.rho_t_after;
}

[[nodiscard]] inline Keep keep_for(ModelRole role) {
    return role == ModelRole::control ? Keep::control : Keep::target;
}

/// Batch RMS1F of one model's branch and its gradient in every parameter.
struct BatchLoss {
    double rms1f = 0.0;
    MlpGradients grads;
};

/**
 * Backpropagates the batch RMS1F of `model`'s branch. The per-sample
 * factor (F_l - 1) / (N E) of the RMS chain rule scales each sample's
 * fidelity gradient, so a batch of duplicates gives the single-sample
 * gradient. The other branch's parameters do not enter this loss.
 */
[[nodiscard]] inline BatchLoss backprop(const MlpModel &model,
                                        const std::vector<TrainingSample> &batch) {
    if (batch.empty()) {
        throw InvalidParameterError("backprop: empty batch");
    }
    const Keep keep = keep_for(model.role);
    std::vector<ForwardCache> caches;
    std::vector<BranchFidelity> fids;
    caches.reserve(batch.size());
    fids.reserve(batch.size());
    double sum_sq = 0.0;
    for (const auto &s : batch) {
        caches.push_back(forward_cached(model, encode_inputs(s.rho_c, s.rho_t, model)));
        const ThetaParams theta = scale_outputs(model, caches.back().activations.back());
        fids.push_back(branch_fidelity_grad(s.rho_c, s.rho_t, exact_for(s, model.role), theta, keep));
        const double inf = 1.0 - fids.back().fidelity;
        sum_sq += inf * inf;
    }
    const double n = static_cast<double>(batch.size());
    BatchLoss out;
    out.rms1f = std::sqrt(sum_sq / n);
    out.grads = MlpGradients::zeros_like(model);
    if (out.rms1f == 0.0) {
        return out;
    }
    for (std::size_t l = 0; l < batch.size(); ++l) {
        const double coeff = (fids[l].fidelity - 1.0) / (n * out.rms1f);
        ThetaParams d = fids[l].gradient;
        for (std::size_t k = 0; k < 16; ++k) {
            d.flat(k) *= coeff;
        }
        backward_accumulate(model, caches[l], d, out.grads);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset

/// rho = A A^† / Tr(A A^†) with A a 4x4 matrix of standard complex Gaussians.
template <class Rng> [[nodiscard]] CMat4 random_mixed_state(Rng &rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMat4 a;
    for (auto &v : a.data) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v = complex_t{re, im};
    }
    CMat4 rho = a * a.adjoint();
    rho *= complex_t{1.0 / rho.trace().real()};
    return hermitize(rho);
}

[[nodiscard]] inline TrainingSample sample_from_state(const CMat4 &rho) {
    const CMat4 after = cnot_matrix * rho * cnot_matrix;
    return {OneRdm::project(partial_trace(rho, Keep::control)),
            OneRdm::project(partial_trace(rho, Keep::target)),
            OneRdm::project(partial_trace(after, Keep::control)),
            OneRdm::project(partial_trace(after, Keep::target))};
}

[[nodiscard]] inline std::vector<TrainingSample> generate_dataset(std::size_t n,
                                                                  std::uint64_t seed) {
    if (n == 0) {
        throw InvalidParameterError("generate_dataset: n must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::vector<TrainingSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(sample_from_state(random_mixed_state(rng)));
    }
    return out;
}

namespace detail {
inline void write_rdm_fields(std::ostream &os, const OneRdm &r) {
    os << r(1, 1).real() << ',' << r(0, 1).real() << ',' << r(0, 1).imag();
}
} // namespace detail

inline const char *dataset_csv_header =
    "p_c,re_c,im_c,p_t,re_t,im_t,p_c_after,re_c_after,im_c_after,p_t_after,re_t_after,"
    "im_t_after";

/// One line per sample: four marginals as (p, Re rho01, Im rho01).
inline void write_dataset_csv(std::ostream &os, const std::vector<TrainingSample> &data) {
    os << std::setprecision(17);
    os << dataset_csv_header << '\n';
    for (const auto &s : data) {
        detail::write_rdm_fields(os, s.rho_c);
        os << ',';
        detail::write_rdm_fields(os, s.rho_t);
        os << ',';
        detail::write_rdm_fields(os, s.rho_c_after);
        os << ',';
        detail::write_rdm_fields(os, s.rho_t_after);
        os << '\n';
    }
}

[[nodiscard]] inline std::vector<TrainingSample> read_dataset_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != dataset_csv_header) {
        throw SchemaError("dataset: missing or unexpected header");
    }
    std::vector<TrainingSample> out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::array<double, 12> v{};
        std::istringstream ls(line);
        std::string cell;
        std::size_t k = 0;
        while (std::getline(ls, cell, ',')) {
            if (k >= v.size()) {
                throw SchemaError("dataset line " + std::to_string(line_no) + ": too many fields");
            }
            try {
                std::size_t used = 0;
                v[k] = std::stod(cell, &used);
                if (used != cell.size()) {
                    throw std::invalid_argument(cell);
                }
            } catch (const std::exception &) {
                throw SchemaError("dataset line " + std::to_string(line_no) +
                                  ": malformed number '" + cell + "'");
            }
            ++k;
        }
        if (k != v.size()) {
            throw SchemaError("dataset line " + std::to_string(line_no) + ": expected 12 fields");
        }
        out.push_back({OneRdm::from_components(v[0], v[1], v[2]),
                       OneRdm::from_components(v[3], v[4], v[5]),
                       OneRdm::from_components(v[6], v[7], v[8]),
                       OneRdm::from_components(v[9], v[10], v[11])});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    std::size_t n_samples = 300;
    std::size_t epochs = 500;
    double learning_rate = 1e-5;
    std::uint64_t seed = 0;
    std::size_t batch_size = 1;
    std::vector<std::size_t> layer_widths = default_layer_widths;
    OutputScale output_scale{};

    void validate() const {
        if (n_samples == 0 || batch_size == 0 || !(learning_rate > 0.0)) {
            throw InvalidParameterError("TrainConfig: n_samples, batch_size and "
                                        "learning_rate must be positive");
        }
        if (layer_widths.size() < 2 || layer_widths.front() != feature_width ||
            layer_widths.back() != 16) {
            throw WidthMismatchError("TrainConfig: layer_widths must start at 6 and end at 16");
        }
    }
};

struct EpochLoss {
    double control = 0.0;
    double target = 0.0;
    /// RMS over both branches' infidelities.
    double combined = 0.0;
};

struct TrainResult {
    MlpModel model_c;
    MlpModel model_t;
    EpochLoss initial;
    std::vector<EpochLoss> history;
};

/// RMS1F of both branches of the model pair over a dataset.
[[nodiscard]] inline EpochLoss evaluate(const MlpModel &model_c, const MlpModel &model_t,
                                        const std::vector<TrainingSample> &data) {
    double sc = 0.0, st = 0.0;
    for (const auto &s : data) {
        const auto f = encode_inputs(s.rho_c, s.rho_t);
        const double lc = branch_loss(s, forward(model_c, f), Keep::control);
        const double lt = branch_loss(s, forward(model_t, f), Keep::target);
        sc += lc * lc;
        st += lt * lt;
    }
    const double n = static_cast<double>(data.size());
    return {std::sqrt(sc / n), std::sqrt(st / n), std::sqrt((sc + st) / (2.0 * n))};
}

/// Same metric for a fixed theta pair (theta = 0 reproduces the Bernardi functional).
[[nodiscard]] inline EpochLoss evaluate_constant(const ThetaPair &theta,
                                                 const std::vector<TrainingSample> &data) {
    double sc = 0.0, st = 0.0;
    for (const auto &s : data) {
        const double lc = branch_loss(s, theta.control, Keep::control);
        const double lt = branch_loss(s, theta.target, Keep::target);
        sc += lc * lc;
        st += lt * lt;
    }
    const double n = static_cast<double>(data.size());
    return {std::sqrt(sc / n), std::sqrt(st / n), std::sqrt((sc + st) / (2.0 * n))};
}

/// Seeds derived from the run seed for the independent random streams.
struct TrainSeeds {
    std::uint64_t data;
    std::uint64_t init_c;
    std::uint64_t init_t;
    std::uint64_t shuffle;

    static TrainSeeds derive(std::uint64_t seed) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32), 0x51u};
        std::array<std::uint32_t, 8> w{};
        seq.generate(w.begin(), w.end());
        auto join = [&](std::size_t i) {
            return (static_cast<std::uint64_t>(w[2 * i]) << 32) | w[2 * i + 1];
        };
        return {join(0), join(1), join(2), join(3)};
    }
};

/**
 * Trains the control and target networks on the same sample stream.
 * With batch_size 1 the update uses the fused backward/SGD path.
 */
[[nodiscard]] inline TrainResult train(const TrainConfig &config,
                                       const std::vector<TrainingSample> &data,
                                       const std::function<void(std::size_t, const EpochLoss &)>
                                           &on_epoch = {}) {
    config.validate();
    if (data.empty()) {
        throw InvalidParameterError("train: empty dataset");
    }
    const auto seeds = TrainSeeds::derive(config.seed);
    TrainResult result{
        make_initialized_model(config.layer_widths, seeds.init_c, ModelRole::control,
                               config.output_scale),
        make_initialized_model(config.layer_widths, seeds.init_t, ModelRole::target,
                               config.output_scale),
        {},
        {}};
    result.initial = evaluate(result.model_c, result.model_t, data);
    result.history.reserve(config.epochs);

    std::mt19937_64 shuffle_rng(seeds.shuffle);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            if (stop - start == 1) {
                const auto &s = data[order[start]];
                const auto f = encode_inputs(s.rho_c, s.rho_t);
                for (MlpModel *m : {&result.model_c, &result.model_t}) {
                    const auto cache = forward_cached(*m, f);
                    const auto theta = scale_outputs(*m, cache.activations.back());
                    if (!theta.all_finite()) {
                        throw TrainingDivergedError("train: non-finite theta at epoch " +
                                                    std::to_string(epoch + 1));
                    }
                    const auto bf = branch_fidelity_grad(s.rho_c, s.rho_t, exact_for(s, m->role),
                                                         theta, keep_for(m->role));
                    // Single-sample RMS1F is 1 - F; its gradient is -dF.
                    backward_sgd_inplace(*m, cache, negate(bf.gradient), config.learning_rate);
                }
            } else {
                std::vector<TrainingSample> batch;
                for (std::size_t i = start; i < stop; ++i) {
                    batch.push_back(data[order[i]]);
                }
                for (MlpModel *m : {&result.model_c, &result.model_t}) {
                    const auto bl = backprop(*m, batch);
                    sgd_step_inplace(*m, bl.grads, config.learning_rate);
                    if (!m->all_finite()) {
                        throw TrainingDivergedError("train: non-finite parameters at epoch " +
                                                    std::to_string(epoch + 1));
                    }
                }
            }
        }
        if (!result.model_c.all_finite() || !result.model_t.all_finite()) {
            throw TrainingDivergedError("train: non-finite parameters at epoch " +
                                        std::to_string(epoch + 1));
        }
        const EpochLoss loss = evaluate(result.model_c, result.model_t, data);
        if (!std::isfinite(loss.combined)) {
            throw TrainingDivergedError("train: non-finite loss at epoch " +
                                        std::to_string(epoch + 1));
        }
        result.history.push_back(loss);
        if (on_epoch) {
            on_epoch(epoch + 1, loss);
        }
    }
    return result;
}

[[nodiscard]] inline TrainResult train(const TrainConfig &config) {
    config.validate();
    return train(config, generate_dataset(config.n_samples, TrainSeeds::derive(config.seed).data));
}

/// Theta provider backed by a trained model pair; safe for concurrent use.
[[nodiscard]] inline ThetaProvider model_provider(std::shared_ptr<const MlpModel> model_c,
                                                  std::shared_ptr<const MlpModel> model_t) {
    check_input_width(*model_c, feature_width);
    check_input_width(*model_t, feature_width);
    return [model_c, model_t](const OneRdm &rc, const OneRdm &rt) {
        const auto f = encode_inputs(rc, rt);
        return ThetaPair{forward(*model_c, f), forward(*model_t, f)};
    };
}

[[nodiscard]] inline CnotFunctional corrected_functional(MlpModel model_c, MlpModel model_t) {
    return CnotFunctional::corrected(
        model_provider(std::make_shared<const MlpModel>(std::move(model_c)),
                       std::make_shared<const MlpModel>(std::move(model_t))));
}

} // namespace qcdft
