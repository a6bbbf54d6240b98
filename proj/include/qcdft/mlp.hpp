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
 * Dense feed-forward network with sigmoid activations on every layer whose
 * 16 outputs are mapped affinely onto the correction parameters theta.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"
#include "linalg.hpp"

namespace qcdft {

inline const std::vector<std::size_t> default_layer_widths{6, 64, 64, 128, 256, 512, 1024, 16};

/// Affine map from the (0, 1) sigmoid range onto [lo, hi].
struct OutputScale {
    double lo = -std::numbers::pi;
    double hi = std::numbers::pi;

    friend bool operator==(const OutputScale &, const OutputScale &) = default;
};

enum class ModelRole { control, target };

[[nodiscard]] inline std::string role_name(ModelRole r) {
    return r == ModelRole::control ? "control" : "target";
}

struct MlpModel {
    ModelRole role = ModelRole::control;
    std::vector<std::size_t> layer_widths;
    std::vector<Eigen::MatrixXd> weights; ///< weights[l] is widths[l+1] x widths[l]
    std::vector<Eigen::VectorXd> biases;
    OutputScale output_scale;

    [[nodiscard]] std::size_t n_layers() const { return weights.size(); }
    [[nodiscard]] std::size_t input_width() const { return layer_widths.front(); }
    [[nodiscard]] std::size_t output_width() const { return layer_widths.back(); }

    [[nodiscard]] std::size_t n_parameters() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
        }
        return n;
    }

    /// Throws DimensionError if shapes disagree with layer_widths.
    void check_consistent() const {
        if (layer_widths.size() < 2) {
            throw DimensionError("model needs at least an input and an output layer");
        }
        if (weights.size() + 1 != layer_widths.size() || biases.size() != weights.size()) {
            throw DimensionError("model layer count does not match layer_widths");
        }
        for (std::size_t l = 0; l < weights.size(); ++l) {
            const auto rows = static_cast<std::size_t>(weights[l].rows());
            const auto cols = static_cast<std::size_t>(weights[l].cols());
            if (rows != layer_widths[l + 1] || cols != layer_widths[l] ||
                static_cast<std::size_t>(biases[l].size()) != layer_widths[l + 1]) {
                throw DimensionError("layer " + std::to_string(l) +
                                     " shape does not match layer_widths");
            }
        }
    }

    [[nodiscard]] bool all_finite() const {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (!weights[l].allFinite() || !biases[l].allFinite()) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const MlpModel &a, const MlpModel &b) {
        if (a.role != b.role || a.layer_widths != b.layer_widths ||
            a.output_scale != b.output_scale || a.weights.size() != b.weights.size()) {
            return false;
        }
        for (std::size_t l = 0; l < a.weights.size(); ++l) {
            if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) {
                return false;
            }
        }
        return true;
    }
};

/// All-zero parameters.
[[nodiscard]] inline MlpModel make_zero_model(std::vector<std::size_t> widths,
                                              ModelRole role = ModelRole::control,
                                              OutputScale scale = {}) {
    MlpModel m;
    m.role = role;
    m.layer_widths = std::move(widths);
    m.output_scale = scale;
    for (std::size_t l = 0; l + 1 < m.layer_widths.size(); ++l) {
        m.weights.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.layer_widths[l + 1]),
                                                  static_cast<Eigen::Index>(m.layer_widths[l])));
        m.biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.layer_widths[l + 1])));
    }
    m.check_consistent();
    return m;
}

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
[[nodiscard]] inline MlpModel make_initialized_model(std::vector<std::size_t> widths,
                                                     std::uint64_t seed,
                                                     ModelRole role = ModelRole::control,
                                                     OutputScale scale = {}) {
    MlpModel m = make_zero_model(std::move(widths), role, scale);
    std::mt19937_64 rng(seed);
    for (auto &w : m.weights) {
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                w(i, j) = dist(rng);
            }
        }
    }
    return m;
}

namespace detail {
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline void sigmoid_inplace(Eigen::VectorXd &v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = sigmoid(v[i]);
    }
}
} // namespace detail

/// Layer activations of one forward pass; activations[0] is the input.
struct ForwardCache {
    std::vector<Eigen::VectorXd> activations;
};

inline void check_input_width(const MlpModel &model, std::size_t width) {
    if (width != model.input_width()) {
        throw WidthMismatchError("model expects " + std::to_string(model.input_width()) +
                                 " features, got " + std::to_string(width));
    }
}

[[nodiscard]] inline ThetaParams scale_outputs(const MlpModel &model,
                                               const Eigen::VectorXd &out) {
    if (out.size() != 16) {
        throw DimensionError("model output width must be 16");
    }
    ThetaParams theta;
    const double span = model.output_scale.hi - model.output_scale.lo;
    for (std::size_t k = 0; k < 16; ++k) {
        theta.flat(k) = model.output_scale.lo + span * out[static_cast<Eigen::Index>(k)];
    }
    return theta;
}

[[nodiscard]] inline ForwardCache forward_cached(const MlpModel &model,
                                                 const Eigen::VectorXd &features) {
    check_input_width(model, static_cast<std::size_t>(features.size()));
    ForwardCache cache;
    cache.activations.reserve(model.n_layers() + 1);
    cache.activations.push_back(features);
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        Eigen::VectorXd z = model.biases[l];
        z.noalias() += model.weights[l] * cache.activations.back();
        detail::sigmoid_inplace(z);
        cache.activations.push_back(std::move(z));
    }
    return cache;
}

[[nodiscard]] inline ThetaParams forward(const MlpModel &model,
                                         const Eigen::VectorXd &features) {
    return scale_outputs(model, forward_cached(model, features).activations.back());
}

/// Parameter gradients shaped like the model.
struct MlpGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    static MlpGradients zeros_like(const MlpModel &m) {
        MlpGradients g;
        for (std::size_t l = 0; l < m.n_layers(); ++l) {
            g.weights.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
            g.biases.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
        }
        return g;
    }
};

/// Accumulates d(loss)/d(parameters) into `grads` given d(loss)/d(theta).
inline void backward_accumulate(const MlpModel &model, const ForwardCache &cache,
                                const ThetaParams &dloss_dtheta, MlpGradients &grads) {
    const double span = model.output_scale.hi - model.output_scale.lo;
    const Eigen::VectorXd &out = cache.activations.back();
    Eigen::VectorXd delta(out.size());
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        delta[k] = span * dloss_dtheta.flat(static_cast<std::size_t>(k)) * out[k] * (1.0 - out[k]);
    }
    for (std::size_t l = model.n_layers(); l-- > 0;) {
        const Eigen::VectorXd &input = cache.activations[l];
        grads.weights[l].noalias() += delta * input.transpose();
        grads.biases[l] += delta;
        if (l == 0) {
            break;
        }
        Eigen::VectorXd upstream = model.weights[l].transpose() * delta;
        for (Eigen::Index i = 0; i < upstream.size(); ++i) {
            upstream[i] *= input[i] * (1.0 - input[i]);
        }
        delta = std::move(upstream);
    }
}

/// w <- w - lr * g for every parameter.
inline void sgd_step_inplace(MlpModel &model, const MlpGradients &grads, double lr) {
    if (grads.weights.size() != model.n_layers() || grads.biases.size() != model.n_layers()) {
        throw ShapeMismatchError("sgd_step: gradient layer count mismatch");
    }
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        if (grads.weights[l].rows() != model.weights[l].rows() ||
            grads.weights[l].cols() != model.weights[l].cols() ||
            grads.biases[l].size() != model.biases[l].size()) {
            throw ShapeMismatchError("sgd_step: gradient shape mismatch at layer " +
                                     std::to_string(l));
        }
    }
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        model.weights[l] -= lr * grads.weights[l];
        model.biases[l] -= lr * grads.biases[l];
    }
}

[[nodiscard]] inline MlpModel sgd_step(MlpModel model, const MlpGradients &grads, double lr) {
    sgd_step_inplace(model, grads, lr);
    return model;
}

/**
 * Backward pass fused with the SGD update for a single sample: each
 * layer's upstream delta is computed from the pre-update weights before
 * that layer is updated.
 */
inline void backward_sgd_inplace(MlpModel &model, const ForwardCache &cache,
                                 const ThetaParams &dloss_dtheta, double lr) {
    const double span = model.output_scale.hi - model.output_scale.lo;
    const Eigen::VectorXd &out = cache.activations.back();
    Eigen::VectorXd delta(out.size());
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        delta[k] = span * dloss_dtheta.flat(static_cast<std::size_t>(k)) * out[k] * (1.0 - out[k]);
    }
    for (std::size_t l = model.n_layers(); l-- > 0;) {
        const Eigen::VectorXd &input = cache.activations[l];
        Eigen::VectorXd upstream;
        if (l > 0) {
            upstream.noalias() = model.weights[l].transpose() * delta;
            for (Eigen::Index i = 0; i < upstream.size(); ++i) {
                upstream[i] *= input[i] * (1.0 - input[i]);
            }
        }
        const Eigen::VectorXd step = lr * delta;
        model.weights[l].noalias() -= step * input.transpose();
        model.biases[l] -= step;
        delta = std::move(upstream);
    }
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr int model_format_version = 1;

[[nodiscard]] inline nlohmann::json model_to_json(const MlpModel &m) {
    m.check_consistent();
    nlohmann::json j;
    j["format_version"] = model_format_version;
    j["role"] = role_name(m.role);
    j["layer_widths"] = m.layer_widths;
    j["output_scale"] = {{"lo", m.output_scale.lo}, {"hi", m.output_scale.hi}};
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (std::size_t l = 0; l < m.n_layers(); ++l) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(m.weights[l].cols()));
            for (Eigen::Index k = 0; k < m.weights[l].cols(); ++k) {
                row[static_cast<std::size_t>(k)] = m.weights[l](i, k);
            }
            rows.push_back(std::move(row));
        }
        weights.push_back(std::move(rows));
        biases.push_back(std::vector<double>(m.biases[l].data(),
                                             m.biases[l].data() + m.biases[l].size()));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    return j;
}

[[nodiscard]] inline MlpModel model_from_json(const nlohmann::json &j) {
    MlpModel m;
    try {
        if (!j.is_object()) {
            throw SchemaError("model file: top level must be an object");
        }
        for (const char *key : {"format_version", "role", "layer_widths", "output_scale",
                                "weights", "biases"}) {
            if (!j.contains(key)) {
                throw SchemaError(std::string("model file: missing field '") + key + "'");
            }
        }
        const int version = j.at("format_version").get<int>();
        if (version != model_format_version) {
            throw VersionError("model file: unsupported format_version " +
                               std::to_string(version));
        }
        const auto role = j.at("role").get<std::string>();
        if (role == "control") {
            m.role = ModelRole::control;
        } else if (role == "target") {
            m.role = ModelRole::target;
        } else {
            throw SchemaError("model file: role must be \"control\" or \"target\"");
        }
        m.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
        m.output_scale.lo = j.at("output_scale").at("lo").get<double>();
        m.output_scale.hi = j.at("output_scale").at("hi").get<double>();

        const auto &weights = j.at("weights");
        const auto &biases = j.at("biases");
        if (!weights.is_array() || !biases.is_array()) {
            throw SchemaError("model file: weights and biases must be arrays");
        }
        for (const auto &layer : weights) {
            const auto rows = layer.get<std::vector<std::vector<double>>>();
            const std::size_t cols = rows.empty() ? 0 : rows.front().size();
            Eigen::MatrixXd w(static_cast<Eigen::Index>(rows.size()),
                              static_cast<Eigen::Index>(cols));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != cols) {
                    throw DimensionError("model file: ragged weight matrix");
                }
                for (std::size_t k = 0; k < cols; ++k) {
                    w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
                }
            }
            m.weights.push_back(std::move(w));
        }
        for (const auto &layer : biases) {
            const auto b = layer.get<std::vector<double>>();
            m.biases.push_back(Eigen::Map<const Eigen::VectorXd>(
                b.data(), static_cast<Eigen::Index>(b.size())));
        }
    } catch (const nlohmann::json::exception &e) {
        throw SchemaError(std::string("model file: ") + e.what());
    }
    m.check_consistent();
    if (!m.all_finite()) {
        throw SchemaError("model file: non-finite parameter");
    }
    return m;
}

inline void save_model(const MlpModel &m, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("save_model: cannot open " + path);
    }
    out << model_to_json(m).dump() << '\n';
    if (!out) {
        throw Error("save_model: write failed for " + path);
    }
}

[[nodiscard]] inline MlpModel load_model(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("load_model: cannot open " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error &e) {
        throw SchemaError(std::string("model file: ") + e.what());
    }
    return model_from_json(j);
}

} // namespace qcdft
