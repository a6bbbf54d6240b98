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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qcdft;
using cd = std::complex<double>;

namespace {

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

/// Plain loops over std::vector; shares nothing with the Eigen forward pass.
std::vector<double> reference_forward(const MlpModel &m, std::vector<double> x) {
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        std::vector<double> y(static_cast<std::size_t>(m.weights[l].rows()));
        for (std::size_t i = 0; i < y.size(); ++i) {
            double z = m.biases[l](static_cast<Eigen::Index>(i));
            for (std::size_t k = 0; k < x.size(); ++k) {
                z += m.weights[l](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * x[k];
            }
            y[i] = 1.0 / (1.0 + std::exp(-z));
        }
        x = std::move(y);
    }
    for (double &v : x) {
        v = m.output_scale.lo + (m.output_scale.hi - m.output_scale.lo) * v;
    }
    return x;
}

std::filesystem::path temp_file(const std::string &name) {
    return std::filesystem::temp_directory_path() / ("qcdft_test_" + name);
}

} // namespace

TEST(EncodeInputs, Examples) {
    const auto zero = encode_inputs(OneRdm{}, OneRdm{});
    EXPECT_EQ(zero, Eigen::VectorXd::Zero(6));
    const OneRdm plus = OneRdm::pure(1.0, 1.0);
    Eigen::VectorXd expected(6);
    expected << 0.0, 0.0, 0.0, 0.5, 0.5, 0.0;
    EXPECT_LE((encode_inputs(OneRdm{}, plus) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EncodeInputs, RoundTripDeterminesBothMarginals) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        const OneRdm rc = random_rdm(rng), rt = random_rdm(rng);
        const auto [c, d] = decode_inputs(encode_inputs(rc, rt));
        EXPECT_LE(max_abs_diff(c.matrix(), rc.matrix()), 1e-15);
        EXPECT_LE(max_abs_diff(d.matrix(), rt.matrix()), 1e-15);
    }
}

TEST(EncodeInputs, WidthMismatch) {
    const auto m = make_zero_model({5, 16});
    EXPECT_THROW((void)encode_inputs(OneRdm{}, OneRdm{}, m), WidthMismatchError);
    EXPECT_THROW((void)forward(make_zero_model({6, 16}), Eigen::VectorXd::Zero(5)),
                 WidthMismatchError);
}

TEST(Forward, ZeroModelGivesZeroTheta) {
    const auto theta = forward(make_zero_model(default_layer_widths), Eigen::VectorXd::Ones(6));
    EXPECT_EQ(theta, ThetaParams{});
}

TEST(Forward, DeterministicAndMatchesReference) {
    const auto a = make_initialized_model({6, 12, 9, 16}, 42);
    const auto b = make_initialized_model({6, 12, 9, 16}, 42);
    EXPECT_TRUE(a == b);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const auto f = encode_inputs(random_rdm(rng), random_rdm(rng));
        const auto theta = forward(a, f);
        EXPECT_EQ(theta, forward(b, f));
        const auto ref = reference_forward(a, std::vector<double>(f.data(), f.data() + 6));
        for (std::size_t k = 0; k < 16; ++k) {
            EXPECT_NEAR(theta.flat(k), ref[k], 1e-13);
        }
    }
}

TEST(Forward, InitializationIsSeededGlorot) {
    const auto m = make_initialized_model({6, 64, 16}, 7);
    const double limit = std::sqrt(6.0 / 70.0);
    EXPECT_LE(m.weights[0].cwiseAbs().maxCoeff(), limit);
    EXPECT_EQ(m.biases[0], Eigen::VectorXd::Zero(64));
    EXPECT_FALSE(m == make_initialized_model({6, 64, 16}, 8));
    EXPECT_EQ(m.n_parameters(), 6u * 64 + 64 + 64 * 16 + 16);
}

TEST(Rms1f, Examples) {
    std::mt19937_64 rng(3);
    std::vector<OneRdm> xs{random_rdm(rng), random_rdm(rng)};
    EXPECT_NEAR(rms1f(xs, xs), 0.0, 1e-9);
    EXPECT_NEAR(rms1f({OneRdm{}}, {OneRdm::pure(0.0, 1.0)}), 1.0, 1e-12);
    // Fidelities (1, 1/sqrt 2).
    const double expected = std::sqrt(std::pow(1.0 - 1.0 / std::sqrt(2.0), 2) / 2.0);
    EXPECT_NEAR(rms1f({OneRdm{}, OneRdm::maximally_mixed()}, {OneRdm{}, OneRdm{}}), expected,
                1e-12);
    EXPECT_NEAR(expected, 0.20711, 1e-5);
    EXPECT_THROW((void)rms1f({OneRdm{}}, {}), InvalidParameterError);
    EXPECT_THROW((void)rms1f({}, {}), InvalidParameterError);
}

TEST(LossGradient, MatchesCentralDifferences) {
    const auto data = generate_dataset(20, 5);
    std::mt19937_64 rng(6);
    const double h = 1e-5;
    double worst = 0.0;
    for (const auto &s : data) {
        const ThetaParams tc = random_theta(rng), tt = random_theta(rng);
        const auto g = loss_grad_theta(s, tc, tt);
        for (std::size_t k = 1; k < 16; ++k) {
            for (bool ctrl : {true, false}) {
                ThetaParams plus = ctrl ? tc : tt, minus = plus;
                plus.flat(k) += h;
                minus.flat(k) -= h;
                const Keep keep = ctrl ? Keep::control : Keep::target;
                const double fd = (branch_loss(s, plus, keep) - branch_loss(s, minus, keep)) / (2 * h);
                const double an = (ctrl ? g.control : g.target).flat(k);
                worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-4}));
            }
        }
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(LossGradient, GlobalPhaseComponentVanishes) {
    const auto data = generate_dataset(30, 8);
    std::mt19937_64 rng(9);
    for (const auto &s : data) {
        const auto g = loss_grad_theta(s, random_theta(rng), random_theta(rng));
        EXPECT_LE(std::abs(g.control(0, 0)), 1e-9);
        EXPECT_LE(std::abs(g.target(0, 0)), 1e-9);
    }
}

TEST(LossGradient, StationaryWhenExactOutputIsReproduced) {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 20; ++t) {
        // Product inputs: theta = 0 reproduces the exact marginals.
        const CMat4 rho = kron(oracle::random_density2(rng), oracle::random_density2(rng));
        const auto s = sample_from_state(rho);
        const auto g = loss_grad_theta(s, {}, {});
        for (std::size_t k = 0; k < 16; ++k) {
            EXPECT_LE(std::abs(g.control.flat(k)), 1e-8);
            EXPECT_LE(std::abs(g.target.flat(k)), 1e-8);
        }
    }
}

TEST(LossGradient, RejectsNonFiniteTheta) {
    const auto s = generate_dataset(1, 1).front();
    ThetaParams bad;
    bad(1, 2) = std::nan("");
    EXPECT_THROW((void)loss_grad_theta(s, bad, {}), InvalidParameterError);
}

TEST(Backprop, MatchesFiniteDifferencesOnTinyModel) {
    const auto batch = generate_dataset(4, 11);
    for (ModelRole role : {ModelRole::control, ModelRole::target}) {
        auto model = make_initialized_model({6, 4, 16}, 12, role);
        const auto bl = backprop(model, batch);
        const double h = 1e-5;
        double worst = 0.0;
        for (std::size_t l = 0; l < model.n_layers(); ++l) {
            auto probe = [&](double &param, double analytic) {
                const double orig = param;
                param = orig + h;
                const double up = backprop(model, batch).rms1f;
                param = orig - h;
                const double down = backprop(model, batch).rms1f;
                param = orig;
                const double fd = (up - down) / (2 * h);
                worst = std::max(worst, std::abs(analytic - fd) /
                                            std::max({std::abs(analytic), std::abs(fd), 1e-6}));
            };
            for (Eigen::Index i = 0; i < model.weights[l].size(); ++i) {
                probe(model.weights[l].data()[i], bl.grads.weights[l].data()[i]);
            }
            for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) {
                probe(model.biases[l][i], bl.grads.biases[l][i]);
            }
        }
        EXPECT_LT(worst, 1e-4) << role_name(role);
    }
}

TEST(Backprop, DuplicatedBatchGivesSingleSampleGradient) {
    const auto data = generate_dataset(1, 13);
    const auto model = make_initialized_model({6, 5, 16}, 14, ModelRole::target);
    const auto one = backprop(model, data);
    const auto three = backprop(model, {data[0], data[0], data[0]});
    EXPECT_NEAR(one.rms1f, three.rms1f, 1e-15);
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        EXPECT_LE((one.grads.weights[l] - three.grads.weights[l]).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LE((one.grads.biases[l] - three.grads.biases[l]).cwiseAbs().maxCoeff(), 1e-14);
    }
    EXPECT_THROW((void)backprop(model, {}), InvalidParameterError);
}

TEST(Backprop, FusedPathMatchesExplicitStep) {
    const auto data = generate_dataset(1, 15);
    const auto model = make_initialized_model({6, 5, 16}, 16);
    const auto bl = backprop(model, data);
    const auto explicit_step = sgd_step(model, bl.grads, 0.01);

    MlpModel fused = model;
    const auto &s = data[0];
    const auto cache = forward_cached(fused, encode_inputs(s.rho_c, s.rho_t));
    const auto bf = branch_fidelity_grad(s.rho_c, s.rho_t, s.rho_c_after,
                                         scale_outputs(fused, cache.activations.back()),
                                         Keep::control);
    backward_sgd_inplace(fused, cache, negate(bf.gradient), 0.01);
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        EXPECT_LE((fused.weights[l] - explicit_step.weights[l]).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LE((fused.biases[l] - explicit_step.biases[l]).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(SgdStep, Examples) {
    const auto model = make_initialized_model({6, 3, 16}, 17);
    const auto data = generate_dataset(2, 18);
    const auto bl = backprop(model, data);
    EXPECT_TRUE(sgd_step(model, bl.grads, 0.0) == model);
    EXPECT_EQ(backprop(sgd_step(model, bl.grads, 0.0), data).rms1f, bl.rms1f);

    auto scalar = make_zero_model({1, 1});
    scalar.weights[0](0, 0) = 1.0;
    auto g = MlpGradients::zeros_like(scalar);
    g.weights[0](0, 0) = 2.0;
    EXPECT_DOUBLE_EQ(sgd_step(scalar, g, 0.1).weights[0](0, 0), 0.8);

    auto wrong = MlpGradients::zeros_like(make_zero_model({6, 4, 16}));
    EXPECT_THROW((void)sgd_step(model, wrong, 0.1), ShapeMismatchError);
}

TEST(SgdStep, ConvexQuadraticDecreasesMonotonically) {
    auto m = make_initialized_model({6, 8, 16}, 19);
    auto loss = [](const MlpModel &x) {
        double s = 0.0;
        for (std::size_t l = 0; l < x.n_layers(); ++l) {
            s += x.weights[l].squaredNorm() + x.biases[l].squaredNorm();
        }
        return s;
    };
    double prev = loss(m);
    for (int it = 0; it < 50; ++it) {
        MlpGradients g = MlpGradients::zeros_like(m);
        for (std::size_t l = 0; l < m.n_layers(); ++l) {
            g.weights[l] = 2.0 * m.weights[l];
            g.biases[l] = 2.0 * m.biases[l];
        }
        sgd_step_inplace(m, g, 0.1);
        const double cur = loss(m);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(Dataset, StatesArePhysicalAndDeterministic) {
    std::mt19937_64 rng(20);
    for (int t = 0; t < 200; ++t) {
        const CMat4 rho = random_mixed_state(rng);
        EXPECT_TRUE(is_hermitian(rho, 1e-14));
        EXPECT_NEAR(rho.trace().real(), 1.0, 1e-14);
        for (double l : eigh(rho).values) {
            EXPECT_GE(l, -1e-12);
        }
    }
    std::ostringstream a, b;
    write_dataset_csv(a, generate_dataset(50, 21));
    write_dataset_csv(b, generate_dataset(50, 21));
    EXPECT_EQ(a.str(), b.str());
}

TEST(Dataset, ControlDiagonalIsInvariant) {
    for (const auto &s : generate_dataset(300, 22)) {
        EXPECT_NEAR(s.rho_c_after(1, 1).real(), s.rho_c(1, 1).real(), 1e-12);
        EXPECT_NEAR(s.rho_c_after(0, 0).real(), s.rho_c(0, 0).real(), 1e-12);
    }
}

TEST(Dataset, CsvRoundTrip) {
    const auto data = generate_dataset(25, 23);
    std::stringstream ss;
    write_dataset_csv(ss, data);
    const auto back = read_dataset_csv(ss);
    ASSERT_EQ(back.size(), data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        EXPECT_LE(max_abs_diff(back[i].rho_t_after.matrix(), data[i].rho_t_after.matrix()), 1e-15);
        EXPECT_LE(max_abs_diff(back[i].rho_c.matrix(), data[i].rho_c.matrix()), 1e-15);
    }
    std::istringstream bad_header("p,q\n");
    EXPECT_THROW((void)read_dataset_csv(bad_header), SchemaError);
    std::istringstream short_row(std::string(dataset_csv_header) + "\n0.1,0,0\n");
    EXPECT_THROW((void)read_dataset_csv(short_row), SchemaError);
    std::istringstream junk(std::string(dataset_csv_header) + "\n0.1,0,0,0,0,0,0,0,0,0,0,x\n");
    EXPECT_THROW((void)read_dataset_csv(junk), SchemaError);
}

TEST(Train, ZeroEpochsGivesUntrainedModels) {
    TrainConfig cfg;
    cfg.n_samples = 5;
    cfg.epochs = 0;
    cfg.layer_widths = {6, 4, 16};
    const auto r = train(cfg);
    EXPECT_TRUE(r.history.empty());
    const auto seeds = TrainSeeds::derive(cfg.seed);
    EXPECT_TRUE(r.model_c == make_initialized_model(cfg.layer_widths, seeds.init_c));
}

TEST(Train, LossDecreasesAndIsReproducible) {
    TrainConfig cfg;
    cfg.n_samples = 40;
    cfg.epochs = 15;
    cfg.learning_rate = 0.05;
    cfg.layer_widths = {6, 16, 16};
    cfg.seed = 3;
    const auto a = train(cfg);
    ASSERT_EQ(a.history.size(), 15u);
    EXPECT_LT(a.history.back().combined, a.initial.combined);
    const auto b = train(cfg);
    EXPECT_TRUE(a.model_c == b.model_c);
    EXPECT_TRUE(a.model_t == b.model_t);
    EXPECT_EQ(a.history.back().combined, b.history.back().combined);
}

TEST(Train, MiniBatchPathRuns) {
    TrainConfig cfg;
    cfg.n_samples = 12;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.learning_rate = 0.05;
    cfg.layer_widths = {6, 8, 16};
    const auto r = train(cfg);
    EXPECT_EQ(r.history.size(), 3u);
    EXPECT_LT(r.history.back().combined, r.initial.combined);
}

TEST(Train, InvalidConfig) {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    EXPECT_THROW((void)train(cfg), InvalidParameterError);
    cfg = {};
    cfg.layer_widths = {5, 16};
    EXPECT_THROW((void)train(cfg), WidthMismatchError);
}

TEST(Train, DivergenceIsReported) {
    TrainConfig cfg;
    cfg.n_samples = 5;
    cfg.epochs = 2;
    cfg.learning_rate = std::numeric_limits<double>::infinity();
    cfg.layer_widths = {6, 4, 16};
    EXPECT_THROW((void)train(cfg), TrainingDivergedError);
}

TEST(Evaluate, ZeroThetaModelMatchesBernardiBaseline) {
    const auto data = generate_dataset(30, 24);
    const auto zc = make_zero_model(default_layer_widths, ModelRole::control);
    const auto zt = make_zero_model(default_layer_widths, ModelRole::target);
    const auto a = evaluate(zc, zt, data);
    const auto b = evaluate_constant({}, data);
    EXPECT_NEAR(a.combined, b.combined, 1e-15);
    // Baseline equals RMS1F of Bernardi predictions.
    std::vector<OneRdm> pred, exact;
    for (const auto &s : data) {
        pred.push_back(bernardi_cnot(s.rho_c, s.rho_t).target);
        exact.push_back(s.rho_t_after);
    }
    EXPECT_NEAR(b.target, rms1f(pred, exact), 1e-9);
}

TEST(Serialization, RoundTripIsBitExact) {
    const auto m = make_initialized_model({6, 10, 7, 16}, 25, ModelRole::target);
    const auto path = temp_file("model.json");
    save_model(m, path.string());
    const auto back = load_model(path.string());
    EXPECT_TRUE(back == m);
    std::mt19937_64 rng(26);
    const auto f = encode_inputs(random_rdm(rng), random_rdm(rng));
    EXPECT_EQ(forward(back, f), forward(m, f));
    std::filesystem::remove(path);
}

TEST(Serialization, TruncatedFileIsSchemaError) {
    const auto m = make_initialized_model({6, 4, 16}, 27);
    const std::string text = model_to_json(m).dump();
    const auto path = temp_file("truncated.json");
    std::ofstream(path) << text.substr(0, text.size() / 2);
    EXPECT_THROW((void)load_model(path.string()), SchemaError);
    std::filesystem::remove(path);
}

TEST(Serialization, SchemaVersionAndDimensionErrors) {
    const auto m = make_initialized_model({6, 4, 16}, 28);
    auto j = model_to_json(m);
    auto wrong_widths = j;
    wrong_widths["layer_widths"] = {6, 5, 16};
    EXPECT_THROW((void)model_from_json(wrong_widths), DimensionError);
    auto wrong_version = j;
    wrong_version["format_version"] = 2;
    EXPECT_THROW((void)model_from_json(wrong_version), VersionError);
    auto missing = j;
    missing.erase("biases");
    EXPECT_THROW((void)model_from_json(missing), SchemaError);
    auto bad_role = j;
    bad_role["role"] = "other";
    EXPECT_THROW((void)model_from_json(bad_role), SchemaError);
    auto bad_type = j;
    bad_type["weights"][0][0][0] = "x";
    EXPECT_THROW((void)model_from_json(bad_type), SchemaError);
    EXPECT_THROW((void)load_model("/nonexistent/model.json"), Error);
}

TEST(ModelProvider, DrivesCorrectedFunctional) {
    const auto zc = make_zero_model(default_layer_widths, ModelRole::control);
    const auto zt = make_zero_model(default_layer_widths, ModelRole::target);
    const auto f = corrected_functional(zc, zt);
    std::mt19937_64 rng(29);
    const OneRdm rc = random_rdm(rng), rt = random_rdm(rng);
    const auto a = f(rc, rt);
    const auto b = bernardi_cnot(rc, rt);
    EXPECT_LE(max_abs_diff(a.target.matrix(), b.target.matrix()), 1e-14);
}
