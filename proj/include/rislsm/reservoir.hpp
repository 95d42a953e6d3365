// SPDX-License-Identifier: Apache-2.0
//
// rislsm: reservoir-computing reflection tracking for RIS-aided wideband links
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Multi-layer reservoir (rate-based liquid state machine) for phase-trajectory
// forecasting.
//
// Layers are cascaded in series: layer 0 reads the encoded phase vector, layer l
// reads the fresh state of layer l-1. The readout sees the concatenation of all
// layer states plus a constant 1 and is the only trained part of the model.

#include "rislsm/error.hpp"
#include "rislsm/phase.hpp"
#include "rislsm/random.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace rislsm {

enum class activation { tanh, softsign };
enum class input_init { xavier, uniform_random };

inline double activate(activation a, double x)
{
    return a == activation::tanh ? std::tanh(x) : x / (1.0 + std::abs(x));
}

struct reservoir_arch {
    std::size_t n_layers = 5;
    std::size_t neurons = 100;     // per layer
    std::size_t input_dim = 2;     // 2M
    std::size_t output_dim = 2;    // 2M
    double connectivity = 0.1;
    double spectral_radius = 0.9;
    bool rescale = true;           // false keeps the raw uniform(-1, 1) draws
    activation act = activation::tanh;
    std::size_t washout = 10;
    double ridge_lambda = 1e-6;

    std::size_t state_dim() const { return n_layers * neurons; }
    std::size_t feature_dim() const { return state_dim() + 1; }

    void validate() const
    {
        if (n_layers < 1)
            throw config_error("reservoir needs at least one layer");
        if (neurons < 1)
            throw config_error("reservoir layers need at least one neuron");
        if (input_dim < 1 || output_dim < 1)
            throw config_error("reservoir input and output dimensions must be >= 1");
        if (!(connectivity > 0.0 && connectivity <= 1.0))
            throw config_error("connectivity must lie in (0, 1]");
        if (!(spectral_radius > 0.0))
            throw config_error("spectral radius must be > 0");
        if (!(ridge_lambda >= 0.0))
            throw config_error("ridge lambda must be >= 0");
    }

    /// Architecture for an M-element RIS with the (cos, sin) encoding.
    static reservoir_arch for_ris(std::size_t m)
    {
        reservoir_arch a;
        a.input_dim = 2 * m;
        a.output_dim = 2 * m;
        return a;
    }
};

struct reservoir_layer {
    Eigen::MatrixXd w_in;                 // neurons x layer input width
    Eigen::SparseMatrix<double> w_res;    // neurons x neurons
};

struct reservoir_model {
    reservoir_arch arch;
    input_init init = input_init::xavier;
    std::uint64_t seed = 0;
    std::vector<reservoir_layer> layers;
    Eigen::MatrixXd w_out;  // output_dim x feature_dim, empty until trained
    double train_rmse = 0.0;
    double validation_rmse = 0.0;

    bool trained() const { return w_out.size() > 0; }
};

/// Zero-mean Gaussian weights with variance 1 / fan_in.
inline Eigen::MatrixXd xavier_input_weights(std::size_t fan_in, Eigen::Index rows, Eigen::Index cols,
                                            std::uint64_t seed)
{
    if (fan_in == 0)
        throw domain_error("Xavier fan-in must be >= 1");
    auto rng = make_rng(seed, {0x58});
    std::normal_distribution<double> n(0.0, std::sqrt(1.0 / static_cast<double>(fan_in)));
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            w(i, j) = n(rng);
    return w;
}

/// Largest eigenvalue modulus of a (small, dense-able) square matrix.
inline double spectral_radius(const Eigen::MatrixXd& a)
{
    if (a.rows() == 0)
        return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace detail {

inline Eigen::SparseMatrix<double> draw_reservoir(const reservoir_arch& arch, std::uint64_t seed, std::size_t layer)
{
    const auto n = static_cast<Eigen::Index>(arch.neurons);
    // A draw whose spectral radius is 0 (e.g. empty or nilpotent) cannot be rescaled; redraw.
    for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
        auto rng = make_rng(seed, {0x52, layer, attempt});
        std::bernoulli_distribution keep(arch.connectivity);
        std::uniform_real_distribution<double> val(-1.0, 1.0);
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (arch.connectivity >= 1.0 || keep(rng))
                    dense(i, j) = val(rng);
        const double rho = spectral_radius(dense);
        if (rho < 1e-12)
            continue;
        if (arch.rescale)
            dense *= arch.spectral_radius / rho;
        return dense.sparseView();
    }
    throw config_error("could not draw a reservoir with non-zero spectral radius; raise connectivity");
}

}  // namespace detail

/// Builds the fixed random part of a model. W_in and W_res never change afterwards.
inline reservoir_model init_lsm(const reservoir_arch& arch, input_init mode, std::uint64_t seed)
{
    arch.validate();
    reservoir_model m;
    m.arch = arch;
    m.init = mode;
    m.seed = seed;
    for (std::size_t l = 0; l < arch.n_layers; ++l) {
        const std::size_t fan_in = l == 0 ? arch.input_dim : arch.neurons;
        reservoir_layer layer;
        const auto rows = static_cast<Eigen::Index>(arch.neurons);
        const auto cols = static_cast<Eigen::Index>(fan_in);
        if (mode == input_init::xavier) {
            layer.w_in = xavier_input_weights(fan_in, rows, cols, derive_seed(seed, {0x49, l}));
        } else {
            auto rng = make_rng(seed, {0x55, l});
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            layer.w_in.resize(rows, cols);
            for (Eigen::Index j = 0; j < cols; ++j)
                for (Eigen::Index i = 0; i < rows; ++i)
                    layer.w_in(i, j) = u(rng);
        }
        layer.w_res = detail::draw_reservoir(arch, seed, l);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

/// Per-layer states.
using layer_states = std::vector<Eigen::VectorXd>;

inline layer_states zero_states(const reservoir_model& model)
{
    return layer_states(model.layers.size(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.arch.neurons)));
}

/// One step of every layer: x_l <- f(W_res x_l + W_in u_l), u_0 = input, u_l = x_{l-1} (new).
inline layer_states update_state(const reservoir_model& model, const layer_states& states, const Eigen::VectorXd& input)
{
    if (states.size() != model.layers.size())
        throw dimension_error("state count does not match the number of layers");
    layer_states next(states.size());
    const Eigen::VectorXd* u = &input;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& L = model.layers[l];
        if (u->size() != L.w_in.cols() || states[l].size() != L.w_res.rows())
            throw dimension_error("layer " + std::to_string(l) + " input or state has the wrong length");
        Eigen::VectorXd pre = L.w_res * states[l];
        pre.noalias() += L.w_in * *u;
        next[l] = pre.unaryExpr([&](double x) { return activate(model.arch.act, x); });
        u = &next[l];
    }
    return next;
}

inline Eigen::VectorXd concat_states(const layer_states& st)
{
    Eigen::Index n = 0;
    for (const auto& s : st)
        n += s.size();
    Eigen::VectorXd out(n);
    Eigen::Index off = 0;
    for (const auto& s : st) {
        out.segment(off, s.size()) = s;
        off += s.size();
    }
    return out;
}

/// Row t holds the concatenated layer states after consuming sample t, starting from zero.
inline Eigen::MatrixXd run_states(const reservoir_model& model, const Eigen::MatrixXd& encoded)
{
    if (encoded.rows() <= static_cast<Eigen::Index>(model.arch.washout))
        throw insufficient_data_error("sequence of length " + std::to_string(encoded.rows()) +
                                      " does not exceed the washout of " + std::to_string(model.arch.washout));
    if (encoded.cols() != static_cast<Eigen::Index>(model.arch.input_dim))
        throw dimension_error("encoded sequence width does not match the model input dimension");
    Eigen::MatrixXd X(encoded.rows(), static_cast<Eigen::Index>(model.arch.state_dim()));
    layer_states st = zero_states(model);
    for (Eigen::Index t = 0; t < encoded.rows(); ++t) {
        st = update_state(model, st, encoded.row(t).transpose());
        X.row(t) = concat_states(st).transpose();
    }
    return X;
}

/// Rows of `states` past the washout.
inline Eigen::MatrixXd usable_states(const reservoir_model& model, const Eigen::MatrixXd& states)
{
    const auto w = static_cast<Eigen::Index>(model.arch.washout);
    return states.bottomRows(std::max<Eigen::Index>(0, states.rows() - w));
}

/// Dense operation counts of the solve actually performed by fit_ridge.
struct solve_counts {
    std::uint64_t additions = 0;
    std::uint64_t multiplications = 0;
};

struct ridge_fit {
    Eigen::MatrixXd w;  // q x p
    solve_counts counted;
};

/// Minimizer of ||X W^T - Y||^2 + lambda ||W||^2, i.e. W = Y^T X (X^T X + lambda I)^-1.
/// Solved through the n x n dual system when lambda > 0 and n < p, otherwise by a
/// column-pivoted QR of the lambda-augmented design. lambda = 0 with a rank-deficient X
/// throws regularization_required_error.
inline ridge_fit fit_ridge(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lambda)
{
    if (X.rows() != Y.rows())
        throw dimension_error("design and target row counts differ");
    if (!(lambda >= 0.0))
        throw domain_error("ridge lambda must be >= 0");
    const auto n = static_cast<std::uint64_t>(X.rows());
    const auto p = static_cast<std::uint64_t>(X.cols());
    const auto q = static_cast<std::uint64_t>(Y.cols());
    ridge_fit out;
    if (lambda > 0.0 && X.rows() < X.cols()) {
        Eigen::MatrixXd A = X * X.transpose();
        A.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success)
            throw regularization_required_error("dual ridge system is not positive definite");
        out.w = (X.transpose() * llt.solve(Y)).transpose();
        out.counted.multiplications = n * n * p + n * n * n / 6 + 2 * n * n * q + n * p * q;
        out.counted.additions = n * n * (p - 1) + n + n * n * n / 6 + 2 * n * n * q + n * (p - 1) * q;
        return out;
    }
    Eigen::MatrixXd A(X.rows() + (lambda > 0.0 ? X.cols() : 0), X.cols());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(A.rows(), Y.cols());
    A.topRows(X.rows()) = X;
    B.topRows(Y.rows()) = Y;
    if (lambda > 0.0)
        A.bottomRows(X.cols()) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(X.cols(), X.cols());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < A.cols())
        throw regularization_required_error("normal equations are singular (rank " + std::to_string(qr.rank()) +
                                            " < " + std::to_string(A.cols()) + "); set ridge_lambda > 0");
    out.w = qr.solve(B).transpose();
    const auto m = static_cast<std::uint64_t>(A.rows());
    out.counted.multiplications = 2 * m * p * p - 2 * p * p * p / 3 + 2 * m * p * q + p * p * q / 2;
    out.counted.additions = out.counted.multiplications;
    return out;
}

/// Features fed to the readout: concatenated states followed by a constant 1.
inline Eigen::MatrixXd with_bias(const Eigen::MatrixXd& states)
{
    Eigen::MatrixXd F(states.rows(), states.cols() + 1);
    F.leftCols(states.cols()) = states;
    F.col(states.cols()).setOnes();
    return F;
}

namespace detail {

/// RMS over time of the per-step Euclidean norm of wrapped phase errors.
inline double phase_rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth)
{
    if (pred.rows() == 0)
        return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const double d = wrap_difference(pred.data()[i] - truth.data()[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.rows()));
}

inline Eigen::MatrixXd readout_phases(const Eigen::MatrixXd& w_out, const Eigen::MatrixXd& features)
{
    const Eigen::MatrixXd enc = features * w_out.transpose();
    Eigen::MatrixXd out(enc.rows(), enc.cols() / 2);
    for (Eigen::Index t = 0; t < enc.rows(); ++t)
        out.row(t) = decode_phases(normalize_pairs(enc.row(t).transpose())).transpose();
    return out;
}

}  // namespace detail

/// Split of a trajectory into readout training pairs (state t-1 -> sample t).
/// Pair index i corresponds to target slot washout + 1 + i.
struct readout_split {
    Eigen::Index n_train_slots = 0;  // slots [0, n_train_slots) feed training
    Eigen::Index first_target = 0;   // washout + 1
    Eigen::Index n_train_pairs = 0;
    Eigen::Index n_validation = 0;   // targets in [n_train_slots, T)
};

inline readout_split make_split(const reservoir_arch& arch, Eigen::Index T, double train_fraction)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw config_error("train fraction must lie in (0, 1)");
    const auto w = static_cast<Eigen::Index>(arch.washout);
    if (T < w + 4)
        throw insufficient_data_error("trajectory of length " + std::to_string(T) + " is shorter than washout + 4");
    readout_split sp;
    sp.n_train_slots = static_cast<Eigen::Index>(std::floor(train_fraction * static_cast<double>(T)));
    sp.n_train_slots = std::clamp<Eigen::Index>(sp.n_train_slots, w + 2, T - 1);
    sp.first_target = w + 1;
    sp.n_train_pairs = sp.n_train_slots - sp.first_target;
    sp.n_validation = T - sp.n_train_slots;
    return sp;
}

/// Fits W_out on the selected training pairs (all pairs when `pairs` is empty; repeated
/// indices weight a pair more) and records training and validation RMSE. Only W_out and
/// the diagnostics are written.
inline reservoir_model train_readout(const reservoir_model& model, const phase_trajectory& traj,
                                     double train_fraction, const std::vector<std::size_t>& pairs,
                                     solve_counts* counted = nullptr)
{
    if (traj.n_elements() * 2 != static_cast<Eigen::Index>(model.arch.input_dim))
        throw dimension_error("trajectory width does not match the model input dimension");
    const Eigen::Index T = traj.length();
    const readout_split sp = make_split(model.arch, T, train_fraction);
    const Eigen::MatrixXd enc = encode_sequence(traj.phases);
    const Eigen::MatrixXd F = with_bias(run_states(model, enc));

    std::vector<Eigen::Index> rows;
    if (pairs.empty()) {
        for (Eigen::Index i = 0; i < sp.n_train_pairs; ++i)
            rows.push_back(i);
    } else {
        for (auto i : pairs) {
            if (static_cast<Eigen::Index>(i) >= sp.n_train_pairs)
                throw index_error("training pair index out of range");
            rows.push_back(static_cast<Eigen::Index>(i));
        }
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), F.cols());
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(rows.size()), enc.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Eigen::Index t = sp.first_target + rows[r];
        X.row(static_cast<Eigen::Index>(r)) = F.row(t - 1);
        Y.row(static_cast<Eigen::Index>(r)) = enc.row(t);
    }
    auto fit = fit_ridge(X, Y, model.arch.ridge_lambda);
    if (counted)
        *counted = fit.counted;

    reservoir_model out = model;
    out.w_out = std::move(fit.w);
    const Eigen::MatrixXd pred_train =
        detail::readout_phases(out.w_out, F.middleRows(sp.first_target - 1, sp.n_train_pairs));
    out.train_rmse = detail::phase_rmse(pred_train, traj.phases.middleRows(sp.first_target, sp.n_train_pairs));
    const Eigen::MatrixXd pred_val =
        detail::readout_phases(out.w_out, F.middleRows(sp.n_train_slots - 1, sp.n_validation));
    out.validation_rmse = detail::phase_rmse(pred_val, traj.phases.bottomRows(sp.n_validation));
    return out;
}

inline reservoir_model train_readout(const reservoir_model& model, const phase_trajectory& traj,
                                     double train_fraction = 0.7)
{
    return train_readout(model, traj, train_fraction, {});
}

/// Stateful driver for prediction: feeds encoded samples and applies the readout.
class reservoir_runner {
public:
    explicit reservoir_runner(const reservoir_model& model) : model_(&model), states_(zero_states(model))
    {
        if (!model.trained())
            throw state_error("reservoir model has not been trained");
    }

    void step(const Eigen::VectorXd& encoded) { states_ = update_state(*model_, states_, encoded); }

    void consume(const Eigen::MatrixXd& phases)
    {
        for (Eigen::Index t = 0; t < phases.rows(); ++t)
            step(encode_phases(Eigen::VectorXd(phases.row(t).transpose())));
    }

    /// Raw readout of the current state (encoded space, not normalized).
    Eigen::VectorXd readout() const
    {
        const Eigen::VectorXd x = concat_states(states_);
        return model_->w_out.leftCols(x.size()) * x + model_->w_out.col(x.size());
    }

    const layer_states& states() const { return states_; }

private:
    const reservoir_model* model_;
    layer_states states_;
};

namespace detail {

inline void check_history(const reservoir_model& model, const phase_trajectory& history)
{
    if (!model.trained())
        throw state_error("reservoir model has not been trained");
    if (history.length() <= static_cast<Eigen::Index>(model.arch.washout))
        throw insufficient_data_error("history must be longer than the washout");
    if (history.n_elements() * 2 != static_cast<Eigen::Index>(model.arch.input_dim))
        throw dimension_error("history width does not match the model input dimension");
}

}  // namespace detail

/// Phase vector predicted for the slot after the end of `history`.
inline Eigen::VectorXd predict_next(const reservoir_model& model, const phase_trajectory& history)
{
    detail::check_history(model, history);
    reservoir_runner run(model);
    run.consume(history.phases);
    return decode_phases(normalize_pairs(run.readout()));
}

/// Autoregressive forecast: each prediction is re-encoded and fed back as the next input.
inline phase_trajectory forecast(const reservoir_model& model, const phase_trajectory& history, std::size_t horizon)
{
    detail::check_history(model, history);
    if (horizon < 1)
        throw config_error("forecast horizon must be >= 1");
    reservoir_runner run(model);
    run.consume(history.phases);
    phase_trajectory out;
    out.slot_interval = history.slot_interval;
    out.origin = history.origin;
    out.phases.resize(static_cast<Eigen::Index>(horizon), history.n_elements());
    for (std::size_t h = 0; h < horizon; ++h) {
        const Eigen::VectorXd phi = decode_phases(normalize_pairs(run.readout()));
        out.phases.row(static_cast<Eigen::Index>(h)) = phi.transpose();
        if (h + 1 < horizon)
            run.step(encode_phases(phi));
    }
    return out;
}

/// One-step predictions for every slot t in [from, T) using the true history up to t-1.
inline Eigen::MatrixXd one_step_predictions(const reservoir_model& model, const phase_trajectory& traj,
                                            Eigen::Index from)
{
    if (!model.trained())
        throw state_error("reservoir model has not been trained");
    if (from < 1 || from > traj.length())
        throw index_error("one-step prediction start out of range");
    reservoir_runner run(model);
    Eigen::MatrixXd out(traj.length() - from, traj.n_elements());
    for (Eigen::Index t = 0; t + 1 < traj.length(); ++t) {
        run.step(encode_phases(Eigen::VectorXd(traj.phases.row(t).transpose())));
        if (t + 1 >= from)
            out.row(t + 1 - from) = decode_phases(normalize_pairs(run.readout())).transpose();
    }
    return out;
}

} // namespace rislsm
