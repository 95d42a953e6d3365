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

// Prediction-quality and dispersion metrics on phase vectors, and closed-form
// training-cost (FLOP) counts of the reservoir readout.

#include "rislsm/error.hpp"
#include "rislsm/phase.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace rislsm {

/// Root mean square over time steps of the per-step error norm:
/// sqrt( (1/T) sum_t sum_m d(t, m)^2 ), d wrapped to (-pi, pi] unless `wrapped` is false.
/// For a single step this is the plain Euclidean error norm.
inline double rmse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth, bool wrapped = true)
{
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
        throw dimension_error("rmse arguments differ in shape");
    if (predicted.rows() == 0)
        return 0.0;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < predicted.cols(); ++j)
        for (Eigen::Index i = 0; i < predicted.rows(); ++i) {
            const double raw = predicted(i, j) - truth(i, j);
            const double d = wrapped ? wrap_difference(raw) : raw;
            acc += d * d;
        }
    return std::sqrt(acc / static_cast<double>(predicted.rows()));
}

/// Per-element circular mean of the rows. An element whose resultant vanishes takes
/// the first row's value.
inline Eigen::VectorXd circular_mean(const Eigen::MatrixXd& predictions)
{
    if (predictions.rows() < 1)
        throw domain_error("circular mean of zero predictions");
    Eigen::VectorXd mu(predictions.cols());
    for (Eigen::Index j = 0; j < predictions.cols(); ++j) {
        const double c = predictions.col(j).array().cos().sum();
        const double s = predictions.col(j).array().sin().sum();
        mu[j] = std::hypot(c, s) < 1e-12 * static_cast<double>(predictions.rows()) ? predictions(0, j)
                                                                                   : wrap_phase(std::atan2(s, c));
    }
    return mu;
}

namespace detail {

/// Norms of the deviations of each row from the mean.
inline std::vector<double> deviation_norms(const Eigen::MatrixXd& predictions, bool wrapped)
{
    if (predictions.rows() < 1)
        throw domain_error("dispersion of zero predictions");
    if (predictions.rows() == 1)
        return {0.0};
    const Eigen::VectorXd mu = wrapped ? circular_mean(predictions) : Eigen::VectorXd(predictions.colwise().mean().transpose());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(predictions.rows()));
    for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < predictions.cols(); ++j) {
            const double raw = predictions(i, j) - mu[j];
            const double d = wrapped ? wrap_difference(raw) : raw;
            acc += d * d;
        }
        out.push_back(std::sqrt(acc));
    }
    return out;
}

}  // namespace detail

/// tau1: mean Euclidean norm of the deviations of Q predictions (rows) from their mean.
inline double mean_abs_deviation(const Eigen::MatrixXd& predictions, bool wrapped = true)
{
    const auto n = detail::deviation_norms(predictions, wrapped);
    double acc = 0.0;
    for (double v : n)
        acc += v;
    return acc / static_cast<double>(n.size());
}

/// tau2: root mean squared deviation norm.
inline double std_deviation(const Eigen::MatrixXd& predictions, bool wrapped = true)
{
    const auto n = detail::deviation_norms(predictions, wrapped);
    double acc = 0.0;
    for (double v : n)
        acc += v * v;
    return std::sqrt(acc / static_cast<double>(n.size()));
}

struct dispersion {
    double tau1 = 0.0;
    double tau2 = 0.0;
    std::size_t q = 0;
};

/// tau1 / tau2 pooled over several groups, each group deviating from its own mean
/// (e.g. one group per evaluation step, one row per seed).
inline dispersion pooled_dispersion(const std::vector<Eigen::MatrixXd>& groups, bool wrapped = true)
{
    dispersion d;
    double s1 = 0.0, s2 = 0.0;
    for (const auto& g : groups) {
        for (double v : detail::deviation_norms(g, wrapped)) {
            s1 += v;
            s2 += v * v;
            ++d.q;
        }
    }
    if (d.q == 0)
        throw domain_error("dispersion of zero predictions");
    d.tau1 = s1 / static_cast<double>(d.q);
    d.tau2 = std::sqrt(s2 / static_cast<double>(d.q));
    return d;
}

struct flops_breakdown {
    std::uint64_t additions = 0;
    std::uint64_t multiplications = 0;
    std::uint64_t t_max = 0, t_0 = 0, n_in = 0, n_res = 0, n_out = 0;
};

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r))
        throw domain_error("FLOP count overflows 64 bits");
    return r;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r))
        throw domain_error("FLOP count overflows 64 bits");
    return r;
}

template <class... Ts>
std::uint64_t product(std::uint64_t a, Ts... rest)
{
    if constexpr (sizeof...(rest) == 0)
        return a;
    else
        return checked_mul(a, product(rest...));
}

}  // namespace detail

/// Closed-form readout training cost with x = T_max - T_0 and N = N_res + N_in:
///   additions       (x+1)^2 (N + x) + N (x+1) x + N_out N x
///   multiplications (x+1)^2 (N_res + 2 + x) N (x+1)^2 + N_out N (x+1)^2
inline flops_breakdown lsm_training_flops(std::uint64_t t_max, std::uint64_t t_0, std::uint64_t n_in,
                                          std::uint64_t n_res, std::uint64_t n_out)
{
    if (t_max < t_0)
        throw domain_error("T_max must be >= T_0");
    using detail::checked_add;
    using detail::product;
    const std::uint64_t x = t_max - t_0;
    const std::uint64_t x1 = x + 1;
    const std::uint64_t n = checked_add(n_res, n_in);
    flops_breakdown f{0, 0, t_max, t_0, n_in, n_res, n_out};
    f.additions = checked_add(checked_add(product(x1, x1, checked_add(n, x)), product(n, x1, x)), product(n_out, n, x));
    f.multiplications = checked_add(product(x1, x1, checked_add(checked_add(n_res, 2), x), n, x1, x1),
                                    product(n_out, n, x1, x1));
    return f;
}

/// Parallel training of independent learners: the cost of the slowest one.
inline flops_breakdown ensemble_training_flops(const std::vector<flops_breakdown>& learners)
{
    if (learners.empty())
        throw domain_error("ensemble FLOPs of an empty learner list");
    flops_breakdown out = learners.front();
    for (const auto& f : learners) {
        if (f.additions > out.additions) {
            out.additions = f.additions;
            out.t_max = f.t_max;
            out.t_0 = f.t_0;
            out.n_in = f.n_in;
            out.n_res = f.n_res;
            out.n_out = f.n_out;
        }
        out.multiplications = std::max(out.multiplications, f.multiplications);
    }
    return out;
}

/// "%.17g" formatting used by every CSV writer.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// One `metric,value,context` CSV row (no trailing newline).
inline std::string metric_row(const std::string& metric, double value, const std::string& context)
{
    return metric + "," + format_double(value) + "," + context;
}

} // namespace rislsm
