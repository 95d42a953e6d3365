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

// Phase arithmetic on the circle and the (cos, sin) encoding used to feed
// phase vectors into real-valued reservoirs.

#include "rislsm/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace rislsm {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Maps any finite angle into [0, 2pi).
inline double wrap_phase(double x)
{
    double r = std::fmod(x, two_pi);
    if (r < 0.0)
        r += two_pi;
    if (r >= two_pi)
        r = 0.0;
    return r;
}

/// Maps an angle difference into (-pi, pi].
inline double wrap_difference(double d)
{
    double r = std::remainder(d, two_pi);
    if (r <= -std::numbers::pi)
        r += two_pi;
    return r;
}

enum class trajectory_origin { oracle, synthetic, external };

/// T x M phases in [0, 2pi). Row t is the RIS configuration of slot t.
struct phase_trajectory {
    Eigen::MatrixXd phases;
    double slot_interval = 1.0;
    trajectory_origin origin = trajectory_origin::synthetic;

    Eigen::Index length() const { return phases.rows(); }
    Eigen::Index n_elements() const { return phases.cols(); }

    /// First `n` slots as a new trajectory.
    phase_trajectory head(Eigen::Index n) const
    {
        return {phases.topRows(n), slot_interval, origin};
    }

    void validate() const
    {
        if (phases.rows() < 1 || phases.cols() < 1)
            throw data_error("phase trajectory must have at least one slot and one element");
        for (Eigen::Index i = 0; i < phases.size(); ++i) {
            const double v = phases.data()[i];
            if (!std::isfinite(v) || v < 0.0 || v >= two_pi)
                throw data_error("phase trajectory entry outside [0, 2pi)");
        }
    }
};

/// Row-wise encoding: (cos phi_1..cos phi_M, sin phi_1..sin phi_M).
inline Eigen::VectorXd encode_phases(const Eigen::VectorXd& phi)
{
    const Eigen::Index m = phi.size();
    Eigen::VectorXd out(2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
        out[i] = std::cos(phi[i]);
        out[m + i] = std::sin(phi[i]);
    }
    return out;
}

inline Eigen::MatrixXd encode_sequence(const Eigen::MatrixXd& phases)
{
    const Eigen::Index m = phases.cols();
    Eigen::MatrixXd out(phases.rows(), 2 * m);
    out.leftCols(m) = phases.array().cos().matrix();
    out.rightCols(m) = phases.array().sin().matrix();
    return out;
}

/// Normalizes every (cos, sin) pair to unit length. A zero pair is left as is.
inline Eigen::VectorXd normalize_pairs(const Eigen::VectorXd& encoded)
{
    if (encoded.size() % 2 != 0)
        throw dimension_error("encoded phase vector must have even length");
    const Eigen::Index m = encoded.size() / 2;
    Eigen::VectorXd out = encoded;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double n = std::hypot(encoded[i], encoded[m + i]);
        if (n > 0.0) {
            out[i] /= n;
            out[m + i] /= n;
        }
    }
    return out;
}

inline Eigen::VectorXd decode_phases(const Eigen::VectorXd& encoded)
{
    if (encoded.size() % 2 != 0)
        throw dimension_error("encoded phase vector must have even length");
    const Eigen::Index m = encoded.size() / 2;
    Eigen::VectorXd phi(m);
    for (Eigen::Index i = 0; i < m; ++i)
        phi[i] = wrap_phase(std::atan2(encoded[m + i], encoded[i]));
    return phi;
}

inline Eigen::MatrixXd decode_sequence(const Eigen::MatrixXd& encoded)
{
    Eigen::MatrixXd out(encoded.rows(), encoded.cols() / 2);
    for (Eigen::Index t = 0; t < encoded.rows(); ++t)
        out.row(t) = decode_phases(Eigen::VectorXd(encoded.row(t).transpose())).transpose();
    return out;
}

} // namespace rislsm
