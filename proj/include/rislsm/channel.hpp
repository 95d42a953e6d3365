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

// Clustered Saleh-Valenzuela wideband channels for a BS -> RIS -> user downlink.
//
// Three links are generated per time slot: the BS-RIS matrix G[s] (M x N_t), the
// direct BS-user vectors h_d,k[s] (N_t) and the RIS-user vectors h_r,k[s] (M).
// Every link is a sum over delay taps d, clusters l and rays u of
//   alpha_{l,u} * p(dT - tau_{l,u}) * steering * exp(-j 2 pi d s / S).

#include "rislsm/error.hpp"
#include "rislsm/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace rislsm {

using cplx = std::complex<double>;

inline constexpr double speed_of_light = 299792458.0;

/// Uniform linear array. Wavelengths are listed per subcarrier.
struct array_geometry {
    std::size_t n_elements = 1;
    double element_spacing = 0.0;  // meters
    std::vector<double> wavelengths;

    std::size_t n_subcarriers() const { return wavelengths.size(); }

    void validate(const char* name = "array") const
    {
        if (n_elements < 1)
            throw config_error(std::string(name) + ": n_elements must be >= 1");
        if (!(element_spacing > 0.0))
            throw config_error(std::string(name) + ": element spacing must be > 0");
        if (wavelengths.empty())
            throw config_error(std::string(name) + ": wavelength list is empty");
        for (double w : wavelengths)
            if (!(w > 0.0))
                throw config_error(std::string(name) + ": wavelengths must be > 0");
    }
};

/// Subcarrier s sits at f_c + (s - (S-1)/2) * B/S. Spacing defaults to half the
/// carrier wavelength.
inline array_geometry make_wideband_array(std::size_t n_elements, double carrier_hz, double bandwidth_hz,
                                          std::size_t n_subcarriers)
{
    array_geometry g;
    g.n_elements = n_elements;
    g.element_spacing = 0.5 * speed_of_light / carrier_hz;
    g.wavelengths.resize(n_subcarriers);
    const double df = bandwidth_hz / static_cast<double>(n_subcarriers);
    for (std::size_t s = 0; s < n_subcarriers; ++s) {
        const double f = carrier_hz + (static_cast<double>(s) - 0.5 * static_cast<double>(n_subcarriers - 1)) * df;
        g.wavelengths[s] = speed_of_light / f;
    }
    return g;
}

/// Statistics of one link. Delays in seconds.
struct cluster_config {
    std::size_t n_clusters = 3;
    std::size_t n_rays_per_cluster = 1;
    double cluster_delay_min = 0.0;
    double cluster_delay_max = 20e-9;
    double ray_offset_min = -0.1e-9;
    double ray_offset_max = 0.1e-9;
    double tap_spacing = 2.5e-9;  // T
    std::size_t n_taps = 8;       // D
    std::size_t n_subcarriers = 8;  // S
    double roll_off = 0.3;

    void validate(const char* name = "cluster config") const
    {
        const std::string n(name);
        if (n_clusters >= 1 && n_rays_per_cluster < 1)
            throw config_error(n + ": n_rays_per_cluster must be >= 1");
        if (cluster_delay_min > cluster_delay_max)
            throw config_error(n + ": cluster delay interval is not ordered");
        if (ray_offset_min > ray_offset_max)
            throw config_error(n + ": ray offset interval is not ordered");
        if (!(tap_spacing > 0.0))
            throw config_error(n + ": tap spacing must be > 0");
        if (n_taps < 1 || n_subcarriers < 1)
            throw config_error(n + ": n_taps and n_subcarriers must be >= 1");
        if (roll_off < 0.0 || roll_off > 1.0)
            throw config_error(n + ": roll-off must lie in [0, 1]");
    }
};

/// Peak-normalized raised-cosine pulse, zero outside |t| > n_taps * T.
inline double pulse_shape(double t, double tap_spacing, std::size_t n_taps, double roll_off = 0.3)
{
    if (std::abs(t) > static_cast<double>(n_taps) * tap_spacing)
        return 0.0;
    const double x = t / tap_spacing;
    const double pi = std::numbers::pi;
    auto sinc = [pi](double v) { return v == 0.0 ? 1.0 : std::sin(pi * v) / (pi * v); };
    if (roll_off > 0.0) {
        const double q = 2.0 * roll_off * x;
        if (std::abs(std::abs(q) - 1.0) < 1e-10)
            return pi / 4.0 * sinc(1.0 / (2.0 * roll_off));
        return sinc(x) * std::cos(pi * roll_off * x) / (1.0 - q * q);
    }
    return sinc(x);
}

/// Unit-norm ULA steering vector: element i is exp(-j 2 pi i phi) / sqrt(N).
inline Eigen::VectorXcd steering_vector(std::size_t n, double spatial_phase)
{
    Eigen::VectorXcd a(static_cast<Eigen::Index>(n));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        a[static_cast<Eigen::Index>(i)] = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>(i) * spatial_phase);
    return a;
}

/// Array response towards physical angle theta on subcarrier s:
/// spatial phase phi = (b / lambda[s]) sin(theta).
inline Eigen::VectorXcd array_response(const array_geometry& geo, double theta, std::size_t subcarrier)
{
    if (subcarrier >= geo.wavelengths.size())
        throw index_error("subcarrier " + std::to_string(subcarrier) + " out of range (S = " +
                          std::to_string(geo.wavelengths.size()) + ")");
    if (geo.n_elements < 1)
        throw config_error("array must have at least one element");
    const double phi = geo.element_spacing / geo.wavelengths[subcarrier] * std::sin(theta);
    return steering_vector(geo.n_elements, phi);
}

/// Full description of the three links of a cell.
struct channel_spec {
    cluster_config bs_ris;    // G
    cluster_config bs_user;   // h_d
    cluster_config ris_user;  // h_r
    array_geometry bs;
    array_geometry ris;
    std::size_t n_users = 1;

    std::size_t n_subcarriers() const { return bs_ris.n_subcarriers; }

    void validate() const
    {
        bs_ris.validate("bs_ris");
        bs_user.validate("bs_user");
        ris_user.validate("ris_user");
        bs.validate("bs array");
        ris.validate("ris array");
        const std::size_t s = bs_ris.n_subcarriers;
        if (bs_user.n_subcarriers != s || ris_user.n_subcarriers != s)
            throw config_error("links disagree on the number of subcarriers");
        if (bs.n_subcarriers() != s || ris.n_subcarriers() != s)
            throw config_error("array wavelength lists must have one entry per subcarrier");
        if (n_users < 1)
            throw config_error("n_users must be >= 1");
    }
};

/// Angle offsets (radians) added to every ray of a link.
struct link_angles {
    double bs_ris_tx = 0.0;  // departure at the BS towards the RIS
    double bs_ris_rx = 0.0;  // arrival at the RIS
    std::vector<double> bs_user;   // per user, BS side
    std::vector<double> ris_user;  // per user, RIS side

    double user_bs(std::size_t k) const { return k < bs_user.size() ? bs_user[k] : 0.0; }
    double user_ris(std::size_t k) const { return k < ris_user.size() ? ris_user[k] : 0.0; }
};

struct ray {
    cplx gain;
    double delay = 0.0;
    double angle_tx = 0.0;
    double angle_rx = 0.0;
};

/// Rays of every link; the random part of a channel realization.
struct scatter_state {
    std::vector<ray> bs_ris;
    std::vector<std::vector<ray>> bs_user;
    std::vector<std::vector<ray>> ris_user;
};

/// Channel triplet of one time slot. Index order is [user][subcarrier].
struct channel_set {
    std::vector<Eigen::MatrixXcd> G;
    std::vector<std::vector<Eigen::VectorXcd>> h_d;
    std::vector<std::vector<Eigen::VectorXcd>> h_r;
    std::uint64_t seed = 0;
    std::size_t time_index = 0;

    std::size_t n_subcarriers() const { return G.size(); }
    std::size_t n_users() const { return h_d.size(); }
    Eigen::Index n_ris() const { return G.empty() ? 0 : G.front().rows(); }
    Eigen::Index n_tx() const { return G.empty() ? 0 : G.front().cols(); }

    /// Throws dimension_error when the shapes are not consistent across subcarriers and users.
    void check_shapes() const
    {
        const std::size_t s = G.size();
        if (h_d.size() != h_r.size())
            throw dimension_error("h_d and h_r disagree on the number of users");
        for (const auto& g : G)
            if (g.rows() != n_ris() || g.cols() != n_tx())
                throw dimension_error("G has inconsistent shape across subcarriers");
        for (std::size_t k = 0; k < h_d.size(); ++k) {
            if (h_d[k].size() != s || h_r[k].size() != s)
                throw dimension_error("user channel lists must have one entry per subcarrier");
            for (std::size_t i = 0; i < s; ++i)
                if (h_d[k][i].size() != n_tx() || h_r[k][i].size() != n_ris())
                    throw dimension_error("user channel vector has wrong length");
        }
    }
};

namespace detail {

enum link_id : std::uint64_t { link_bs_ris = 1, link_bs_user = 2, link_ris_user = 3, link_evolve = 4 };

inline std::vector<ray> draw_link(const cluster_config& cfg, rng_engine& rng)
{
    std::vector<ray> rays;
    const double half_pi = 0.5 * std::numbers::pi;
    for (std::size_t l = 0; l < cfg.n_clusters; ++l) {
        const double tau = uniform(rng, cfg.cluster_delay_min, cfg.cluster_delay_max);
        for (std::size_t u = 0; u < cfg.n_rays_per_cluster; ++u) {
            ray r;
            r.delay = tau + uniform(rng, cfg.ray_offset_min, cfg.ray_offset_max);
            r.gain = complex_normal(rng);
            r.angle_tx = uniform(rng, -half_pi, half_pi);
            r.angle_rx = uniform(rng, -half_pi, half_pi);
            rays.push_back(r);
        }
    }
    return rays;
}

/// sum_d p(dT - tau) exp(-j 2 pi d s / S)
inline cplx tap_response(const cluster_config& cfg, double delay, std::size_t s)
{
    cplx acc = 0.0;
    const double S = static_cast<double>(cfg.n_subcarriers);
    for (std::size_t d = 0; d < cfg.n_taps; ++d) {
        const double p = pulse_shape(static_cast<double>(d) * cfg.tap_spacing - delay, cfg.tap_spacing, cfg.n_taps,
                                     cfg.roll_off);
        if (p != 0.0)
            acc += p * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(d) * static_cast<double>(s) / S);
    }
    return acc;
}

}  // namespace detail

/// Draws the rays of all links. Each link has its own derived stream, so e.g. h_d does
/// not change when only the RIS size changes.
inline scatter_state draw_scatter(const channel_spec& spec, std::uint64_t seed)
{
    spec.validate();
    scatter_state st;
    {
        auto rng = make_rng(seed, {detail::link_bs_ris});
        st.bs_ris = detail::draw_link(spec.bs_ris, rng);
    }
    for (std::size_t k = 0; k < spec.n_users; ++k) {
        auto rd = make_rng(seed, {detail::link_bs_user, k});
        st.bs_user.push_back(detail::draw_link(spec.bs_user, rd));
        auto rr = make_rng(seed, {detail::link_ris_user, k});
        st.ris_user.push_back(detail::draw_link(spec.ris_user, rr));
    }
    return st;
}

/// Evaluates the channel sums for a given set of rays and angle offsets.
inline channel_set synthesize_channel(const channel_spec& spec, const scatter_state& st, const link_angles& aods)
{
    spec.validate();
    if (st.bs_user.size() != spec.n_users || st.ris_user.size() != spec.n_users)
        throw config_error("scatter state does not match the number of users");
    const std::size_t S = spec.n_subcarriers();
    const auto N = static_cast<Eigen::Index>(spec.bs.n_elements);
    const auto M = static_cast<Eigen::Index>(spec.ris.n_elements);

    channel_set ch;
    ch.G.assign(S, Eigen::MatrixXcd::Zero(M, N));
    ch.h_d.assign(spec.n_users, std::vector<Eigen::VectorXcd>(S, Eigen::VectorXcd::Zero(N)));
    ch.h_r.assign(spec.n_users, std::vector<Eigen::VectorXcd>(S, Eigen::VectorXcd::Zero(M)));

    for (std::size_t s = 0; s < S; ++s) {
        for (const auto& r : st.bs_ris) {
            const cplx c = r.gain * detail::tap_response(spec.bs_ris, r.delay, s);
            if (c == cplx(0.0))
                continue;
            const Eigen::VectorXcd a_ris = array_response(spec.ris, r.angle_rx + aods.bs_ris_rx, s);
            const Eigen::VectorXcd a_bs = array_response(spec.bs, r.angle_tx + aods.bs_ris_tx, s);
            ch.G[s].noalias() += c * a_ris * a_bs.adjoint();
        }
        for (std::size_t k = 0; k < spec.n_users; ++k) {
            for (const auto& r : st.bs_user[k]) {
                const cplx c = r.gain * detail::tap_response(spec.bs_user, r.delay, s);
                if (c != cplx(0.0))
                    ch.h_d[k][s] += c * array_response(spec.bs, r.angle_tx + aods.user_bs(k), s);
            }
            for (const auto& r : st.ris_user[k]) {
                const cplx c = r.gain * detail::tap_response(spec.ris_user, r.delay, s);
                if (c != cplx(0.0))
                    ch.h_r[k][s] += c * array_response(spec.ris, r.angle_tx + aods.user_ris(k), s);
            }
        }
    }
    return ch;
}

/// One channel realization; a pure function of (spec, aods, seed).
inline channel_set generate_channel_set(const channel_spec& spec, const link_angles& aods, std::uint64_t seed)
{
    auto ch = synthesize_channel(spec, draw_scatter(spec, seed), aods);
    ch.seed = seed;
    return ch;
}

/// User mobility: user-side angle offsets drift by `angular_rate` per slot and ray
/// gains follow a first-order Gauss-Markov process that keeps CN(0,1) marginals.
struct mobility_model {
    link_angles initial;
    double angular_rate = 0.0;  // radians per slot
    double slot_interval = 1.0;  // seconds
    std::size_t n_slots = 1;
    double gain_correlation = 0.99;

    void validate() const
    {
        if (!(slot_interval > 0.0))
            throw config_error("slot interval must be > 0");
        if (n_slots < 1)
            throw config_error("n_slots must be >= 1");
        if (gain_correlation < 0.0 || gain_correlation > 1.0)
            throw config_error("gain correlation must lie in [0, 1]");
    }
};

inline std::vector<channel_set> evolve_trajectory(const channel_spec& spec, const mobility_model& mob,
                                                  std::uint64_t seed)
{
    mob.validate();
    scatter_state st = draw_scatter(spec, seed);
    const double rho = mob.gain_correlation;
    const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    auto evolve = [&](std::vector<ray>& rays, rng_engine& rng) {
        for (auto& r : rays) {
            const cplx w = complex_normal(rng);
            if (innov > 0.0)
                r.gain = rho * r.gain + innov * w;
        }
    };

    std::vector<channel_set> slots;
    slots.reserve(mob.n_slots);
    for (std::size_t t = 0; t < mob.n_slots; ++t) {
        if (t > 0) {
            auto rg = make_rng(seed, {detail::link_evolve, detail::link_bs_ris, 0, t});
            evolve(st.bs_ris, rg);
            for (std::size_t k = 0; k < spec.n_users; ++k) {
                auto rd = make_rng(seed, {detail::link_evolve, detail::link_bs_user, k, t});
                evolve(st.bs_user[k], rd);
                auto rr = make_rng(seed, {detail::link_evolve, detail::link_ris_user, k, t});
                evolve(st.ris_user[k], rr);
            }
        }
        link_angles a = mob.initial;
        a.bs_user.resize(spec.n_users, 0.0);
        a.ris_user.resize(spec.n_users, 0.0);
        for (std::size_t k = 0; k < spec.n_users; ++k) {
            a.bs_user[k] = mob.initial.user_bs(k) + static_cast<double>(t) * mob.angular_rate;
            a.ris_user[k] = mob.initial.user_ris(k) + static_cast<double>(t) * mob.angular_rate;
        }
        auto ch = synthesize_channel(spec, st, a);
        ch.seed = seed;
        ch.time_index = t;
        slots.push_back(std::move(ch));
    }
    return slots;
}

} // namespace rislsm
