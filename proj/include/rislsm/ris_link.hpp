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

// Effective channels through the RIS, zero-forcing precoding, spectral efficiency
// and grid-based phase optimizers used to produce ground-truth configurations.
//
// Convention: the scalar gain seen by user k on subcarrier s is h_eff^H w_k with
//   h_eff^H = h_d^H + h_r^H Theta G,   Theta = diag(beta_m exp(j phi_m)).

#include "rislsm/channel.hpp"
#include "rislsm/error.hpp"
#include "rislsm/phase.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace rislsm {

struct phase_config {
    Eigen::VectorXd phases;
    Eigen::VectorXd amplitudes;

    static phase_config uniform(Eigen::Index m, double phase = 0.0, double amplitude = 1.0)
    {
        return {Eigen::VectorXd::Constant(m, wrap_phase(phase)), Eigen::VectorXd::Constant(m, amplitude)};
    }

    static phase_config from_phases(const Eigen::VectorXd& phi)
    {
        return {phi, Eigen::VectorXd::Ones(phi.size())};
    }

    Eigen::Index size() const { return phases.size(); }

    /// Diagonal of Theta.
    Eigen::VectorXcd coefficients() const
    {
        Eigen::VectorXcd th(phases.size());
        for (Eigen::Index m = 0; m < phases.size(); ++m)
            th[m] = std::polar(amplitudes[m], phases[m]);
        return th;
    }

    void validate() const
    {
        if (phases.size() != amplitudes.size())
            throw dimension_error("phase and amplitude vectors differ in length");
        for (Eigen::Index m = 0; m < phases.size(); ++m) {
            if (!(phases[m] >= 0.0 && phases[m] < two_pi))
                throw data_error("phase outside [0, 2pi)");
            if (!(amplitudes[m] >= 0.0 && amplitudes[m] <= 1.0))
                throw data_error("amplitude outside [0, 1]");
        }
    }
};

struct precoder {
    std::vector<Eigen::MatrixXcd> W;  // per subcarrier, N_t x K, unit-norm columns
    double power = 1.0;
    double noise_variance = 1.0;
    bool rank_deficient = false;  // set when the pseudo-inverse had to truncate
};

namespace detail {

inline void check_theta(const channel_set& ch, const phase_config& theta)
{
    if (theta.phases.size() != ch.n_ris() || theta.amplitudes.size() != ch.n_ris())
        throw dimension_error("phase configuration length " + std::to_string(theta.phases.size()) +
                              " does not match RIS size " + std::to_string(ch.n_ris()));
}

}  // namespace detail

/// h_eff such that the received gain is h_eff^H w.
inline Eigen::VectorXcd effective_channel(const channel_set& ch, const phase_config& theta, std::size_t user,
                                          std::size_t subcarrier)
{
    detail::check_theta(ch, theta);
    if (user >= ch.n_users() || subcarrier >= ch.n_subcarriers())
        throw index_error("user or subcarrier index out of range");
    const Eigen::VectorXcd th = theta.coefficients();
    // h_eff^H = h_d^H + (h_r^H Theta) G  =>  h_eff = h_d + G^H conj(Theta) h_r
    const Eigen::RowVectorXcd refl = (ch.h_r[user][subcarrier].adjoint().array() * th.transpose().array()).matrix();
    Eigen::RowVectorXcd row = ch.h_d[user][subcarrier].adjoint() + refl * ch.G[subcarrier];
    return row.adjoint();
}

/// K x N_t matrix whose row k is h_eff,k^H.
inline Eigen::MatrixXcd stacked_channel(const channel_set& ch, const phase_config& theta, std::size_t subcarrier)
{
    Eigen::MatrixXcd H(static_cast<Eigen::Index>(ch.n_users()), ch.n_tx());
    for (std::size_t k = 0; k < ch.n_users(); ++k)
        H.row(static_cast<Eigen::Index>(k)) = effective_channel(ch, theta, k, subcarrier).adjoint();
    return H;
}

struct zf_result {
    Eigen::MatrixXcd W;
    bool rank_deficient = false;
};

/// Zero-forcing directions for the rows of H: columns of the pseudo-inverse of H,
/// normalized to unit norm. Singular values below 1e-12 * sigma_max are dropped.
inline zf_result zero_forcing(const Eigen::MatrixXcd& H)
{
    const Eigen::Index K = H.rows();
    const Eigen::Index N = H.cols();
    if (K > N)
        throw dimension_error("zero forcing needs K <= N_t");
    zf_result out;
    out.W = Eigen::MatrixXcd::Zero(N, K);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    const double cut = 1e-12 * smax;
    Eigen::MatrixXcd pinv = Eigen::MatrixXcd::Zero(N, K);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > cut && sv[i] > 0.0)
            pinv.noalias() += (svd.matrixV().col(i) / sv[i]) * svd.matrixU().col(i).adjoint();
        else
            out.rank_deficient = true;
    }
    for (Eigen::Index k = 0; k < K; ++k) {
        const double n = pinv.col(k).norm();
        if (n > 0.0)
            out.W.col(k) = pinv.col(k) / n;
    }
    return out;
}

inline precoder zf_precoder(const channel_set& ch, const phase_config& theta, double power, double noise_variance = 1.0)
{
    if (ch.n_users() > static_cast<std::size_t>(ch.n_tx()))
        throw config_error("zero forcing infeasible: K > N_t");
    precoder p;
    p.power = power;
    p.noise_variance = noise_variance;
    for (std::size_t s = 0; s < ch.n_subcarriers(); ++s) {
        auto zf = zero_forcing(stacked_channel(ch, theta, s));
        p.rank_deficient = p.rank_deficient || zf.rank_deficient;
        p.W.push_back(std::move(zf.W));
    }
    return p;
}

/// gamma_k[s] = (P / sigma^2) |h_eff^H w_k|^2. Interference is not counted; pair
/// this with zero-forcing precoders.
inline double sinr(const channel_set& ch, const phase_config& theta, const precoder& prec, std::size_t user,
                   std::size_t subcarrier)
{
    const Eigen::VectorXcd h = effective_channel(ch, theta, user, subcarrier);
    const cplx g = h.dot(prec.W.at(subcarrier).col(static_cast<Eigen::Index>(user)));
    return prec.power / prec.noise_variance * std::norm(g);
}

/// Diagnostic SINR that also counts the power leaked from the other users' beams.
inline double sinr_with_interference(const channel_set& ch, const phase_config& theta, const precoder& prec,
                                     std::size_t user, std::size_t subcarrier)
{
    const Eigen::VectorXcd h = effective_channel(ch, theta, user, subcarrier);
    const auto& W = prec.W.at(subcarrier);
    double signal = 0.0, interference = 0.0;
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
        const double p = std::norm(h.dot(W.col(j)));
        (j == static_cast<Eigen::Index>(user) ? signal : interference) += p;
    }
    return prec.power * signal / (prec.power * interference + prec.noise_variance);
}

/// sum_k sum_s ln(1 + gamma_k[s]) in nats/s/Hz.
inline double spectral_efficiency(const channel_set& ch, const phase_config& theta, const precoder& prec)
{
    if (prec.W.size() != ch.n_subcarriers())
        throw dimension_error("precoder has wrong number of subcarriers");
    double se = 0.0;
    for (std::size_t s = 0; s < ch.n_subcarriers(); ++s)
        for (std::size_t k = 0; k < ch.n_users(); ++k)
            se += std::log1p(sinr(ch, theta, prec, k, s));
    return se;
}

/// Spectral efficiency of `theta` under its own zero-forcing precoder.
inline double zf_spectral_efficiency(const channel_set& ch, const phase_config& theta, double power,
                                     double noise_variance = 1.0)
{
    return spectral_efficiency(ch, theta, zf_precoder(ch, theta, power, noise_variance));
}

/// Precomputed cascade h_eff,k^H[s] = d_ks + sum_m theta_m R_ks[m, :] with
/// d_ks = h_d^H and R_ks[m, :] = conj(h_r,m) G[m, :]. Lets the optimizers update a
/// single RIS element in O(N_t) per (user, subcarrier).
class cascaded_channel {
public:
    cascaded_channel(const channel_set& ch, double power, double noise_variance = 1.0)
        : K_(static_cast<Eigen::Index>(ch.n_users())), S_(ch.n_subcarriers()), N_(ch.n_tx()), M_(ch.n_ris()),
          snr_(power / noise_variance)
    {
        ch.check_shapes();
        if (K_ > N_)
            throw config_error("zero forcing infeasible: K > N_t");
        direct_.resize(S_);
        reflect_.resize(S_);
        for (std::size_t s = 0; s < S_; ++s) {
            direct_[s].resize(K_, N_);
            reflect_[s].resize(static_cast<std::size_t>(K_));
            for (Eigen::Index k = 0; k < K_; ++k) {
                const auto uk = static_cast<std::size_t>(k);
                direct_[s].row(k) = ch.h_d[uk][s].adjoint();
                reflect_[s][uk] = ch.h_r[uk][s].conjugate().asDiagonal() * ch.G[s];
            }
        }
    }

    Eigen::Index n_elements() const { return M_; }
    std::size_t n_subcarriers() const { return S_; }

    /// Stacked effective channels for coefficients theta, one K x N_t matrix per subcarrier.
    std::vector<Eigen::MatrixXcd> rows(const Eigen::VectorXcd& theta) const
    {
        std::vector<Eigen::MatrixXcd> H(S_);
        for (std::size_t s = 0; s < S_; ++s) {
            H[s] = direct_[s];
            for (Eigen::Index k = 0; k < K_; ++k)
                H[s].row(k).noalias() += theta.transpose() * reflect_[s][static_cast<std::size_t>(k)];
        }
        return H;
    }

    /// Adds delta * R[m, :] to every user's row.
    void add_element(std::vector<Eigen::MatrixXcd>& H, Eigen::Index m, cplx delta) const
    {
        for (std::size_t s = 0; s < S_; ++s)
            for (Eigen::Index k = 0; k < K_; ++k)
                H[s].row(k) += delta * reflect_[s][static_cast<std::size_t>(k)].row(m);
    }

    /// Zero-forcing sum SE of the stacked rows. With ZF, h_k^H w_k = 1 / ||c_k|| where c_k is
    /// column k of H^+, so gamma_k = snr / [(H H^H)^-1]_kk. Badly conditioned Gram matrices
    /// fall back to the SVD route.
    double zf_se(const std::vector<Eigen::MatrixXcd>& H) const
    {
        double se = 0.0;
        for (std::size_t s = 0; s < S_; ++s)
            se += zf_se_subcarrier(H[s]);
        return se;
    }

    double zf_se_subcarrier(const Eigen::MatrixXcd& H) const
    {
        const Eigen::MatrixXcd gram = H * H.adjoint();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
        const auto& ev = eig.eigenvalues();
        const double lmax = ev.size() ? ev[ev.size() - 1] : 0.0;
        double se = 0.0;
        if (lmax > 0.0 && ev[0] > 1e-8 * lmax) {
            const Eigen::MatrixXcd inv =
                eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();
            for (Eigen::Index k = 0; k < K_; ++k)
                se += std::log1p(snr_ / inv(k, k).real());
            return se;
        }
        const auto zf = zero_forcing(H);
        for (Eigen::Index k = 0; k < K_; ++k)
            se += std::log1p(snr_ * std::norm(H.row(k).dot(zf.W.col(k).conjugate())));
        return se;
    }

private:
    Eigen::Index K_;
    std::size_t S_;
    Eigen::Index N_;
    Eigen::Index M_;
    double snr_;
    std::vector<Eigen::MatrixXcd> direct_;
    std::vector<std::vector<Eigen::MatrixXcd>> reflect_;
};

struct oracle_options {
    std::size_t grid_size = 16;  // B
    std::size_t max_sweeps = 20;
    double tolerance = 1e-6;     // relative improvement per sweep
    double noise_variance = 1.0;
};

struct oracle_result {
    phase_config config;
    double se = 0.0;
    std::size_t sweeps = 0;
};

/// Grid phase b * 2 pi / B.
inline double grid_phase(std::size_t b, std::size_t grid_size)
{
    return wrap_phase(two_pi * static_cast<double>(b) / static_cast<double>(grid_size));
}

/// Coordinate ascent over the B-point phase grid, ZF recomputed for every candidate.
/// Element m moves only on a strict improvement, lowest grid index first on ties.
/// Amplitudes are fixed at 1.
inline oracle_result oracle_optimize_theta(const channel_set& ch, double power, const oracle_options& opt,
                                           const phase_config& initial)
{
    if (opt.grid_size < 2)
        throw config_error("oracle grid size must be >= 2");
    detail::check_theta(ch, initial);
    const cascaded_channel cc(ch, power, opt.noise_variance);
    const Eigen::Index M = cc.n_elements();

    phase_config cfg = phase_config::from_phases(initial.phases);
    Eigen::VectorXcd theta = cfg.coefficients();
    std::vector<cplx> grid(opt.grid_size);
    for (std::size_t b = 0; b < opt.grid_size; ++b)
        grid[b] = std::polar(1.0, grid_phase(b, opt.grid_size));

    std::vector<Eigen::MatrixXcd> H = cc.rows(theta);
    double best = cc.zf_se(H);
    oracle_result res;
    for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        const double start = best;
        for (Eigen::Index m = 0; m < M; ++m) {
            std::vector<Eigen::MatrixXcd> base = H;
            cc.add_element(base, m, -theta[m]);
            std::ptrdiff_t pick = -1;
            double pick_se = best;
            for (std::size_t b = 0; b < opt.grid_size; ++b) {
                std::vector<Eigen::MatrixXcd> cand = base;
                cc.add_element(cand, m, grid[b]);
                const double se = cc.zf_se(cand);
                if (se > pick_se * (1.0 + 1e-14) + 1e-300) {
                    pick_se = se;
                    pick = static_cast<std::ptrdiff_t>(b);
                }
            }
            if (pick >= 0) {
                theta[m] = grid[static_cast<std::size_t>(pick)];
                cfg.phases[m] = grid_phase(static_cast<std::size_t>(pick), opt.grid_size);
                best = pick_se;
                H = std::move(base);
                cc.add_element(H, m, theta[m]);
            }
        }
        res.sweeps = sweep + 1;
        // refresh to keep incremental round-off from accumulating
        H = cc.rows(theta);
        best = cc.zf_se(H);
        if (best - start <= opt.tolerance * std::max(std::abs(start), 1e-300))
            break;
    }
    res.config = cfg;
    res.se = zf_spectral_efficiency(ch, cfg, power, opt.noise_variance);
    return res;
}

inline oracle_result oracle_optimize_theta(const channel_set& ch, double power, const oracle_options& opt)
{
    return oracle_optimize_theta(ch, power, opt, phase_config::uniform(ch.n_ris()));
}

/// Coordinate ascent restarted from each of the B constant grid configurations; best
/// result wins, earliest start on ties.
inline oracle_result oracle_multistart(const channel_set& ch, double power, const oracle_options& opt)
{
    oracle_result best;
    best.se = -1.0;
    for (std::size_t b = 0; b < opt.grid_size; ++b) {
        auto r = oracle_optimize_theta(ch, power, opt, phase_config::uniform(ch.n_ris(), grid_phase(b, opt.grid_size)));
        if (r.se > best.se)
            best = std::move(r);
    }
    return best;
}

/// Global argmax of the ZF spectral efficiency over all B^M grid configurations.
/// Element 0 is the most significant digit; the first configuration wins on ties.
inline oracle_result exhaustive_theta(const channel_set& ch, double power, std::size_t grid_size,
                                      double noise_variance = 1.0, double max_configs = 1e7)
{
    if (grid_size < 2)
        throw config_error("grid size must be >= 2");
    const Eigen::Index M = ch.n_ris();
    const double space = std::pow(static_cast<double>(grid_size), static_cast<double>(M));
    if (space > max_configs)
        throw search_space_error("exhaustive search over " + std::to_string(grid_size) + "^" + std::to_string(M) +
                                 " configurations exceeds the guard");
    std::vector<std::size_t> digits(static_cast<std::size_t>(M), 0);
    oracle_result best;
    best.se = -std::numeric_limits<double>::infinity();
    phase_config cfg = phase_config::uniform(M);
    while (true) {
        for (Eigen::Index m = 0; m < M; ++m)
            cfg.phases[m] = grid_phase(digits[static_cast<std::size_t>(m)], grid_size);
        const double se = zf_spectral_efficiency(ch, cfg, power, noise_variance);
        if (se > best.se) {
            best.se = se;
            best.config = cfg;
        }
        Eigen::Index pos = M - 1;
        while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == grid_size) {
            digits[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0)
            break;
    }
    return best;
}

} // namespace rislsm
