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

// Trajectory sources (synthetic, oracle, CSV) and persistence of trajectories,
// phase configurations, channel realizations and trained models.

#include "rislsm/channel.hpp"
#include "rislsm/ensemble.hpp"
#include "rislsm/error.hpp"
#include "rislsm/metrics.hpp"
#include "rislsm/phase.hpp"
#include "rislsm/random.hpp"
#include "rislsm/reservoir.hpp"
#include "rislsm/ris_link.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace rislsm {

// ---------------------------------------------------------------------------
// Synthetic trajectories

/// phi_m(t) = wrap(a + b t + c sin(omega t + psi))
struct element_coeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double omega = 1.0;
    double psi = 0.0;

    double at(double t) const { return wrap_phase(a + b * t + c * std::sin(omega * t + psi)); }
};

/// Either explicit per-element coefficients or ranges from which they are drawn.
struct synthetic_spec {
    std::size_t n_elements = 1;
    std::size_t length = 100;
    double slot_interval = 1.0;
    std::vector<element_coeffs> coeffs;  // empty: draw from the ranges below
    double drift_max = 0.005;            // b ~ U[-drift_max, drift_max]
    double amp_min = 0.2, amp_max = 0.8; // c
    double omega_min = 0.1, omega_max = 0.3;

    void validate() const
    {
        if (length < 1)
            throw config_error("synthetic trajectory length must be >= 1");
        if (coeffs.empty()) {
            if (n_elements < 1)
                throw config_error("synthetic trajectory needs at least one element");
            if (!(omega_min > 0.0) || omega_max < omega_min)
                throw config_error("synthetic omega range must be positive and ordered");
            if (amp_max < amp_min || drift_max < 0.0)
                throw config_error("synthetic amplitude/drift ranges are invalid");
        }
        for (const auto& c : coeffs)
            if (!(c.omega > 0.0))
                throw config_error("synthetic omega must be > 0");
    }

    /// Coefficients actually used for a given seed.
    std::vector<element_coeffs> resolve(std::uint64_t seed) const
    {
        if (!coeffs.empty())
            return coeffs;
        auto rng = make_rng(seed, {0x53});
        std::vector<element_coeffs> out(n_elements);
        for (auto& c : out) {
            c.a = uniform(rng, 0.0, two_pi);
            c.b = uniform(rng, -drift_max, drift_max);
            c.c = uniform(rng, amp_min, amp_max);
            c.omega = uniform(rng, omega_min, omega_max);
            c.psi = uniform(rng, 0.0, two_pi);
        }
        return out;
    }
};

inline phase_trajectory synthetic_trajectory(const synthetic_spec& spec, std::uint64_t seed)
{
    spec.validate();
    const auto coeffs = spec.resolve(seed);
    phase_trajectory tr;
    tr.slot_interval = spec.slot_interval;
    tr.origin = trajectory_origin::synthetic;
    tr.phases.resize(static_cast<Eigen::Index>(spec.length), static_cast<Eigen::Index>(coeffs.size()));
    for (std::size_t t = 0; t < spec.length; ++t)
        for (std::size_t m = 0; m < coeffs.size(); ++m)
            tr.phases(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m)) = coeffs[m].at(static_cast<double>(t));
    return tr;
}

// ---------------------------------------------------------------------------
// Oracle trajectories

/// Per-slot optimized configurations. With warm start slot t starts from slot t-1's
/// result, otherwise from all-zero phases.
inline phase_trajectory oracle_trajectory(const std::vector<channel_set>& slots, double power,
                                          const oracle_options& opt, bool warm_start = true,
                                          std::vector<double>* se_out = nullptr)
{
    if (slots.empty())
        throw config_error("oracle trajectory needs at least one slot");
    const Eigen::Index M = slots.front().n_ris();
    phase_trajectory tr;
    tr.origin = trajectory_origin::oracle;
    tr.phases.resize(static_cast<Eigen::Index>(slots.size()), M);
    phase_config start = phase_config::uniform(M);
    for (std::size_t t = 0; t < slots.size(); ++t) {
        auto r = oracle_optimize_theta(slots[t], power, opt, start);
        tr.phases.row(static_cast<Eigen::Index>(t)) = r.config.phases.transpose();
        if (se_out)
            se_out->push_back(r.se);
        if (warm_start)
            start = r.config;
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Trajectory CSV: header `t,phi_0,...,phi_{M-1}`, radians, 17 significant digits.

inline std::string trajectory_header(Eigen::Index m)
{
    std::string h = "t";
    for (Eigen::Index i = 0; i < m; ++i)
        h += ",phi_" + std::to_string(i);
    return h;
}

inline void write_trajectory_csv(std::ostream& os, const phase_trajectory& tr)
{
    os << trajectory_header(tr.n_elements()) << '\n';
    for (Eigen::Index t = 0; t < tr.length(); ++t) {
        os << t;
        for (Eigen::Index m = 0; m < tr.n_elements(); ++m)
            os << ',' << format_double(tr.phases(t, m));
        os << '\n';
    }
}

inline void save_trajectory(const std::string& path, const phase_trajectory& tr)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw error("cannot open " + path + " for writing");
    write_trajectory_csv(f, tr);
}

struct loaded_trajectory {
    phase_trajectory trajectory;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_number(const std::string& s, std::size_t line_no)
{
    if (s.empty())
        throw parse_error("empty field", line_no);
    const char* b = s.c_str();
    char* e = nullptr;
    errno = 0;
    const double v = std::strtod(b, &e);
    if (e == b || *e != '\0')
        throw parse_error("not a number: '" + s + "'", line_no);
    return v;
}

}  // namespace detail

/// Reads a trajectory CSV. Leading `#` lines are skipped. Out-of-range phases are
/// wrapped into [0, 2pi) with a warning.
inline loaded_trajectory read_trajectory_csv(std::istream& is)
{
    loaded_trajectory out;
    std::string line;
    std::size_t line_no = 0;
    do {
        if (!std::getline(is, line))
            throw parse_error("no header line in trajectory file", line_no + 1);
        ++line_no;
    } while (!line.empty() && line[0] == '#');
    const auto header = detail::split_csv(line);
    if (header.size() < 2 || header[0] != "t")
        throw parse_error("header must be t,phi_0,...,phi_{M-1}", line_no);
    const auto m = static_cast<Eigen::Index>(header.size() - 1);
    if (detail::split_csv(trajectory_header(m)) != header)
        throw parse_error("header must be t,phi_0,...,phi_{M-1}", line_no);

    std::vector<std::vector<double>> rows;
    std::size_t wrapped = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const auto f = detail::split_csv(line);
        if (static_cast<Eigen::Index>(f.size()) != m + 1)
            throw parse_error("expected " + std::to_string(m + 1) + " fields, found " + std::to_string(f.size()),
                              line_no);
        std::vector<double> row;
        detail::parse_number(f[0], line_no);
        for (Eigen::Index i = 1; i <= m; ++i) {
            const double v = detail::parse_number(f[static_cast<std::size_t>(i)], line_no);
            if (!std::isfinite(v))
                throw data_error("line " + std::to_string(line_no) + ": non-finite phase");
            const double w = wrap_phase(v);
            if (w != v)
                ++wrapped;
            row.push_back(w);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw data_error("trajectory file has no rows");
    if (wrapped)
        out.warnings.push_back(std::to_string(wrapped) + " phase value(s) outside [0, 2pi) were wrapped");
    auto& tr = out.trajectory;
    tr.origin = trajectory_origin::external;
    tr.phases.resize(static_cast<Eigen::Index>(rows.size()), m);
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (Eigen::Index i = 0; i < m; ++i)
            tr.phases(static_cast<Eigen::Index>(t), i) = rows[t][static_cast<std::size_t>(i)];
    return out;
}

enum class trajectory_format { csv };

inline loaded_trajectory load_trajectory(const std::string& path, trajectory_format = trajectory_format::csv)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw error("cannot open " + path);
    return read_trajectory_csv(f);
}

/// One CSV row of M phases.
inline std::string format_phase_row(const phase_config& cfg)
{
    std::string s;
    for (Eigen::Index m = 0; m < cfg.size(); ++m) {
        if (m)
            s += ',';
        s += format_double(cfg.phases[m]);
    }
    return s;
}

inline phase_config parse_phase_row(const std::string& row)
{
    const auto f = detail::split_csv(row);
    Eigen::VectorXd phi(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i)
        phi[static_cast<Eigen::Index>(i)] = wrap_phase(detail::parse_number(f[i], 1));
    return phase_config::from_phases(phi);
}

// ---------------------------------------------------------------------------
// Binary containers. Little-endian; every container ends with an FNV-1a 64 checksum
// of the bytes between the version line and the checksum.

inline constexpr std::string_view model_tag = "LSM-MODEL-v1\n";
inline constexpr std::string_view ensemble_tag = "LSM-ENS-v1\n";

inline std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

class byte_writer {
public:
    void u64(std::uint64_t v)
    {
        if constexpr (std::endian::native == std::endian::big)
            v = __builtin_bswap64(v);
        char b[8];
        std::memcpy(b, &v, 8);
        buf_.append(b, 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::string_view s) { buf_.append(s); }
    void dense(const Eigen::MatrixXd& m)
    {
        u64(static_cast<std::uint64_t>(m.rows()));
        u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                f64(m(i, j));
    }
    void sparse(const Eigen::SparseMatrix<double>& m)
    {
        u64(static_cast<std::uint64_t>(m.rows()));
        u64(static_cast<std::uint64_t>(m.cols()));
        u64(static_cast<std::uint64_t>(m.nonZeros()));
        for (Eigen::Index k = 0; k < m.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
                u64(static_cast<std::uint64_t>(it.row()));
                u64(static_cast<std::uint64_t>(it.col()));
                f64(it.value());
            }
    }
    const std::string& str() const { return buf_; }

private:
    std::string buf_;
};

class byte_reader {
public:
    explicit byte_reader(std::string_view s) : s_(s) {}
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v;
        std::memcpy(&v, s_.data() + pos_, 8);
        pos_ += 8;
        if constexpr (std::endian::native == std::endian::big)
            v = __builtin_bswap64(v);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string_view bytes(std::size_t n)
    {
        need(n);
        auto v = s_.substr(pos_, n);
        pos_ += n;
        return v;
    }
    Eigen::Index dim()
    {
        const auto v = u64();
        if (v > (1ULL << 32))
            throw format_error(format_error::kind::malformed, "implausible matrix dimension");
        return static_cast<Eigen::Index>(v);
    }
    Eigen::MatrixXd dense()
    {
        const auto r = dim();
        const auto c = dim();
        need(static_cast<std::size_t>(r * c) * 8);
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j)
                m(i, j) = f64();
        return m;
    }
    Eigen::SparseMatrix<double> sparse()
    {
        const auto r = dim();
        const auto c = dim();
        const auto nnz = static_cast<std::size_t>(dim());
        need(nnz * 24);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(nnz);
        for (std::size_t k = 0; k < nnz; ++k) {
            const auto i = dim();
            const auto j = dim();
            if (i >= r || j >= c)
                throw format_error(format_error::kind::malformed, "sparse entry outside the matrix");
            trip.emplace_back(i, j, f64());
        }
        Eigen::SparseMatrix<double> m(r, c);
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }
    bool done() const { return pos_ == s_.size(); }

private:
    void need(std::size_t n) const
    {
        if (s_.size() - pos_ < n)
            throw format_error(format_error::kind::truncated, "container is truncated");
    }
    std::string_view s_;
    std::size_t pos_ = 0;
};

inline std::string seal(std::string_view tag, const std::string& payload)
{
    byte_writer w;
    w.bytes(tag);
    w.bytes(payload);
    w.u64(fnv1a64(payload));
    return w.str();
}

/// Checks tag, length and checksum; returns the payload.
inline std::string_view unseal(std::string_view tag, std::string_view bytes, const char* what)
{
    const std::string_view family = tag.substr(0, tag.rfind('v'));
    if (bytes.substr(0, family.size()) != family)
        throw format_error(format_error::kind::version, std::string("not a ") + what + " container");
    if (bytes.substr(0, tag.size()) != tag)
        throw format_error(format_error::kind::version,
                           std::string("unsupported ") + what + " container version (expected " +
                               std::string(tag.substr(0, tag.size() - 1)) + ")");
    if (bytes.size() < tag.size() + 8)
        throw format_error(format_error::kind::truncated, std::string(what) + " container is truncated");
    const auto payload = bytes.substr(tag.size(), bytes.size() - tag.size() - 8);
    byte_reader tail(bytes.substr(bytes.size() - 8));
    if (tail.u64() != fnv1a64(payload))
        throw format_error(format_error::kind::checksum, std::string(what) + " container checksum mismatch");
    return payload;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw error("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& bytes)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw error("cannot open " + path + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace detail

inline std::string serialize_model(const reservoir_model& m)
{
    detail::byte_writer w;
    const auto& a = m.arch;
    w.u64(a.n_layers);
    w.u64(a.neurons);
    w.u64(a.input_dim);
    w.u64(a.output_dim);
    w.f64(a.connectivity);
    w.f64(a.spectral_radius);
    w.u64(a.rescale ? 1 : 0);
    w.u64(a.act == activation::tanh ? 0 : 1);
    w.u64(a.washout);
    w.f64(a.ridge_lambda);
    w.u64(m.init == input_init::xavier ? 0 : 1);
    w.u64(m.seed);
    w.f64(m.train_rmse);
    w.f64(m.validation_rmse);
    w.u64(m.layers.size());
    for (const auto& l : m.layers) {
        w.dense(l.w_in);
        w.sparse(l.w_res);
    }
    w.dense(m.w_out);
    return detail::seal(model_tag, w.str());
}

inline reservoir_model deserialize_model(std::string_view bytes)
{
    detail::byte_reader r(detail::unseal(model_tag, bytes, "model"));
    reservoir_model m;
    auto& a = m.arch;
    a.n_layers = r.u64();
    a.neurons = r.u64();
    a.input_dim = r.u64();
    a.output_dim = r.u64();
    a.connectivity = r.f64();
    a.spectral_radius = r.f64();
    a.rescale = r.u64() != 0;
    a.act = r.u64() == 0 ? activation::tanh : activation::softsign;
    a.washout = r.u64();
    a.ridge_lambda = r.f64();
    m.init = r.u64() == 0 ? input_init::xavier : input_init::uniform_random;
    m.seed = r.u64();
    m.train_rmse = r.f64();
    m.validation_rmse = r.f64();
    const auto n_layers = r.u64();
    if (n_layers != a.n_layers)
        throw format_error(format_error::kind::malformed, "layer count disagrees with the architecture");
    for (std::uint64_t l = 0; l < n_layers; ++l) {
        reservoir_layer layer;
        layer.w_in = r.dense();
        layer.w_res = r.sparse();
        m.layers.push_back(std::move(layer));
    }
    m.w_out = r.dense();
    if (!r.done())
        throw format_error(format_error::kind::malformed, "trailing bytes in model container");
    return m;
}

inline void save_model(const std::string& path, const reservoir_model& m)
{
    detail::write_file(path, serialize_model(m));
}

inline reservoir_model load_model(const std::string& path)
{
    return deserialize_model(detail::read_file(path));
}

inline std::string serialize_ensemble(const ensemble_model& e)
{
    detail::byte_writer w;
    w.u64(e.learners.size());
    for (Eigen::Index i = 0; i < e.weights.size(); ++i)
        w.f64(e.weights[i]);
    w.u64(e.bootstrap.block_len);
    w.f64(e.bootstrap.coverage);
    w.u64(e.master_seed);
    for (const auto& l : e.learners) {
        const auto blob = serialize_model(l);
        w.u64(blob.size());
        w.bytes(blob);
    }
    return detail::seal(ensemble_tag, w.str());
}

inline ensemble_model deserialize_ensemble(std::string_view bytes)
{
    detail::byte_reader r(detail::unseal(ensemble_tag, bytes, "ensemble"));
    ensemble_model e;
    const auto m1 = static_cast<Eigen::Index>(r.dim());
    e.weights.resize(m1);
    for (Eigen::Index i = 0; i < m1; ++i)
        e.weights[i] = r.f64();
    e.bootstrap.block_len = r.u64();
    e.bootstrap.coverage = r.f64();
    e.master_seed = r.u64();
    for (Eigen::Index i = 0; i < m1; ++i) {
        const auto n = static_cast<std::size_t>(r.u64());
        e.learners.push_back(deserialize_model(r.bytes(n)));
    }
    if (!r.done())
        throw format_error(format_error::kind::malformed, "trailing bytes in ensemble container");
    return e;
}

inline void save_ensemble(const std::string& path, const ensemble_model& e)
{
    detail::write_file(path, serialize_ensemble(e));
}

inline ensemble_model load_ensemble(const std::string& path)
{
    return deserialize_ensemble(detail::read_file(path));
}

// ---------------------------------------------------------------------------
// Channel dumps (debugging). Binary: u64 S, K, M, N_t then G[s] (row-major),
// h_d[k][s], h_r[k][s] as interleaved (re, im) little-endian doubles.
// CSV: `tensor,k,s,i,j,re,im` with k = 0 for G and j = 0 for vectors.

inline std::string dump_channel_binary(const channel_set& ch)
{
    ch.check_shapes();
    detail::byte_writer w;
    w.u64(ch.n_subcarriers());
    w.u64(ch.n_users());
    w.u64(static_cast<std::uint64_t>(ch.n_ris()));
    w.u64(static_cast<std::uint64_t>(ch.n_tx()));
    for (const auto& g : ch.G)
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j) {
                w.f64(g(i, j).real());
                w.f64(g(i, j).imag());
            }
    for (const auto* set : {&ch.h_d, &ch.h_r})
        for (const auto& user : *set)
            for (const auto& v : user)
                for (Eigen::Index i = 0; i < v.size(); ++i) {
                    w.f64(v[i].real());
                    w.f64(v[i].imag());
                }
    return w.str();
}

inline void write_channel_csv(std::ostream& os, const channel_set& ch)
{
    ch.check_shapes();
    os << "tensor,k,s,i,j,re,im\n";
    for (std::size_t s = 0; s < ch.n_subcarriers(); ++s)
        for (Eigen::Index i = 0; i < ch.G[s].rows(); ++i)
            for (Eigen::Index j = 0; j < ch.G[s].cols(); ++j)
                os << "G,0," << s << ',' << i << ',' << j << ',' << format_double(ch.G[s](i, j).real()) << ','
                   << format_double(ch.G[s](i, j).imag()) << '\n';
    const char* names[2] = {"h_d", "h_r"};
    int which = 0;
    for (const auto* set : {&ch.h_d, &ch.h_r}) {
        for (std::size_t k = 0; k < set->size(); ++k)
            for (std::size_t s = 0; s < (*set)[k].size(); ++s)
                for (Eigen::Index i = 0; i < (*set)[k][s].size(); ++i)
                    os << names[which] << ',' << k << ',' << s << ',' << i << ",0,"
                       << format_double((*set)[k][s][i].real()) << ',' << format_double((*set)[k][s][i].imag())
                       << '\n';
        ++which;
    }
}

} // namespace rislsm
