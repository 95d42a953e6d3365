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

#include "rislsm/channel.hpp"
#include "rislsm/ris_link.hpp"

#include <cstdint>

namespace rislsm::testing {

/// Small wideband cell for unit tests.
inline channel_spec small_spec(std::size_t n_tx, std::size_t n_ris, std::size_t n_users, std::size_t n_sub,
                               std::size_t n_clusters = 3)
{
    channel_spec spec;
    for (auto* c : {&spec.bs_ris, &spec.bs_user, &spec.ris_user}) {
        c->n_clusters = n_clusters;
        c->n_rays_per_cluster = 1;
        c->n_subcarriers = n_sub;
        c->n_taps = 8;
    }
    spec.bs = make_wideband_array(n_tx, 100e9, 400e6, n_sub);
    spec.ris = make_wideband_array(n_ris, 100e9, 400e6, n_sub);
    spec.n_users = n_users;
    return spec;
}

inline channel_set small_channel(std::size_t n_tx, std::size_t n_ris, std::size_t n_users, std::size_t n_sub,
                                 std::uint64_t seed)
{
    return generate_channel_set(small_spec(n_tx, n_ris, n_users, n_sub), {}, seed);
}

/// Channel with every entry set explicitly (S = 1).
inline channel_set manual_channel(const Eigen::MatrixXcd& G, const std::vector<Eigen::VectorXcd>& h_d,
                                  const std::vector<Eigen::VectorXcd>& h_r)
{
    channel_set ch;
    ch.G = {G};
    for (std::size_t k = 0; k < h_d.size(); ++k) {
        ch.h_d.push_back({h_d[k]});
        ch.h_r.push_back({h_r[k]});
    }
    return ch;
}

} // namespace rislsm::testing
