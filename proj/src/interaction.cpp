// Copyright 2026 The trajcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trajcast/interaction.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/ops.hpp"

namespace trajcast::nn
{

InteractionNet InteractionNet::create(ParamStore & store, const std::string & prefix, const InteractionDims & d,
                                      std::mt19937_64 & rng)
{
  add_linear(store, prefix + ".pos", 2, d.embed, rng);
  add_linear(store, prefix + ".track", d.track_input, d.embed, rng);
  add_linear(store, prefix + ".motion", 2, d.embed, rng);
  add_linear(store, prefix + ".plan", 2, d.embed, rng);
  GruCell::create(store, prefix + ".gru", 3 * d.embed, d.gru_hidden, rng);
  add_linear(store, prefix + ".proj", d.gru_hidden, d.st_dim(), rng);
  return bind(store, prefix, d);
}

InteractionNet InteractionNet::bind(ParamStore & store, const std::string & prefix, const InteractionDims & d)
{
  InteractionNet net;
  net.dims_ = d;
  net.pos_ = Linear::bind(store, prefix + ".pos", 2, d.embed);
  net.track_ = Linear::bind(store, prefix + ".track", d.track_input, d.embed);
  net.motion_ = Linear::bind(store, prefix + ".motion", 2, d.embed);
  net.plan_ = Linear::bind(store, prefix + ".plan", 2, d.embed);
  net.gru_ = GruCell::bind(store, prefix + ".gru", 3 * d.embed, d.gru_hidden);
  net.proj_ = Linear::bind(store, prefix + ".proj", d.gru_hidden, d.st_dim());
  return net;
}

Var InteractionNet::position_feature(Graph & g, Var positions) const
{
  if (positions.value().rank() != 2 || positions.rows() == 0) {
    throw ContractError("position feature needs at least one agent");
  }
  return maxpool_rows(pos_(g, positions));
}

Var InteractionNet::tracking_feature(Graph & g, Var hidden) const
{
  if (hidden.value().rank() != 2 || hidden.rows() == 0) {
    throw ContractError("tracking feature needs at least one agent");
  }
  return maxpool_rows(track_(g, hidden));
}

Var InteractionNet::ego_motion_feature(Graph & g, Var displacement) const { return motion_(g, displacement); }

InteractionNet::Fused InteractionNet::fuse(Graph & g, Var o, Var r, Var m, Var h_gru) const
{
  const Var h = gru_.step(g, concat({o, r, m}, 1), h_gru);
  return {proj_(g, h), h};
}

Var InteractionNet::zero_state(Graph & g) const { return gru_.zero_state(g, 1); }

Var InteractionNet::ego_plan_feature(Graph & g, Var waypoints) const
{
  if (waypoints.value().rank() != 2 || waypoints.rows() == 0) {
    throw ContractError("ego plan feature needs at least one remaining waypoint");
  }
  return maxpool_rows(plan_(g, waypoints));
}

Var InteractionNet::assemble_fst(Var f, Var st) { return concat({f, st}, 1); }

}  // namespace trajcast::nn
