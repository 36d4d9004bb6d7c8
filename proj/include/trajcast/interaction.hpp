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

#ifndef TRAJCAST__INTERACTION_HPP_
#define TRAJCAST__INTERACTION_HPP_

#include <random>
#include <string>

#include "trajcast/graph.hpp"
#include "trajcast/layers.hpp"
#include "trajcast/recurrent.hpp"

namespace trajcast::nn
{

struct InteractionDims
{
  std::size_t embed = 64;        // width of the position, tracking, motion and plan embeddings
  std::size_t gru_hidden = 128;
  std::size_t track_input = 64;  // hidden width of the per-agent recurrent cells being pooled

  /// Width of the fused interaction feature: position + tracking + motion.
  std::size_t st_dim() const { return 3 * embed; }
  /// Width of [plan feature, fused feature].
  std::size_t fst_dim() const { return 4 * embed; }
};

/**
 * @brief Global interaction features pooled over all agents.
 *
 * Parameters under `<prefix>.`: pos, track, motion, plan (linear embeddings), gru
 * (GRU over [o, r, m]) and proj (GRU hidden -> fused feature).
 */
class InteractionNet
{
public:
  InteractionNet() = default;
  static InteractionNet create(ParamStore & store, const std::string & prefix, const InteractionDims & dims,
                               std::mt19937_64 & rng);
  static InteractionNet bind(ParamStore & store, const std::string & prefix, const InteractionDims & dims);

  /// positions [n x 2] -> [1 x embed]: per-agent embedding, column-wise max over agents.
  Var position_feature(Graph & g, Var positions) const;
  /// hidden [n x track_input] -> [1 x embed], pooled like position_feature.
  Var tracking_feature(Graph & g, Var hidden) const;
  /// displacement [1 x 2] of the ego between consecutive frames -> [1 x embed].
  Var ego_motion_feature(Graph & g, Var displacement) const;

  struct Fused
  {
    Var st;     // [1 x st_dim]
    Var h_gru;  // [1 x gru_hidden]
  };
  /// One GRU step on [o, r, m] followed by the projection to st.
  Fused fuse(Graph & g, Var o, Var r, Var m, Var h_gru) const;
  Var zero_state(Graph & g) const;

  /// waypoints [k x 2] (remaining ego plan) -> [1 x embed]. Throws ContractError when k = 0.
  Var ego_plan_feature(Graph & g, Var waypoints) const;

  /// [f, st] along the feature axis.
  static Var assemble_fst(Var f, Var st);

  const InteractionDims & dims() const { return dims_; }

private:
  InteractionDims dims_;
  Linear pos_, track_, motion_, plan_, proj_;
  GruCell gru_;
};

}  // namespace trajcast::nn

#endif  // TRAJCAST__INTERACTION_HPP_
