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

#ifndef TRAJCAST__PREDICTION_HPP_
#define TRAJCAST__PREDICTION_HPP_

#include <random>
#include <vector>

#include "trajcast/graph.hpp"
#include "trajcast/layers.hpp"
#include "trajcast/recurrent.hpp"

namespace trajcast::nn
{

struct PredictionDims
{
  std::size_t embed = 64;        // displacement and map embedding widths
  std::size_t fst = 256;         // attention output width, equal to the interaction feature
  std::size_t lstm_hidden = 64;
  std::size_t noise_dim = 16;

  /// [displacement embed, map embed, attended interaction feature]
  std::size_t input_dim() const { return 2 * embed + fst; }
};

/**
 * @brief Per-agent attention, LSTM encoder/decoder and displacement head.
 *
 * Parameters: pred.attn, pred.disp, pred.head, pred.noise (linear), enc_lstm, dec_lstm.
 */
class PredictionNet
{
public:
  PredictionNet() = default;
  static PredictionNet create(ParamStore & store, const PredictionDims & dims, std::mt19937_64 & rng);
  static PredictionNet bind(ParamStore & store, const PredictionDims & dims);

  /// q = repeat(fst) * sigmoid(positions W_c^T + b_c): [n x 2], [1 x fst] -> [n x fst].
  Var attention(Graph & g, Var positions, Var fst) const;
  /// e_p = displacement W_p^T + b_p: [n x 2] -> [n x embed].
  Var displacement_embed(Graph & g, Var displacement) const;
  /// Encoder LSTM on [e_p, v, q].
  LstmState encode_step(Graph & g, Var e_p, Var v, Var q, const LstmState & state) const;
  /// h_d = [h_e, z] W_phi^T + b_phi, c_d = 0.
  LstmState init_decoder(Graph & g, Var h_e, Var z) const;

  struct Decoded
  {
    LstmState state;
    Var delta;  // [n x 2]
    Var next;   // position + delta
  };
  /// Decoder LSTM on [e_p, v, q], displacement head, and integration from `position`.
  Decoded decode_step(Graph & g, Var e_p, Var v, Var q, const LstmState & state, Var position) const;

  const PredictionDims & dims() const { return dims_; }
  const LstmCell & encoder() const { return enc_; }
  const LstmCell & decoder() const { return dec_; }

private:
  PredictionDims dims_;
  Linear attn_, disp_, head_, noise_;
  LstmCell enc_, dec_;
};

enum class VarietyMin { scene, agent };

struct VarietyLoss
{
  Var loss;                        // scalar {1}
  double value = 0.0;
  /// Winning modality: one entry for scene mode, one per scored agent for agent mode.
  std::vector<std::size_t> winners;
  /// Per-modality summed squared error over scored agents and steps.
  std::vector<double> modality_errors;
};

/**
 * @brief Min-over-modalities squared-error loss.
 *
 * predictions[h][k] is modality h at future step k, [n x 2]; truth[k] is [n x 2].
 * Only rows in `scored` count. Scene mode minimises the summed error over agents;
 * agent mode minimises per agent. Gradient flows only through the winners, and ties
 * go to the lowest modality index. Normalised by |scored| * steps.
 */
VarietyLoss variety_loss(Graph & g, const std::vector<std::vector<Var>> & predictions,
                         const std::vector<Tensor> & truth, const std::vector<std::size_t> & scored,
                         VarietyMin mode);

}  // namespace trajcast::nn

#endif  // TRAJCAST__PREDICTION_HPP_
