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

#include "trajcast/prediction.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/ops.hpp"

namespace trajcast::nn
{

PredictionNet PredictionNet::create(ParamStore & store, const PredictionDims & d, std::mt19937_64 & rng)
{
  add_linear(store, "pred.attn", 2, d.fst, rng);
  add_linear(store, "pred.disp", 2, d.embed, rng);
  add_linear(store, "pred.head", d.lstm_hidden, 2, rng);
  add_linear(store, "pred.noise", d.lstm_hidden + d.noise_dim, d.lstm_hidden, rng);
  LstmCell::create(store, "enc_lstm", d.input_dim(), d.lstm_hidden, rng);
  LstmCell::create(store, "dec_lstm", d.input_dim(), d.lstm_hidden, rng);
  return bind(store, d);
}

PredictionNet PredictionNet::bind(ParamStore & store, const PredictionDims & d)
{
  PredictionNet net;
  net.dims_ = d;
  net.attn_ = Linear::bind(store, "pred.attn", 2, d.fst);
  net.disp_ = Linear::bind(store, "pred.disp", 2, d.embed);
  net.head_ = Linear::bind(store, "pred.head", d.lstm_hidden, 2);
  net.noise_ = Linear::bind(store, "pred.noise", d.lstm_hidden + d.noise_dim, d.lstm_hidden);
  net.enc_ = LstmCell::bind(store, "enc_lstm", d.input_dim(), d.lstm_hidden);
  net.dec_ = LstmCell::bind(store, "dec_lstm", d.input_dim(), d.lstm_hidden);
  return net;
}

Var PredictionNet::attention(Graph & g, Var positions, Var fst) const
{
  if (fst.shape() != Shape{1, dims_.fst}) {
    throw DimensionError("attention: expected fst [1x" + std::to_string(dims_.fst) + "], got " + to_string(fst.shape()));
  }
  return mul(repeat_rows(fst, positions.rows()), sigmoid(attn_(g, positions)));
}

Var PredictionNet::displacement_embed(Graph & g, Var displacement) const { return disp_(g, displacement); }

LstmState PredictionNet::encode_step(Graph & g, Var e_p, Var v, Var q, const LstmState & state) const
{
  return enc_.step(g, concat({e_p, v, q}, 1), state);
}

LstmState PredictionNet::init_decoder(Graph & g, Var h_e, Var z) const
{
  const Var h = noise_(g, concat({h_e, z}, 1));
  return {h, g.constant(Tensor::zeros({h_e.rows(), dims_.lstm_hidden}))};
}

PredictionNet::Decoded PredictionNet::decode_step(Graph & g, Var e_p, Var v, Var q, const LstmState & state,
                                                  Var position) const
{
  Decoded out;
  out.state = dec_.step(g, concat({e_p, v, q}, 1), state);
  out.delta = head_(g, out.state.h);
  out.next = add(position, out.delta);
  return out;
}

VarietyLoss variety_loss(Graph & g, const std::vector<std::vector<Var>> & predictions,
                         const std::vector<Tensor> & truth, const std::vector<std::size_t> & scored,
                         VarietyMin mode)
{
  if (predictions.empty()) {
    throw ContractError("variety loss: no modalities");
  }
  if (scored.empty()) {
    throw ContractError("variety loss: no scored agents");
  }
  const std::size_t steps = truth.size();
  for (const auto & traj : predictions) {
    if (traj.size() != steps || steps == 0) {
      throw ContractError("variety loss: prediction length " + std::to_string(traj.size()) +
                          " does not match ground truth length " + std::to_string(steps));
    }
    for (std::size_t k = 0; k < steps; ++k) {
      if (traj[k].shape() != truth[k].shape()) {
        throw ContractError("variety loss: prediction " + to_string(traj[k].shape()) + " vs truth " +
                            to_string(truth[k].shape()));
      }
    }
  }
  const std::size_t H = predictions.size();
  const std::size_t n = scored.size();

  // Per modality: squared error per scored agent, [n x 1].
  std::vector<Var> per_agent(H);
  std::vector<std::vector<double>> errs(H, std::vector<double>(n, 0.0));
  for (std::size_t h = 0; h < H; ++h) {
    Var acc;
    for (std::size_t k = 0; k < steps; ++k) {
      const Var pred = select_rows(predictions[h][k], scored);
      Tensor target({n, 2});
      for (std::size_t i = 0; i < n; ++i) {
        target.at(i, 0) = truth[k].at(scored[i], 0);
        target.at(i, 1) = truth[k].at(scored[i], 1);
      }
      const Var diff = sub(pred, g.constant(std::move(target)));
      const Var sq = row_sum(mul(diff, diff));
      acc = acc.valid() ? add(acc, sq) : sq;
    }
    per_agent[h] = acc;
    for (std::size_t i = 0; i < n; ++i) {
      errs[h][i] = acc.value()[i];
    }
  }

  VarietyLoss out;
  const double norm = 1.0 / static_cast<double>(n * steps);
  for (std::size_t h = 0; h < H; ++h) {
    double total = 0.0;
    for (double e : errs[h]) {
      total += e;
    }
    out.modality_errors.push_back(total);
  }
  if (mode == VarietyMin::scene) {
    std::size_t best = 0;
    for (std::size_t h = 1; h < H; ++h) {
      if (out.modality_errors[h] < out.modality_errors[best]) {
        best = h;
      }
    }
    out.winners = {best};
    out.loss = scale(sum(per_agent[best]), norm);
  } else {
    out.winners.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t h = 1; h < H; ++h) {
        if (errs[h][i] < errs[out.winners[i]][i]) {
          out.winners[i] = h;
        }
      }
    }
    Var total;
    for (std::size_t h = 0; h < H; ++h) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < n; ++i) {
        if (out.winners[i] == h) {
          rows.push_back(i);
        }
      }
      if (rows.empty()) {
        continue;
      }
      const Var part = sum(select_rows(per_agent[h], rows));
      total = total.valid() ? add(total, part) : part;
    }
    out.loss = scale(total, norm);
  }
  out.value = out.loss.value()[0];
  return out;
}

}  // namespace trajcast::nn
