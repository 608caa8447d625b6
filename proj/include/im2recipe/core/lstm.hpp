// Copyright 2026 The im2recipe Authors. All Rights Reserved.
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

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "im2recipe/core/autodiff.hpp"
#include "im2recipe/core/random.hpp"

namespace im2recipe {

/// Weights of one LSTM cell. Every gate matrix is [hidden, input + hidden],
/// applied to concat(x_t, h_{t-1}).
struct LstmCellParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  Param w_input, w_forget, w_output, w_candidate;
  Param b_input, b_forget, b_output, b_candidate;

  LstmCellParams() = default;

  /// Zero-initialized cell.
  LstmCellParams(const std::string& prefix, std::size_t input, std::size_t hidden)
      : input_size(input),
        hidden_size(hidden),
        w_input(prefix + ".w_input", Tensor({hidden, input + hidden})),
        w_forget(prefix + ".w_forget", Tensor({hidden, input + hidden})),
        w_output(prefix + ".w_output", Tensor({hidden, input + hidden})),
        w_candidate(prefix + ".w_candidate", Tensor({hidden, input + hidden})),
        b_input(prefix + ".b_input", Tensor({hidden})),
        b_forget(prefix + ".b_forget", Tensor({hidden})),
        b_output(prefix + ".b_output", Tensor({hidden})),
        b_candidate(prefix + ".b_candidate", Tensor({hidden})) {}

  /// Uniform(+-1/sqrt(hidden)) weights, zero biases except forget bias 1.
  LstmCellParams(const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng)
      : LstmCellParams(prefix, input, hidden) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (Param* w : {&w_input, &w_forget, &w_output, &w_candidate}) {
      w->value = uniform_tensor(w->value.shape(), bound, rng);
    }
    b_forget.value.fill(1.0);
  }

  std::vector<Param*> parameters() {
    return {&w_input, &w_forget, &w_output, &w_candidate, &b_input, &b_forget, &b_output, &b_candidate};
  }
};

struct LstmState {
  ad::Var h;
  ad::Var c;
};

inline LstmState zero_state(ad::Tape& tape, std::size_t hidden) {
  return {tape.constant(Tensor({hidden})), tape.constant(Tensor({hidden}))};
}

/// One step of the standard LSTM recurrence:
///   i,f,o = sigmoid(W [x;h] + b), g = tanh(W_g [x;h] + b_g)
///   c' = f*c + i*g, h' = o*tanh(c')
inline LstmState lstm_step(ad::Tape& tape, LstmCellParams& cell, ad::Var x, ad::Var h_prev, ad::Var c_prev) {
  if (x.value().rank() != 1 || x.size() != cell.input_size) {
    throw DimensionError("lstm_step: input of shape " + shape_string(x.value().shape()) + ", cell expects " +
                         std::to_string(cell.input_size));
  }
  if (h_prev.size() != cell.hidden_size || c_prev.size() != cell.hidden_size) {
    throw DimensionError("lstm_step: state size does not match hidden size " + std::to_string(cell.hidden_size));
  }
  const ad::Var xh = ad::concat(x, h_prev);
  const ad::Var i = ad::sigmoid(ad::linear(xh, tape.param(cell.w_input), tape.param(cell.b_input)));
  const ad::Var f = ad::sigmoid(ad::linear(xh, tape.param(cell.w_forget), tape.param(cell.b_forget)));
  const ad::Var o = ad::sigmoid(ad::linear(xh, tape.param(cell.w_output), tape.param(cell.b_output)));
  const ad::Var g = ad::tanh(ad::linear(xh, tape.param(cell.w_candidate), tape.param(cell.b_candidate)));
  const ad::Var c = ad::add(ad::mul(f, c_prev), ad::mul(i, g));
  const ad::Var h = ad::mul(o, ad::tanh(c));
  return {h, c};
}

/// Runs a cell over the sequence (reversed when `reverse`) from a zero state.
/// Returns the hidden state at every position, indexed in input order.
inline std::vector<ad::Var> run_lstm(ad::Tape& tape, LstmCellParams& cell, std::span<const ad::Var> inputs,
                                     bool reverse = false) {
  if (inputs.empty()) throw EmptyInputError("run_lstm: empty input sequence");
  std::vector<ad::Var> out(inputs.size());
  LstmState s = zero_state(tape, cell.hidden_size);
  for (std::size_t step = 0; step < inputs.size(); ++step) {
    const std::size_t pos = reverse ? inputs.size() - 1 - step : step;
    s = lstm_step(tape, cell, inputs[pos], s.h, s.c);
    out[pos] = s.h;
  }
  return out;
}

enum class Direction { kForward, kBidirectional };

/// Final hidden state (forward), or concat(final forward, final backward) for
/// a bidirectional pass, where the backward cell reads the sequence reversed.
inline ad::Var encode_sequence(ad::Tape& tape, LstmCellParams& forward, LstmCellParams* backward,
                               std::span<const ad::Var> inputs, Direction direction) {
  if (inputs.empty()) throw EmptyInputError("encode_sequence: empty input sequence");
  LstmState s = zero_state(tape, forward.hidden_size);
  for (const ad::Var& x : inputs) s = lstm_step(tape, forward, x, s.h, s.c);
  if (direction == Direction::kForward) return s.h;
  if (backward == nullptr) throw ConfigError("encode_sequence: bidirectional pass needs a backward cell");
  LstmState r = zero_state(tape, backward->hidden_size);
  for (std::size_t k = inputs.size(); k-- > 0;) r = lstm_step(tape, *backward, inputs[k], r.h, r.c);
  return ad::concat(s.h, r.h);
}

}  // namespace im2recipe
