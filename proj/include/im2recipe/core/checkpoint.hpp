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

// Text checkpoint format, version 1:
//
//   im2recipe-checkpoint 1
//   <count>
//   <name> <rank> <d0> ... <dk>
//   <v0> <v1> ...              (one line of shortest round-trip doubles)
//
// Values are written with std::to_chars, so load(save(x)) == x bit for bit.

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "im2recipe/core/error.hpp"
#include "im2recipe/core/tensor.hpp"

namespace im2recipe {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointMagic = "im2recipe-checkpoint";

using TensorMap = std::map<std::string, Tensor>;

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

inline void save_checkpoint(std::ostream& out, std::span<const Param* const> params) {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n' << params.size() << '\n';
  for (const Param* p : params) {
    if (p->name.empty() || p->name.find_first_of(" \t\n") != std::string::npos) {
      throw ConfigError("checkpoint: parameter names must be non-empty and whitespace-free");
    }
    const Shape& shape = p->value.shape();
    out << p->name << ' ' << shape.size();
    for (std::size_t d : shape) out << ' ' << d;
    out << '\n';
    const auto data = p->value.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (i) out << ' ';
      out << format_double(data[i]);
    }
    out << '\n';
  }
}

inline TensorMap load_checkpoint(std::istream& in, const std::string& source = "<checkpoint>") {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError(source, lineno + 1, "unexpected end of checkpoint");
    ++lineno;
    return line;
  };
  {
    std::istringstream hdr(next());
    std::string magic;
    int version = 0;
    hdr >> magic >> version;
    if (magic != kCheckpointMagic) throw ParseError(source, lineno, "not a checkpoint file");
    if (version != kCheckpointVersion) {
      throw ParseError(source, lineno, "unsupported checkpoint version " + std::to_string(version));
    }
  }
  std::size_t count = 0;
  {
    std::istringstream c(next());
    if (!(c >> count)) throw ParseError(source, lineno, "missing parameter count");
  }
  TensorMap out;
  for (std::size_t k = 0; k < count; ++k) {
    std::istringstream h(next());
    std::string name;
    std::size_t rank = 0;
    if (!(h >> name >> rank) || rank == 0) throw ParseError(source, lineno, "bad parameter header");
    Shape shape(rank);
    for (auto& d : shape) {
      if (!(h >> d) || d == 0) throw ParseError(source, lineno, "bad shape for " + name);
    }
    const std::size_t header_line = lineno;
    std::istringstream body(next());
    std::vector<double> data;
    data.reserve(shape_size(shape));
    std::string tok;
    while (body >> tok) {
      try {
        data.push_back(parse_double(tok));
      } catch (const Error& e) {
        throw ParseError(source, lineno, e.what());
      }
    }
    if (data.size() != shape_size(shape)) throw ParseError(source, header_line, "value count mismatch for " + name);
    if (!out.emplace(name, Tensor(std::move(shape), std::move(data))).second) {
      throw ParseError(source, header_line, "duplicate parameter " + name);
    }
  }
  return out;
}

/// Copies checkpoint values into matching params. Every param must be present
/// with an identical shape.
inline void restore_params(const TensorMap& values, std::span<Param* const> params) {
  for (Param* p : params) {
    auto it = values.find(p->name);
    if (it == values.end()) throw NotFoundError("checkpoint has no parameter " + p->name);
    if (it->second.shape() != p->value.shape()) {
      throw DimensionError("checkpoint shape " + shape_string(it->second.shape()) + " for " + p->name +
                           " does not match " + shape_string(p->value.shape()));
    }
    p->value = it->second;
    p->grad = Tensor::zeros_like(p->value);
  }
}

inline void save_checkpoint_file(const std::string& path, std::span<const Param* const> params) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  save_checkpoint(out, params);
}

inline TensorMap load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return load_checkpoint(in, path);
}

}  // namespace im2recipe
