#pragma once

#include <iosfwd>
#include <string>

#include "culprit/nn/mlp.hpp"

namespace culprit::nn {

// Text format, version 1:
//
//   mlp v1
//   layers <n>
//   layer <out> <in> <activation>
//   w <out*in values, row-major>
//   b <out values>
//   ... (repeated per layer)
//   end
//
// Values are written with 17 significant digits so a save/load round trip
// is bit-exact.

void write_mlp(std::ostream& os, const Mlp& mlp);
Mlp read_mlp(std::istream& is);

void save_mlp(const std::string& path, const Mlp& mlp);
Mlp load_mlp(const std::string& path);

/// Shortest-exact formatting used for every numeric artifact.
std::string format_real(double v);

}  // namespace culprit::nn
