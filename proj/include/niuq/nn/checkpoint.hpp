#pragma once

#include <string>

#include "niuq/nn/deeponet.hpp"

namespace niuq::nn {

// Single-document checkpoint: network spec, layout descriptor, flat parameter
// array (base-16 64-bit encoding, bit-exact round trip), sensor grid, and
// training metadata.
void save_checkpoint(const OperatorModel& model, const std::string& path);
OperatorModel load_checkpoint(const std::string& path);

// Hex encoding of one IEEE-754 double (16 lowercase digits).
std::string double_to_hex(double v);
double hex_to_double(const std::string& s);

}  // namespace niuq::nn
