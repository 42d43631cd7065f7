#pragma once

#include <cstdint>

#include "vsig/crypto.hpp"

namespace testsupport {

// Deterministic key material, cached per (party count, bits) so test cases
// share the RSA generation cost.
const vsig::KeyMaterial& test_keys(uint16_t parties, int bits = 1024, uint8_t algorithm = 1);

}  // namespace testsupport
