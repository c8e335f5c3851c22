#pragma once

#include <cstdint>
#include <string>

namespace cmlab {

// FIPS 180-4 SHA-256 of a byte buffer, returned as lowercase hex.
std::string sha256_hex(const void* data, size_t len);

}  // namespace cmlab
