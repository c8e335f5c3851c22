#pragma once

#include <string>
#include <vector>

#include "cmlab/channel.hpp"

namespace cmlab {

// Binary trace container, magic "CMT1".
//
//   offset  size  field
//   0       4     magic "CMT1"
//   4       4     u32 version (= 1)
//   8       4     u32 n_dims (= 2)
//   12      4     u32 n_s (symbols per trace)
//   16      4     u32 trace count
//   20      4     u32 scheme (0 = ttcm, 1 = ldpc)
//   24      8     f64 nominal SNR in dB
//   32      8     u64 master seed
//   40      4     u32 CRC32 of bytes [0, 40)
//   44      -     payload: count * n_s * 4 little-endian f64
//                 (per symbol: tx.x, tx.y, rx.x, rx.y)
//   then          data bits, LSB-first packed, count * 2 * n_s bits
//
// All traces in one file share n_s, scheme and nominal SNR; per-trace seeds
// are derived from the master seed by trace index.

// master_seed is the parent of the per-trace seeds; load_trace re-derives
// trace t's seed as derive_seed(master_seed, 0x7217, t).
void save_trace(const std::vector<Trace>& traces, const std::string& path, uint64_t master_seed);

std::vector<Trace> load_trace(const std::string& path);

}  // namespace cmlab
