#include "cmlab/trace_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "cmlab/rng.hpp"

namespace cmlab {

namespace {

constexpr char kMagic[4] = {'C', 'M', 'T', '1'};
constexpr uint32_t kVersion = 1;
constexpr size_t kHeaderSize = 44;

static_assert(std::endian::native == std::endian::little,
              "trace files are little-endian; add byte swapping for this platform");

template <typename T>
void put(std::string& buf, T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
}

template <typename T>
T get(const std::string& buf, size_t off) {
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    return v;
}

[[noreturn]] void fail(const std::string& what, size_t byte_offset) {
    throw DataFormatError("trace file: " + what + " (byte offset " + std::to_string(byte_offset) + ")");
}

}  // namespace

void save_trace(const std::vector<Trace>& traces, const std::string& path, uint64_t master_seed) {
    if (traces.empty()) throw std::invalid_argument("save_trace: no traces");
    const size_t n_s = traces[0].n_symbols();
    const Scheme scheme = traces[0].scheme;
    for (const Trace& t : traces) {
        if (t.n_symbols() != n_s || t.rx.size() != n_s || t.data_bits.size() != 2 * n_s)
            throw std::invalid_argument("save_trace: traces must share n_s and carry 2*n_s data bits");
        if (t.scheme != scheme) throw std::invalid_argument("save_trace: mixed scheme tags");
    }

    std::string header;
    header.append(kMagic, 4);
    put<uint32_t>(header, kVersion);
    put<uint32_t>(header, 2);
    put<uint32_t>(header, static_cast<uint32_t>(n_s));
    put<uint32_t>(header, static_cast<uint32_t>(traces.size()));
    put<uint32_t>(header, scheme == Scheme::ttcm ? 0u : 1u);
    put<double>(header, traces[0].nominal_snr_db);
    put<uint64_t>(header, master_seed);
    uint32_t crc = static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(header.data()), static_cast<uInt>(header.size())));
    put<uint32_t>(header, crc);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataFormatError("save_trace: cannot open " + path + " for writing");
    f.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const Trace& t : traces) {
        for (size_t i = 0; i < n_s; ++i) {
            double vals[4] = {t.tx[i].x, t.tx[i].y, t.rx[i].x, t.rx[i].y};
            f.write(reinterpret_cast<const char*>(vals), sizeof(vals));
        }
    }
    std::vector<uint8_t> packed((traces.size() * 2 * n_s + 7) / 8, 0);
    size_t bit = 0;
    for (const Trace& t : traces)
        for (uint8_t b : t.data_bits) {
            if (b) packed[bit >> 3] |= static_cast<uint8_t>(1u << (bit & 7));
            ++bit;
        }
    f.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (!f) throw DataFormatError("save_trace: write failed for " + path);
}

std::vector<Trace> load_trace(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataFormatError("load_trace: cannot open " + path);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (content.size() < kHeaderSize) fail("truncated header", content.size());
    if (std::memcmp(content.data(), kMagic, 4) != 0) fail("bad magic", 0);
    uint32_t version = get<uint32_t>(content, 4);
    if (version != kVersion) fail("unsupported version " + std::to_string(version), 4);
    uint32_t n_dims = get<uint32_t>(content, 8);
    if (n_dims != 2) fail("n_dims " + std::to_string(n_dims) + " unsupported", 8);
    uint32_t n_s = get<uint32_t>(content, 12);
    uint32_t count = get<uint32_t>(content, 16);
    uint32_t scheme_tag = get<uint32_t>(content, 20);
    if (scheme_tag > 1) fail("unknown scheme tag " + std::to_string(scheme_tag), 20);
    double nominal = get<double>(content, 24);
    uint64_t seed = get<uint64_t>(content, 32);
    uint32_t stored_crc = get<uint32_t>(content, 40);
    uint32_t crc = static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()), static_cast<uInt>(40)));
    if (crc != stored_crc) fail("header checksum mismatch", 40);

    size_t payload_bytes = static_cast<size_t>(count) * n_s * 4 * sizeof(double);
    size_t bits_bytes = (static_cast<size_t>(count) * 2 * n_s + 7) / 8;
    size_t expected = kHeaderSize + payload_bytes + bits_bytes;
    if (content.size() != expected)
        fail("size " + std::to_string(content.size()) + " != expected " + std::to_string(expected),
             content.size());

    std::vector<Trace> traces(count);
    size_t off = kHeaderSize;
    for (uint32_t t = 0; t < count; ++t) {
        Trace& tr = traces[t];
        tr.scheme = scheme_tag == 0 ? Scheme::ttcm : Scheme::ldpc;
        tr.nominal_snr_db = nominal;
        tr.seed = derive_seed(seed, 0x7217, t);
        tr.tx.resize(n_s);
        tr.rx.resize(n_s);
        for (uint32_t i = 0; i < n_s; ++i) {
            double vals[4];
            std::memcpy(vals, content.data() + off, sizeof(vals));
            off += sizeof(vals);
            tr.tx[i] = {vals[0], vals[1]};
            tr.rx[i] = {vals[2], vals[3]};
        }
    }
    const uint8_t* packed = reinterpret_cast<const uint8_t*>(content.data() + off);
    size_t bit = 0;
    for (uint32_t t = 0; t < count; ++t) {
        traces[t].data_bits.resize(2 * n_s);
        for (uint32_t b = 0; b < 2 * n_s; ++b) {
            traces[t].data_bits[b] = (packed[bit >> 3] >> (bit & 7)) & 1;
            ++bit;
        }
    }
    return traces;
}

}  // namespace cmlab
