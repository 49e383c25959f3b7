#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are not supported");

namespace ddm {

using cxd = std::complex<double>;
using cxf = std::complex<float>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// ---------------------------------------------------------------------------
// Errors. The CLI maps each class to a stable token and exit code.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
  public:
    Error(std::string cls, const std::string& msg)
        : std::runtime_error(msg), cls_(std::move(cls)) {}
    const std::string& cls() const { return cls_; }

  private:
    std::string cls_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config", m) {}
};
struct ArgError : Error {
    explicit ArgError(const std::string& m) : Error("args", m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error("io", m) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& m) : Error("format", m) {}
};
struct MathError : Error {
    explicit MathError(const std::string& m) : Error("math", m) {}
};
struct TrainError : Error {
    explicit TrainError(const std::string& m) : Error("train", m) {}
};

// ---------------------------------------------------------------------------
// Seed derivation. Independent per-item streams come from mixing the run seed
// with structural indices, so parallel or partitioned generation stays
// order-deterministic.
// ---------------------------------------------------------------------------

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t a) { return splitmix64(seed ^ splitmix64(a)); }
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    return mix_seed(mix_seed(seed, a, b), c);
}

// Stream tags for the seed tree; fixed values are part of the determinism contract.
enum class SeedTag : uint64_t {
    dataset_sample = 0x01,
    channel_noise = 0x02,
    net_init = 0x03,
    phase1_order = 0x04,
    pairing = 0x05,
    phase2_order = 0x06,
    ber_trial = 0x07,
    bootstrap = 0x08,
    split_train = 0x10,
    split_val = 0x11,
    split_test = 0x12,
    scenario = 0x13,
};

inline uint64_t mix_seed(uint64_t seed, SeedTag tag) {
    return mix_seed(seed, static_cast<uint64_t>(tag));
}
inline uint64_t mix_seed(uint64_t seed, SeedTag tag, uint64_t a) {
    return mix_seed(mix_seed(seed, tag), a);
}
inline uint64_t mix_seed(uint64_t seed, SeedTag tag, uint64_t a, uint64_t b) {
    return mix_seed(mix_seed(seed, tag, a), b);
}

// FNV-1a, used for config hashing and artifact ids (not cryptographic).
inline uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex16(uint64_t v);

// Artifact provenance stamp appended to binary containers.
struct Stamp {
    uint64_t config_hash = 0;
    uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Little-endian binary stream helpers. Readers throw FormatError on short
// reads so truncated files surface as explicit corruption errors.
// ---------------------------------------------------------------------------

class BinWriter {
  public:
    explicit BinWriter(std::ostream& os) : os_(os) {}
    void bytes(const void* p, size_t n);
    void u32(uint32_t v) { bytes(&v, sizeof v); }
    void u64(uint64_t v) { bytes(&v, sizeof v); }
    void f32(float v) { bytes(&v, sizeof v); }
    void f64(double v) { bytes(&v, sizeof v); }
    void magic(const char (&m)[5]) { bytes(m, 4); }
    void str(const std::string& s);

  private:
    std::ostream& os_;
};

class BinReader {
  public:
    BinReader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {}
    void bytes(void* p, size_t n);
    bool try_bytes(void* p, size_t n);  // false on clean EOF at a boundary
    uint32_t u32() { uint32_t v; bytes(&v, sizeof v); return v; }
    uint64_t u64() { uint64_t v; bytes(&v, sizeof v); return v; }
    float f32() { float v; bytes(&v, sizeof v); return v; }
    double f64() { double v; bytes(&v, sizeof v); return v; }
    void expect_magic(const char (&m)[5]);
    std::string str();
    const std::string& name() const { return name_; }

  private:
    std::istream& is_;
    std::string name_;
};

std::vector<char> read_file_bytes(const std::string& path);

}  // namespace ddm
