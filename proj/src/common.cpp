#include "ddmodem/common.hpp"

#include <fstream>

namespace ddm {

std::string hex16(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

void BinWriter::bytes(const void* p, size_t n) {
    os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!os_) throw IoError("write failed");
}

void BinWriter::str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
}

void BinReader::bytes(void* p, size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(is_.gcount()) != n)
        throw FormatError(name_ + ": truncated or corrupt file");
}

bool BinReader::try_bytes(void* p, size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    size_t got = static_cast<size_t>(is_.gcount());
    if (got == 0) return false;
    if (got != n) throw FormatError(name_ + ": truncated or corrupt file");
    return true;
}

void BinReader::expect_magic(const char (&m)[5]) {
    char buf[4];
    bytes(buf, 4);
    if (buf[0] != m[0] || buf[1] != m[1] || buf[2] != m[2] || buf[3] != m[3])
        throw FormatError(name_ + ": bad magic, expected \"" + m + "\"");
}

std::string BinReader::str() {
    uint32_t n = u32();
    if (n > (1u << 20)) throw FormatError(name_ + ": unreasonable string length");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
}

std::vector<char> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    f.seekg(0, std::ios::end);
    std::vector<char> buf(static_cast<size_t>(f.tellg()));
    f.seekg(0);
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError("cannot read " + path);
    return buf;
}

}  // namespace ddm
