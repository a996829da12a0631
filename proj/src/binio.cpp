#include "corrnet/binio.hpp"

#include <bit>
#include <cstring>

namespace corrnet::io {

BinWriter::BinWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary), path_(path.string()) {
    if (!out_) throw io_error("cannot open for writing: " + path_);
}

void BinWriter::magic(const char tag[4]) { out_.write(tag, 4); }

void BinWriter::u32(std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out_.write(b, 4);
}

void BinWriter::u64(std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffull);
    out_.write(b, 8);
}

void BinWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinWriter::f64_array(const double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        out_.write(reinterpret_cast<const char*>(data),
                   static_cast<std::streamsize>(count * sizeof(double)));
    } else {
        for (std::size_t i = 0; i < count; ++i) f64(data[i]);
    }
}

void BinWriter::close() {
    out_.flush();
    if (!out_) throw io_error("write failure: " + path_);
    out_.close();
}

BinReader::BinReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) throw io_error("cannot open for reading: " + path_);
}

void BinReader::need(void* dst, std::size_t bytes) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in_.gcount()) != bytes)
        throw truncated_file_error("truncation: " + path_ + " ends mid-record");
}

void BinReader::expect_magic(const char tag[4], const std::string& kind) {
    char got[4] = {0, 0, 0, 0};
    in_.read(got, 4);
    if (in_.gcount() != 4 || std::memcmp(got, tag, 4) != 0)
        throw bad_magic_error("not a " + kind + " file: " + path_);
}

void BinReader::expect_version(std::uint32_t version, const std::string& kind) {
    const std::uint32_t got = u32();
    if (got != version)
        throw bad_version_error(kind + " version mismatch in " + path_ + ": have " +
                                std::to_string(got) + ", expected " +
                                std::to_string(version));
}

std::uint32_t BinReader::u32() {
    unsigned char b[4];
    need(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::uint64_t BinReader::u64() {
    unsigned char b[8];
    need(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

double BinReader::f64() { return std::bit_cast<double>(u64()); }

void BinReader::f64_array(double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        need(data, count * sizeof(double));
    } else {
        for (std::size_t i = 0; i < count; ++i) data[i] = f64();
    }
}

}  // namespace corrnet::io
