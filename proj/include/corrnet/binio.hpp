#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace corrnet::io {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// wrong magic bytes: the file is not of the requested kind
struct bad_magic_error : io_error {
    using io_error::io_error;
};

// right kind, unsupported format version
struct bad_version_error : io_error {
    using io_error::io_error;
};

// file ends before the declared payload
struct truncated_file_error : io_error {
    using io_error::io_error;
};

// declared shapes disagree with what the caller expects
struct shape_mismatch_error : io_error {
    using io_error::io_error;
};

// All container formats are little-endian regardless of host byte order.
class BinWriter {
public:
    explicit BinWriter(const std::filesystem::path& path);

    void magic(const char tag[4]);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void f64_array(const double* data, std::size_t count);
    void close();

private:
    std::ofstream out_;
    std::string path_;
};

class BinReader {
public:
    explicit BinReader(const std::filesystem::path& path);

    // `kind` names the expected file kind in error messages
    void expect_magic(const char tag[4], const std::string& kind);
    void expect_version(std::uint32_t version, const std::string& kind);
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    void f64_array(double* data, std::size_t count);

private:
    void need(void* dst, std::size_t bytes);

    std::ifstream in_;
    std::string path_;
};

}  // namespace corrnet::io
