#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "memflow/errors.hpp"

namespace memflow {

// All binary payloads are little-endian 64-bit floats.  This library
// supports little-endian hosts only; refusing to build elsewhere is safer
// than silently writing byte-swapped files.
static_assert(std::endian::native == std::endian::little,
              "memflow file formats require a little-endian host");

// Streams bytes to "<path>.tmp" and renames onto `path` at commit(), so a
// crash never leaves a half-written artifact under the final name.
class AtomicFileWriter {
public:
    explicit AtomicFileWriter(const std::filesystem::path& path);
    ~AtomicFileWriter();

    AtomicFileWriter(const AtomicFileWriter&) = delete;
    AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

    void write_bytes(const void* data, size_t size);
    void write_text(const std::string& text);
    void write_doubles(const double* data, size_t count);
    void commit();

private:
    std::filesystem::path final_path_;
    std::filesystem::path tmp_path_;
    std::ofstream out_;
    bool committed_ = false;
};

// Sequential binary reader with line and exact-size primitives.
class FileReader {
public:
    explicit FileReader(const std::filesystem::path& path);

    // Reads up to '\n' (consumed, not returned).  Throws IntegrityError on
    // EOF before any newline.
    std::string read_line();
    // Reads exactly `count` doubles; throws IntegrityError if the file ends
    // early ("truncated payload").
    void read_doubles(double* dst, size_t count);
    // Throws IntegrityError unless the stream is exactly at EOF.
    void expect_eof();

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

// Formats a double so that parsing it back recovers the identical bits.
std::string format_double_exact(double v);

}  // namespace memflow
