#include "memflow/io_util.hpp"

#include <cstdio>

namespace memflow {

AtomicFileWriter::AtomicFileWriter(const std::filesystem::path& path)
    : final_path_(path), tmp_path_(path.string() + ".tmp") {
    out_.open(tmp_path_, std::ios::binary | std::ios::trunc);
    if (!out_)
        throw IoError(msgf("cannot open '%s' for writing", tmp_path_.string().c_str()));
}

AtomicFileWriter::~AtomicFileWriter() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_path_, ec);
    }
}

void AtomicFileWriter::write_bytes(const void* data, size_t size) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out_) throw IoError(msgf("write failed on '%s'", tmp_path_.string().c_str()));
}

void AtomicFileWriter::write_text(const std::string& text) {
    write_bytes(text.data(), text.size());
}

void AtomicFileWriter::write_doubles(const double* data, size_t count) {
    write_bytes(data, count * sizeof(double));
}

void AtomicFileWriter::commit() {
    out_.flush();
    if (!out_) throw IoError(msgf("flush failed on '%s'", tmp_path_.string().c_str()));
    out_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_path_, final_path_, ec);
    if (ec)
        throw IoError(msgf("cannot rename '%s' to '%s': %s", tmp_path_.string().c_str(),
                           final_path_.string().c_str(), ec.message().c_str()));
    committed_ = true;
}

FileReader::FileReader(const std::filesystem::path& path) : path_(path) {
    in_.open(path, std::ios::binary);
    if (!in_) throw IoError(msgf("cannot open '%s' for reading", path.string().c_str()));
}

std::string FileReader::read_line() {
    std::string line;
    if (!std::getline(in_, line))
        throw IntegrityError(msgf("'%s': unexpected end of file while reading header",
                                  path_.string().c_str()));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

void FileReader::read_doubles(double* dst, size_t count) {
    in_.read(reinterpret_cast<char*>(dst),
             static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<size_t>(in_.gcount()) != count * sizeof(double))
        throw IntegrityError(msgf("'%s': truncated payload (wanted %zu doubles, got %zu bytes)",
                                  path_.string().c_str(), count,
                                  static_cast<size_t>(in_.gcount())));
}

void FileReader::expect_eof() {
    char probe = 0;
    in_.read(&probe, 1);
    if (in_.gcount() != 0)
        throw IntegrityError(msgf("'%s': trailing bytes after the declared payload",
                                  path_.string().c_str()));
}

std::string format_double_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace memflow
