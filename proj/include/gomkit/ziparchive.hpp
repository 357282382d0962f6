#ifndef GOMKIT_ZIPARCHIVE_HPP
#define GOMKIT_ZIPARCHIVE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gomkit/errors.hpp"

namespace gomkit {

struct ZipEntry {
    std::string name;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    std::uint16_t method = 0; // 0 = stored, 8 = deflate
    std::uint64_t header_offset = 0;
    bool is_directory() const { return !name.empty() && name.back() == '/'; }
};

/// Central-directory listing. Handles ZIP64 archives.
std::vector<ZipEntry> zip_list(const std::string& archive_path);

/// Extracts every entry under dest_dir, creating directories as needed.
/// Entry names with absolute paths or ".." components are rejected.
void zip_extract(const std::string& archive_path, const std::string& dest_dir);

} // namespace gomkit

#endif
