#ifndef GOMKIT_DATASET_HPP
#define GOMKIT_DATASET_HPP

#include <map>
#include <string>

#include "gomkit/errors.hpp"

namespace gomkit {

/// Where a benchmark dataset lives and how its files map to gesture
/// classes. The checksum is recorded on the first verified fetch when
/// the manifest ships without one.
struct DatasetManifest {
    std::string name;                         // TVA, TVP, APA, ERGD, SLW, GLB, MSC
    std::string url;                          // resolved archive or file URL
    std::string sha256;                       // hex digest; empty = record on first fetch
    bool archive = true;                      // zip to extract vs single file
    std::map<std::string, std::string> files; // relative path -> gesture class

    static DatasetManifest load(const std::string& path);
    void save(const std::string& path) const;
};

/// Hex SHA-256 of a file's contents.
std::string sha256_file(const std::string& path);

/// Downloads, verifies, and (for archives) extracts the dataset into
/// <cache_dir>/<name>/. Idempotent: a verified cache entry is returned
/// without touching the network; a corrupted one is purged and reported
/// as ChecksumError. Returns the root of the local file tree.
std::string fetch(const DatasetManifest& manifest, const std::string& cache_dir);

/// True when a verified cache entry already exists (no network needed).
bool fetch_cached(const DatasetManifest& manifest, const std::string& cache_dir);

} // namespace gomkit

#endif
