#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "gomkit/dataset.hpp"

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <filesystem>
#include <fstream>

#include "gomkit/ziparchive.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gomkit {

DatasetManifest DatasetManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("manifest " + path + ": " + e.what());
    }
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.url = j.at("url").get<std::string>();
    m.sha256 = j.value("sha256", std::string());
    m.archive = j.value("archive", true);
    if (j.contains("files"))
        m.files = j.at("files").get<std::map<std::string, std::string>>();
    return m;
}

void DatasetManifest::save(const std::string& path) const {
    json j;
    j["name"] = name;
    j["url"] = url;
    j["sha256"] = sha256;
    j["archive"] = archive;
    j["files"] = files;
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open for hashing: " + path);

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw ArtifactError("sha256 init failed");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<size_t>(got));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

namespace {

struct CachePaths {
    fs::path root;     // <cache>/<name>
    fs::path payload;  // downloaded archive or file
    fs::path checksum; // recorded digest
    fs::path tree;     // extracted tree (archives) or payload directory
};

CachePaths cache_paths(const DatasetManifest& m, const std::string& cache_dir) {
    CachePaths p;
    p.root = fs::path(cache_dir) / m.name;
    p.payload = p.root / (m.archive ? "payload.zip" : "payload.bin");
    p.checksum = p.root / "payload.sha256";
    p.tree = m.archive ? p.root / "tree" : p.root;
    return p;
}

void purge(const CachePaths& p) {
    std::error_code ec;
    fs::remove(p.payload, ec);
    fs::remove(p.checksum, ec);
    fs::remove_all(p.tree, ec);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    return s;
}

void download(const std::string& url, const fs::path& dest) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw NetworkError("malformed URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(base);
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(300);

    std::ofstream out(dest, std::ios::binary);
    if (!out) throw ArtifactError("cannot write download target: " + dest.string());

    auto res = client.Get(path, [&](const char* data, size_t len) {
        out.write(data, static_cast<std::streamsize>(len));
        return static_cast<bool>(out);
    });
    out.close();
    if (!res) {
        std::error_code ec;
        fs::remove(dest, ec);
        throw NetworkError("download failed for " + url + ": " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        std::error_code ec;
        fs::remove(dest, ec);
        throw NetworkError("download of " + url + " returned HTTP " +
                           std::to_string(res->status));
    }
}

} // namespace

bool fetch_cached(const DatasetManifest& manifest, const std::string& cache_dir) {
    const CachePaths p = cache_paths(manifest, cache_dir);
    return fs::exists(p.payload) && fs::exists(p.checksum) &&
           (!manifest.archive || fs::exists(p.tree));
}

std::string fetch(const DatasetManifest& manifest, const std::string& cache_dir) {
    const CachePaths p = cache_paths(manifest, cache_dir);
    fs::create_directories(p.root);

    if (fs::exists(p.payload) && fs::exists(p.checksum)) {
        const std::string recorded = read_text(p.checksum);
        const std::string actual = sha256_file(p.payload.string());
        if (recorded != actual) {
            purge(p);
            throw ChecksumError("cache entry for " + manifest.name +
                                " is corrupted (purged): expected " + recorded + ", got " +
                                actual);
        }
        if (!manifest.sha256.empty() && manifest.sha256 != actual) {
            purge(p);
            throw ChecksumError("cache entry for " + manifest.name +
                                " does not match the manifest digest (purged)");
        }
        if (!manifest.archive || fs::exists(p.tree)) return p.tree.string();
        zip_extract(p.payload.string(), p.tree.string());
        return p.tree.string();
    }

    purge(p); // drop any half-written state before downloading
    const fs::path tmp = p.root / "payload.part";
    download(manifest.url, tmp);
    const std::string actual = sha256_file(tmp.string());
    if (!manifest.sha256.empty() && manifest.sha256 != actual) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw ChecksumError("download of " + manifest.name + " has digest " + actual +
                            ", manifest expects " + manifest.sha256);
    }
    fs::rename(tmp, p.payload);
    {
        std::ofstream out(p.checksum);
        out << actual << "\n";
    }
    if (manifest.archive) zip_extract(p.payload.string(), p.tree.string());
    return p.tree.string();
}

} // namespace gomkit
