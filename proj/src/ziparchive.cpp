#include "gomkit/ziparchive.hpp"

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

namespace fs = std::filesystem;

namespace gomkit {

namespace {

constexpr std::uint32_t kEocdSig = 0x06054b50;
constexpr std::uint32_t kEocd64LocatorSig = 0x07064b50;
constexpr std::uint32_t kEocd64Sig = 0x06064b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kLocalSig = 0x04034b50;

std::uint16_t rd16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t rd32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint64_t rd64(const unsigned char* p) {
    return static_cast<std::uint64_t>(rd32(p)) | (static_cast<std::uint64_t>(rd32(p + 4)) << 32);
}

struct Directory {
    std::uint64_t offset = 0;
    std::uint64_t entries = 0;
};

void read_exact(std::ifstream& in, std::uint64_t pos, unsigned char* buf, size_t len,
                const std::string& what) {
    in.seekg(static_cast<std::streamoff>(pos));
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(len));
    if (static_cast<size_t>(in.gcount()) != len)
        throw ArtifactError("zip: truncated " + what);
}

Directory locate_directory(std::ifstream& in, std::uint64_t file_size) {
    // the EOCD sits in the last 22..22+65535 bytes
    const std::uint64_t tail = std::min<std::uint64_t>(file_size, 22 + 65535);
    std::vector<unsigned char> buf(static_cast<size_t>(tail));
    read_exact(in, file_size - tail, buf.data(), buf.size(), "end of central directory");

    long eocd = -1;
    for (long i = static_cast<long>(buf.size()) - 22; i >= 0; --i) {
        if (rd32(buf.data() + i) == kEocdSig) {
            eocd = i;
            break;
        }
    }
    if (eocd < 0) throw ArtifactError("zip: no end-of-central-directory record");

    Directory dir;
    dir.entries = rd16(buf.data() + eocd + 10);
    dir.offset = rd32(buf.data() + eocd + 16);

    // ZIP64: marker values defer to the ZIP64 EOCD
    const bool need64 = dir.offset == 0xFFFFFFFFull || dir.entries == 0xFFFF;
    const std::uint64_t eocd_pos = file_size - tail + static_cast<std::uint64_t>(eocd);
    if (need64) {
        if (eocd_pos < 20) throw ArtifactError("zip: missing ZIP64 locator");
        unsigned char loc[20];
        read_exact(in, eocd_pos - 20, loc, sizeof(loc), "ZIP64 locator");
        if (rd32(loc) != kEocd64LocatorSig)
            throw ArtifactError("zip: malformed ZIP64 locator");
        const std::uint64_t eocd64_pos = rd64(loc + 8);
        unsigned char rec[56];
        read_exact(in, eocd64_pos, rec, sizeof(rec), "ZIP64 end of central directory");
        if (rd32(rec) != kEocd64Sig)
            throw ArtifactError("zip: malformed ZIP64 end-of-central-directory");
        dir.entries = rd64(rec + 32);
        dir.offset = rd64(rec + 48);
    }
    return dir;
}

} // namespace

std::vector<ZipEntry> zip_list(const std::string& archive_path) {
    std::ifstream in(archive_path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open archive: " + archive_path);
    in.seekg(0, std::ios::end);
    const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
    if (file_size < 22) throw ArtifactError("zip: file too small: " + archive_path);

    const Directory dir = locate_directory(in, file_size);

    std::vector<ZipEntry> entries;
    std::uint64_t pos = dir.offset;
    for (std::uint64_t i = 0; i < dir.entries; ++i) {
        unsigned char hdr[46];
        read_exact(in, pos, hdr, sizeof(hdr), "central directory entry");
        if (rd32(hdr) != kCentralSig)
            throw ArtifactError("zip: malformed central directory at entry " +
                                std::to_string(i));
        ZipEntry e;
        e.method = rd16(hdr + 10);
        e.compressed_size = rd32(hdr + 20);
        e.uncompressed_size = rd32(hdr + 24);
        const std::uint16_t name_len = rd16(hdr + 28);
        const std::uint16_t extra_len = rd16(hdr + 30);
        const std::uint16_t comment_len = rd16(hdr + 32);
        e.header_offset = rd32(hdr + 42);

        std::vector<unsigned char> name(name_len);
        read_exact(in, pos + 46, name.data(), name.size(), "entry name");
        e.name.assign(name.begin(), name.end());

        if (extra_len > 0) {
            std::vector<unsigned char> extra(extra_len);
            read_exact(in, pos + 46 + name_len, extra.data(), extra.size(), "entry extra");
            size_t off = 0;
            while (off + 4 <= extra.size()) {
                const std::uint16_t id = rd16(extra.data() + off);
                const std::uint16_t len = rd16(extra.data() + off + 2);
                if (id == 0x0001) { // ZIP64 extended information
                    size_t f = off + 4;
                    auto take64 = [&](std::uint64_t& field, std::uint64_t marker) {
                        if (field == marker && f + 8 <= off + 4 + len) {
                            field = rd64(extra.data() + f);
                            f += 8;
                        }
                    };
                    take64(e.uncompressed_size, 0xFFFFFFFFull);
                    take64(e.compressed_size, 0xFFFFFFFFull);
                    take64(e.header_offset, 0xFFFFFFFFull);
                }
                off += 4 + static_cast<size_t>(len);
            }
        }
        entries.push_back(std::move(e));
        pos += 46ull + name_len + extra_len + comment_len;
    }
    return entries;
}

namespace {

void extract_entry(std::ifstream& in, const ZipEntry& e, const fs::path& dest) {
    unsigned char hdr[30];
    read_exact(in, e.header_offset, hdr, sizeof(hdr), "local file header");
    if (rd32(hdr) != kLocalSig)
        throw ArtifactError("zip: malformed local header for " + e.name);
    const std::uint16_t name_len = rd16(hdr + 26);
    const std::uint16_t extra_len = rd16(hdr + 28);
    const std::uint64_t data_pos = e.header_offset + 30ull + name_len + extra_len;
    in.seekg(static_cast<std::streamoff>(data_pos));

    std::ofstream out(dest, std::ios::binary);
    if (!out) throw ArtifactError("cannot write " + dest.string());

    constexpr size_t kChunk = 1 << 16;
    std::vector<unsigned char> inbuf(kChunk), outbuf(kChunk);

    if (e.method == 0) { // stored
        std::uint64_t remaining = e.compressed_size;
        while (remaining > 0) {
            const size_t take = static_cast<size_t>(std::min<std::uint64_t>(remaining, kChunk));
            in.read(reinterpret_cast<char*>(inbuf.data()), static_cast<std::streamsize>(take));
            if (static_cast<size_t>(in.gcount()) != take)
                throw ArtifactError("zip: truncated data for " + e.name);
            out.write(reinterpret_cast<const char*>(inbuf.data()),
                      static_cast<std::streamsize>(take));
            remaining -= take;
        }
    } else if (e.method == 8) { // deflate
        z_stream zs;
        std::memset(&zs, 0, sizeof(zs));
        if (inflateInit2(&zs, -15) != Z_OK) throw ArtifactError("zip: inflateInit failed");
        std::uint64_t remaining = e.compressed_size;
        int status = Z_OK;
        while (status != Z_STREAM_END) {
            if (zs.avail_in == 0) {
                if (remaining == 0)
                    throw ArtifactError("zip: deflate stream for " + e.name +
                                        " ended prematurely");
                const size_t take =
                    static_cast<size_t>(std::min<std::uint64_t>(remaining, kChunk));
                in.read(reinterpret_cast<char*>(inbuf.data()),
                        static_cast<std::streamsize>(take));
                if (static_cast<size_t>(in.gcount()) != take) {
                    inflateEnd(&zs);
                    throw ArtifactError("zip: truncated data for " + e.name);
                }
                remaining -= take;
                zs.next_in = inbuf.data();
                zs.avail_in = static_cast<uInt>(take);
            }
            zs.next_out = outbuf.data();
            zs.avail_out = static_cast<uInt>(outbuf.size());
            status = inflate(&zs, Z_NO_FLUSH);
            if (status != Z_OK && status != Z_STREAM_END) {
                inflateEnd(&zs);
                throw ArtifactError("zip: inflate failed for " + e.name);
            }
            out.write(reinterpret_cast<const char*>(outbuf.data()),
                      static_cast<std::streamsize>(outbuf.size() - zs.avail_out));
        }
        inflateEnd(&zs);
    } else {
        throw ArtifactError("zip: unsupported compression method " + std::to_string(e.method) +
                            " for " + e.name);
    }
}

bool safe_entry_name(const std::string& name) {
    if (name.empty() || name.front() == '/') return false;
    fs::path p(name);
    for (const auto& part : p)
        if (part == "..") return false;
    return true;
}

} // namespace

void zip_extract(const std::string& archive_path, const std::string& dest_dir) {
    const std::vector<ZipEntry> entries = zip_list(archive_path);
    std::ifstream in(archive_path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open archive: " + archive_path);

    const fs::path root(dest_dir);
    fs::create_directories(root);
    for (const auto& e : entries) {
        if (!safe_entry_name(e.name))
            throw ArtifactError("zip: refusing unsafe entry name '" + e.name + "'");
        const fs::path dest = root / e.name;
        if (e.is_directory()) {
            fs::create_directories(dest);
            continue;
        }
        fs::create_directories(dest.parent_path());
        extract_entry(in, e, dest);
    }
}

} // namespace gomkit
