#include "fairhub/workflows/zip.hpp"

#include "fairhub/error.hpp"
#include "fairhub/pkgstore/package.hpp"

#include <zlib.h>

#include <set>

namespace fairhub::workflows {
namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;

[[noreturn]] void corrupt(const std::string& what) {
    throw Error(Errc::NotAZip, "not a readable zip archive: " + what);
}

struct Cursor {
    std::string_view data;

    void need(std::size_t at, std::size_t n) const {
        if (at > data.size() || n > data.size() - at) corrupt("record extends past the end");
    }
    std::uint16_t u16(std::size_t at) const {
        need(at, 2);
        return static_cast<std::uint16_t>(static_cast<unsigned char>(data[at]) |
                                          static_cast<unsigned char>(data[at + 1]) << 8);
    }
    std::uint32_t u32(std::size_t at) const {
        need(at, 4);
        return static_cast<std::uint32_t>(u16(at)) | static_cast<std::uint32_t>(u16(at + 2)) << 16;
    }
};

std::string inflate_raw(std::string_view in, std::uint32_t expected) {
    std::string out(expected, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(Errc::Internal, "inflateInit2 failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    if (rc == Z_BUF_ERROR && zs.avail_out == 0) {
        // more output than declared
        unsigned char probe;
        zs.next_out = &probe;
        zs.avail_out = 1;
        rc = inflate(&zs, Z_FINISH);
        inflateEnd(&zs);
        corrupt(rc == Z_STREAM_END || zs.avail_out == 0 ? "entry larger than declared" : "bad deflate data");
    }
    const auto produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) corrupt("bad deflate data");
    if (produced != expected) corrupt("entry size differs from the directory");
    return out;
}

} // namespace

bool looks_like_zip(std::string_view bytes) noexcept {
    if (bytes.size() < 4) return false;
    const Cursor c{bytes};
    const auto sig = c.u32(0);
    return sig == kLocalSig || sig == kEndSig;
}

std::vector<ZipEntry> read_zip(std::string_view archive, const ZipLimits& limits) {
    const Cursor c{archive};
    if (archive.size() < 22) corrupt("too short");
    // end of central directory: scan back over a possible comment
    std::size_t eocd = std::string_view::npos;
    const std::size_t lowest = archive.size() >= 22 + 0xFFFF ? archive.size() - 22 - 0xFFFF : 0;
    for (std::size_t at = archive.size() - 22 + 1; at-- > lowest;) {
        if (c.u32(at) == kEndSig && at + 22 + c.u16(at + 20) == archive.size()) {
            eocd = at;
            break;
        }
    }
    if (eocd == std::string_view::npos) corrupt("no end of central directory record");
    if (c.u16(eocd + 4) != 0 || c.u16(eocd + 6) != 0) corrupt("multi-disk archives are not supported");
    const std::uint16_t count = c.u16(eocd + 10);
    const std::uint32_t cd_size = c.u32(eocd + 12);
    const std::uint32_t cd_offset = c.u32(eocd + 16);
    if (count == 0xFFFF || cd_offset == 0xFFFFFFFF) corrupt("zip64 archives are not supported");
    c.need(cd_offset, cd_size);
    if (static_cast<std::uint64_t>(cd_offset) + cd_size > eocd) corrupt("central directory overlaps its end record");

    std::vector<ZipEntry> out;
    std::set<std::string> seen;
    std::uint64_t total = 0;
    std::size_t at = cd_offset;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (c.u32(at) != kCentralSig) corrupt("bad central directory entry");
        const std::uint16_t flags = c.u16(at + 8);
        const std::uint16_t method = c.u16(at + 10);
        const std::uint32_t crc = c.u32(at + 16);
        const std::uint32_t csize = c.u32(at + 20);
        const std::uint32_t usize = c.u32(at + 24);
        const std::uint16_t nlen = c.u16(at + 28);
        const std::uint16_t elen = c.u16(at + 30);
        const std::uint16_t klen = c.u16(at + 32);
        const std::uint32_t local = c.u32(at + 42);
        c.need(at + 46, static_cast<std::size_t>(nlen) + elen + klen);
        std::string name(archive.substr(at + 46, nlen));
        at += 46 + static_cast<std::size_t>(nlen) + elen + klen;

        if (flags & 0x1) corrupt("encrypted entries are not supported");
        if (csize == 0xFFFFFFFF || usize == 0xFFFFFFFF || local == 0xFFFFFFFF) {
            corrupt("zip64 entries are not supported");
        }
        if (!name.empty() && name.back() == '/') continue;
        if (!pkgstore::valid_file_name(name)) {
            throw Error(Errc::PathViolation, "zip entry name '" + name + "' is not a safe relative path",
                        {{"entry", name}});
        }
        if (!seen.insert(name).second) {
            throw Error(Errc::PathViolation, "zip entry '" + name + "' appears twice", {{"entry", name}});
        }
        total += usize;
        if (total > limits.max_total_bytes) {
            throw Error(Errc::ValidationError, "archive exceeds the size limit", {{"fields", {"zip"}}});
        }

        if (c.u32(local) != kLocalSig) corrupt("bad local header for " + name);
        const std::size_t data_at = local + 30 + static_cast<std::size_t>(c.u16(local + 26)) + c.u16(local + 28);
        c.need(data_at, csize);
        const auto raw = archive.substr(data_at, csize);
        std::string bytes;
        if (method == 0) {
            if (csize != usize) corrupt("stored entry size mismatch for " + name);
            bytes = std::string(raw);
        } else if (method == 8) {
            // deflate cannot expand beyond ~1032:1
            if (usize > static_cast<std::uint64_t>(csize) * 1032 + 1024) corrupt("implausible size for " + name);
            bytes = inflate_raw(raw, usize);
        } else {
            corrupt("compression method " + std::to_string(method) + " is not supported");
        }
        const auto actual = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
        if (actual != crc) corrupt("CRC mismatch for " + name);
        out.push_back({std::move(name), std::move(bytes)});
    }
    return out;
}

} // namespace fairhub::workflows
