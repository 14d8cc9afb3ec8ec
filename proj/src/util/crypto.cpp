#include "fairhub/util/crypto.hpp"

#include "fairhub/error.hpp"

#include <sodium.h>

#include <stdexcept>

namespace fairhub::crypto {
namespace {

struct SodiumInit {
    SodiumInit() {
        if (sodium_init() < 0) {
            throw std::runtime_error("libsodium initialisation failed");
        }
    }
};

void ensure_init() {
    static const SodiumInit init;
    (void)init;
}

} // namespace

std::string sha256_hex(std::span<const std::byte> data) {
    ensure_init();
    unsigned char digest[crypto_hash_sha256_BYTES];
    crypto_hash_sha256(digest, reinterpret_cast<const unsigned char*>(data.data()), data.size());
    return to_hex(std::string_view(reinterpret_cast<const char*>(digest), sizeof digest));
}

std::string sha256_hex(std::string_view data) {
    return sha256_hex(std::as_bytes(std::span<const char>(data.data(), data.size())));
}

std::string random_bytes(std::size_t n) {
    ensure_init();
    std::string out(n, '\0');
    randombytes_buf(out.data(), n);
    return out;
}

std::string to_hex(std::string_view bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (const char c : bytes) {
        const auto b = static_cast<unsigned char>(c);
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

std::string random_string(std::size_t length, std::string_view alphabet) {
    ensure_init();
    std::string out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        out.push_back(alphabet[randombytes_uniform(static_cast<std::uint32_t>(alphabet.size()))]);
    }
    return out;
}

bool constant_time_equal(std::string_view a, std::string_view b) noexcept {
    ensure_init();
    if (a.size() != b.size()) {
        return false;
    }
    return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

PasswordPolicy PasswordPolicy::minimal() {
    return PasswordPolicy{crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN};
}

std::string hash_password(std::string_view password, const PasswordPolicy& policy) {
    ensure_init();
    char out[crypto_pwhash_STRBYTES];
    if (crypto_pwhash_str_alg(out, password.data(), password.size(), policy.ops_limit,
                              policy.mem_limit_bytes, crypto_pwhash_ALG_ARGON2ID13) != 0) {
        throw Error(Errc::Internal, "password hashing ran out of memory");
    }
    return out;
}

bool verify_password(std::string_view encoded, std::string_view password) noexcept {
    ensure_init();
    const std::string terminated(encoded);
    return crypto_pwhash_str_verify(terminated.c_str(), password.data(), password.size()) == 0;
}

std::string salted_digest(std::string_view secret) {
    const std::string salt = random_bytes(16);
    std::string material = salt;
    material.append(secret);
    return to_hex(salt) + "$" + sha256_hex(material);
}

bool verify_salted_digest(std::string_view stored, std::string_view secret) noexcept {
    const auto sep = stored.find('$');
    if (sep == std::string_view::npos || sep != 32) {
        return false;
    }
    std::string salt(16, '\0');
    std::size_t bin_len = 0;
    if (sodium_hex2bin(reinterpret_cast<unsigned char*>(salt.data()), salt.size(), stored.data(),
                       sep, nullptr, &bin_len, nullptr) != 0 ||
        bin_len != 16) {
        return false;
    }
    std::string material = salt;
    material.append(secret);
    return constant_time_equal(stored.substr(sep + 1), sha256_hex(material));
}

std::string base64_encode(std::string_view bytes) {
    ensure_init();
    const std::size_t len = sodium_base64_encoded_len(bytes.size(), sodium_base64_VARIANT_ORIGINAL);
    std::string out(len, '\0');
    sodium_bin2base64(out.data(), len, reinterpret_cast<const unsigned char*>(bytes.data()),
                      bytes.size(), sodium_base64_VARIANT_ORIGINAL);
    out.resize(len - 1);
    return out;
}

std::string base64_decode(std::string_view text) {
    ensure_init();
    std::string out(text.size(), '\0');
    std::size_t out_len = 0;
    const char* end = nullptr;
    if (sodium_base642bin(reinterpret_cast<unsigned char*>(out.data()), out.size(), text.data(),
                          text.size(), nullptr, &out_len, &end,
                          sodium_base64_VARIANT_ORIGINAL) != 0 ||
        end != text.data() + text.size()) {
        throw Error(Errc::InvalidArgument, "malformed base64 payload");
    }
    out.resize(out_len);
    return out;
}

} // namespace fairhub::crypto
