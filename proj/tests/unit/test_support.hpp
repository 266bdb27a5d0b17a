#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "hocsp/crl.hpp"
#include "hocsp/crypto.hpp"

namespace hocsp::testing {

/// One RSA-2048 CA key per test process; key generation dominates otherwise.
inline const PrivateKey& ca_key() {
    static const PrivateKey key = PrivateKey::generate_rsa(2048);
    return key;
}

inline const PrivateKey& other_key() {
    static const PrivateKey key = PrivateKey::generate_rsa(2048);
    return key;
}

inline DistinguishedName reference_issuer() {
    return DistinguishedName::parse("C=aa, ST=aa, L=aa, O=aa, OU=aa, CN=rootca");
}

inline Asn1Time reference_time() { return Asn1Time::from_civil(2023, 5, 4, 19, 57, 27); }

inline std::vector<RevokedEntry> reference_entries() {
    std::vector<RevokedEntry> out;
    for (auto hex : {"221A0A99711F9968", "308C707EA89F47A5", "5238F3475665F7C4"}) {
        out.push_back(RevokedEntry{SerialNumber::from_hex(hex), reference_time(), CrlReason::KeyCompromise, {}});
    }
    return out;
}

inline SerialNumber random_serial(std::mt19937_64& rng) {
    // 8 octets with the top bit clear, like the serials in the reference CRL.
    std::uint64_t v = (rng() & 0x7FFFFFFFFFFFFFFFULL) | 0x0100000000000000ULL;
    return SerialNumber::from_u64(v);
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() / ("hocsp-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace hocsp::testing
