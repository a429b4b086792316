#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace xclus {

// FIPS 180-4 SHA-256, hex digest. Used for the thesaurus checksum footer and
// dataset fingerprints; implemented locally to avoid a link dependency for one
// function.
std::string sha256_hex(std::string_view data);

}  // namespace xclus
