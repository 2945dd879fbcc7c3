#pragma once

#include <cstdint>
#include <string>

namespace eit {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file(const std::string& path);

}  // namespace eit
