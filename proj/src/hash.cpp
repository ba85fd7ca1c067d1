#include "drag/hash.hpp"

#include <cstdio>

namespace drag {

std::string to_hex64(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf);
}

uint64_t stable_seed(uint64_t global_seed, const std::string& diagram_id,
                     const std::string& variant_name) {
  std::string key = std::to_string(global_seed) + "|" + diagram_id + "|" + variant_name;
  return fnv1a64(key);
}

}  // namespace drag
