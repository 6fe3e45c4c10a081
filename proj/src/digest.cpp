#include "hotspot/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

#include "hotspot/errors.hpp"

namespace hotspot {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw StoreError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string events_digest(std::span<const EventRecord> events) {
  std::string text;
  text.reserve(events.size() * 80);
  char buf[128];
  for (const auto& e : events) {
    std::snprintf(buf, sizeof(buf), "|%.17g,%.17g,%.17g,", e.lon, e.lat, e.time_of_day);
    text += e.event_id;
    text += buf;
    text += format_date(e.date);
    text += ',';
    text += e.anchor;
    text += '\n';
  }
  return sha256_hex(text);
}

}  // namespace hotspot
