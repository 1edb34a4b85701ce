#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace geoclust {

// FNV-1a 64-bit digests identify input files and the manifest itself.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);
std::string fnv1a64_file(const std::string& path);  // throws ValidationError

// ISO-8601 UTC timestamp. Honors SOURCE_DATE_EPOCH (seconds since epoch) so
// reruns can be made byte-identical; falls back to the current time.
std::string timestamp_utc();

// Provenance record for one CLI run. Every artifact of the run embeds
// digest(); identical manifests imply identical outputs. The digest covers
// everything except `created` (and itself), so rerunning the same inputs at a
// different time yields the same digest.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  nlohmann::ordered_json filters = nlohmann::ordered_json::object();
  std::string created;

  void add_input(const std::string& name, const std::string& path);

  std::string digest() const;
  nlohmann::ordered_json to_json() const;  // includes created + manifest_digest
  void write(const std::string& path) const;
};

}  // namespace geoclust
