#include "geoclust/manifest.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>

#include "geoclust/errors.hpp"
#include "geoclust/version.hpp"

namespace geoclust {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view data) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path);
  }
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return fnv1a64_hex(content);
}

std::string timestamp_utc() {
  std::time_t t;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const std::string& name, const std::string& path) {
  inputs[name] = {{"path", path}, {"fnv1a64", fnv1a64_file(path)}};
}

namespace {
nlohmann::ordered_json tie_break_rules() {
  return {
      {"merge", "lexicographically smallest (min node id, max node id) within 1e-12 of the "
                "minimum inertia increase"},
      {"weighting", "first grid index within 1e-12 of the optimal criterion value"},
      {"grid_order", "descending lexicographic over the weight vector"},
  };
}

nlohmann::ordered_json core_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["schema"] = "run-manifest/v1";
  j["engine_version"] = kEngineVersion;
  j["command"] = m.command;
  j["inputs"] = m.inputs;
  j["config"] = m.config;
  if (!m.filters.empty()) j["filters"] = m.filters;
  j["tie_breaks"] = tie_break_rules();
  return j;
}
}  // namespace

std::string RunManifest::digest() const {
  return fnv1a64_hex(core_json(*this).dump());
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j = core_json(*this);
  j["created"] = created.empty() ? timestamp_utc() : created;
  j["manifest_digest"] = digest();
  return j;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path);
  }
  out << to_json().dump(2) << "\n";
}

}  // namespace geoclust
