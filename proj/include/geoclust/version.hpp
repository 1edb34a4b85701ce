#pragma once

namespace geoclust {

// Engine version, echoed in run manifests and reports.
inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace geoclust
