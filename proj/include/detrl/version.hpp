#pragma once

namespace detrl {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kRunLogSchemaVersion = 1;
inline constexpr int kSuiteSchemaVersion = 1;

}  // namespace detrl
