#ifndef ZOMBIE_VERSION_HPP
#define ZOMBIE_VERSION_HPP

namespace zombie {

inline constexpr const char* kVersion = "0.1.0";

/// Bumped whenever a CSV column or JSON key changes.
inline constexpr int kOutputSchemaVersion = 1;

} // namespace zombie

#endif // ZOMBIE_VERSION_HPP
