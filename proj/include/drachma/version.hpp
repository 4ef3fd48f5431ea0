#pragma once

namespace drachma {

inline constexpr const char* kVersion = "0.1.0";

} // namespace drachma
