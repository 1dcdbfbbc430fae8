#pragma once

namespace ehe {
inline constexpr const char* kVersion = "0.1.0";
}
