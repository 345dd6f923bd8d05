#pragma once

namespace crw {
inline constexpr const char* kVersion = "0.1.0";
}
