#pragma once

namespace ehrhard {
inline constexpr const char* kVersion = "0.3.0";
}
