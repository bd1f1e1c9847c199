#pragma once

namespace sbl {
inline constexpr const char* kVersion = "0.1.0";
}
