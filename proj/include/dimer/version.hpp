#pragma once

namespace dimer {
inline constexpr const char* kVersion = "0.1.0";
}
