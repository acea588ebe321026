#pragma once

namespace epigame {
inline constexpr const char* kVersion = "0.1.0";
}
