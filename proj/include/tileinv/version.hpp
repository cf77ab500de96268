#pragma once

namespace tileinv {

inline constexpr char kVersion[] = "0.1.0";

}  // namespace tileinv
