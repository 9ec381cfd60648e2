#pragma once

#include <string_view>

namespace deepg2p {

inline constexpr std::string_view kVersion = "0.1.0";

} // namespace deepg2p
