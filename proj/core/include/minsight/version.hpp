#pragma once

namespace minsight {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace minsight
