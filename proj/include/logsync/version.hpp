#pragma once

namespace logsync {
inline constexpr const char* kVersion = "0.1.0";
}
