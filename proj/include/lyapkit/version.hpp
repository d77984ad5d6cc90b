#pragma once

namespace lyapkit {

inline constexpr const char* tool_version = "0.1.0";

}
