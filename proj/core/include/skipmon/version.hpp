#pragma once

namespace skipmon {

const char* version() noexcept;
/// Short commit hash of the source tree at configure time, or "unknown".
const char* git_hash() noexcept;

}  // namespace skipmon
