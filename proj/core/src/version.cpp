#include "skipmon/version.hpp"

#ifndef SKIPMON_VERSION
#define SKIPMON_VERSION "unknown"
#endif
#ifndef SKIPMON_GIT_HASH
#define SKIPMON_GIT_HASH "unknown"
#endif

namespace skipmon {

const char* version() noexcept { return SKIPMON_VERSION; }
const char* git_hash() noexcept { return SKIPMON_GIT_HASH; }

}  // namespace skipmon
