// Compiled-library build of toml++; every other translation unit sees
// TOML_HEADER_ONLY=0 through the target's compile definitions.
#define TOML_IMPLEMENTATION
#include "toml.hpp"
