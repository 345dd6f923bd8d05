#include "crw/rng.hpp"

namespace crw {

static_assert(derive_seed(7, 1, 0) != derive_seed(7, 1, 1));
static_assert(derive_seed(7, 1, 0) != derive_seed(7, 2, 0));
static_assert(stream_key("density") != stream_key("voter"));

}  // namespace crw
