#pragma once

namespace psmnet {

// Verification builds run on 64-bit floats so finite-difference checks have
// headroom; define PSMNET_SCALAR_FLOAT for a faster 32-bit build.
#ifdef PSMNET_SCALAR_FLOAT
using Scalar = float;
#else
using Scalar = double;
#endif

}  // namespace psmnet
