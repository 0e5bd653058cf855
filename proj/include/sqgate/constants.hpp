#pragma once

namespace sqgate {

// Physical constants (CODATA), fixed here so outputs are bit-reproducible.
inline constexpr double kFluxQuantum = 2.067833848e-15;  // Phi_0 = h/2e, Wb
inline constexpr double kHbar = 1.054571817e-34;         // J s
inline constexpr double kPi = 3.14159265358979323846;

}  // namespace sqgate
