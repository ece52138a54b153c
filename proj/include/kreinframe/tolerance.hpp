#ifndef KREINFRAME_TOLERANCE_HPP
#define KREINFRAME_TOLERANCE_HPP

namespace kreinframe {

/// Numerical thresholds shared by every operation.
///
/// `sym`  - symmetry / involution check on J.
/// `num`  - generic identity residuals (adjoints, containment, projections).
/// `def`  - definiteness margin on Gram eigenvalues; G has spectrum in [-1, 1].
/// `rank` - relative rank cut, applied as rank * sigma_max.
struct Tolerances {
  double sym = 1e-10;
  double num = 1e-9;
  double def = 1e-10;
  double rank = 1e-10;
};

}  // namespace kreinframe

#endif  // KREINFRAME_TOLERANCE_HPP
