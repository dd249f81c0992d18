#pragma once

namespace torsion {

/// Richardson extrapolation of a quantity computed at step h (coarse) and
/// h/2 (fine), assuming the leading error term is O(h^order).
inline double richardson(double coarse, double fine, double order = 2.0) {
    double factor = 1.0;
    for (int i = 0; i < static_cast<int>(order); ++i) factor *= 2.0;
    return (factor * fine - coarse) / (factor - 1.0);
}

}  // namespace torsion
