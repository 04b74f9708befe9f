#pragma once

// Golden local-expansion coefficients for the trig/hyp/trig/hyp space at
// (lambda, mu) = (5, 1): gamma(i, k, r) at level 0 (5x5 blocks per interval)
// and after one dimension-diminishing step (4x4 blocks). Values carry five
// significant digits.

namespace golden {

// [k][i][r]
inline constexpr double kGamma0[4][5][5] = {
    {{1, 3.3817, 8.9847, 2.6979, 0.62437},
     {0, 1, 4.8671, 2.0399, 0.59032},
     {0, 0, 1, 0.84793, 0.37871},
     {0, 0, 0, 0.0035679, 0.0036312},
     {0, 0, 0, 0, 2.8565e-06}},
    {{0.62437, 0.46973, 0.20328, 0.24318, 0.16292},
     {0.59032, 0.95505, 0.41134, 0.60222, 0.48348},
     {0.37871, 1.0734, 1.6102, 3.4078, 3.1382},
     {0.0036312, 0.014855, 0.040202, 0.33095, 0.41968},
     {2.8565e-06, 1.4492e-05, 5.2756e-05, 0.00069584, 0.0069185}},
    {{0.16292, 0.024924, 0.0078407, 0.0061688, 0.0037487},
     {0.48348, 0.19339, 0.094695, 0.16522, 0.17542},
     {3.1382, 1.7563, 0.65982, 1.7289, 2.7985},
     {0.41968, 0.35967, 0.18827, 0.37974, 0.7234},
     {0.0069185, 0.010689, 0.012989, 0.040777, 0.26258}},
    {{0.0037487, 0, 0, 0, 0},
     {0.17542, 0.12345, 0, 0, 0},
     {2.7985, 2.8763, 1.1487, 0, 0},
     {0.7234, 0.81068, 0.46275, 1, 0},
     {0.26258, 0.39133, 0.32664, 0.75473, 1}}};

// [k][i][r]
inline constexpr double kGamma1[4][4][4] = {
    {{0.22822, 0.16682, 0.12226, 0.091739},
     {0, 0.067332, 0.085013, 0.087064},
     {0, 0, 0.00063834, 0.0016372},
     {0, 0, 0, 1.7886e-06}},
    {{0.20404, 0.097174, 0.036704, 0.014351},
     {0.19364, 0.29561, 0.086956, 0.030893},
     {0.0036412, 0.011855, 0.054563, 0.028967},
     {3.9781e-06, 1.7524e-05, 0.00012848, 0.0014911}},
    {{0.028059, 0.0024918, 0.0054787, 0.0017123},
     {0.060401, -0.013313, 0.032559, 0.028646},
     {0.056635, 0.050919, -0.027658, 0.06756},
     {0.0029153, 0.0089212, 0.0040909, 0.048678}},
    {{0.00094577, 0, 0, 0},
     {0.015822, 0.029382, 0, 0},
     {0.037316, 0.12123, 0.5927, 0},
     {0.026886, 0.075403, 0.26157, 0.56989}}};

}  // namespace golden
