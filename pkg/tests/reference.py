"""Published reference values used as test oracles."""

from fractions import Fraction as F

# (geometry, color) -> {ell: (I, R_bar, E_bar, alpha)}
_ROW_11 = (11, F(295, 99), F(-35, 99), F(-35, 9))
_ROW_9 = (9, F(233, 81), F(-37, 81), F(-37, 9))
_ELL1 = (1, F(5, 3), F(5, 3), F(10, 3))

COEFFS = {
    ("488", "red"): {1: _ELL1, 2: _ROW_11, 3: (72, F(3995, 972), F(35, 972), F(140, 81))},
    ("488", "blue"): {1: _ELL1, 2: _ROW_9, 3: (102, F(5749, 1377), F(95, 2754), F(190, 81))},
    ("488", "green"): {1: _ELL1, 2: _ROW_9, 3: (102, F(5749, 1377), F(95, 2754), F(190, 81))},
    ("666", "red"): {1: _ELL1, 2: _ROW_11, 3: (122, F(14161, 3294), F(29, 1647), F(116, 81))},
    ("666", "blue"): {1: _ELL1, 2: _ROW_11, 3: (122, F(14161, 3294), F(29, 1647), F(116, 81))},
    ("666", "green"): {1: _ELL1, 2: _ROW_11, 3: (122, F(14161, 3294), F(29, 1647), F(116, 81))},
    ("4612", "red"): {1: _ELL1, 2: _ROW_11, 3: (64, F(7057, 1728), F(1, 27), F(128, 81))},
    ("4612", "blue"): {1: _ELL1, 2: _ROW_9, 3: (91, F(10214, 2457), F(89, 2457), F(178, 81))},
    ("4612", "green"): {1: _ELL1, 2: _ROW_9, 3: (102, F(5749, 1377), F(95, 2754), F(190, 81))},
}

# (r_c, analytic p_c, numeric p_c)
THRESHOLDS = {
    ("488", "red"): (0.5, 0.1877, 0.2028),
    ("488", "blue"): (0.7071, 0.3093, 0.292),
    ("488", "green"): (0.7071, 0.3093, 0.292),
    ("666", "red"): (0.6527, 0.2752, 0.290),
    ("666", "blue"): (0.6527, 0.2752, 0.290),
    ("666", "green"): (0.6527, 0.2752, 0.290),
    ("4612", "red"): (0.4756, 0.1764, 0.165),
    ("4612", "blue"): (0.8079, 0.3925, 0.390),
    ("4612", "green"): (0.5893, 0.2364, 0.2012),
}

# p_f targets and allowed deviation
FUNDAMENTAL = {
    ("488", None): (0.46, 0.03),
    ("666", None): (0.33, 0.03),
    ("4612", "red"): (0.198, 0.02),
}

# 6.6.6 two-loss energies times 18: the extreme bin holds one instance, the weakest bin four
HEX_PAIR_EXTREME = (-22, 1)
HEX_PAIR_WEAKEST = (-2, 4)
