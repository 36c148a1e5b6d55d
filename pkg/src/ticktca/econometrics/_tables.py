"""Frozen quantile tables for unit-root p-values.

Generated by tools/make_unitroot_tables.py; do not edit by hand.
"""

PROBS = [0.001, 0.005, 0.01, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.975, 0.99, 0.995, 0.999]

# Dickey-Fuller t quantiles: per trend, one (b0, b1, b2) row per
# probability level; quantile(T) = b0 + b1 / T + b2 / T**2.
DF_SURFACE = {
    'n': [
        (-3.27942, -7.2305, 11.901),
        (-2.79218, -3.4382, -6.358),
        (-2.56433, -2.4546, 1.661),
        (-2.22675, -0.8122, -9.505),
        (-1.94010, -0.0307, -12.804),
        (-1.75718, 0.2877, -12.231),
        (-1.61520, 0.2462, -6.016),
        (-1.49867, 0.2563, -2.428),
        (-1.40116, 0.5227, -4.130),
        (-1.23373, 0.7298, -6.961),
        (-1.09244, 0.9849, -10.731),
        (-0.96461, 0.9424, -9.756),
        (-0.84561, 0.8786, -8.315),
        (-0.73158, 0.8509, -7.704),
        (-0.61984, 1.0868, -11.282),
        (-0.50237, 1.2546, -14.349),
        (-0.37579, 1.1479, -10.658),
        (-0.24156, 0.9872, -6.887),
        (-0.09864, 0.9966, -7.646),
        (0.05276, 1.1321, -9.465),
        (0.21774, 1.1053, -8.282),
        (0.40096, 1.0953, -4.164),
        (0.61497, 1.2617, -7.566),
        (0.88376, 1.5258, -11.518),
        (1.28175, 1.5182, 0.285),
        (1.62595, 1.4463, 14.192),
        (2.02169, 3.2117, -9.165),
        (2.28375, 4.3307, -10.550),
        (2.82601, 7.9223, -54.466),
    ],
    'c': [
        (-4.06379, -19.7102, 106.081),
        (-3.63890, -9.6055, 5.595),
        (-3.42535, -7.5408, -1.383),
        (-3.12277, -4.4841, -8.082),
        (-2.86214, -2.8190, -6.530),
        (-2.69611, -1.5281, -20.198),
        (-2.56846, -1.0498, -16.362),
        (-2.46372, -0.7175, -12.492),
        (-2.37302, -0.3948, -11.965),
        (-2.21846, -0.0065, -9.161),
        (-2.08826, 0.2654, -8.797),
        (-1.97139, 0.3789, -5.114),
        (-1.86397, 0.5022, -3.691),
        (-1.76328, 0.7234, -5.102),
        (-1.66458, 0.7931, -2.409),
        (-1.56741, 0.9084, -2.391),
        (-1.46897, 0.9128, 0.205),
        (-1.36889, 0.9912, 1.203),
        (-1.26229, 1.0879, 0.802),
        (-1.14676, 1.3173, -3.098),
        (-1.01602, 1.3822, -2.841),
        (-0.86502, 1.4927, -1.256),
        (-0.68116, 1.7076, -0.764),
        (-0.44262, 2.1277, -6.917),
        (-0.07941, 1.6877, 10.951),
        (0.23766, 1.8104, 10.996),
        (0.60009, 2.9465, -6.642),
        (0.85300, 2.7163, 11.022),
        (1.36945, 6.4876, -52.195),
    ],
    'ct': [
        (-4.59995, -12.1079, -210.983),
        (-4.16119, -11.7719, -33.950),
        (-3.95575, -8.6470, -48.062),
        (-3.65608, -7.0521, -4.779),
        (-3.40908, -4.3210, -14.572),
        (-3.24970, -3.0883, -12.356),
        (-3.12750, -2.1975, -14.073),
        (-3.02640, -1.6160, -13.571),
        (-2.93920, -1.4112, -5.815),
        (-2.79336, -0.6824, -6.178),
        (-2.67023, -0.0228, -8.879),
        (-2.55957, 0.3392, -8.606),
        (-2.45924, 0.6977, -9.673),
        (-2.36347, 0.9250, -9.875),
        (-2.27230, 1.1437, -9.583),
        (-2.18147, 1.2000, -6.585),
        (-2.09044, 1.0869, -0.434),
        (-1.99999, 1.2240, 0.062),
        (-1.90691, 1.4280, -2.122),
        (-1.80897, 1.5056, -0.467),
        (-1.70196, 1.4953, 4.009),
        (-1.58160, 1.7111, 3.390),
        (-1.43751, 1.8486, 6.787),
        (-1.24537, 2.1539, 9.482),
        (-0.93899, 2.3456, 23.579),
        (-0.65776, 2.5612, 23.267),
        (-0.32538, 3.3962, 13.552),
        (-0.10009, 4.6769, -12.656),
        (0.39055, 5.3598, -18.161),
    ],
}

# KPSS statistic quantiles (long-sample proxy for the asymptotic law).
KPSS_QUANTILES = {
    'c': [0.01715, 0.02182, 0.02485, 0.03035, 0.03657, 0.04142, 0.04595, 0.05013, 0.05418, 0.06203, 0.07007, 0.07842, 0.08735, 0.09699, 0.10739, 0.11898, 0.13220, 0.14704, 0.16407, 0.18418, 0.20893, 0.24026, 0.28281, 0.34540, 0.45959, 0.57765, 0.73964, 0.86595, 1.15344],
    'ct': [0.01279, 0.01563, 0.01729, 0.02034, 0.02348, 0.02585, 0.02790, 0.02978, 0.03153, 0.03493, 0.03812, 0.04138, 0.04465, 0.04806, 0.05174, 0.05561, 0.05981, 0.06441, 0.06971, 0.07571, 0.08277, 0.09146, 0.10276, 0.11896, 0.14776, 0.17742, 0.21783, 0.25133, 0.32833],
}
