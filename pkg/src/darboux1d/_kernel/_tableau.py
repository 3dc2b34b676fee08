"""Dormand-Prince 5(4) tableau with quartic dense-output weights.

Shared by the compiled and the pure-Python kernels so both step identically.
The interpolant is the Shampine free quartic: on a step (x0, x0+h),

    y(x0 + s*h) = y0 + h * sum_j K[j] * sum_m P[j][m] * s**(m+1)

which reproduces y0, y1 and the slopes k1, k7 at the step ends.
"""

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9

A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656

B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84

# error weights (5th-order solution minus embedded 4th-order one, incl. FSAL stage)
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

# dense-output weights, row j = stage, column m = power s**(m+1)
P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
ORDER_EXP = -0.2  # err**(−1/5) step-size exponent

BLOWUP_LIMIT = 1e120
MAX_STEPS_DEFAULT = 2_000_000

# status codes returned by the drivers
OK = 0
BLOWUP = 1
STEP_UNDERFLOW = 2
TOO_MANY_STEPS = 3
