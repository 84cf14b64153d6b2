"""Diagonal-norm SBP second-derivative coefficients.

Orders 2, 4 and 6 are the classical narrow-stencil operators with
norm weights, one-sided boundary derivative rows and boundary closures of the
unscaled second derivative ``h**2 * D``.  Values are exact rationals.
"""

from fractions import Fraction as Fr

#: Borrowing constants alpha_2p for orders 2..10.
BORROWING = {
    2: 0.4,
    4: 0.2508560249,
    6: 0.1878715026,
    8: 0.0015782259,
    10: 0.0351202265,
}

#: Number of boundary rows with O(h^p) truncation error.
CLOSURE_WIDTH = {2: 1, 4: 4, 6: 6, 8: 8, 10: 11}

# Central second-derivative stencils, offsets -p..p.
INTERIOR = {
    2: (Fr(1), Fr(-2), Fr(1)),
    4: (Fr(-1, 12), Fr(4, 3), Fr(-5, 2), Fr(4, 3), Fr(-1, 12)),
    6: (Fr(1, 90), Fr(-3, 20), Fr(3, 2), Fr(-49, 18), Fr(3, 2), Fr(-3, 20), Fr(1, 90)),
}

NORM = {
    2: (Fr(1, 2),),
    4: (Fr(17, 48), Fr(59, 48), Fr(43, 48), Fr(49, 48)),
    6: (
        Fr(13649, 43200),
        Fr(12013, 8640),
        Fr(2711, 4320),
        Fr(5359, 4320),
        Fr(7877, 8640),
        Fr(43801, 43200),
    ),
}

# First row of S (left boundary derivative, accuracy p+1).
BOUNDARY_DERIVATIVE = {
    2: (Fr(-3, 2), Fr(2), Fr(-1, 2)),
    4: (Fr(-11, 6), Fr(3), Fr(-3, 2), Fr(1, 3)),
    6: (Fr(-25, 12), Fr(4), Fr(-3), Fr(4, 3), Fr(-1, 4)),
}

CLOSURE = {
    2: ((Fr(1), Fr(-2), Fr(1)),),
    4: (
        (Fr(2), Fr(-5), Fr(4), Fr(-1)),
        (Fr(1), Fr(-2), Fr(1)),
        (Fr(-4, 43), Fr(59, 43), Fr(-110, 43), Fr(59, 43), Fr(-4, 43)),
        (Fr(-1, 49), Fr(0), Fr(59, 49), Fr(-118, 49), Fr(64, 49), Fr(-4, 49)),
    ),
    6: (
        (
            Fr(114170, 40947),
            Fr(-438107, 54596),
            Fr(336409, 40947),
            Fr(-276997, 81894),
            Fr(3747, 13649),
            Fr(21035, 163788),
        ),
        (
            Fr(6173, 5860),
            Fr(-2066, 879),
            Fr(3283, 1758),
            Fr(-303, 293),
            Fr(2111, 3516),
            Fr(-601, 4395),
        ),
        (
            Fr(-52391, 81330),
            Fr(134603, 32532),
            Fr(-21982, 2711),
            Fr(112915, 16266),
            Fr(-46969, 16266),
            Fr(30409, 54220),
        ),
        (
            Fr(68603, 321540),
            Fr(-12423, 10718),
            Fr(112915, 32154),
            Fr(-75934, 16077),
            Fr(53369, 21436),
            Fr(-54899, 160770),
            Fr(48, 5359),
        ),
        (
            Fr(-7053, 39385),
            Fr(86551, 94524),
            Fr(-46969, 23631),
            Fr(53369, 15754),
            Fr(-87904, 23631),
            Fr(820271, 472620),
            Fr(-1296, 7877),
            Fr(96, 7877),
        ),
        (
            Fr(21035, 525612),
            Fr(-24641, 131403),
            Fr(30409, 87602),
            Fr(-54899, 131403),
            Fr(820271, 525612),
            Fr(-117600, 43801),
            Fr(64800, 43801),
            Fr(-6480, 43801),
            Fr(480, 43801),
        ),
    ),
}
