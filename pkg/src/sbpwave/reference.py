"""Tabulated boundary-system matrices at ``s~ = 0`` used as cross-check oracles.

Row and column layouts follow :func:`sbpwave.normal_mode.build_boundary_system`.
Interface matrices take the dimensionless group ``th = tau * h_L`` and the mesh
ratio ``r = h_L / h_R``.
"""

from __future__ import annotations

import numpy as np

S3 = np.sqrt(3.0)

#: tau at which the fourth-order Dirichlet system loses rank.
TAU4_CLOSED_FORM = 2 * (4834 * S3 + 9569) / (177 * (8 * S3 + 37))

COUPLING_NEUMANN = {4: 0.3095, 6: 0.2072}


def c2d(tau):
    return np.array([[-1, -4 + 2 * tau, 2], [-1, 1, 2], [-1, 0.5, 1]], float)


def c4d(tau, raw=False):
    """Fourth-order Dirichlet matrix.

    The tabulated entry (3, 1) reads ``-(37 + 3 sqrt 3)/49``; the value
    consistent with the operator (and with the Neumann and interface
    matrices, which share this row) is ``-(37 + 8 sqrt 3)/49``.
    ``raw=True`` returns the matrix exactly as tabulated.
    """
    c31 = -(37 + (3 if raw else 8) * S3) / 49
    return np.array(
        [
            [-3, 3 - 4 * S3, (-122 + 48 * tau) / 17, 5],
            [-1, -1, 85 / 59, 2],
            [55 / 43, (85 + 12 * S3) / 43, -68 / 43, -59 / 43],
            [-1 / 49, c31, 17 / 49, 0],
        ]
    )


def t4d():
    return np.array([11 / 12, -1 / 12, 5 / 516, 11 / 588])


_C6_COMMON = np.array(
    [
        [np.nan, np.nan, np.nan, np.nan],
        [1.823470407, 2.35039818, -1.867463026, 0.5704778157],
        [-4.136345752, -4.137556867, 8.108447068, -4.615068241],
        [0.8614698016, 1.159078186, -3.511693724, 2.565973129],
        [-0.0951377428, -0.9156510516, 1.987601033, -1.25102831],
        [-0.04002001476, 0.1875223549, -0.3471267779, 0.1996244378],
    ]
)

_C6_PAIR = np.array(
    [
        3.368616929 + 0.02305363188j,
        1.00246526 + 0.04694800264j,
        -6.789853693 - 0.2265966418j,
        4.592688087 + 0.1965568935j,
        -3.188300477 - 0.2835125258j,
        0.3280801113 + 0.1028755037j,
    ]
)


def c6d(tau):
    C = np.zeros((6, 6), complex)
    C[:, :4] = _C6_COMMON
    C[0, :4] = [3.165067038 * tau - 9.382128117, 8.024525606, -8.215717879, 2.979430728]
    C[:, 4] = _C6_PAIR
    C[:, 5] = _C6_PAIR.conj()
    return C


def c4n():
    return np.array(
        [
            [54 / 17, -59 / 17, 5 / 17, (11 - 4 * S3) / 17],
            [-1, 2, -1, -1],
            [4 / 43, -59 / 43, 55 / 43, (85 + 12 * S3) / 43],
            [1 / 49, 0, -1 / 49, -(37 + 8 * S3) / 49],
        ]
    )


def c4n_prime():
    C = np.zeros((4, 4))
    C[:, 2] = [-0.0588, 0, 1.1860, -0.0408]
    return C


def t4n():
    return np.array([43 / 204, -1 / 12, 5 / 516, 11 / 588])


def c6n():
    C = np.zeros((6, 6), complex)
    C[:, :4] = [
        [3.8056512077, -4.6357425452, 1.2794832344, -0.4493918968],
        [-1.0534129693, 2.3503981797, -1.8674630262, 0.5704778157],
        [0.6441780401, -4.1375568671, 8.1084470675, -4.6150682405],
        [-0.2133575916, 1.1590781862, -3.5116937240, 2.5659731293],
        [0.1790783293, -0.9156510516, 1.9876010325, -1.2510283103],
        [-0.0400200148, 0.1875223549, -0.3471267779, 0.1996244378],
    ]
    pair = np.array(
        [
            -0.8104124471 - 0.0403172285j,
            1.0024652602 + 0.0469480026j,
            -6.7898536930 - 0.2265966418j,
            4.5926880872 + 0.1965568935j,
            -3.1883004772 - 0.2835125258j,
            0.3280801113 + 0.1028755037j,
        ]
    )
    C[:, 4] = pair
    C[:, 5] = pair.conj()
    return C


def c6n_prime():
    C = np.zeros((6, 6))
    C[:, 3] = [-0.2598847290, 0.3269055745, -1.7658674536, 1.8336101263, -0.6935339173, 0.0921421124]
    return C


def t6n():
    return np.array([-0.3287481378, 0.2200796359, -0.5608447068, 0.2044006966, -0.1710063053, 0.0514543047])


def c2i(th, r):
    return np.array(
        [
            [-0.5, r / 2, -1 + 2 * th, 0, 1.5 + 1.5 * r - 2 * th, -2 * r],
            [-1, 0, 0, 2, -1, 0],
            [1, 0, -0.25, -1, 0.25, 0],
            [1 / (2 * r), -0.5, 1.5 + 1.5 / r - 2 * th / r, -2 / r, -1 + 2 * th / r, 0],
            [0, -1, -1, 0, 0, 2],
            [0, 1, 0.25, 0, -0.25, -1],
        ]
    )


def c2i_prime(r):
    C = np.zeros((6, 6))
    C[2, 0] = 1
    C[5, 1] = 1 / r
    return C


def t2i(r, raw=True):
    """Interface truncation direction for order 2.

    The tabulated fourth entry ``-2/(3r) - r/3`` equals ``r**2`` times the value
    obtained when the right-side rows are scaled by ``h_R**2`` like the
    matrix; ``raw=False`` returns the consistently scaled vector.
    """
    t3 = -2 / (3 * r) - r / 3
    if not raw:
        t3 /= r**2
    return np.array([2 / 3 + 1 / (3 * r**2), 0, 0, t3, 0, 0])


def c4i(th, r):
    a = (31 - 36 * S3) / 17
    b = 4 * (8 * S3 - 5) / 17
    c = (12 * S3 + 85) / 43
    d = -(8 * S3 + 37) / 49
    return np.array(
        [
            [-23 / 17, a, 28 * r / 17, r * b, (48 * th - 34) / 17, 13 / 17, (44 * r - 48 * th + 44) / 17, -72 * r / 17],
            [-1, -1, 0, 0, 13 / 59, 2, -72 / 59, 0],
            [55 / 43, c, 0, 0, -32 / 43, -59 / 43, 36 / 43, 0],
            [-1 / 49, d, 0, 0, 9 / 49, 0, -8 / 49, 0],
            [
                28 / (17 * r),
                b / r,
                -23 / 17,
                a,
                (44 * r - 48 * th + 44) / (17 * r),
                -72 / (17 * r),
                (48 * th - 34 * r) / (17 * r),
                13 / 17,
            ],
            [0, 0, -1, -1, -72 / 59, 0, 13 / 59, 2],
            [0, 0, 55 / 43, c, 36 / 43, 0, -32 / 43, -59 / 43],
            [0, 0, -1 / 49, d, -8 / 49, 0, 9 / 49, 0],
        ]
    )


def c4i_prime(r):
    C = np.zeros((8, 8))
    C[0, 0], C[0, 2] = -9 / 17, 8 / 17
    C[2, 0] = 51 / 43
    C[3, 0] = -2 / 49
    C[4, 0], C[4, 2] = 8 / (17 * r), -9 / (17 * r)
    C[6, 2] = 51 / (43 * r)
    C[7, 2] = -2 / (49 * r)
    return C


def t4i(r):
    return np.array(
        [
            115 / 204 - 6 / (17 * r**3),
            -1 / 12,
            5 / 516,
            11 / 588,
            115 / (204 * r**4) - 6 / (17 * r),
            -1 / (12 * r**4),
            5 / (516 * r**4),
            11 / (588 * r**4),
        ]
    )
