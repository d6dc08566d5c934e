"""Fixed quadrature rules used by assembly and the oracles.

Segments get a 5-point Gauss-Legendre rule (degree 9), triangles a 7-point
rule of degree 5. Orders are deliberately frozen: the near-boundary weight
singularity is handled by mesh grading, so a deterministic error model is
worth more than adaptivity here.
"""

import numpy as np

# 5-point Gauss-Legendre on [0, 1]: reference positions and weights.
_gl_x, _gl_w = np.polynomial.legendre.leggauss(5)
SEG_XI = 0.5 * (_gl_x + 1.0)
SEG_W = 0.5 * _gl_w

# Degree-5 rule on the reference triangle, barycentric coordinates.
# Centroid point plus two symmetric orbits.
_a1 = 0.0597158717897698
_b1 = 0.4701420641051151
_a2 = 0.7974269853530873
_b2 = 0.1012865073234563
TRI_BARY = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [_a1, _b1, _b1],
        [_b1, _a1, _b1],
        [_b1, _b1, _a1],
        [_a2, _b2, _b2],
        [_b2, _a2, _b2],
        [_b2, _b2, _a2],
    ]
)
TRI_W = np.array(
    [0.225]
    + [0.1323941527885062] * 3
    + [0.1259391805448271] * 3
)


def segment_points(a, b):
    """Quadrature points for segments [a_i, b_i]; shape (len(a), 5)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[:, None] + (b - a)[:, None] * SEG_XI[None, :]
