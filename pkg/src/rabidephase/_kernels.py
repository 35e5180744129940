"""Compiled stencil for the coefficient equations in the rotating frame.

In the frame rotating with ``omega*n + Omega*sigma_z/2`` every coupling term
of the coefficient equations acquires one of two scalar phases:
``rot = exp(i(Omega-omega)t)`` on rotating-wave terms and
``ctr = exp(i(omega+Omega)t)`` on counter-rotating terms.

``cd`` must be the contiguous conjugate transpose of ``c``.
"""
from numba import njit


@njit(cache=True, fastmath=True)
def rotating_frame_rhs(a, b, c, cd, decay_ab, decay_c, sq, sq1, g, rot, ctr, da, db, dc):
    N = a.shape[0] - 1
    ig = 1j * g
    rc = rot.conjugate()
    cc = ctr.conjugate()
    for n in range(N + 1):
        for m in range(N + 1):
            sa = 0j
            sb = 0j
            sc = 0j
            if m > 0:
                sa += sq[m] * c[n, m - 1] * rot
                sb += sq[m] * cd[n, m - 1] * cc
                sc += sq[m] * a[n, m - 1] * cc
            if m < N:
                sa += sq1[m] * c[n, m + 1] * ctr
                sb += sq1[m] * cd[n, m + 1] * rc
                sc += sq1[m] * a[n, m + 1] * rc
            if n > 0:
                sa -= sq[n] * cd[n - 1, m] * rc
                sb -= sq[n] * c[n - 1, m] * ctr
                sc -= sq[n] * b[n - 1, m] * rc
            if n < N:
                sa -= sq1[n] * cd[n + 1, m] * cc
                sb -= sq1[n] * c[n + 1, m] * rot
                sc -= sq1[n] * b[n + 1, m] * cc
            da[n, m] = ig * sa + decay_ab[n, m] * a[n, m]
            db[n, m] = ig * sb + decay_ab[n, m] * b[n, m]
            dc[n, m] = ig * sc + decay_c[n, m] * c[n, m]
