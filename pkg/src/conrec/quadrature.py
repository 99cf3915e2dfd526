"""Adaptive Simpson quadrature."""

import math


def adaptive_simpson(f, a, b, tol=1e-10, max_depth=50, min_depth=4):
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Classic recursive Simpson with Richardson correction.  ``f`` must be
    finite on the closed interval.  The first ``min_depth`` levels are always
    subdivided so a lucky cancellation on the coarse grid cannot end early.
    """
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(f, a, b, fa, fm, fb, whole, tol, max_depth, min_depth)


def _recurse(f, a, b, fa, fm, fb, whole, tol, depth, forced):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or not math.isfinite(delta) or (forced <= 0 and abs(delta) <= 15.0 * tol):
        return left + right + delta / 15.0
    return (_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, forced - 1)
            + _recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, forced - 1))
