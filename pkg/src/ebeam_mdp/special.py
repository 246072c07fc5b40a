# Rational approximations for erf below follow FreeBSD's s_erf.c:
#
# ====================================================
# Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
#
# Developed at SunPro, a Sun Microsystems, Inc. business.
# Permission to use, copy, modify, and distribute this
# software is freely granted, provided that this notice
# is preserved.
# ====================================================
"""Error function and the Gaussian / erf-window primitives.

All Gaussians use the ``exp(-(x - a)**2 / sigma**2)`` convention (no factor
of 2 in the exponent), which is what makes ``erf_window`` and ``g_sigma``
consistent: ``d/dx erf_window(x, left, w, sigma) = g_sigma(x, left) -
g_sigma(x, left + w)``.

Every function accepts scalars or numpy arrays and broadcasts.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.polynomial import polyval

TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)

_ERX = 8.45062911510467529297e-01
_EFX = 1.28379167095512586316e-01

# [0, 0.84375)
_PP = (1.28379167095512558561e-01, -3.25042107247001499370e-01, -2.84817495755985104766e-02,
       -5.77027029648944159157e-03, -2.37630166566501626084e-05)
_QQ = (1.0, 3.97917223959155352819e-01, 6.50222499887672944485e-02, 5.08130628187576562776e-03,
       1.32494738004321644526e-04, -3.96022827877536812320e-06)
# [0.84375, 1.25)
_PA = (-2.36211856075265944077e-03, 4.14856118683748331666e-01, -3.72207876035701323847e-01,
       3.18346619901161753674e-01, -1.10894694282396677476e-01, 3.54783043256182359371e-02,
       -2.16637559486879084300e-03)
_QA = (1.0, 1.06420880400844228286e-01, 5.40397917702171048937e-01, 7.18286544141962662868e-02,
       1.26171219808761642112e-01, 1.36370839120290507362e-02, 1.19844998467991074170e-02)
# [1.25, 1/0.35)
_RA = (-9.86494403484714822705e-03, -6.93858572707181764372e-01, -1.05586262253232909814e01,
       -6.23753324503260060396e01, -1.62396669462573470355e02, -1.84605092906711035994e02,
       -8.12874355063065934246e01, -9.81432934416914548592e00)
_SA = (1.0, 1.96512716674392571292e01, 1.37657754143519042600e02, 4.34565877475229228821e02,
       6.45387271733267880336e02, 4.29008140027567833386e02, 1.08635005541779435134e02,
       6.57024977031928170135e00, -6.04244152148580987438e-02)
# [1/0.35, 6)
_RB = (-9.86494292470009928597e-03, -7.99283237680523006574e-01, -1.77579549177547519889e01,
       -1.60636384855821916062e02, -6.37566443368389627722e02, -1.02509513161107724954e03,
       -4.83519191608651397019e02)
_SB = (1.0, 3.03380607434824582924e01, 3.25792512996573918826e02, 1.53672958608443695994e03,
       3.19985821950859553908e03, 2.55305040643316442583e03, 4.74528541206955367215e02,
       -2.24409524465858183362e01)

_HIGH_WORD_MASK = np.uint64(0xFFFFFFFF00000000)


def _erfc_tail(a: np.ndarray, r: tuple, s: tuple) -> np.ndarray:
    """erfc(a) for a >= 1.25 as exp(-a^2 - 0.5625 + R/S) / a, split for precision."""
    inv = 1.0 / (a * a)
    ratio = polyval(inv, r) / polyval(inv, s)
    # zero the low 32 bits so z*z is exact and the remainder (z-a)(z+a) is small
    z = (a.view(np.uint64) & _HIGH_WORD_MASK).view(np.float64)
    return np.exp(-z * z - 0.5625) * np.exp((z - a) * (z + a) + ratio) / a


def erf(x):
    """Error function, accurate to a few ulp; exactly +/-1 for ``|x| >= 6``."""
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    a = np.abs(np.atleast_1d(x)).ravel()
    out = np.ones_like(a)

    tiny = a < 2.0**-28
    small = (a >= 2.0**-28) & (a < 0.84375)
    mid = (a >= 0.84375) & (a < 1.25)
    med = (a >= 1.25) & (a < 1 / 0.35)
    big = (a >= 1 / 0.35) & (a < 6.0)

    out[tiny] = a[tiny] + _EFX * a[tiny]
    if small.any():
        v = a[small]
        z = v * v
        out[small] = v + v * (polyval(z, _PP) / polyval(z, _QQ))
    if mid.any():
        s = a[mid] - 1.0
        out[mid] = _ERX + polyval(s, _PA) / polyval(s, _QA)
    if med.any():
        out[med] = 1.0 - _erfc_tail(a[med], _RA, _SA)
    if big.any():
        out[big] = 1.0 - _erfc_tail(a[big], _RB, _SB)
    out[np.isnan(a)] = np.nan

    out = np.copysign(out.reshape(np.shape(np.atleast_1d(x))), np.atleast_1d(x))
    return float(out[0]) if scalar else out


def erf_derivative(x):
    """(2 / sqrt(pi)) * exp(-x**2)."""
    x = np.asarray(x, dtype=np.float64)
    return TWO_OVER_SQRT_PI * np.exp(-x * x)


def g_sigma(x, a, sigma):
    """Unit-mass Gaussian ``exp(-(x-a)^2/sigma^2) / (sqrt(pi) sigma)``."""
    t = (np.asarray(x, dtype=np.float64) - a) / sigma
    return np.exp(-t * t) / (math.sqrt(math.pi) * sigma)


def delta_g(x, left, width, sigma):
    """``g_sigma(x, left + width) - g_sigma(x, left)``: d(erf_window)/d(left)."""
    return g_sigma(x, left + width, sigma) - g_sigma(x, left, sigma)


def erf_window(x, left, width, sigma):
    """Gaussian-blurred indicator of ``[left, left + width]`` evaluated at ``x``."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * (erf((x - left) / sigma) - erf((x - (left + width)) / sigma))
