"""Closed-form probabilities and fidelities for the teleportation protocols.

Every function evaluates a published closed form directly; none of them calls
into the simulator, so they serve as an independent check on it.  Arguments
broadcast like numpy ufuncs.  Notation: ``c2 = cos^2(theta/2)``,
``s2 = sin^2(theta/2)``, ``x = sin(theta) cos(phi)``.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError


def _halves(theta):
    theta = np.asarray(theta, dtype=float)
    return np.cos(theta / 2) ** 2, np.sin(theta / 2) ** 2


def ghz_bell_probability(j, theta=0.0):
    """Alice's outcome probability with the GHZ resource: 1/4 for every j."""
    return np.full(np.shape(theta), 0.25) if np.ndim(theta) else 0.25


def ghz_cindy_probability(j, k, theta, nu):
    c2, s2 = _halves(theta)
    sn2, cn2 = np.sin(nu) ** 2, np.cos(nu) ** 2
    first = c2 * sn2 + s2 * cn2
    second = c2 * cn2 + s2 * sn2
    return first if (j, k) in ((1, 1), (2, 1), (3, 2), (4, 2)) else second


def ghz_branch_fidelity(j, k, theta, nu):
    c2, s2 = _halves(theta)
    sn, cn = np.sin(nu), np.cos(nu)
    if (j, k) in ((1, 1), (2, 1), (3, 2), (4, 2)):
        return (c2 * sn + s2 * cn) ** 2 / (c2 * sn**2 + s2 * cn**2)
    return (c2 * cn + s2 * sn) ** 2 / (c2 * cn**2 + s2 * sn**2)


def ghz_average(nu):
    return 2 / 3 + np.sin(2 * np.asarray(nu, float)) / 3


def w_bell_probability(j, theta):
    c2, s2 = _halves(theta)
    return (1 + c2) / 6 if j in (1, 2) else (1 + s2) / 6


def _w_signs(j, k):
    # (sign of the cos 2nu term, sign of the x sin 2nu term)
    table = {
        (1, 1): (-1, +1), (1, 2): (+1, -1),
        (2, 1): (-1, -1), (2, 2): (+1, +1),
        (3, 1): (-1, +1), (3, 2): (+1, -1),
        (4, 1): (-1, -1), (4, 2): (+1, +1),
    }
    return table[(j, k)]


def _w_denominator(j, k, theta, phi, nu):
    c2, s2 = _halves(theta)
    x = np.sin(theta) * np.cos(phi)
    a, b = (c2, s2) if j in (1, 2) else (s2, c2)
    sc, sx = _w_signs(j, k)
    return 1 + a + sc * b * np.cos(2 * nu) + sx * x * np.sin(2 * nu)


def w_cindy_probability(j, k, theta, phi, nu):
    c2, s2 = _halves(theta)
    a = c2 if j in (1, 2) else s2
    return _w_denominator(j, k, theta, phi, nu) / (2 * (1 + a))


def w_branch_fidelity(j, k, theta, phi, nu):
    theta = np.asarray(theta, float)
    x = np.sin(theta) * np.cos(phi)
    sin2 = np.sin(theta) ** 2
    _, sx = _w_signs(j, k)
    if k == 1:
        num = 0.5 * sin2 * np.cos(nu) ** 2 + sx * x * np.sin(2 * nu) + 2 * np.sin(nu) ** 2
    else:
        num = 2 * np.cos(nu) ** 2 + sx * x * np.sin(2 * nu) + 0.5 * sin2 * np.sin(nu) ** 2
    return num / _w_denominator(j, k, theta, phi, nu)


def w_integrand(theta):
    """Outcome-summed P0 fidelity with the W resource at polar angle ``theta``."""
    c2, s2 = _halves(theta)
    return 2 / 3 * (1 + c2 * s2)


W_AVERAGE = 7 / 9
GHZ_P1_AVERAGE = 2 / 3


def w_average(nu=None):
    return W_AVERAGE


def w_p1_branch_fidelity(j, theta, n=3):
    """Receiver fidelity for Alice's outcome j in P1 with an n-particle W resource."""
    c2, s2 = _halves(theta)
    a = c2 if j in (1, 2) else s2
    return (1 + (n - 2) * c2 * s2) / (1 + (n - 2) * a)


def wn_bell_probability(j, theta, n):
    c2, s2 = _halves(theta)
    a = c2 if j in (1, 2) else s2
    return (1 + (n - 2) * a) / (2 * n)


def wn_p1_average(n):
    n = np.asarray(n, float)
    return (n + 4) / (3 * n)


def w_p1_average():
    return float(wn_p1_average(3))


def ghz_p1_average():
    return GHZ_P1_AVERAGE


def ghz_noisy_average(w, nu):
    """Three-term form as printed: 1/2 + g/6 - g (1 - w) / 6 with g = 1 + 2 sin 2nu."""
    g = 1 + 2 * np.sin(2 * np.asarray(nu, float))
    w = np.asarray(w, float)
    return 0.5 + g / 6 - g * (1 - w) / 6


def ghz_noisy_average_simplified(w, nu):
    """Algebraically reduced form 1/2 + g w / 6."""
    g = 1 + 2 * np.sin(2 * np.asarray(nu, float))
    return 0.5 + g * np.asarray(w, float) / 6


def w_noisy_average(w, nu=None):
    return 7 / 9 - 5 / 18 * (1 - np.asarray(w, float))


FORMULAS = {
    "ghz.bell_probability": ghz_bell_probability,
    "ghz.cindy_probability": ghz_cindy_probability,
    "ghz.branch_fidelity": ghz_branch_fidelity,
    "ghz.average": ghz_average,
    "ghz.p1_average": ghz_p1_average,
    "ghz.noisy_average": ghz_noisy_average,
    "ghz.noisy_average_simplified": ghz_noisy_average_simplified,
    "w.bell_probability": w_bell_probability,
    "w.cindy_probability": w_cindy_probability,
    "w.branch_fidelity": w_branch_fidelity,
    "w.integrand": w_integrand,
    "w.average": w_average,
    "w.p1_branch_fidelity": w_p1_branch_fidelity,
    "w.p1_average": w_p1_average,
    "w.noisy_average": w_noisy_average,
    "wn.bell_probability": wn_bell_probability,
    "wn.p1_average": wn_p1_average,
}


def oracle(formula: str, **params):
    """Evaluate a closed form by identifier, e.g. ``oracle("wn.p1_average", n=4)``."""
    try:
        fn = FORMULAS[formula]
    except KeyError:
        raise ConfigurationError(
            f"unknown formula {formula!r}; known: {', '.join(sorted(FORMULAS))}"
        ) from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {formula}: {exc}") from None
