"""Gaussian moment kernels used by every bound and weight equation.

For a standard normal scalar ``g``, a chi variable ``chi_k`` with ``k``
degrees of freedom, and thresholds ``z, a, b >= 0``, this module evaluates

====================  =====================================================
``phi(z)``            ``E (|g| - z)_+^2``
``phi_prime(z)``      derivative of ``phi`` in ``z``
``phi_block(z, k)``   ``E (chi_k - z)_+^2``   (the chi-density scaling
                      ``1 / (2^{k/2-1} Gamma(k/2))`` is already applied,
                      so callers never touch Gamma factors)
``phi_block_prime``   derivative of ``phi_block`` in ``z``
``phi1(a, b)``        ``E (|g - a| - b)_+^2``
``phi1_grad(a, b)``   both partials of ``phi1``
``phi2(z)``           alias of ``phi`` (kept because the two arise from
                      different expansions and some formulas cite both)
====================  =====================================================

``phi`` and ``phi_prime`` have closed forms in the complementary error
function:

    phi(z)       = (1 + z^2) erfc(z / sqrt(2)) - z sqrt(2/pi) exp(-z^2 / 2)
    phi_prime(z) = 2 z erfc(z / sqrt(2)) - 2 sqrt(2/pi) exp(-z^2 / 2)

``phi_block`` and ``phi1`` are evaluated by adaptive quadrature on a
truncated interval: the integrands decay like ``exp(-(u - c)^2 / 2)``
around a center ``c`` (``c = sqrt(k)`` for the chi density, ``c = a`` for
the folded normal), so integrating 40 units past ``max(threshold, c)``
leaves a tail below ``exp(-800)``.  The chi density is computed in log
space with ``gammaln`` so degrees of freedom up to 10^4 do not overflow.

All functions are pure and accept scalars or numpy arrays (broadcasting
elementwise); quadrature-backed ones loop internally.  Negative or
non-finite arguments raise :class:`~statdim.errors.DomainError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError

__all__ = [
    "KernelEval",
    "phi",
    "phi_prime",
    "phi_block",
    "phi_block_eval",
    "phi_block_prime",
    "phi1",
    "phi1_eval",
    "phi1_grad",
    "phi2",
    "QUAD_ABS_TOL",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

#: Interval half-length past the integrand's center; the Gaussian tail
#: beyond it is below exp(-800) and cannot move any digit of a double.
_TAIL = 40.0

#: Quadrature is run at this absolute/relative tolerance...
_QUAD_EPS = 1e-12

#: ...and an evaluation whose reported error exceeds this bound raises.
QUAD_ABS_TOL = 1e-9

#: Large integrals (values >> 1) are gated on relative error instead.
_QUAD_REL_GATE = 1e-11


@dataclass(frozen=True)
class KernelEval:
    """A quadrature-backed kernel value with its reported error bound.

    Attributes
    ----------
    value : float
        The expectation; nonnegative for all kernels in this module.
    abs_err_bound : float
        Absolute error estimate reported by the adaptive rule.
    """

    value: float
    abs_err_bound: float


def _validate_nonneg(name: str, x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    if np.any(x < 0):
        raise DomainError(f"{name} must be nonnegative, got {x!r}")


def _elementwise(fn, x: np.ndarray):
    out = np.empty(x.shape, dtype=float)
    for idx in np.ndindex(x.shape):
        out[idx] = fn(x[idx])
    return out


def phi(z):
    """E (|g| - z)_+^2 for standard normal g, via the erfc closed form.

    Decreasing from ``phi(0) = 1`` to 0; ``phi(12) < 1e-30``.
    """
    z = np.asarray(z, dtype=float)
    _validate_nonneg("z", z)
    val = (1.0 + z * z) * special.erfc(z / _SQRT2) \
        - z * _SQRT_2_OVER_PI * np.exp(-z * z / 2.0)
    return float(val) if val.ndim == 0 else val


def phi_prime(z):
    """d/dz of :func:`phi`; nonpositive, tends to 0 as z grows."""
    z = np.asarray(z, dtype=float)
    _validate_nonneg("z", z)
    val = 2.0 * z * special.erfc(z / _SQRT2) \
        - 2.0 * _SQRT_2_OVER_PI * np.exp(-z * z / 2.0)
    return float(val) if val.ndim == 0 else val


# phi2 arises from a different expansion (pairs of flat gradient indices)
# but is definitionally the same integral as phi.
phi2 = phi


def _validate_dof(k) -> int:
    k_int = int(k)
    if k_int != k or k_int < 1:
        raise DomainError(f"degrees of freedom k must be a positive integer, got {k!r}")
    return k_int


def _chi_log_norm(k: int) -> float:
    # log of 2^(k/2-1) * Gamma(k/2), the chi-density normalizer
    return (k / 2.0 - 1.0) * math.log(2.0) + special.gammaln(k / 2.0)


def _quad_checked(f, lo: float, hi: float, points=None) -> KernelEval:
    val, err = integrate.quad(
        f, lo, hi, epsabs=_QUAD_EPS, epsrel=_QUAD_EPS, limit=200, points=points
    )
    # absolute gate for O(1) values, relative gate for large ones (the error
    # estimate scales with the integral, e.g. phi1(a, b) ~ (a-b)^2 for a >> b)
    if err > max(QUAD_ABS_TOL, _QUAD_REL_GATE * abs(val)):
        raise QuadratureError(
            f"quadrature error bound {err:.3e} exceeds {QUAD_ABS_TOL:.1e}"
        )
    return KernelEval(value=val, abs_err_bound=err)


def phi_block_eval(z: float, k) -> KernelEval:
    """E (chi_k - z)_+^2 with its quadrature error bound."""
    k = _validate_dof(k)
    z = float(z)
    _validate_nonneg("z", np.asarray(z))
    log_norm = _chi_log_norm(k)
    center = math.sqrt(k)

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 0.0
        d = u - z
        return d * d * math.exp((k - 1) * math.log(u) - u * u / 2.0 - log_norm)

    hi = max(z, center) + _TAIL
    points = [center] if z < center < hi else None
    return _quad_checked(integrand, z, hi, points=points)


def phi_block(z, k):
    """E (chi_k - z)_+^2, already scaled by the chi-density normalizer.

    ``phi_block(0, k) = k`` (the chi-squared mean) and ``phi_block(z, 1)``
    coincides with :func:`phi`.
    """
    z_arr = np.asarray(z, dtype=float)
    _validate_nonneg("z", z_arr)
    if z_arr.ndim == 0:
        return phi_block_eval(float(z_arr), k).value
    return _elementwise(lambda s: phi_block_eval(s, k).value, z_arr)


def phi_block_prime(z, k):
    """d/dz of :func:`phi_block`: equals ``-2 E (chi_k - z)_+``; nonpositive."""
    z_arr = np.asarray(z, dtype=float)
    _validate_nonneg("z", z_arr)
    k = _validate_dof(k)
    log_norm = _chi_log_norm(k)
    center = math.sqrt(k)

    def one(zs: float) -> float:
        def integrand(u: float) -> float:
            if u <= 0.0:
                return 0.0
            return (u - zs) * math.exp((k - 1) * math.log(u) - u * u / 2.0 - log_norm)

        hi = max(zs, center) + _TAIL
        points = [center] if zs < center < hi else None
        return -2.0 * _quad_checked(integrand, zs, hi, points=points).value

    if z_arr.ndim == 0:
        return one(float(z_arr))
    return _elementwise(one, z_arr)


def phi1_eval(a: float, b: float) -> KernelEval:
    """E (|g - a| - b)_+^2 with its quadrature error bound.

    The density of |g - a| on u >= 0 is the folded-normal kernel
    ``(exp(-(u-a)^2/2) + exp(-(u+a)^2/2)) / sqrt(2 pi)``; the expectation is
    the integral of ``(u - b)^2`` against it over ``u >= b``.  Increasing in
    the shift ``a``, decreasing in the threshold ``b``.
    """
    a, b = float(a), float(b)
    _validate_nonneg("a", np.asarray(a))
    _validate_nonneg("b", np.asarray(b))

    def integrand(u: float) -> float:
        d = u - b
        return d * d * (
            math.exp(-((u - a) ** 2) / 2.0) + math.exp(-((u + a) ** 2) / 2.0)
        )

    hi = max(a, b) + _TAIL
    points = [a] if b < a < hi else None
    raw = _quad_checked(integrand, b, hi, points=points)
    return KernelEval(value=_INV_SQRT_2PI * raw.value,
                      abs_err_bound=_INV_SQRT_2PI * raw.abs_err_bound)


def phi1(a, b):
    """E (|g - a| - b)_+^2; reduces to ``phi(b)`` at ``a = 0``."""
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if a_arr.ndim == 0 and b_arr.ndim == 0:
        return phi1_eval(float(a_arr), float(b_arr)).value
    a_b, b_b = np.broadcast_arrays(a_arr, b_arr)
    out = np.empty(a_b.shape, dtype=float)
    for idx in np.ndindex(a_b.shape):
        out[idx] = phi1_eval(a_b[idx], b_b[idx]).value
    return out


def phi1_grad(a: float, b: float) -> tuple[float, float]:
    """Both partial derivatives of :func:`phi1`.

    Differentiating under the integral sign (the boundary term vanishes
    because the kernel has a double zero at ``u = b``):

        d/da = (1/sqrt(2 pi)) Int_b^inf (u-b)^2
               [(u-a) e^{-(u-a)^2/2} - (u+a) e^{-(u+a)^2/2}] du
        d/db = -(2/sqrt(2 pi)) Int_b^inf (u-b)
               [e^{-(u-a)^2/2} + e^{-(u+a)^2/2}] du

    The total derivative along the diagonal a = b = z is the sum of the
    two partials evaluated at (z, z).
    """
    a, b = float(a), float(b)
    _validate_nonneg("a", np.asarray(a))
    _validate_nonneg("b", np.asarray(b))
    hi = max(a, b) + _TAIL
    points = [a] if b < a < hi else None

    def integrand_a(u: float) -> float:
        d = u - b
        return d * d * (
            (u - a) * math.exp(-((u - a) ** 2) / 2.0)
            - (u + a) * math.exp(-((u + a) ** 2) / 2.0)
        )

    def integrand_b(u: float) -> float:
        return (u - b) * (
            math.exp(-((u - a) ** 2) / 2.0) + math.exp(-((u + a) ** 2) / 2.0)
        )

    d_da = _INV_SQRT_2PI * _quad_checked(integrand_a, b, hi, points=points).value
    d_db = -2.0 * _INV_SQRT_2PI * _quad_checked(integrand_b, b, hi, points=points).value
    return d_da, d_db
