"""Quadrature over the plane weighted by a point charge's field.

Every field-overlap integral in this package has the form

    integral d^3r'  E_q(r') . G(r')        (or E_q x G)

with G independent of the axial coordinate z'.  The z' integral of the
Coulomb field is done exactly (it gives the 2D field 2q (r' - r)/|r' - r|^2),
and the remaining plane integral is taken in polar coordinates (s, phi)
centred on the charge, where the Jacobian s cancels the 1/s of the 2D field:

    integral ds dphi  2q * shat(phi) . G(r + s shat(phi))

so the integrand stays bounded at the charge.  The phi axis is split into
Gauss-Legendre panels, with a smoothing substitution across the directions
that hit the flux-tube core; each ray is split at caller-supplied radii (core crossings)
and at a length scale L, and the last panel [b, inf) is mapped by
s = b + L t/(1 - t).  Successive levels double the node counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DivergentTailError, QuadratureError


@dataclass(frozen=True)
class QuadratureConfig:
    rtol: float = 1e-6
    atol: float = 1e-13
    cutoff: float = 0.0  # radius of the disk around the charge left out of the integral
    max_level: int = 5
    base_panels: int = 8
    base_nodes: int = 8


FAST = QuadratureConfig(rtol=1e-4)
ACCURATE = QuadratureConfig(rtol=1e-6)


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray
    error: float
    level: int


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(breaks, n: int):
    """Gauss-Legendre nodes/weights on consecutive panels [breaks[i], breaks[i+1]] along the last axis.

    ``breaks`` has shape (..., B); returns arrays of shape (..., (B-1)*n).
    """
    x, w = gauss_legendre(n)
    lo = breaks[..., :-1, None]
    hi = breaks[..., 1:, None]
    half = 0.5 * (hi - lo)
    nodes = half * x + 0.5 * (hi + lo)
    weights = half * w
    shape = breaks.shape[:-1] + ((breaks.shape[-1] - 1) * n,)
    return nodes.reshape(shape), weights.reshape(shape)


def phi_nodes(level: int, config: QuadratureConfig, window=None):
    """Angular nodes and weights over [0, 2 pi).

    ``window = (phi_c, ratio)`` marks the directions in which a ray hits a disk
    of radius a at distance rho (ratio = a/rho < 1).  Inside the window the
    substitution sin(phi - phi_c) = ratio * sin(u) removes the square-root
    behaviour of chord lengths at the tangent directions.
    """
    panels = config.base_panels * 2**level
    if window is None:
        return panel_nodes(np.linspace(0.0, 2 * np.pi, panels + 1), config.base_nodes)
    phi_c, ratio = window
    alpha = np.arcsin(ratio)
    outer, w_outer = panel_nodes(np.linspace(phi_c + alpha, phi_c + 2 * np.pi - alpha, panels + 1),
                                 config.base_nodes)
    u, w_u = panel_nodes(np.linspace(-0.5 * np.pi, 0.5 * np.pi, max(panels // 2, 1) + 1), config.base_nodes)
    su = ratio * np.sin(u)
    inner = phi_c + np.arcsin(su)
    w_inner = w_u * ratio * np.cos(u) / np.sqrt(1.0 - su * su)
    return np.concatenate([inner, outer]), np.concatenate([w_inner, w_outer])


def plane_integral(center, integrand, level: int, config: QuadratureConfig, length_scale: float = 1.0,
                   ray_breaks=None, phi_window=None):
    """Integral of 2 * integrand(points, shat) over the plane in charge-centred polar coordinates.

    ``integrand(points, shat)`` receives arrays of shape (P, 2) and returns
    shape (P,) or (P, k); it should already contain shat (the unit vector from
    the charge).  ``ray_breaks(shat)`` returns extra radii per ray, shape
    (R, b); negative or non-finite entries are ignored.  ``phi_window`` is
    passed to :func:`phi_nodes`.  The factor 2 is the axial integral of the
    Coulomb field per unit charge.
    """
    center = np.asarray(center, dtype=float)
    phi, wphi = phi_nodes(level, config, phi_window)
    shat = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    n_rays = phi.size
    lo = config.cutoff
    base = [np.full(n_rays, lo), np.full(n_rays, max(length_scale, lo))]
    if ray_breaks is not None:
        extra = np.asarray(ray_breaks(shat), dtype=float).reshape(n_rays, -1)
        extra = np.where(np.isfinite(extra) & (extra > lo), extra, lo)
        base.extend(extra.T)
    breaks = np.sort(np.stack(base, axis=-1), axis=-1)
    n_s = config.base_nodes * 2**level
    s_fin, w_fin = panel_nodes(breaks, n_s)
    # mapped tail [b_last, inf)
    xt, wt = gauss_legendre(n_s)
    t = 0.5 * (xt + 1.0)
    b_last = breaks[:, -1:]
    s_tail = b_last + length_scale * t / (1.0 - t)
    w_tail = np.broadcast_to(0.5 * wt * length_scale / (1.0 - t) ** 2, s_tail.shape)
    s = np.concatenate([s_fin, s_tail], axis=1)
    ws = np.concatenate([w_fin, w_tail], axis=1)
    pts = center + s[..., None] * shat[:, None, :]
    sh = np.broadcast_to(shat[:, None, :], pts.shape)
    vals = np.asarray(integrand(pts.reshape(-1, 2), sh.reshape(-1, 2)), dtype=float)
    weights = (ws * wphi[:, None]).reshape(-1)
    if vals.ndim == 1:
        return 2.0 * float(np.dot(weights, vals))
    return 2.0 * np.einsum("p,pk->k", weights, vals)


def refine(evaluate, config: QuadratureConfig, scale: float = 0.0, what: str = "plane integral",
           start_level: int = 0) -> QuadResult:
    """Double the resolution until two successive levels agree.

    ``evaluate(level)`` returns a float or array.  Agreement means
    |I_{l+1} - I_l| <= max(atol, rtol * max(|I_{l+1}|, scale)).
    """
    prev = np.asarray(evaluate(start_level))
    err = np.inf
    for level in range(start_level + 1, config.max_level + 1):
        cur = np.asarray(evaluate(level))
        err = float(np.max(np.abs(cur - prev)))
        mag = max(float(np.max(np.abs(cur))), scale)
        if err <= max(config.atol, config.rtol * mag):
            return QuadResult(cur if cur.ndim else float(cur), err, level)
        prev = cur
    raise QuadratureError(f"{what} did not converge by level {config.max_level}", err)


def check_tail(center, integrand_abs, length_scale: float, threshold: float, what: str = "integrand",
               config: QuadratureConfig = QuadratureConfig()):
    """Reject plane integrals that do not converge absolutely.

    Compares absolute annulus integrals over [R, 2R] and [2R, 4R] far from the
    charge.  A ratio above 1/2 means the integrand decays no faster than
    1/s, so the value would depend on the shape of the cutoff.
    """
    center = np.asarray(center, dtype=float)
    phi, wphi = phi_nodes(1, config)
    shat = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    x, w = gauss_legendre(16)
    totals = []
    for radius in (1e3 * length_scale, 2e3 * length_scale):
        s = radius * (1.5 + 0.5 * x)
        ws = 0.5 * radius * w
        pts = center + s[None, :, None] * shat[:, None, :]
        sh = np.broadcast_to(shat[:, None, :], pts.shape)
        vals = np.abs(np.asarray(integrand_abs(pts.reshape(-1, 2), sh.reshape(-1, 2))))
        totals.append(2.0 * float(np.dot((wphi[:, None] * ws[None, :]).reshape(-1), vals.reshape(-1))))
    near, far = totals
    if far > threshold and far > 0.5 * near:
        raise DivergentTailError(f"{what} does not decay fast enough for a convergent overlap integral", far)
    return far


def observed_orders(errors, ratio: float = 2.0, floor: float = 0.0) -> np.ndarray:
    """Convergence orders log(e_k / e_{k+1}) / log(ratio) for a refinement sequence.

    Pairs whose finer error sits at or below ``floor`` give ``inf`` (converged
    to the noise floor).
    """
    e = np.asarray(errors, dtype=float)
    out = np.empty(e.size - 1)
    for k in range(e.size - 1):
        if e[k + 1] <= floor:
            out[k] = np.inf
        else:
            out[k] = np.log(e[k] / e[k + 1]) / np.log(ratio)
    return out
