"""Ground truth: Mie series for plane-wave scattering by the sound-soft unit
disk, trace/volume evaluation, reference impedance traces, resonance table.

The scattered field is

    u_S(r, t) = - sum_p e^{i p t} i^{|p|} J_{|p|}(kappa) H1_{|p|}(kappa r)
                                          / H1_{|p|}(kappa),

whose coefficients carry J at the obstacle radius (the boundary condition
u_S = -u_inc on r = 1 pins them; a variant with J evaluated at kappa*r would
violate it, which the constructor invariant checks).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .geometry import InterfaceMesh

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MieSeries:
    """Truncated scattered-field series for the sound-soft unit disk."""

    kappa: float
    truncation: int
    coefficients: np.ndarray = field(repr=False)  # c_p for p = 0..truncation

    @classmethod
    def build(cls, kappa: float, r_max: float = 2.0) -> "MieSeries":
        """Series truncated at P = ceil(kappa r_max) + 15 (evaluation r <= r_max)."""
        if kappa <= 0 or r_max < 1:
            raise ValueError("need kappa > 0 and r_max >= 1")
        P = int(np.ceil(kappa * r_max)) + 15
        # coefficients above the supported Bessel order have underflowed to
        # zero long before (they decay superexponentially past p ~ kappa)
        p_max = min(P, specfun.MAX_ORDER)
        p = np.arange(p_max + 1)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            j = np.array([specfun.bessel_j(int(n), kappa) for n in p])
            h = np.array([specfun.hankel1(int(n), kappa) for n in p])
            c = (1j**p) * j / h
        c[~np.isfinite(c)] = 0.0  # underflow/overflow tail: drop exactly
        c = np.concatenate([c, np.zeros(P - p_max, dtype=complex)])
        if abs(c[p_max]) > 1e-12 * np.max(np.abs(c)):
            warnings.warn("Mie truncation too small: last coefficient not negligible")
        return cls(kappa=float(kappa), truncation=P, coefficients=c)


def _hankel_table(series: MieSeries, x: np.ndarray, deriv: bool = False) -> np.ndarray:
    """H1_p(kappa x) (or derivative) for p = 0..P, masked where c_p = 0."""
    kappa = series.kappa
    P = series.truncation
    live = np.nonzero(series.coefficients != 0.0)[0]
    out = np.zeros((P + 1,) + np.shape(x), dtype=complex)
    for p in live:
        if deriv:
            out[p] = specfun.hankel1p(int(p), kappa * np.asarray(x))
        else:
            out[p] = specfun.hankel1(int(p), kappa * np.asarray(x))
    return out


def _fold_series(series: MieSeries, H: np.ndarray, theta: np.ndarray, scale=1.0):
    # sum over p in [-P, P] folds to cos(p theta) since c and H depend on |p|
    p = np.arange(series.truncation + 1)
    cosines = np.cos(np.multiply.outer(p, theta))
    weights = series.coefficients * scale
    ext = (slice(None),) + (None,) * theta.ndim
    terms = weights[ext] * H * cosines
    return -(terms[0] + 2.0 * np.sum(terms[1:], axis=0))


def mie_eval(series: MieSeries, r, theta):
    """Scattered field u_S(r, theta) for r >= 1 (vectorized)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(r < 1.0 - 1e-12):
        raise ValueError("mie_eval requires r >= 1")
    return _fold_series(series, _hankel_table(series, r), theta)


def mie_dr(series: MieSeries, r, theta):
    """Radial derivative of the scattered field (Hankel recurrence)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return _fold_series(series, _hankel_table(series, r, deriv=True), theta,
                        scale=series.kappa)


def incident_field(kappa: float, xy: np.ndarray) -> np.ndarray:
    """Incoming plane wave exp(i kappa x1)."""
    xy = np.asarray(xy, dtype=float)
    return np.exp(1j * kappa * xy[..., 0])


def scattered_on_vertices(series: MieSeries, xy: np.ndarray) -> np.ndarray:
    """Scattered field at arbitrary points with r >= 1."""
    r = np.linalg.norm(xy, axis=-1)
    theta = np.arctan2(xy[..., 1], xy[..., 0])
    return mie_eval(series, r, theta)


@dataclass(frozen=True)
class Resonance:
    order: int
    index: int
    zero: float
    kappa_res: float


@dataclass(frozen=True)
class ResonanceTable:
    entries: tuple

    def kappas(self) -> list[float]:
        return [e.kappa_res for e in self.entries]


def resonances_in(a: float, b: float, max_order: int = 60) -> ResonanceTable:
    """Spurious-resonance wavenumbers j_{p,m}/2 inside [a, b] (interface R=2)."""
    if not (0 < a < b):
        raise ValueError("need 0 < a < b")
    found = []
    for order in range(max_order + 1):
        # first zero exceeds the order, so high orders cannot reach 2b
        if order >= 2.0 * b:
            break
        for z in specfun.bessel_zeros_below(order, 2.0 * b + 1e-12):
            k = z.value / 2.0
            if a <= k <= b:
                found.append(Resonance(order=order, index=z.index, zero=z.value, kappa_res=k))
    found.sort(key=lambda e: e.kappa_res)
    return ResonanceTable(entries=tuple(found))


@dataclass(frozen=True)
class ReferenceTraces:
    """Mie traces on the interface in the library's representations.

    dirichlet : primal interface coefficients of u_S
    neumann : dual coefficients of n . grad u_S (normal toward the origin)
    incoming_bem, incoming_fem : dual impedance traces fed to the subdomain
        resolvents (gamma_N - i T gamma_D per side, exterior-side normal for
        the BEM trace, interior-side normal for the FEM trace)
    """

    dirichlet: np.ndarray
    neumann: np.ndarray
    incoming_bem: np.ndarray
    incoming_fem: np.ndarray
    dirichlet_dual: np.ndarray
    neumann_primal: np.ndarray


def reference_traces(series: MieSeries, interface: InterfaceMesh, mass: np.ndarray,
                     T_bem: np.ndarray, T_fem: np.ndarray) -> ReferenceTraces:
    """Nodal Mie traces and the incoming impedance traces of both subdomains."""
    xy = interface.nodes
    r = np.linalg.norm(xy, axis=1)
    theta = np.arctan2(xy[:, 1], xy[:, 0])
    gd = mie_eval(series, r, theta)
    dr = mie_dr(series, r, theta)
    gn_bem = -dr  # normal toward the origin on the exterior side
    gn_fem = +dr
    q_bem = mass @ gn_bem - 1j * (T_bem @ gd)
    q_fem = mass @ gn_fem - 1j * (T_fem @ gd)
    return ReferenceTraces(
        dirichlet=gd,
        neumann=mass @ gn_bem,
        incoming_bem=q_bem,
        incoming_fem=q_fem,
        dirichlet_dual=mass @ gd,
        neumann_primal=gn_bem,
    )
