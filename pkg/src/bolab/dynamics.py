"""Regularized third-order Benjamin-Ono evolution on the torus.

The equation, for ``t >= 0``, is

    u_t = u_xxx - u^2 u_x - c1 (u H u_x)_x - c2 H (u u_x)_x - gamma D^{5/2} u.

Running in the backward direction flips the sign of the dissipative term;
the solver then marches the elapsed time ``tau = -t`` forward, so all
stored times are nonnegative and increasing.

Everything here works on half-spectrum coefficient arrays internally and
wraps them in :class:`~bolab.spectral.SpectralField` at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from scipy import fft as sfft
from scipy import integrate

from .spectral import SpectralField, _from_grid, _to_grid, abs_power, sobolev_norm

Stepper = Literal["IFRK4", "ETDRK4", "PICARD"]


class NonFiniteStateError(FloatingPointError):
    """Raised when a step produces NaN or Inf coefficients."""


@dataclass(frozen=True)
class EquationParams:
    c1: float = math.sqrt(3) / 2
    c2: float = math.sqrt(3) / 2
    gamma: float = 0.0
    time_direction: Literal["forward", "backward"] = "forward"
    # drops u^2 u_x; used to isolate the quadratic terms in tests
    cubic: bool = True

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.time_direction not in ("forward", "backward"):
            raise ValueError(f"time_direction must be 'forward' or 'backward', got {self.time_direction!r}")

    @property
    def sign(self) -> int:
        return 1 if self.time_direction == "forward" else -1

    @property
    def is_linear(self) -> bool:
        return not self.cubic and self.c1 == 0 and self.c2 == 0


@dataclass(frozen=True)
class SolverConfig:
    max_mode: int = 128
    dt: float = 1e-4
    horizon: float = 1.0
    stepper: Stepper = "ETDRK4"
    blowup_threshold: float = 1e6
    stride: int = 1

    def __post_init__(self):
        if self.max_mode < 4:
            raise ValueError("max_mode must be at least 4")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.dt > self.horizon:
            raise ValueError("dt must not exceed the horizon")
        if self.stepper not in ("IFRK4", "ETDRK4", "PICARD"):
            raise ValueError(f"unknown stepper {self.stepper!r}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class Trajectory:
    times: np.ndarray
    snapshots: list[SpectralField]
    status: Literal["completed", "blowup_detected", "non_contraction"] = "completed"
    stop_time: float | None = None
    params: EquationParams | None = None
    config: SolverConfig | None = None
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.snapshots)

    @property
    def final(self) -> SpectralField:
        return self.snapshots[-1]

    def coefficient_array(self) -> np.ndarray:
        return np.stack([u.coeffs for u in self.snapshots])


# ---------------------------------------------------------------------------
# symbols and nonlinearity


def linear_symbol(k: np.ndarray, p: EquationParams) -> np.ndarray:
    """Symbol of the linear part in elapsed time: ``-i s k^3 - gamma |k|^{5/2}``."""
    k = np.asarray(k, dtype=float)
    return -1j * p.sign * k**3 - p.gamma * abs_power(k, 2.5)


class _Nonlinearity:
    """Dealiased ``F(u) = -u^2 u_x - c1 (u H u_x)_x - c2 H (u u_x)_x`` on coefficient arrays.

    Returns the elapsed-time contribution, i.e. ``-F(u)`` in the backward direction.
    """

    def __init__(self, K: int, p: EquationParams):
        self.K = K
        self.p = p
        self.k = np.arange(K + 1, dtype=float)
        self.ik = 1j * self.k
        # 2x padding: cubic products project exactly onto |k| <= K
        self.n = sfft.next_fast_len(4 * K + 2, real=True)

    def __call__(self, c: np.ndarray) -> np.ndarray:
        p, n, K = self.p, self.n, self.K
        u = _to_grid(c, n)
        ux = _to_grid(self.ik * c, n)
        out = np.zeros(K + 1, dtype=np.complex128)
        if p.cubic:
            out -= _from_grid(u * u * ux, K)
        if p.c1:
            hux = _to_grid(self.k * c, n)  # H d/dx = D
            out -= p.c1 * self.ik * _from_grid(u * hux, K)
        if p.c2:
            out -= p.c2 * self.k * _from_grid(u * ux, K)
        return out if p.sign > 0 else -out


def nonlinear_term(u: SpectralField, p: EquationParams) -> SpectralField:
    """``F(u)`` in physical time, independent of the time direction."""
    return SpectralField(p.sign * _Nonlinearity(u.max_mode, p)(u.coeffs))


def rhs(u: SpectralField, p: EquationParams) -> SpectralField:
    """``u_t`` in physical time.

    Forward: ``u_xxx + F(u) - gamma D^{5/2} u``; backward: ``+ gamma D^{5/2} u``.
    """
    k = u.wavenumbers.astype(float)
    lin = (-1j * k**3 - p.sign * p.gamma * abs_power(k, 2.5)) * u.coeffs
    return SpectralField(lin + p.sign * _Nonlinearity(u.max_mode, p)(u.coeffs))


def elapsed_rhs(u: SpectralField, p: EquationParams) -> SpectralField:
    """Derivative with respect to elapsed time (``-rhs`` when running backward)."""
    r = rhs(u, p)
    return r if p.sign > 0 else -r


def propagator(phi: SpectralField, t: float, p: EquationParams) -> SpectralField:
    """Linear flow over elapsed time ``t``: ``c_k -> exp(-i k^3 t - gamma |k|^{5/2} t) c_k``.

    In the backward direction the dispersive phase is reversed while the
    damping is kept.
    """
    if t < 0 and p.gamma > 0:
        raise ValueError("the dissipative propagator cannot run with negative elapsed time")
    L = linear_symbol(phi.wavenumbers, p)
    return SpectralField(np.exp(L * t) * phi.coeffs)


# ---------------------------------------------------------------------------
# steppers


class _IFRK4:
    """Classical RK4 applied to ``v = exp(-L t) u``."""

    def __init__(self, K, dt, p):
        L = linear_symbol(np.arange(K + 1), p)
        self.E = np.exp(0.5 * dt * L)
        self.E2 = self.E * self.E
        self.dt = dt
        self.N = _Nonlinearity(K, p)

    def __call__(self, c):
        E, E2, h, N = self.E, self.E2, self.dt, self.N
        a = h * N(c)
        b = h * N(E * (c + 0.5 * a))
        cc = h * N(E * c + 0.5 * b)
        d = h * N(E2 * c + E * cc)
        return E2 * c + (E2 * a + 2.0 * E * (b + cc) + d) / 6.0


def _etd_coefficients(L, h, n_contour=32):
    """ETDRK4 weights via contour averaging, stable for small ``|h L|``."""
    # full circle: L is complex, so the real-part shortcut does not apply
    r = np.exp(2j * np.pi * (np.arange(1, n_contour + 1) - 0.5) / n_contour)
    z = h * L[:, None] + r[None, :]
    ez = np.exp(z)
    ez2 = np.exp(z / 2)
    Q = h * np.mean((ez2 - 1) / z, axis=1)
    f1 = h * np.mean((-4 - z + ez * (4 - 3 * z + z**2)) / z**3, axis=1)
    f2 = h * np.mean((2 + z + ez * (z - 2)) / z**3, axis=1)
    f3 = h * np.mean((-4 - 3 * z - z**2 + ez * (4 - z)) / z**3, axis=1)
    return Q, f1, f2, f3


class _ETDRK4:
    """Cox-Matthews ETDRK4 with Kassam-Trefethen contour evaluation."""

    def __init__(self, K, dt, p):
        L = linear_symbol(np.arange(K + 1), p)
        self.E = np.exp(dt * L)
        self.E2 = np.exp(0.5 * dt * L)
        self.Q, self.f1, self.f2, self.f3 = _etd_coefficients(L, dt)
        self.N = _Nonlinearity(K, p)

    def __call__(self, c):
        E, E2, Q, N = self.E, self.E2, self.Q, self.N
        Nv = N(c)
        a = E2 * c + Q * Nv
        Na = N(a)
        b = E2 * c + Q * Na
        Nb = N(b)
        cc = E2 * a + Q * (2 * Nb - Nv)
        Nc = N(cc)
        return E * c + self.f1 * Nv + 2 * self.f2 * (Na + Nb) + self.f3 * Nc


_STEPPERS = {"IFRK4": _IFRK4, "ETDRK4": _ETDRK4}


def step(u: SpectralField, dt: float, p: EquationParams, cfg: SolverConfig | None = None) -> SpectralField:
    """Advance one step of elapsed time ``dt``.

    Raises
    ------
    NonFiniteStateError
        If the new state contains NaN or Inf.
    """
    kind = "ETDRK4" if cfg is None or cfg.stepper == "PICARD" else cfg.stepper
    c = _STEPPERS[kind](u.max_mode, dt, p)(u.coeffs)
    if not np.all(np.isfinite(c)):
        raise NonFiniteStateError(f"non-finite state after a {kind} step of size {dt}")
    return SpectralField(c)


def _h2(c: np.ndarray) -> float:
    k = np.arange(c.size, dtype=float)
    w = np.abs(c) ** 2
    w[1:] *= 2
    return math.sqrt(0.5 * float(np.sum(w * (1 + k**4))))


def solve(phi: SpectralField, p: EquationParams, cfg: SolverConfig) -> Trajectory:
    """March ``phi`` to ``cfg.horizon`` or until ``||u||_{H^2}`` exceeds the blow-up threshold.

    ``phi`` is resized to ``cfg.max_mode``.  Snapshots are kept every
    ``cfg.stride`` steps plus the final state.
    """
    if cfg.stepper == "PICARD":
        return picard_solve(phi, p, cfg)
    K = cfg.max_mode
    c = phi.resize(K).coeffs.copy()
    advance = _STEPPERS[cfg.stepper](K, cfg.dt, p)
    n = cfg.n_steps
    times = [0.0]
    snaps = [SpectralField(c)]
    status, stop = "completed", None
    for j in range(1, n + 1):
        c = advance(c)
        t = j * cfg.dt
        bad = not np.all(np.isfinite(c))
        if bad or _h2(c) > cfg.blowup_threshold:
            status, stop = "blowup_detected", t
            if not bad:
                times.append(t)
                snaps.append(SpectralField(c))
            break
        if j % cfg.stride == 0 or j == n:
            times.append(t)
            snaps.append(SpectralField(c))
    return Trajectory(np.array(times), snaps, status, stop, p, cfg)


# ---------------------------------------------------------------------------
# Duhamel fixed point


def picard_solve(
    phi: SpectralField,
    p: EquationParams,
    cfg: SolverConfig,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> Trajectory:
    """Solve by iterating the Duhamel map on the time grid ``t_j = j dt``.

    Each sweep computes ``u(t_j) = U(t_j) phi + int_0^{t_j} U(t_j - t') F(u(t')) dt'``
    with composite Simpson quadrature in ``t'`` over the current iterate.
    Iteration stops once the sup-in-time ``H^2`` distance between sweeps is
    below ``tol``.  If that distance grows three sweeps in a row the result
    is returned with status ``"non_contraction"``.
    """
    if p.gamma <= 0:
        raise ValueError("the Duhamel iteration needs gamma > 0")
    K = cfg.max_mode
    n = cfg.n_steps
    h = cfg.dt
    t = h * np.arange(n + 1)
    L = linear_symbol(np.arange(K + 1), p)
    # propagator at every lag: prop[m] = exp(L m h)
    prop = np.exp(np.outer(np.arange(n + 1) * h, L))
    c0 = phi.resize(K).coeffs
    free = prop * c0[None, :]
    N = _Nonlinearity(K, p)

    def sweep(U):
        F = np.stack([N(U[j]) for j in range(n + 1)])
        out = free.copy()
        for j in range(1, n + 1):
            integrand = prop[j::-1] * F[: j + 1]
            out[j] += integrate.simpson(integrand, dx=h, axis=0)
        return out

    U = free.copy()
    dists = []
    status = "completed"
    for _ in range(max_iter):
        new = sweep(U)
        d = max(_h2(new[j] - U[j]) for j in range(n + 1))
        U = new
        dists.append(d)
        if not np.all(np.isfinite(U)):
            status = "non_contraction"
            break
        if d < tol:
            break
        if len(dists) >= 4 and dists[-1] > dists[-2] > dists[-3] > dists[-4]:
            status = "non_contraction"
            break
    keep = sorted(set(range(0, n + 1, cfg.stride)) | {n})
    snaps = [SpectralField(U[j]) for j in keep]
    return Trajectory(t[keep], snaps, status, None, p, replace(cfg, stepper="PICARD"),
                      info={"iterations": len(dists), "distances": dists})


def duhamel_map(phi: SpectralField, path: list[SpectralField], p: EquationParams, dt: float) -> list[SpectralField]:
    """One application of the Duhamel map to a path sampled at ``t_j = j dt``."""
    K = phi.max_mode
    n = len(path) - 1
    L = linear_symbol(np.arange(K + 1), p)
    prop = np.exp(np.outer(np.arange(n + 1) * dt, L))
    N = _Nonlinearity(K, p)
    F = np.stack([N(u.resize(K).coeffs) for u in path])
    out = []
    for j in range(n + 1):
        c = prop[j] * phi.coeffs
        if j:
            c = c + integrate.simpson(prop[j::-1] * F[: j + 1], dx=dt, axis=0)
        out.append(SpectralField(c))
    return out


# ---------------------------------------------------------------------------
# parabolic smoothing


def smoothing_envelope(alpha: float) -> float:
    """``max_{x >= 0} x^alpha exp(-x^{5/2}) = (2 alpha / (5 e))^{2 alpha / 5}``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return (2 * alpha / (5 * math.e)) ** (2 * alpha / 5)


def smoothing_ratio(phi: SpectralField, t: float, gamma: float, alpha: float) -> float:
    """``||D^alpha U(t) phi|| (gamma t)^{2 alpha / 5} / ||phi||``."""
    k = phi.wavenumbers.astype(float)
    w = np.abs(phi.coeffs) ** 2
    w[1:] *= 2
    damped = w * k ** (2 * alpha) * np.exp(-2 * gamma * t * k**2.5)
    return math.sqrt(damped.sum() / w.sum()) * (gamma * t) ** (2 * alpha / 5)


def smoothing_constant(alpha: float, probes) -> float:
    """Largest observed smoothing ratio over ``probes`` of ``(t, gamma, phi)``.

    Raises ``AssertionError`` if the observed value exceeds the analytic
    envelope, which would mean the propagator is wrong.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    best = 0.0
    for t, gamma, phi in probes:
        if sobolev_norm(phi, 0) == 0:
            continue
        best = max(best, smoothing_ratio(phi, t, gamma, alpha))
    bound = smoothing_envelope(alpha)
    assert best <= bound + 1e-9, f"smoothing ratio {best} above envelope {bound}"
    return best
