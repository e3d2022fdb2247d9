"""Modified energies with the derivative-loss correction term.

For ``s >= 2`` and ``w = f - g``::

    E_s(f, g; a) = a ||w||^2 + ||D^s w||^2 + lam(s) int f (H D^s w)(D^{s-2} w_x) dx
    E_s(f; b)    = E_s(f, 0; 1) + b ||f||^{4s+2}
    Etilde(f, g; c) = c ||w||_{H^{-1}}^2 + ||w||^2 - lam(0) int f (<D>^{-1} w) w dx

with ``lam(s) = -2((c1 + c2) s + c2) / 3``.  The correction integrals are
evaluated with exact products, so they are exact for trigonometric
polynomials.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .fields import power_law_field, sample_rng
from .spectral import (
    SpectralField,
    bessel_inverse,
    dx,
    fractional_derivative,
    hilbert,
    inner_l2,
    integral3,
    multiply,
    norm_sq,
    sobolev_norm_sq,
)

GRID = tuple(2.0**j for j in range(41))
MARGIN = 1.1


class CalibrationError(RuntimeError):
    pass


def lambda_coeff(s: float, c1: float, c2: float) -> float:
    if s < 0:
        raise ValueError("lambda(s) is defined for s >= 0")
    return -2.0 * ((c1 + c2) * s + c2) / 3.0


@dataclass(frozen=True)
class EnergyCalibration:
    s: float
    s0: float
    c1: float
    c2: float
    a: float
    b: float
    c: float
    K: float
    lambda_s: float = float("nan")
    upper: dict = field(default_factory=dict)
    seed: int | None = None
    n_probes: int = 0

    def __post_init__(self):
        if self.s < 2:
            raise ValueError(f"energy index s must be >= 2, got {self.s}")
        if not self.s0 > 2.5:
            raise ValueError(f"s0 must exceed 5/2, got {self.s0}")
        if min(self.a, self.b, self.c) < 0:
            raise ValueError("a, b, c must be nonnegative")
        if not self.K > 0:
            raise ValueError("K must be positive")
        lam = lambda_coeff(self.s, self.c1, self.c2)
        if math.isnan(self.lambda_s):
            object.__setattr__(self, "lambda_s", lam)
        elif not math.isclose(self.lambda_s, lam, rel_tol=1e-12, abs_tol=1e-15):
            raise ValueError("lambda_s inconsistent with (s, c1, c2)")

    @property
    def lambda_0(self) -> float:
        return lambda_coeff(0.0, self.c1, self.c2)

    def to_json(self) -> str:
        return json.dumps({"format_version": 1, **asdict(self)}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EnergyCalibration":
        d = json.loads(text)
        d.pop("format_version", None)
        return cls(**d)


@dataclass(frozen=True)
class EnergyReport:
    """Unweighted addends of an energy and their weighted total.

    ``ds_sq`` is ``||D^s w||^2`` for the ``H^s`` energies; ``hm1_sq`` is
    ``||w||_{H^{-1}}^2`` for the ``L^2`` one.  ``correction`` is the bare
    integral, before multiplication by ``lambda``.
    """

    l2_sq: float
    ds_sq: float
    correction: float
    power_term: float
    total: float
    hm1_sq: float = 0.0


# ---------------------------------------------------------------------------
# correction integrals


def _hds(w, s):
    return hilbert(fractional_derivative(w, s))


def _ds2dx(w, s):
    return fractional_derivative(dx(w, 1), s - 2)


def correction_integral(f: SpectralField, w: SpectralField, s: float) -> float:
    """``int f (H D^s w)(D^{s-2} w_x) dx``."""
    return integral3(f, _hds(w, s), _ds2dx(w, s))


def tilde_correction_integral(f: SpectralField, w: SpectralField) -> float:
    """``int f (<D>^{-1} w) w dx``."""
    return integral3(f, bessel_inverse(w), w)


def _check_s(s):
    if s < 2:
        raise ValueError(f"energy index s must be >= 2, got {s}")


# ---------------------------------------------------------------------------
# energies


def energy_pair(f: SpectralField, g: SpectralField, cal: EnergyCalibration, a: float | None = None) -> EnergyReport:
    s = cal.s
    _check_s(s)
    a = cal.a if a is None else a
    w = f - g
    l2 = norm_sq(w)
    ds = norm_sq(fractional_derivative(w, s))
    corr = correction_integral(f, w, s)
    return EnergyReport(l2, ds, corr, 0.0, a * l2 + ds + cal.lambda_s * corr)


def energy_single(f: SpectralField, cal: EnergyCalibration, b: float | None = None) -> EnergyReport:
    s = cal.s
    _check_s(s)
    b = cal.b if b is None else b
    l2 = norm_sq(f)
    ds = norm_sq(fractional_derivative(f, s))
    corr = correction_integral(f, f, s)
    power = l2 ** (2 * s + 1)
    return EnergyReport(l2, ds, corr, power, l2 + ds + cal.lambda_s * corr + b * power)


def energy_tilde(f: SpectralField, g: SpectralField, cal: EnergyCalibration, c: float | None = None) -> EnergyReport:
    c = cal.c if c is None else c
    w = f - g
    l2 = norm_sq(w)
    hm1 = sobolev_norm_sq(w, -1)
    corr = tilde_correction_integral(f, w)
    return EnergyReport(l2, 0.0, corr, 0.0, c * hm1 + l2 - cal.lambda_0 * corr, hm1_sq=hm1)


# ---------------------------------------------------------------------------
# time derivatives along a flow (exact chain rule)


def correction_rate(f, w, df, dw, s):
    """Derivative of ``int f (H D^s w)(D^{s-2} w_x)`` when ``f, w`` move with velocities ``df, dw``."""
    A, B = _hds(w, s), _ds2dx(w, s)
    return integral3(df, A, B) + integral3(f, _hds(dw, s), B) + integral3(f, A, _ds2dx(dw, s))


def energy_single_rate(f: SpectralField, df: SpectralField, cal: EnergyCalibration) -> float:
    s = cal.s
    Ds = lambda v: fractional_derivative(v, s)  # noqa: E731
    l2 = norm_sq(f)
    d_l2 = 2 * inner_l2(f, df)
    d_ds = 2 * inner_l2(Ds(f), Ds(df))
    d_corr = correction_rate(f, f, df, df, s)
    d_power = (2 * s + 1) * l2 ** (2 * s) * d_l2
    return d_l2 + d_ds + cal.lambda_s * d_corr + cal.b * d_power


def energy_pair_rate(f, g, df, dg, cal: EnergyCalibration) -> float:
    s = cal.s
    w, dw = f - g, df - dg
    Ds = lambda v: fractional_derivative(v, s)  # noqa: E731
    return (
        2 * cal.a * inner_l2(w, dw)
        + 2 * inner_l2(Ds(w), Ds(dw))
        + cal.lambda_s * correction_rate(f, w, df, dw, s)
    )


def energy_tilde_rate(f, g, df, dg, cal: EnergyCalibration) -> float:
    w, dw = f - g, df - dg
    Bw, Bdw = bessel_inverse(w), bessel_inverse(dw)
    d_hm1 = 2 * inner_l2(Bw, Bdw)
    d_corr = integral3(df, Bw, w) + integral3(f, Bdw, w) + integral3(f, Bw, dw)
    return cal.c * d_hm1 + 2 * inner_l2(w, dw) - cal.lambda_0 * d_corr


# ---------------------------------------------------------------------------
# calibration


def _adversary(direction: SpectralField, lam: float, radius: float, max_mode: int) -> SpectralField:
    """Field of L^2 norm ``radius`` minimizing ``lam * <f, direction>``."""
    d = direction.resize(max_mode)
    n = math.sqrt(norm_sq(d))
    if n == 0:
        return SpectralField.zeros(max_mode)
    return d * (-math.copysign(radius, lam) / n)


def probe_corpus(n: int, s: float, K: float, c1: float, c2: float, seed: int = 0, max_mode: int = 32):
    """Field pairs ``(f, g)`` with ``||f|| <= K`` for calibrating the energy constants.

    Four probe families rotate through the corpus:

    0. random pairs with power-law spectra (smooth ``s+2`` and critical ``s+0.51`` decay);
    1. low-frequency ``w = f - g`` with ``f`` the L^2-ball maximizer of the
       ``E_s`` correction for that ``w`` (``||f|| = K``);
    2. the same for the ``Etilde`` correction;
    3. ``g = 0`` and ``f`` along a random direction, scaled to the amplitude
       where the cubic correction hurts ``E_s(f; b)`` most.
    """
    lam_s = lambda_coeff(s, c1, c2)
    lam_0 = lambda_coeff(0.0, c1, c2)
    out = []
    for i in range(n):
        rng = sample_rng(seed, i)
        family = i % 4
        if family == 0:
            f = power_law_field(max_mode, rng.choice([s + 2, s + 0.51, 1.0]), rng)
            f = f * (K * rng.uniform(0.05, 1.0) / math.sqrt(norm_sq(f)))
            w = power_law_field(max_mode, rng.choice([s + 2, s + 0.51, 1.5]), rng)
            w = w * rng.lognormal(0.0, 1.0)
        else:
            m = int(rng.integers(1, 5))
            w = power_law_field(m, rng.uniform(0.0, 2.0), rng).resize(max_mode) * rng.lognormal(0.0, 1.0)
            if family == 1:
                prod = multiply(_hds(w, s), _ds2dx(w, s), "exact")
                f = _adversary(prod, lam_s, K, max_mode)
            elif family == 2:
                prod = multiply(bessel_inverse(w), w, "exact")
                f = _adversary(prod, -lam_0, K, max_mode)
            else:
                d = w * (1.0 / math.sqrt(norm_sq(w)))
                kappa = lam_s * correction_integral(d, d, s)
                q = norm_sq(d) + norm_sq(fractional_derivative(d, s))
                # worst amplitude of (|kappa| t^3 - (1 - 0.55) q t^2) / t^{4s+2}
                t = 4 * s * 0.45 * q / ((4 * s - 1) * abs(kappa)) if kappa < 0 else K * rng.uniform(0.05, 1.0)
                t = min(t, K)
                out.append((d * t, SpectralField.zeros(max_mode)))
                continue
        out.append((f, f - w))
    return out


def _needed(required_weight: np.ndarray) -> float:
    need = float(np.max(required_weight, initial=0.0))
    for v in GRID:
        if v >= need:
            return v
    raise CalibrationError(
        f"no constant up to 2^40 satisfies the lower bound (need {need:.3g}); "
        "a probe probably violates ||f|| <= K"
    )


def calibrate(
    s: float,
    s0: float,
    K: float,
    probe_corpus_pairs=None,
    c1: float = math.sqrt(3) / 2,
    c2: float = math.sqrt(3) / 2,
    seed: int = 0,
    n_probes: int = 400,
) -> EnergyCalibration:
    """Smallest ``a, b, c`` on the grid ``{2^j}`` making the lower bounds hold on every probe.

    The bounds are ``||w||_{H^s}^2 <= E_s(f, g; a)``, ``||f||_{H^s}^2 <= E_s(f; b)``
    and ``||w||^2 / 2 <= Etilde(f, g; c)``, each enforced with a 10% margin.
    Every energy is affine in its constant, so the required value per probe
    is solved for directly.  Upper constants (max energy over the matching
    norm) are stored in ``upper``.
    """
    if probe_corpus_pairs is None:
        probe_corpus_pairs = probe_corpus(n_probes, s, K, c1, c2, seed)
    probe = EnergyCalibration(s=s, s0=s0, c1=c1, c2=c2, a=0, b=0, c=0, K=K)
    need_a, need_b, need_c = [], [], []
    rows = []
    for f, g in probe_corpus_pairs:
        w = f - g
        ep = energy_pair(f, g, probe, a=0.0)
        es = energy_single(f, probe, b=0.0)
        et = energy_tilde(f, g, probe, c=0.0)
        hs_w = sobolev_norm_sq(w, s)
        hs_f = sobolev_norm_sq(f, s)
        if ep.l2_sq > 0:
            need_a.append((MARGIN * hs_w - ep.total) / ep.l2_sq)
        if es.power_term > 0:
            need_b.append((MARGIN * hs_f - es.total) / es.power_term)
        if et.hm1_sq > 0:
            need_c.append((MARGIN * 0.5 * et.l2_sq - et.total) / et.hm1_sq)
        rows.append((ep, es, et, hs_w, hs_f))
    a, b, c = _needed(np.array(need_a)), _needed(np.array(need_b)), _needed(np.array(need_c))
    up_pair = up_single = up_tilde = 0.0
    for ep, es, et, hs_w, hs_f in rows:
        if hs_w > 0:
            up_pair = max(up_pair, (a * ep.l2_sq + ep.total) / hs_w)
        if hs_f > 0:
            up_single = max(up_single, (es.total + b * es.power_term) / ((1 + es.l2_sq ** (2 * s)) * hs_f))
        if et.l2_sq > 0:
            up_tilde = max(up_tilde, (c * et.hm1_sq + et.total) / et.l2_sq)
    return EnergyCalibration(
        s=s, s0=s0, c1=c1, c2=c2, a=a, b=b, c=c, K=K,
        upper={"pair": up_pair, "single": up_single, "tilde": up_tilde},
        seed=seed, n_probes=len(rows),
    )


def sandwich_violations(pairs, cal: EnergyCalibration) -> dict[str, int]:
    """Count probes breaking each lower bound (constants 1, 1, 1/2), without margin."""
    bad = {"pair": 0, "single": 0, "tilde": 0}
    for f, g in pairs:
        w = f - g
        if energy_pair(f, g, cal).total < sobolev_norm_sq(w, cal.s) * (1 - 1e-12):
            bad["pair"] += 1
        if energy_single(f, cal).total < sobolev_norm_sq(f, cal.s) * (1 - 1e-12):
            bad["single"] += 1
        if energy_tilde(f, g, cal).total < 0.5 * norm_sq(w) * (1 - 1e-12):
            bad["tilde"] += 1
    return bad
