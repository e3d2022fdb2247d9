"""Executable identities and empirical constants for the commutator/energy estimates.

Exact identities are checked to rounding error with exact-mode products.
Inequalities of the form ``LHS <= C * RHS`` are "verified" only in the weak
sense of a finite maximal ratio ``LHS / RHS`` over a random corpus that
stays put when the corpus grows or the bandwidth doubles.  That is evidence,
not a proof, and every report says so.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .fields import power_law_field, sample_rng, sample_seed
from .spectral import (
    SpectralField,
    bessel_inverse,
    bessel_symbol,
    dx,
    fractional_derivative,
    freq_bound_holds,
    hilbert,
    inner_l2,
    multiply,
    norm_sq,
    sobolev_norm,
)

IDENTITY_RTOL = 1e-12

DISCLAIMER = (
    "Ratios are empirical maxima over a finite random corpus; a bounded, "
    "refinement-stable ratio is evidence for the estimate, not a proof."
)


class IdentityViolation(AssertionError):
    """An exact identity failed beyond rounding tolerance."""


@dataclass(frozen=True)
class ConstantEstimate:
    """Largest observed ``LHS / RHS`` for one estimate over one corpus.

    ``lemma`` is a descriptive id such as ``"hilbert-commutator"``.
    ``argmax_seed`` is the per-sample seed of the worst probe (``None`` for
    hand-built probes).
    """

    lemma: str
    params: dict
    n_samples: int
    max_ratio: float
    argmax_seed: int | None = None
    corpus_seed: int | None = None
    n_skipped: int = 0

    def __post_init__(self):
        if not math.isfinite(self.max_ratio):
            raise ValueError(f"{self.lemma}: non-finite ratio {self.max_ratio}")

    def record(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CorpusSample:
    seed: int | None
    f: SpectralField
    g: SpectralField


@dataclass
class Corpus:
    """Random field pairs with power-law spectra and logged per-sample seeds.

    Field ``f`` of sample ``i`` has spectrum ``|k|^{-d}`` with ``d`` drawn from
    ``{rf + 2, rf + 0.51}`` (smooth or near-critical for ``H^{rf}``), and
    likewise ``g`` with ``rg``.  Each field is rescaled by a log-uniform
    factor in ``[0.1, 10]``.  Sample ``i`` depends only on ``(seed, i)``, and
    phases are drawn mode by mode, so doubling ``n`` or ``K`` extends rather
    than replaces the corpus.
    """

    samples: list[CorpusSample]
    seed: int
    max_mode: int
    regularity: tuple[float, float]

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)


def _random_field(K, r, rng):
    d = r + 2.0 if rng.random() < 0.5 else r + 0.51
    scale = 10.0 ** rng.uniform(-1.0, 1.0)
    f = power_law_field(K, d, rng)
    return f * (scale / math.sqrt(norm_sq(f)))


def random_corpus(n: int, K: int, regularity=(3.0, 3.0), seed: int = 0) -> Corpus:
    rf, rg = regularity
    samples = []
    for i in range(n):
        rng_f = sample_rng(seed, 2 * i)
        rng_g = sample_rng(seed, 2 * i + 1)
        samples.append(CorpusSample(sample_seed(seed, i), _random_field(K, rf, rng_f), _random_field(K, rg, rng_g)))
    return Corpus(samples, seed, K, (float(rf), float(rg)))


def _pairs(corpus) -> Iterable[tuple[int | None, SpectralField, SpectralField]]:
    for item in corpus:
        if isinstance(item, CorpusSample):
            yield item.seed, item.f, item.g
        else:
            f, g = item
            yield None, f, g


def _estimate(lemma, params, corpus, ratio: Callable) -> ConstantEstimate:
    best, arg, n, skipped = 0.0, None, 0, 0
    for seed, f, g in _pairs(corpus):
        n += 1
        num, den = ratio(f, g)
        if den == 0:
            skipped += 1  # 0/0 probes (a zero field) carry no information
            continue
        r = abs(num) / den
        if r > best or arg is None:
            best, arg = r, seed
    return ConstantEstimate(lemma, params, n, best, arg, getattr(corpus, "seed", None), skipped)


def _require_identity(name, lhs, rhs, scale):
    if abs(lhs - rhs) > IDENTITY_RTOL * max(scale, 1e-300):
        raise IdentityViolation(f"{name}: |{lhs!r} - {rhs!r}| exceeds {IDENTITY_RTOL} x {scale:.3e}")


def _hs(f, s):
    return sobolev_norm(f, s)


def _l2(f):
    return math.sqrt(norm_sq(f))


def _mul(f, g):
    return multiply(f, g, "exact")


# ---------------------------------------------------------------------------
# exact identities


def cancellation_terms(u: SpectralField) -> tuple[float, float]:
    """``<H d(u u_x), u>`` and ``<d(u H u_x), u>``; they sum to zero."""
    ux = dx(u)
    return inner_l2(hilbert(dx(_mul(u, ux))), u), inner_l2(dx(_mul(u, hilbert(ux))), u)


def check_cancellation(u: SpectralField) -> float:
    """``|<H d(u u_x), u> + <d(u H u_x), u>|``, computed with exact products."""
    a, b = cancellation_terms(u)
    return abs(a + b)


def good1_sides(f: SpectralField, g: SpectralField, h: SpectralField) -> tuple[float, float]:
    """Both sides of ``<f'''g, h> + <f g''', h> + <f g, h'''> = 3 <f' g', h'>``."""
    lhs = (
        inner_l2(_mul(dx(f, 3), g), h)
        + inner_l2(_mul(f, dx(g, 3)), h)
        + inner_l2(_mul(f, g), dx(h, 3))
    )
    return lhs, 3.0 * inner_l2(_mul(dx(f), dx(g)), dx(h))


def check_good1(f: SpectralField, g: SpectralField, h: SpectralField) -> float:
    """Residual of the triple third-derivative identity."""
    lhs, rhs = good1_sides(f, g, h)
    return abs(lhs - rhs)


def ibp_sides(f: SpectralField, g: SpectralField) -> tuple[float, float]:
    """``<f g_x, g>`` and ``-1/2 <f_x g, g>``."""
    return inner_l2(_mul(f, dx(g)), g), -0.5 * inner_l2(_mul(dx(f), g), g)


def reduction_sides(v: SpectralField, u: SpectralField) -> tuple[float, float]:
    """``2 <v H u_xx + v_x H u_x, u>`` and ``-<[H, v] u_xx, u> - <v_xx H u, u>``."""
    uxx = dx(u, 2)
    lhs = 2.0 * inner_l2(_mul(v, hilbert(uxx)) + _mul(dx(v), hilbert(dx(u))), u)
    rhs = -inner_l2(hilbert_commutator(v, uxx), u) - inner_l2(_mul(dx(v, 2), hilbert(u)), u)
    return lhs, rhs


def _identity_scale(*norms):
    return float(np.prod([1.0 + n for n in norms]))


# ---------------------------------------------------------------------------
# commutator remainders


def compute_Ps(f: SpectralField, g: SpectralField, s: float, literal: bool = False) -> SpectralField:
    """``D^s d(f g_x) - (D^s f_x) g_x - f D^s g_xx - (s+1) f_x D^s g_x``.

    With ``literal=True`` the third term is ``f_x D^s g_xx`` instead; that
    form does not vanish for constant ``f`` and is kept for comparison only.
    """
    return _remainder(f, g, s, literal, lambda v: fractional_derivative(v, s))


def compute_Qs(f: SpectralField, g: SpectralField, s: float, literal: bool = False) -> SpectralField:
    """``P_s`` with ``D^s`` replaced by ``H D^s`` throughout."""
    return _remainder(f, g, s, literal, lambda v: hilbert(fractional_derivative(v, s)))


def _remainder(f, g, s, literal, A):
    if s < 1:
        raise ValueError(f"the commutator remainder needs s >= 1, got {s}")
    fx, gx = dx(f), dx(g)
    third_weight = fx if literal else f
    out = (
        A(dx(_mul(f, gx)))
        - _mul(A(fx), gx)
        - _mul(third_weight, A(dx(g, 2)))
        - (s + 1) * _mul(fx, A(gx))
    )
    return out


def check_commutator_bounds(corpus, s: float, s0: float) -> ConstantEstimate:
    """``max(||P_s||, ||Q_s||) / (||f||_{s0} ||g||_s + ||f||_s ||g||_{s0})``."""
    _need(s >= 1 and s0 > 2.5, "needs s >= 1 and s0 > 5/2")

    def ratio(f, g):
        num = max(_l2(compute_Ps(f, g, s)), _l2(compute_Qs(f, g, s)))
        return num, _hs(f, s0) * _hs(g, s) + _hs(f, s) * _hs(g, s0)

    return _estimate("commutator-remainder", {"s": s, "s0": s0}, corpus, ratio)


def hilbert_commutator(f: SpectralField, h: SpectralField) -> SpectralField:
    """``[H, f] h = H(f h) - f H h``."""
    return hilbert(_mul(f, h)) - _mul(f, hilbert(h))


def check_hilbert_commutator(corpus, s0: float, k: int) -> ConstantEstimate:
    """``||[H, f] d^k g|| / (||f||_{H^{s0+k}} ||g||)``."""
    _need(k >= 1 and s0 > 0.5, "needs k >= 1 and s0 > 1/2")

    def ratio(f, g):
        return _l2(hilbert_commutator(f, dx(g, k))), _hs(f, s0 + k) * _l2(g)

    return _estimate("hilbert-commutator", {"s0": s0, "k": k}, corpus, ratio)


def lambda_multiplier(s: float, kind: str) -> Callable[[SpectralField], SpectralField]:
    """``D^s`` (``kind="D"``) or ``D^{s-1} d_x`` (``kind="Ddx"``)."""
    if kind == "D":
        return lambda v: fractional_derivative(v, s)
    if kind == "Ddx":
        return lambda v: fractional_derivative(dx(v), s - 1)
    raise ValueError(f"unknown multiplier kind {kind!r}; use 'D' or 'Ddx'")


def commutator(A: Callable, f: SpectralField, h: SpectralField) -> SpectralField:
    """``[A, f] h = A(f h) - f A h``."""
    return A(_mul(f, h)) - _mul(f, A(h))


def check_comm_est2(corpus, s: float, s0: float, variant: str, kind: str = "D") -> ConstantEstimate:
    """Multiplier commutators.

    variant ``"i"``: ``||[L_s, f] g_x|| / (||f||_{s0+1} ||g||_s + ||f||_s ||g||_{s0+1})``;
    variant ``"ii"``: ``||[<D>^{-1} L_2, f] g|| / (||f||_{s0+1} ||g||)``;
    with ``L_s`` chosen by ``kind``.
    """
    _need(s >= 1 and s0 > 0.5, "needs s >= 1 and s0 > 1/2")
    if variant == "i":
        A = lambda_multiplier(s, kind)

        def ratio(f, g):
            num = _l2(commutator(A, f, dx(g)))
            return num, _hs(f, s0 + 1) * _hs(g, s) + _hs(f, s) * _hs(g, s0 + 1)

    elif variant == "ii":
        L2 = lambda_multiplier(2, kind)

        def A(v):
            return bessel_inverse(L2(v))

        def ratio(f, g):
            return _l2(commutator(A, f, g)), _hs(f, s0 + 1) * _l2(g)

    else:
        raise ValueError(f"unknown variant {variant!r}; use 'i' or 'ii'")
    return _estimate(f"multiplier-commutator-{variant}", {"s": s, "s0": s0, "kind": kind}, corpus, ratio)


def check_ibp(corpus, s0: float) -> ConstantEstimate:
    """Checks ``<f g_x, g> = -1/2 <f_x g, g>`` then bounds it by ``||f||_{s0+1} ||g||^2``."""
    _need(s0 > 0.5, "needs s0 > 1/2")

    def ratio(f, g):
        lhs, rhs = ibp_sides(f, g)
        _require_identity("integration by parts", lhs, rhs, _identity_scale(_hs(f, 1), _hs(g, 1)) ** 2)
        return lhs, _hs(f, s0 + 1) * norm_sq(g)

    return _estimate("integration-by-parts", {"s0": s0}, corpus, ratio)


def check_reduction(corpus, s0: float) -> ConstantEstimate:
    """Checks the Hilbert-commutator rewriting, then bounds
    ``|<v H u_xx + v_x H u_x, u>|`` by ``||v||_{s0+2} ||u||^2`` (``v = f, u = g``)."""
    _need(s0 > 0.5, "needs s0 > 1/2")

    def ratio(v, u):
        lhs, rhs = reduction_sides(v, u)
        _require_identity("hilbert reduction", lhs, rhs, _identity_scale(_hs(v, 2), _hs(u, 2)) ** 2)
        return 0.5 * lhs, _hs(v, s0 + 2) * norm_sq(u)

    return _estimate("hilbert-reduction", {"s0": s0}, corpus, ratio)


# ---------------------------------------------------------------------------
# interpolation and per-mode bounds


def lp_norm(f: SpectralField, p: float, oversample: int = 8) -> float:
    """``L^p(T)`` norm from an oversampled grid; ``p = inf`` takes the maximum."""
    n = oversample * (2 * f.max_mode + 2)
    v = np.abs(f.values(n))
    if math.isinf(p):
        return float(v.max())
    return float((2 * np.pi * np.mean(v**p)) ** (1.0 / p))


def check_gagliardo_nirenberg(corpus, l: int, s: float, p: float) -> ConstantEstimate:
    """``||d^l f||_p / (||f||^{1-a} ||D^s f||^a [+ ||f|| if l = 0])``, ``a = (l + 1/2 - 1/p)/s``.

    Uses the first field of each sample.
    """
    if not (l >= 0 and int(l) == l and s >= 1 and l <= s - 1):
        raise ValueError("needs integer 0 <= l <= s - 1 and s >= 1")
    if not (2 <= p <= math.inf):
        raise ValueError("needs 2 <= p <= inf")
    alpha = (l + 0.5 - (0.0 if math.isinf(p) else 1.0 / p)) / s

    def ratio(f, _g):
        l2 = _l2(f)
        den = l2 ** (1 - alpha) * _l2(fractional_derivative(f, s)) ** alpha
        if l == 0:
            den += l2
        return lp_norm(dx(f, int(l)), p), den

    return _estimate("gagliardo-nirenberg", {"l": int(l), "s": s, "p": p}, corpus, ratio)


def check_freq_est(k_max: int) -> bool:
    """``|sgn k - k <k>^{-1}| <= <k>^{-1}`` for all ``|k| <= k_max``, in exact integer arithmetic."""
    return all(freq_bound_holds(k) for k in range(-int(k_max), int(k_max) + 1))


def freq_est_residual(f: SpectralField, k: int) -> tuple[float, float]:
    """``||H d^k f + <D>^{-1} d^{k+1} f||`` and ``||f||_{H^{k-1}}`` (Bessel convention)."""
    lhs = hilbert(dx(f, k)) + bessel_inverse(dx(f, k + 1))
    kk = f.wavenumbers
    w = np.abs(f.coeffs) ** 2
    w[1:] *= 2
    rhs = math.sqrt(float(np.sum(w * bessel_symbol(kk, -2.0 * (k - 1)))))
    return _l2(lhs), rhs


# ---------------------------------------------------------------------------
# pairings used in the energy estimates


def check_good2(corpus, s: float, s0: float, part: str) -> ConstantEstimate:
    """Paired-commutator bounds with ``f1 = f``, ``f2 = g``.

    part ``"i"``:  ``|<f1 H D^s f2, H D^s (f1 f2_x)>|``, needs ``s >= 1``;
    part ``"ii"``: ``|<f1 H D^s d(f1 H f2_x), D^{s-2} f2_x>|``, needs ``s >= 2``;
    both over ``||f1||_{s0}^2 ||f2||_s^2 + ||f1||_{s0} ||f1||_s ||f2||_{s0} ||f2||_s``.
    """
    _need(s0 > 2.5, "needs s0 > 5/2")
    HDs = lambda v: hilbert(fractional_derivative(v, s))  # noqa: E731
    if part == "i":
        _need(s >= 1, "part (i) needs s >= 1")

        def pairing(f1, f2):
            return inner_l2(_mul(f1, HDs(f2)), HDs(_mul(f1, dx(f2))))

    elif part == "ii":
        _need(s >= 2, "part (ii) needs s >= 2")

        def pairing(f1, f2):
            inner = _mul(f1, hilbert(dx(f2)))
            return inner_l2(_mul(f1, HDs(dx(inner))), fractional_derivative(dx(f2), s - 2))

    else:
        raise ValueError(f"unknown part {part!r}; use 'i' or 'ii'")

    def ratio(f1, f2):
        a, b = _hs(f1, s0), _hs(f2, s)
        return pairing(f1, f2), a * a * b * b + a * _hs(f1, s) * _hs(f2, s0) * b

    return _estimate(f"paired-commutator-{part}", {"s": s, "s0": s0}, corpus, ratio)


def difference_loss_lhs(u: SpectralField, v: SpectralField, s: float) -> float:
    """Sum of the two difference pairings after removing their top-order parts (``w = u - v``)."""
    w = u - v
    K = max(u.max_mode, v.max_mode)
    u, v = u.resize(K), v.resize(K)
    Dsw = fractional_derivative(w, s)
    top = inner_l2(_mul(dx(u), hilbert(fractional_derivative(dx(w), s))), Dsw)
    quad1 = _mul(u, hilbert(dx(u))) - _mul(v, hilbert(dx(v)))
    quad2 = _mul(u, dx(u)) - _mul(v, dx(v))
    t1 = inner_l2(fractional_derivative(dx(quad1), s), Dsw) - s * top
    t2 = inner_l2(hilbert(fractional_derivative(dx(quad2), s)), Dsw) - (s + 1) * top
    return abs(t1) + abs(t2)


def difference_loss_rhs(u: SpectralField, v: SpectralField, s: float, s0: float) -> float:
    w = u - v
    return _hs(w, s) * (
        (_hs(u, s0) + _hs(v, s0)) * _hs(w, s)
        + (_hs(u, s) + _hs(v, s)) * _hs(w, s0)
        + _hs(w, s0 - 2) * _hs(v, s + 2)
        + _hs(w, s0 - 1) * _hs(v, s + 1)
    )


def check_dl1(corpus, s: float, s0: float) -> ConstantEstimate:
    """Difference-loss bound with ``u = f``, ``v = g``."""
    _need(s >= 1 and s0 > 2.5, "needs s >= 1 and s0 > 5/2")
    return _estimate(
        "difference-loss",
        {"s": s, "s0": s0},
        corpus,
        lambda u, v: (difference_loss_lhs(u, v, s), difference_loss_rhs(u, v, s, s0)),
    )


def _need(ok, msg):
    if not ok:
        raise ValueError(msg)


# ---------------------------------------------------------------------------
# reports


@dataclass
class LabReport:
    estimates: list[ConstantEstimate] = field(default_factory=list)
    identities: dict = field(default_factory=dict)
    note: str = DISCLAIMER

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "note": self.note,
            "identities": self.identities,
            "estimates": [e.record() for e in self.estimates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def identity_residuals(fields: Sequence[SpectralField], s: float = 3.0) -> dict[str, float]:
    """Worst relative residual of every exact identity over ``fields``.

    Triples for the trilinear identities are consecutive fields (cyclically).
    """
    worst = {"cancellation": 0.0, "third-derivative": 0.0, "integration-by-parts": 0.0,
             "hilbert-reduction": 0.0, "remainder-constant": 0.0}
    n = len(fields)
    for i, u in enumerate(fields):
        g, h = fields[(i + 1) % n], fields[(i + 2) % n]
        a, b = cancellation_terms(u)
        worst["cancellation"] = max(worst["cancellation"], abs(a + b) / _identity_scale(_hs(u, 2)) ** 3)
        lhs, rhs = good1_sides(u, g, h)
        worst["third-derivative"] = max(
            worst["third-derivative"], abs(lhs - rhs) / _identity_scale(_hs(u, 3), _hs(g, 3), _hs(h, 3))
        )
        lhs, rhs = ibp_sides(u, g)
        worst["integration-by-parts"] = max(
            worst["integration-by-parts"], abs(lhs - rhs) / _identity_scale(_hs(u, 1), _hs(g, 1)) ** 2
        )
        lhs, rhs = reduction_sides(u, g)
        worst["hilbert-reduction"] = max(
            worst["hilbert-reduction"], abs(lhs - rhs) / _identity_scale(_hs(u, 2), _hs(g, 2)) ** 2
        )
        const = SpectralField.from_modes({0: float(u.coeffs[0].real) or 1.0}, u.max_mode)
        for P in (compute_Ps, compute_Qs):
            r = _l2(P(const, u, s)) / _identity_scale(abs(const.coeffs[0]), _hs(u, s + 2))
            worst["remainder-constant"] = max(worst["remainder-constant"], r)
    return worst


def standard_estimates(K: int, n: int, seed: int = 0, s: float = 3.0, s0: float = 2.6) -> list[ConstantEstimate]:
    """The commutator-family estimates on corpora matched to each bound's norms."""
    C = lambda rf, rg: random_corpus(n, K, (rf, rg), seed)  # noqa: E731
    top = max(s, s0)
    return [
        check_commutator_bounds(C(top, top), s, s0),
        check_comm_est2(C(top + 1, top + 1), s, s0, "i", "D"),
        check_comm_est2(C(top + 1, top + 1), s, s0, "i", "Ddx"),
        check_comm_est2(C(s0 + 1, 0.0), s, s0, "ii", "D"),
        check_comm_est2(C(s0 + 1, 0.0), s, s0, "ii", "Ddx"),
        check_hilbert_commutator(C(s0 + 1, 0.0), s0, 1),
        check_hilbert_commutator(C(s0 + 2, 0.0), s0, 2),
        check_good2(C(top, top + 1), s, s0, "i"),
        check_good2(C(top, top + 1), s, s0, "ii"),
        check_dl1(C(top, s + 2), s, s0),
    ]
