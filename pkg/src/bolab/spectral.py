"""Fourier-side representation of real functions on the torus.

A field is stored by its nonnegative-frequency coefficients ``c_k``,
``k = 0..K``; negative frequencies follow from Hermitian symmetry
``c_{-k} = conj(c_k)``.  The normalization is the unitary one,

    c_k = (2 pi)^{-1/2} int_T f(x) exp(-i k x) dx,

so that ``<f, g> = sum_k c_k(f) conj(c_k(g))`` is the plain L^2 pairing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import fft as sfft

SQRT_2PI = np.sqrt(2.0 * np.pi)
# exact products up to this degree use direct convolution
DIRECT_PRODUCT_MAX = 1024


class SpectralField:
    """Real trigonometric polynomial of degree ``max_mode``.

    Instances are immutable: the coefficient array is copied and locked.

    Parameters
    ----------
    coeffs : array_like of complex
        Coefficients ``c_0, ..., c_K``.  ``c_0`` must be real up to
        rounding; its imaginary part is discarded.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=np.complex128).reshape(-1)
        if c.size == 0:
            raise ValueError("a field needs at least the k=0 coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite Fourier coefficient")
        scale = max(1.0, float(np.max(np.abs(c))))
        if abs(c[0].imag) > 1e-12 * scale:
            raise ValueError("imaginary mean: field would not be real-valued")
        c[0] = c[0].real
        c.setflags(write=False)
        self._c = c

    # -- construction -----------------------------------------------------
    @classmethod
    def zeros(cls, max_mode: int) -> "SpectralField":
        return cls(np.zeros(max_mode + 1, dtype=np.complex128))

    @classmethod
    def from_modes(cls, modes: dict[int, complex], max_mode: int | None = None) -> "SpectralField":
        """Build from ``{k: c_k}`` with ``k >= 0``."""
        kmax = max(modes) if modes else 0
        K = kmax if max_mode is None else max_mode
        if kmax > K or min(modes, default=0) < 0:
            raise ValueError("mode outside 0..max_mode")
        c = np.zeros(K + 1, dtype=np.complex128)
        for k, v in modes.items():
            c[k] = v
        return cls(c)

    @classmethod
    def from_full(cls, full) -> "SpectralField":
        """Build from coefficients ordered ``k = -K..K``; checks Hermitian symmetry."""
        full = np.asarray(full, dtype=np.complex128)
        if full.size % 2 != 1:
            raise ValueError("full coefficient vector must have odd length")
        K = full.size // 2
        pos = full[K:]
        neg = full[K::-1]
        if not np.allclose(neg, np.conj(pos), rtol=0.0, atol=1e-13 * max(1.0, np.abs(full).max())):
            raise ValueError("coefficients are not Hermitian-symmetric")
        return cls(pos)

    @classmethod
    def from_values(cls, values, max_mode: int | None = None) -> "SpectralField":
        """Interpolate grid samples at ``x_j = 2 pi j / n``, keeping modes up to ``max_mode``."""
        v = np.asarray(values, dtype=float)
        n = v.size
        K = (n - 1) // 2 if max_mode is None else max_mode
        if 2 * K >= n:
            raise ValueError(f"{n} samples cannot resolve max_mode={K}")
        return cls(_from_grid(v, K))

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], max_mode: int) -> "SpectralField":
        """Project ``func`` onto modes ``|k| <= max_mode`` using ``4 max_mode + 4`` samples."""
        n = 4 * max_mode + 4
        return cls.from_values(func(grid(n)), max_mode)

    # -- access -------------------------------------------------------------
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def max_mode(self) -> int:
        return self._c.size - 1

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(self._c.size)

    def full(self) -> np.ndarray:
        """Coefficients for ``k = -K..K``."""
        return np.concatenate([np.conj(self._c[:0:-1]), self._c])

    def values(self, n: int | None = None) -> np.ndarray:
        """Samples on the uniform ``n``-point grid (default ``2K + 2``)."""
        n = 2 * self.max_mode + 2 if n is None else n
        if n < 2 * self.max_mode + 1:
            raise ValueError("grid too coarse for this field")
        return _to_grid(self._c, n)

    def resize(self, max_mode: int) -> "SpectralField":
        """Zero-pad or truncate to a new bandwidth."""
        c = np.zeros(max_mode + 1, dtype=np.complex128)
        m = min(max_mode, self.max_mode)
        c[: m + 1] = self._c[: m + 1]
        return SpectralField(c)

    def is_hermitian(self) -> bool:
        f = self.full()
        return bool(np.array_equal(f[::-1], np.conj(f)))

    # -- vector space -------------------------------------------------------
    def _binary(self, other, op):
        if not isinstance(other, SpectralField):
            return NotImplemented
        K = max(self.max_mode, other.max_mode)
        return SpectralField(op(self.resize(K)._c, other.resize(K)._c))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return SpectralField(-self._c)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField) or not np.isscalar(scalar) or np.iscomplexobj(scalar):
            return NotImplemented
        return SpectralField(self._c * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __repr__(self):
        return f"SpectralField(max_mode={self.max_mode})"


# ---------------------------------------------------------------------------
# grid transforms (array level; used by the time steppers directly)


def grid(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def _to_grid(c: np.ndarray, n: int) -> np.ndarray:
    half = np.zeros(n // 2 + 1, dtype=np.complex128)
    m = min(c.size, half.size)
    half[:m] = c[:m]
    return sfft.irfft(half, n) * (n / SQRT_2PI)


def _from_grid(v: np.ndarray, K: int) -> np.ndarray:
    n = v.shape[-1]
    return sfft.rfft(v)[..., : K + 1] * (SQRT_2PI / n)


def product_grid_size(band: int) -> int:
    """Smallest FFT-friendly even grid resolving a real polynomial of degree ``band``."""
    return sfft.next_fast_len(2 * band + 2, real=True)


# ---------------------------------------------------------------------------
# multipliers


def apply_multiplier(f: SpectralField, symbol: Callable[[np.ndarray], np.ndarray]) -> SpectralField:
    """Multiply ``c_k`` by ``symbol(k)`` for ``k >= 0``.

    The symbol must satisfy ``m(-k) = conj(m(k))`` for the result to stay
    real; only its values on ``k >= 0`` are used.
    """
    k = f.wavenumbers
    return SpectralField(f.coeffs * symbol(k))


def hilbert_symbol(k):
    return -1j * np.sign(k)


def hilbert(f: SpectralField) -> SpectralField:
    """Periodic Hilbert transform, symbol ``-i sgn(k)``; kills the mean."""
    return apply_multiplier(f, hilbert_symbol)


def abs_power(k, s: float) -> np.ndarray:
    """``|k|^s`` with ``|0|^0 = 1`` and ``|0|^s = 0`` for ``s > 0``."""
    k = np.abs(np.asarray(k, dtype=float))
    if s == 0:
        return np.ones_like(k)
    return k**s


def fractional_derivative(f: SpectralField, s: float) -> SpectralField:
    """``D^s`` with symbol ``|k|^s``. ``D^0`` is the identity."""
    if s < 0:
        raise ValueError(f"fractional order must be nonnegative, got {s}")
    return apply_multiplier(f, lambda k: abs_power(k, s))


def dx(f: SpectralField, order: int = 1) -> SpectralField:
    if order < 0 or int(order) != order:
        raise ValueError("derivative order must be a nonnegative integer")
    return apply_multiplier(f, lambda k: (1j * k) ** int(order))


def bessel_symbol(k, s: float = 1.0) -> np.ndarray:
    """``<k>^{-s}`` with ``<k> = (1 + k^2)^{1/2}``."""
    return (1.0 + np.asarray(k, dtype=float) ** 2) ** (-0.5 * s)


def bessel_inverse(f: SpectralField) -> SpectralField:
    return apply_multiplier(f, bessel_symbol)


# ---------------------------------------------------------------------------
# Bona-Smith mollifier


def _psi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def bump(x) -> np.ndarray:
    """Smooth even cutoff: 1 on ``[-1, 1]``, 0 outside ``(-2, 2)``.

    Built from ``psi(t) = exp(-1/t)`` as ``psi(2-|x|) / (psi(2-|x|) + psi(|x|-1))``,
    which is C-infinity and takes values in ``[0, 1]``.
    """
    a = np.abs(np.asarray(x, dtype=float))
    p = _psi(2.0 - a)
    q = _psi(a - 1.0)
    out = np.where(a <= 1.0, 1.0, 0.0)
    mid = (a > 1.0) & (a < 2.0)
    out = np.where(mid, p / np.where(mid, p + q, 1.0), out)
    return out


@dataclass(frozen=True)
class MollifierSpec:
    gamma: float
    profile: str = "exp-smoothstep"

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"mollifier gamma must lie in (0, 1), got {self.gamma}")
        if self.profile != "exp-smoothstep":
            raise ValueError(f"unknown bump profile {self.profile!r}")

    def symbol(self, k) -> np.ndarray:
        return bump(self.gamma * np.asarray(k, dtype=float))


def mollify(f: SpectralField, spec: MollifierSpec | float) -> SpectralField:
    """``J_gamma f``: multiply ``c_k`` by ``rho(gamma k)``."""
    if not isinstance(spec, MollifierSpec):
        spec = MollifierSpec(float(spec))
    return apply_multiplier(f, spec.symbol)


# ---------------------------------------------------------------------------
# products and pairings


def multiply(
    f: SpectralField,
    g: SpectralField,
    mode: Literal["exact", "truncated"] = "exact",
    max_mode: int | None = None,
) -> SpectralField:
    """Pointwise product.

    ``mode="exact"`` keeps the whole product, of degree ``K_f + K_g``.
    ``mode="truncated"`` returns its projection onto ``|k| <= max_mode``
    (default ``max(K_f, K_g)``) computed on a 3/2-padded grid, which is
    alias-free for the retained modes.
    """
    Kf, Kg = f.max_mode, g.max_mode
    if mode == "exact":
        K = Kf + Kg
        if K <= DIRECT_PRODUCT_MAX:
            # direct convolution: rounding error scales with each output
            # coefficient instead of being spread evenly over the spectrum
            full = np.convolve(f.full(), g.full())[K:] / SQRT_2PI
            return SpectralField(full)
        n = product_grid_size(K)
    elif mode == "truncated":
        K = max(Kf, Kg) if max_mode is None else max_mode
        # aliases of modes |m| <= Kf+Kg land outside |k| <= K once n > Kf+Kg+K
        n = sfft.next_fast_len(max(Kf + Kg + K + 1, 2 * K + 2), real=True)
        n += n % 2
    else:
        raise ValueError(f"unknown product mode {mode!r}")
    v = _to_grid(f.coeffs, n) * _to_grid(g.coeffs, n)
    return SpectralField(_from_grid(v, K))


def inner_l2(f: SpectralField, g: SpectralField) -> float:
    """``int_T f g dx`` via Parseval."""
    m = min(f.max_mode, g.max_mode)
    a = f.coeffs[: m + 1]
    b = np.conj(g.coeffs[: m + 1])
    return float((a[0] * b[0]).real + 2.0 * np.sum(a[1:] * b[1:]).real)


def norm_sq(f: SpectralField) -> float:
    return inner_l2(f, f)


def integral3(f: SpectralField, g: SpectralField, h: SpectralField) -> float:
    """``int_T f g h dx``, exact for trigonometric polynomials."""
    return inner_l2(f, multiply(g, h, "exact"))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """Sobolev norm.

    For ``s >= 0`` this is ``2^{-1/2} (||f||^2 + ||D^s f||^2)^{1/2}``.
    For ``-1 <= s < 0`` it is the Bessel-potential norm ``||<k>^s c_k||_{l^2}``.
    """
    return float(np.sqrt(sobolev_norm_sq(f, s)))


def sobolev_norm_sq(f: SpectralField, s: float) -> float:
    if s < -1:
        raise ValueError(f"Sobolev index below -1 is not supported, got {s}")
    k = f.wavenumbers
    w = np.abs(f.coeffs) ** 2
    w[1:] *= 2.0
    if s < 0:
        return float(np.sum(w * bessel_symbol(k, -2.0 * s)))
    return 0.5 * float(np.sum(w * (1.0 + abs_power(k, 2.0 * s))))


def freq_bound_holds(k: int) -> bool:
    """Exact check of ``|sgn k - k <k>^{-1}| <= <k>^{-1}`` for an integer ``k``.

    Multiplying through by ``<k> > 0`` turns it into ``<k> - |k| <= 1``,
    i.e. ``1 + k^2 <= (|k| + 1)^2`` in integers.
    """
    k = abs(int(k))
    if k == 0:
        return True  # 0 <= 1
    return 1 + k * k <= (k + 1) * (k + 1)
