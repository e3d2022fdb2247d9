"""Shared oracles and strategies.

The oracles deliberately avoid the library's FFT paths: fields are evaluated
by summing exponentials directly, products are formed by explicit double
loops over Fourier coefficients.
"""

import math

import numpy as np
import pytest
from hypothesis import strategies as st

from bolab.spectral import SpectralField

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def random_field(K, rng, decay=2.0, scale=1.0):
    k = np.arange(K + 1)
    amp = np.where(k == 0, 1.0, np.maximum(k, 1) ** -decay)
    c = amp * (rng.standard_normal(K + 1) + 1j * rng.standard_normal(K + 1))
    c[0] = c[0].real
    return SpectralField(scale * c)


def direct_values(f: SpectralField, x):
    """``f(x) = (2 pi)^{-1/2} sum_k c_k e^{ikx}`` by explicit summation."""
    x = np.asarray(x, dtype=float)
    full = f.full()
    K = f.max_mode
    out = np.zeros_like(x, dtype=complex)
    for j, c in enumerate(full):
        out += c * np.exp(1j * (j - K) * x)
    return (out / math.sqrt(2 * math.pi)).real


def quad(*fields, n=None):
    """``int_T prod(fields) dx`` by the trapezoid rule on direct evaluations."""
    deg = sum(f.max_mode for f in fields)
    n = n or 2 * deg + 3
    x = 2 * np.pi * np.arange(n) / n
    v = np.ones(n)
    for f in fields:
        v = v * direct_values(f, x)
    return float(2 * np.pi * v.mean())


def convolve_direct(f: SpectralField, g: SpectralField) -> SpectralField:
    """Product coefficients by the double sum ``(2 pi)^{-1/2} sum_j f_j g_{k-j}``."""
    Kf, Kg = f.max_mode, g.max_mode
    F = {j - Kf: c for j, c in enumerate(f.full())}
    G = {j - Kg: c for j, c in enumerate(g.full())}
    K = Kf + Kg
    out = np.zeros(K + 1, dtype=complex)
    for k in range(K + 1):
        acc = 0j
        for j, fj in F.items():
            gj = G.get(k - j)
            if gj is not None:
                acc += fj * gj
        out[k] = acc / math.sqrt(2 * math.pi)
    return SpectralField(out)


def cos_field(k, K=None, amp=1.0):
    """``amp * cos(kx)``."""
    K = k if K is None else K
    c = amp * math.sqrt(2 * math.pi) if k == 0 else amp * math.sqrt(math.pi / 2)
    return SpectralField.from_modes({k: c}, K)


def sin_field(k, K=None, amp=1.0):
    """``amp * sin(kx)``: ``c_k = -i amp sqrt(pi/2)``."""
    K = k if K is None else K
    return SpectralField.from_modes({k: -1j * amp * math.sqrt(math.pi / 2)}, K)


@st.composite
def fields(draw, max_K=12, decay=1.5):
    K = draw(st.integers(1, max_K))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_field(K, np.random.default_rng(seed), decay)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
