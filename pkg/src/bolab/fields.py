"""Random and structured initial data, with reproducible per-sample seeding."""

from __future__ import annotations

import numpy as np

from .spectral import SpectralField, sobolev_norm

KINDS = ("mode-list", "random-sobolev", "critical-decay", "analytic")


def sample_rng(master_seed: int, index: int) -> np.random.Generator:
    """Generator for sample ``index``; independent of how many samples are drawn."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(index)]))


def sample_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1)[0])


def random_phases(rng: np.random.Generator, K: int) -> np.ndarray:
    # drawn mode by mode so that a larger K extends a smaller one
    return rng.uniform(0.0, 2.0 * np.pi, size=K)


def power_law_field(K: int, decay: float, rng: np.random.Generator) -> SpectralField:
    """``c_k = k^{-decay} exp(i theta_k)`` for ``1 <= k <= K``, zero mean."""
    k = np.arange(1, K + 1, dtype=float)
    c = np.zeros(K + 1, dtype=np.complex128)
    c[1:] = k**-decay * np.exp(1j * random_phases(rng, K))
    return SpectralField(c)


def analytic_field(K: int, rate: float, rng: np.random.Generator) -> SpectralField:
    """``c_k = exp(-rate k + i theta_k)``: an analytic profile."""
    k = np.arange(1, K + 1, dtype=float)
    c = np.zeros(K + 1, dtype=np.complex128)
    c[1:] = np.exp(-rate * k) * np.exp(1j * random_phases(rng, K))
    return SpectralField(c)


def parse_mode_list(spec: str) -> dict[int, complex]:
    """Parse ``"k:amp[,k:amp...]"``; ``amp`` may be complex, e.g. ``"2:0.5-0.1j"``."""
    modes: dict[int, complex] = {}
    for item in filter(None, (part.strip() for part in spec.split(","))):
        try:
            k, a = item.split(":")
            modes[int(k)] = complex(a.replace(" ", ""))
        except ValueError as exc:
            raise ValueError(f"bad mode entry {item!r}; expected k:amplitude") from exc
        if int(k) < 0:
            raise ValueError(f"mode index must be nonnegative in {item!r}")
    return modes


def make_initial_data(
    kind: str,
    s: float,
    seed: int,
    K: int,
    norm: float | None = 1.0,
    decay: float | None = None,
    modes: str = "1:1",
    rate: float = 0.5,
) -> SpectralField:
    """Initial data of a given kind, normalized to ``||phi||_{H^s} = norm``.

    Kinds
    -----
    ``mode-list``
        Cosines/sines from ``modes`` (``"1:1"`` is ``cos x`` up to scale).
    ``random-sobolev``
        ``|k|^{-decay}`` spectrum with random phases; ``decay`` defaults to ``s + 2``.
    ``critical-decay``
        ``|k|^{-s-0.51}``: barely in ``H^s``, so ``H^{s+1}`` norms grow with ``K``.
    ``analytic``
        ``exp(-rate k)`` spectrum with random phases.

    Pass ``norm=None`` to skip normalization.
    """
    rng = np.random.default_rng(seed)
    if kind == "mode-list":
        m = parse_mode_list(modes)
        if max(m, default=0) > K:
            raise ValueError(f"mode list exceeds max_mode={K}")
        # a real cosine of amplitude A has c_k = A sqrt(pi/2)
        scale = np.sqrt(np.pi / 2)
        c = {k: (a * np.sqrt(2 * np.pi) if k == 0 else a * scale) for k, a in m.items()}
        phi = SpectralField.from_modes(c, K)
    elif kind == "random-sobolev":
        phi = power_law_field(K, s + 2 if decay is None else decay, rng)
    elif kind == "critical-decay":
        phi = power_law_field(K, s + 0.51, rng)
    elif kind == "analytic":
        phi = analytic_field(K, rate, rng)
    else:
        raise ValueError(f"unknown initial-data kind {kind!r}; choose from {KINDS}")
    if norm is not None:
        n = sobolev_norm(phi, s)
        if n == 0:
            raise ValueError("cannot normalize the zero field")
        phi = phi * (norm / n)
    return phi
