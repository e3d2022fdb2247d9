#!/usr/bin/env python3
"""Empirical constants of the commutator and energy-pairing estimates.

Each estimate ``LHS <= C * RHS`` is probed with random fields whose spectra
sit either comfortably inside or at the edge of the relevant Sobolev space.
The largest observed ratio is reported for a base corpus, a corpus twice as
large, and twice the bandwidth.  A ratio that stays put under both
refinements is evidence for the estimate, never a proof.

Run: ``python demos/05_constant_estimates.py``  (about 3 s)
"""

from bolab import inequalities as lab


def main():
    base = lab.standard_estimates(32, 100)
    more = lab.standard_estimates(32, 200)
    finer = lab.standard_estimates(64, 100)
    print(f"{'estimate':<36} {'K=32,n=100':>11} {'n=200':>9} {'K=64':>9}")
    for b, m, f in zip(base, more, finer):
        extra = ",".join(f"{k}={v}" for k, v in b.params.items() if k not in ("s", "s0"))
        name = b.lemma + (f" ({extra})" if extra else "")
        print(f"{name:<36} {b.max_ratio:>11.4g} {m.max_ratio:>9.4g} {f.max_ratio:>9.4g}")
    print()
    print(lab.DISCLAIMER)


if __name__ == "__main__":
    main()
