#!/usr/bin/env python3
"""Independent NumPy reference for the shot-noise robustness check.

Draws Haar-random states at d=6, simulates the n=d window family
(rank ceil(d/2), unit shift), samples Poisson counts at a fixed exposure per
projector, and reconstructs with PIE (beta 1.6, D < 1e-2 checked per sweep on
the largest inner-step distance, 25 sweeps, 100 restarts, lowest-residual
fallback). Prints the mean fidelity, which the acceptance suite uses as its
reference value.

Usage: python3 scripts/shot_noise_oracle.py [trials] [exposure] [seed]
"""
import sys

import numpy as np


def fourier(d):
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


def windows(d):
    r = (d + 1) // 2
    return [np.array([(j + s) % d for j in range(r)]) for s in range(d)]


def haar(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def slice_spectrum(fm, support, phi):
    m = np.zeros(len(phi), complex)
    m[support] = phi[support]
    return fm @ m, m


def reconstruct(data, supports, fm, rng, beta=1.6, tol=1e-2, sweeps=25, restarts=100):
    d = fm.shape[0]
    fi = fm.conj().T
    best = None
    for _ in range(restarts + 1):
        phi = haar(d, rng)
        worst = np.inf
        for _ in range(sweeps):
            worst = 0.0
            for s, a in zip(supports, data):
                before = np.vdot(phi, phi).real
                spec, m = slice_spectrum(fm, s, phi)
                mag = np.abs(spec)
                phase = np.where(mag < 1e-14, 1.0, spec / np.where(mag < 1e-14, 1.0, mag))
                back = fi @ (a * phase)
                delta = beta * (back[s] - m[s])
                phi[s] += delta
                worst = max(worst, np.vdot(delta, delta).real / before)
            if worst < tol:
                break
        unit = phi / np.linalg.norm(phi)
        if worst < tol:
            return unit
        res = sum(np.sum((np.abs(slice_spectrum(fm, s, unit)[0]) - a) ** 2) for s, a in zip(supports, data))
        if best is None or res < best[0]:
            best = (res, unit)
    return best[1]


def main():
    trials = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    exposure = float(sys.argv[2]) if len(sys.argv) > 2 else 1e5
    seed = int(sys.argv[3]) if len(sys.argv) > 3 else 20200101
    d = 6
    rng = np.random.default_rng(seed)
    fm = fourier(d)
    supports = windows(d)
    fids = []
    for _ in range(trials):
        psi = haar(d, rng)
        data = []
        for s in supports:
            p = np.abs(slice_spectrum(fm, s, psi)[0]) ** 2
            data.append(np.sqrt(rng.poisson(exposure * p) / exposure))
        est = reconstruct(data, supports, fm, rng)
        fids.append(abs(np.vdot(est, psi)) ** 2)
    fids = np.array(fids)
    print(f"d={d} exposure={exposure:g} trials={trials} mean_fidelity={fids.mean():.5f} "
          f"sem={fids.std(ddof=1) / np.sqrt(trials):.5f} median={np.median(fids):.5f}")


if __name__ == "__main__":
    main()
