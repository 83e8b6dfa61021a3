"""Independent reference implementations the tests check against.

Nothing here may import from modalaug's algorithm internals: these are
deliberately separate code paths (textbook DMD, explicit pseudoinverse,
direct generators) so agreement actually means something.
"""

from __future__ import annotations

import numpy as np


def exact_dmd_eigenvalues(data: np.ndarray, rel_cutoff: float = 1e-12) -> np.ndarray:
    """Textbook exact DMD: project the one-step operator onto the POD basis."""
    x1, x2 = data[:, :-1], data[:, 1:]
    u, s, vt = np.linalg.svd(x1, full_matrices=False)
    r = max(1, int(np.sum(s > s[0] * rel_cutoff)))
    u, s, vt = u[:, :r], s[:r], vt[:r]
    atilde = u.conj().T @ x2 @ vt.conj().T * (1.0 / s)[None, :]
    return np.linalg.eigvals(atilde)


def random_linear_system(rng: np.random.Generator, j: int = 30, k: int = 60,
                         n_pairs: int = 2, n_real: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Trajectory of a random stable linear system lifted to J pixels.

    Returns (data J x K, discrete eigenvalues). Eigenvalues are chosen
    first; the data is built to realize exactly that spectrum.
    """
    blocks, eigs = [], []
    for _ in range(n_pairs):
        r = rng.uniform(0.6, 0.99)
        theta = rng.uniform(0.15, np.pi - 0.15)
        blocks.append(r * np.array([[np.cos(theta), np.sin(theta)],
                                    [-np.sin(theta), np.cos(theta)]]))
        eigs.extend([r * np.exp(1j * theta), r * np.exp(-1j * theta)])
    reals = rng.uniform(0.3, 0.95, n_real) * rng.choice([-1.0, 1.0], n_real)
    eigs.extend(reals)
    dim = 2 * n_pairs + n_real
    a = np.zeros((dim, dim))
    for i, b in enumerate(blocks):
        a[2 * i:2 * i + 2, 2 * i:2 * i + 2] = b
    for i, lam in enumerate(reals):
        a[2 * n_pairs + i, 2 * n_pairs + i] = lam

    x = rng.uniform(0.5, 1.5, dim) * rng.choice([-1.0, 1.0], dim)
    states = np.empty((dim, k))
    for t in range(k):
        states[:, t] = x
        x = a @ x
    lift = rng.standard_normal((j, dim))
    return lift @ states, np.asarray(eigs, dtype=np.complex128)


def scalar_rank_signal(rng: np.random.Generator, freqs_hz: list[float], j: int,
                       k: int, dt: float, noise: float = 0.0) -> np.ndarray:
    """Rank-one spatial field carrying several temporal frequencies.

    Every pixel sees the same multi-tone signal scaled by a random
    positive weight, so the spatial rank is 1 no matter how many
    frequencies are present. This is the regime where plain DMD fails
    and the delay embedding is required.
    """
    t = np.arange(k) * dt
    phases = rng.uniform(0.0, 2.0 * np.pi, len(freqs_hz))
    signal = np.zeros(k)
    for f, phi in zip(freqs_hz, phases):
        signal += np.cos(2.0 * np.pi * f * t + phi)
    weights = rng.uniform(0.5, 1.5, j)
    data = np.outer(weights, signal)
    if noise > 0.0:
        data = data + rng.uniform(-noise, noise, size=data.shape)
    return data


def match_multisets(a: np.ndarray, b: np.ndarray) -> float:
    """Greedy max pairing distance between two complex multisets."""
    if len(a) != len(b):
        return np.inf
    remaining = list(b)
    worst = 0.0
    for x in sorted(a, key=lambda z: -abs(z)):
        dists = [abs(x - y) for y in remaining]
        i = int(np.argmin(dists))
        worst = max(worst, dists[i])
        remaining.pop(i)
    return worst


def nearest_recovered(spectrum, delta: float, omega: float) -> int:
    """Index of the spectrum mode closest to (delta, omega)."""
    return int(np.argmin(np.abs(spectrum.growth_rates - delta)
                         + np.abs(spectrum.frequencies - omega)))


def recovered_positive_frequencies(spectrum, min_omega: float = 1e-6) -> np.ndarray:
    """Sorted distinct positive frequencies present in a spectrum."""
    pos = np.sort(spectrum.frequencies[spectrum.frequencies > min_omega])
    if pos.size == 0:
        return pos
    distinct = [pos[0]]
    for w in pos[1:]:
        if w - distinct[-1] > 1e-9 + 1e-9 * abs(w):
            distinct.append(w)
    return np.asarray(distinct)
