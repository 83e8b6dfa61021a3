"""Delay-embedded dynamic mode decomposition (DMD-d / HODMD).

The pipeline: truncate the snapshot matrix with an SVD, stack d
time-shifted copies of the reduced snapshots, truncate again, fit a
one-step propagator by least squares, eigendecompose it, and read modes,
growth rates and frequencies off the eigenpairs. Amplitudes are fit by a
single least-squares problem over all snapshots, and modes are kept while
their amplitude stays above ``eps_dmd`` relative to the largest one.

Time is measured from the first snapshot: snapshot k (1-based) sits at
t = (k - 1) * dt, so a discrete eigenvalue mu corresponds to the
continuous exponent (delta + i*omega) with mu = exp((delta + i*omega)*dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .kernels import evolve_field
from .numerics import eig, lstsq, thin_svd
from .snapshots import SnapshotMatrix

# Discrete eigenvalues below this magnitude are numerical nullspace
# artifacts; their logarithm is meaningless.
MU_FLOOR = 1e-12


@dataclass(frozen=True)
class HodmdParams:
    """Algorithm knobs. ``d=None`` resolves to 10% of K, rounded up."""

    dt: float
    d: int | None = None
    eps_svd: float = 1e-4
    eps_dmd: float = 1e-3

    def __post_init__(self):
        if not self.dt > 0:
            raise DataError(f"dt must be positive, got {self.dt}")
        if self.d is not None and self.d < 1:
            raise DataError(f"delay index d must be >= 1, got {self.d}")
        if not 0 < self.eps_svd < 1:
            raise DataError(f"eps_svd must lie in (0, 1), got {self.eps_svd}")
        if not 0 < self.eps_dmd < 1:
            raise DataError(f"eps_dmd must lie in (0, 1), got {self.eps_dmd}")

    def resolve_d(self, k: int) -> int:
        return self.d if self.d is not None else max(1, math.ceil(k / 10))


@dataclass(frozen=True)
class SvdTruncation:
    """Rank-N SVD truncation: V ~ basis_w @ reduced."""

    basis_w: np.ndarray   # J x N, orthonormal columns
    sigma: np.ndarray     # N retained singular values, descending
    reduced: np.ndarray   # N x K reduced snapshots (Sigma @ T^T)
    n_retained: int


@dataclass(frozen=True)
class DmdSpectrum:
    """Retained modes with amplitudes sorted by decreasing magnitude.

    ``modes`` columns are unit 2-norm; depending on provenance they live in
    the full J-dimensional pixel space (after ``analyze``) or the reduced
    N-dimensional space (straight out of ``dmd_d``).
    """

    modes: np.ndarray          # complex, one column per mode
    amplitudes: np.ndarray     # complex, |a| non-increasing
    growth_rates: np.ndarray   # 1/second
    frequencies: np.ndarray    # rad/second
    dt: float

    def __post_init__(self):
        m = self.amplitudes.shape[0]
        if self.modes.shape[1] != m or self.growth_rates.shape[0] != m \
                or self.frequencies.shape[0] != m:
            raise DataError("spectrum fields disagree on mode count")
        mags = np.abs(self.amplitudes)
        if m > 1 and np.any(np.diff(mags) > 1e-10 * (mags[0] + 1e-300)):
            raise DataError("amplitudes must be sorted by decreasing magnitude")
        norms = np.linalg.norm(self.modes, axis=0)
        if m and not np.allclose(norms, 1.0, atol=1e-10):
            raise DataError("mode columns must have unit 2-norm")

    @property
    def m_retained(self) -> int:
        return self.amplitudes.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Discrete-time eigenvalues implied by (delta, omega) and dt."""
        return np.exp((self.growth_rates + 1j * self.frequencies) * self.dt)


def phase_align(modes: np.ndarray, amplitudes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate each mode so its largest-magnitude entry is real and positive.

    The rotation is absorbed into the amplitude, leaving a_m * u_m
    unchanged. Makes mode output deterministic and comparable.
    """
    if modes.shape[1] == 0:
        return modes, amplitudes
    pivot_rows = np.argmax(np.abs(modes), axis=0)
    pivots = modes[pivot_rows, np.arange(modes.shape[1])]
    mags = np.abs(pivots)
    phases = np.where(mags > 0, pivots / np.where(mags > 0, mags, 1.0), 1.0)
    return modes / phases, amplitudes * phases


def _amplitude_order(amplitudes: np.ndarray, frequencies: np.ndarray) -> np.ndarray:
    """Descending |a|; ties broken by ascending |omega|, then ascending omega."""
    return np.lexsort((frequencies, np.abs(frequencies), -np.abs(amplitudes)))


def _truncate(a: np.ndarray, eps_svd: float) -> SvdTruncation:
    svd = thin_svd(a)
    s0 = svd.s[0] if svd.s.size else 0.0
    if s0 == 0.0:
        raise DataError("zero signal: all singular values vanish")
    n = max(1, int(np.sum(svd.s / s0 > eps_svd)))
    return SvdTruncation(
        basis_w=svd.u[:, :n],
        sigma=svd.s[:n].copy(),
        reduced=svd.s[:n, None] * svd.vt[:n, :],
        n_retained=n,
    )


def truncated_svd(v: SnapshotMatrix | np.ndarray, eps_svd: float) -> SvdTruncation:
    """Retain the N leading SVD directions with sigma_j / sigma_1 > eps_svd."""
    if not 0 < eps_svd < 1:
        raise DataError(f"eps_svd must lie in (0, 1), got {eps_svd}")
    a = v.data if isinstance(v, SnapshotMatrix) else np.asarray(v)
    return _truncate(a, eps_svd)


def eigen_to_continuous(mu: complex, dt: float) -> tuple[float, float]:
    """Map a discrete eigenvalue to (growth rate, frequency).

    delta = ln|mu| / dt, omega = arg(mu) / dt with arg taken in (-pi, pi].
    """
    if abs(mu) < MU_FLOOR:
        raise DataError("defective eigenvalue: |mu| is numerically zero")
    delta = math.log(abs(mu)) / dt
    arg = math.atan2(mu.imag, mu.real)
    if arg <= -math.pi:
        arg = math.pi
    return delta, arg / dt


def fit_amplitudes(reduced: np.ndarray, modes: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Least-squares amplitudes over all K snapshots.

    Minimizes sum_k || vhat_k - sum_m a_m * uhat_m * mu_m^(k-1) ||^2 as one
    stacked linear problem; rank deficiency yields the minimum-norm fit.
    """
    if modes.shape[1] == 0:
        raise DataError("cannot fit amplitudes of an empty spectrum")
    n, k = reduced.shape
    vand = mu[None, :] ** np.arange(k)[:, None]            # (K, M)
    lhs = (vand[:, None, :] * modes[None, :, :]).reshape(k * n, -1)
    rhs = reduced.T.reshape(k * n).astype(np.complex128)
    return lstsq(lhs, rhs)


def dmd_d(red: SvdTruncation, params: HodmdParams) -> DmdSpectrum:
    """Delay-embedded DMD on the reduced snapshots.

    Returns the spectrum before amplitude-based retention: all surviving
    eigendirections, amplitudes attached and sorted, nothing filtered by
    eps_dmd yet. Modes are in the reduced space.
    """
    n, k = red.reduced.shape
    d = params.resolve_d(k)
    if d > k - 1:
        raise DataError(f"delay index d={d} needs at least d+1={d + 1} snapshots, got K={k}")

    cols = k - d + 1
    stacked = np.empty((d * n, cols), dtype=red.reduced.dtype)
    for i in range(d):
        stacked[i * n:(i + 1) * n, :] = red.reduced[:, i:i + cols]

    inner = _truncate(stacked, params.eps_svd)
    g = inner.reduced                                      # N' x cols
    # One-step propagator in the doubly-reduced space, fit by least squares.
    propagator = lstsq(g[:, :-1].T, g[:, 1:].T).T
    pairs = eig(propagator)

    keep = np.abs(pairs.values) >= MU_FLOOR
    mu = pairs.values[keep]
    lifted = inner.basis_w @ pairs.vectors[:, keep]
    block = lifted[:n, :]
    norms = np.linalg.norm(block, axis=0)
    ok = norms > 1e-12 * np.linalg.norm(lifted, axis=0)
    mu, block, norms = mu[ok], block[:, ok], norms[ok]
    if mu.size == 0:
        raise DataError("no usable eigenvalues: signal is numerically degenerate")
    modes = block / norms

    deltas = np.empty(mu.size)
    omegas = np.empty(mu.size)
    for i, m in enumerate(mu):
        deltas[i], omegas[i] = eigen_to_continuous(complex(m), params.dt)

    amps = fit_amplitudes(red.reduced, modes, mu)
    modes, amps = phase_align(modes, amps)
    order = _amplitude_order(amps, omegas)
    return DmdSpectrum(
        modes=modes[:, order],
        amplitudes=amps[order],
        growth_rates=deltas[order],
        frequencies=omegas[order],
        dt=params.dt,
    )


def _conjugate_partner(spectrum: DmdSpectrum, idx: int, candidates: np.ndarray) -> int | None:
    """Index of the (delta, -omega) partner of mode ``idx`` among candidates."""
    delta, omega = spectrum.growth_rates[idx], spectrum.frequencies[idx]
    for j in candidates:
        if j == idx:
            continue
        close_d = abs(spectrum.growth_rates[j] - delta) <= 1e-8 + 1e-6 * abs(delta)
        close_w = abs(spectrum.frequencies[j] + omega) <= 1e-8 + 1e-6 * abs(omega)
        if close_d and close_w:
            return int(j)
    return None


def retain_modes(spectrum: DmdSpectrum, eps_dmd: float) -> DmdSpectrum:
    """Drop modes whose |a_m| / |a_1| has fallen to eps_dmd or below.

    Conjugate pairs are kept or dropped together: if one member clears the
    threshold, its (delta, -omega) partner is kept as well.
    """
    if spectrum.m_retained == 0:
        raise DataError("empty spectrum")
    mags = np.abs(spectrum.amplitudes)
    if mags[0] == 0.0:
        return spectrum
    keep = mags / mags[0] > eps_dmd
    keep[0] = True

    # Pair closure: a surviving oscillatory mode pulls its partner back in.
    nyquist = math.pi / spectrum.dt
    dropped = np.flatnonzero(~keep)
    for i in np.flatnonzero(keep):
        omega = spectrum.frequencies[i]
        if omega == 0.0 or abs(abs(omega) - nyquist) <= 1e-9 * nyquist:
            continue
        partner = _conjugate_partner(spectrum, i, dropped)
        if partner is not None:
            keep[partner] = True
            dropped = np.flatnonzero(~keep)

    idx = np.flatnonzero(keep)
    order = idx[_amplitude_order(spectrum.amplitudes[idx], spectrum.frequencies[idx])]
    return DmdSpectrum(
        modes=spectrum.modes[:, order],
        amplitudes=spectrum.amplitudes[order],
        growth_rates=spectrum.growth_rates[order],
        frequencies=spectrum.frequencies[order],
        dt=spectrum.dt,
    )


def evolve(spectrum: DmdSpectrum, times: np.ndarray,
           basis: np.ndarray | None = None) -> np.ndarray:
    """Evaluate Re(sum_m a_m u_m exp((delta_m + i omega_m) t)) at ``times``."""
    modes = spectrum.modes if basis is None else basis @ spectrum.modes
    return evolve_field(modes, spectrum.amplitudes, spectrum.growth_rates,
                        spectrum.frequencies, np.asarray(times, dtype=np.float64))


def reconstruct(spectrum: DmdSpectrum, times: np.ndarray,
                basis: np.ndarray | None = None,
                geometry: tuple[int, int] | None = None) -> SnapshotMatrix:
    """Reconstruct a snapshot matrix from the modal expansion.

    ``basis`` lifts reduced-space modes to pixel space; pass ``geometry``
    as (nx, ny) to label the pixel layout, otherwise a J x 1 layout is
    assumed. Needs at least two time points to form a valid matrix.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0:
        raise DataError("times must be nonempty")
    data = evolve(spectrum, times, basis)
    nx, ny = geometry if geometry is not None else (1, data.shape[0])
    return SnapshotMatrix(data=data, nx=nx, ny=ny, dt=spectrum.dt)


def analyze(v: SnapshotMatrix, params: HodmdParams) -> tuple[SvdTruncation, DmdSpectrum]:
    """Full pipeline: truncate, delay-embed, fit, retain, lift to pixel space."""
    red = truncated_svd(v, params.eps_svd)
    raw = dmd_d(red, params)
    kept = retain_modes(raw, params.eps_dmd)

    full = red.basis_w @ kept.modes
    norms = np.linalg.norm(full, axis=0)
    full = full / norms
    amps = kept.amplitudes * norms
    full, amps = phase_align(full, amps)
    order = _amplitude_order(amps, kept.frequencies)
    spectrum = DmdSpectrum(
        modes=full[:, order],
        amplitudes=amps[order],
        growth_rates=kept.growth_rates[order],
        frequencies=kept.frequencies[order],
        dt=params.dt,
    )
    return red, spectrum
