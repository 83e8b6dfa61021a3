"""Hot numeric kernels with numba-jitted and pure-numpy implementations.

The jitted path is the default. Set ``MODALAUG_NO_NUMBA=1`` (before import)
to force the numpy fallbacks; ``benchmarks/bench_kernels.py`` compares the
two. Both paths are kept bit-compatible: tests assert exact agreement for
the integer outputs and tight float agreement for the rest.

The dense linear algebra (SVD, eig, least squares) is *not* here on
purpose: those calls are LAPACK-bound and numba has nothing to add.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "MODALAUG_NO_NUMBA"


def _numba_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in {"1", "true", "yes"}


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def evolve_field_np(modes: np.ndarray, amplitudes: np.ndarray,
                    growth_rates: np.ndarray, frequencies: np.ndarray,
                    times: np.ndarray) -> np.ndarray:
    """Real part of sum_m a_m * u_m * exp((delta_m + i*omega_m) * t_k).

    modes is (J, M) complex, output is (J, T) float64.
    """
    lam = growth_rates.astype(np.complex128) + 1j * frequencies
    dynamics = amplitudes[:, None] * np.exp(np.outer(lam, times.astype(np.float64)))
    return np.real(modes @ dynamics)


def quantize_u8_np(field: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Min-max map a float field to uint8, rounding half up.

    Constant fields map to 128 everywhere. Returns (pixels, lo, hi) so the
    affine mapping can be recorded and inverted.
    """
    lo = float(np.min(field))
    hi = float(np.max(field))
    if hi == lo:
        return np.full(field.shape, 128, dtype=np.uint8), lo, hi
    scaled = (field - lo) * (255.0 / (hi - lo))
    return np.floor(scaled + 0.5).astype(np.uint8), lo, hi


def total_variation_np(field: np.ndarray) -> float:
    """Sum of absolute differences between 4-neighbour pixels."""
    tv = np.sum(np.abs(np.diff(field, axis=0))) + np.sum(np.abs(np.diff(field, axis=1)))
    return float(tv)


def rgb_to_gray_np(rgb: np.ndarray) -> np.ndarray:
    """Broadcast luma (0.299 R + 0.587 G + 0.114 B), rounded half up to uint8."""
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.floor(y + 0.5).astype(np.uint8)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if not _numba_disabled():
    try:
        # Try OMP before TBB: the TBB probe warns on older TBB builds.
        os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")
        import numba

        @numba.njit(parallel=True, cache=True)
        def _evolve_field_nb(modes, amplitudes, growth_rates, frequencies, times):
            j_dim, m_dim = modes.shape
            t_dim = times.shape[0]
            coeff = np.empty((t_dim, m_dim), dtype=np.complex128)
            for k in range(t_dim):
                for m in range(m_dim):
                    coeff[k, m] = amplitudes[m] * np.exp(
                        (growth_rates[m] + 1j * frequencies[m]) * times[k])
            out = np.empty((j_dim, t_dim), dtype=np.float64)
            # parallel over pixels: accumulate only the real part, no
            # J x T complex temporary
            for j in numba.prange(j_dim):
                for k in range(t_dim):
                    acc = 0.0
                    for m in range(m_dim):
                        u = modes[j, m]
                        c = coeff[k, m]
                        acc += u.real * c.real - u.imag * c.imag
                    out[j, k] = acc
            return out

        @numba.njit(cache=True)
        def _minmax_nb(flat):
            lo = flat[0]
            hi = flat[0]
            for i in range(flat.shape[0]):
                v = flat[i]
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            return lo, hi

        @numba.njit(cache=True)
        def _quantize_u8_nb(flat, lo, hi):
            out = np.empty(flat.shape[0], dtype=np.uint8)
            scale = 255.0 / (hi - lo)
            for i in range(flat.shape[0]):
                out[i] = np.uint8(np.floor((flat[i] - lo) * scale + 0.5))
            return out

        @numba.njit(cache=True)
        def _total_variation_nb(field):
            ny, nx = field.shape
            tv = 0.0
            for i in range(ny):
                for j in range(nx):
                    v = field[i, j]
                    if i + 1 < ny:
                        tv += abs(field[i + 1, j] - v)
                    if j + 1 < nx:
                        tv += abs(field[i, j + 1] - v)
            return tv

        @numba.njit(parallel=True, cache=True)
        def _rgb_to_gray_nb(rgb):
            ny, nx = rgb.shape[0], rgb.shape[1]
            out = np.empty((ny, nx), dtype=np.uint8)
            for i in numba.prange(ny):
                for j in range(nx):
                    y = 0.299 * rgb[i, j, 0] + 0.587 * rgb[i, j, 1] + 0.114 * rgb[i, j, 2]
                    out[i, j] = np.uint8(np.floor(y + 0.5))
            return out

        def evolve_field_nb(modes, amplitudes, growth_rates, frequencies, times):
            return _evolve_field_nb(
                np.ascontiguousarray(modes, dtype=np.complex128),
                np.ascontiguousarray(amplitudes, dtype=np.complex128),
                np.ascontiguousarray(growth_rates, dtype=np.float64),
                np.ascontiguousarray(frequencies, dtype=np.float64),
                np.ascontiguousarray(times, dtype=np.float64),
            )

        def quantize_u8_nb(field):
            flat = np.ascontiguousarray(field, dtype=np.float64).ravel()
            lo, hi = _minmax_nb(flat)
            if hi == lo:
                return np.full(field.shape, 128, dtype=np.uint8), float(lo), float(hi)
            return _quantize_u8_nb(flat, lo, hi).reshape(field.shape), float(lo), float(hi)

        def total_variation_nb(field):
            return float(_total_variation_nb(np.ascontiguousarray(field, dtype=np.float64)))

        def rgb_to_gray_nb(rgb):
            return _rgb_to_gray_nb(np.ascontiguousarray(rgb, dtype=np.float64))

        USING_NUMBA = True
    except ImportError:
        USING_NUMBA = False
else:
    USING_NUMBA = False

if USING_NUMBA:
    evolve_field = evolve_field_nb
    quantize_u8 = quantize_u8_nb
    total_variation = total_variation_nb
    rgb_to_gray = rgb_to_gray_nb
else:
    evolve_field = evolve_field_np
    quantize_u8 = quantize_u8_np
    total_variation = total_variation_np
    rgb_to_gray = rgb_to_gray_np
