"""Render retained modes as 8-bit images and pick the ones worth keeping.

One image is rendered per conjugate pair (the omega >= 0 representative);
rendering min-max normalizes to the full 0..255 range with half-up
rounding, so output bytes are platform-independent. Mode quality is
approximated by amplitude rank plus an optional roughness score
(total variation of the rendered field over its range).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .hodmd import DmdSpectrum, HodmdParams
from .kernels import quantize_u8, total_variation
from .snapshots import write_frame

RENDERINGS = ("real_part", "modulus", "phase")


@dataclass(frozen=True)
class ModeImage:
    pixels: np.ndarray        # (Ny, Nx) uint8
    mode_index: int           # position in the spectrum's |a| ranking
    rendering: str
    delta: float
    omega: float
    amplitude_abs: float
    source_id: str
    noise_score: float


@dataclass(frozen=True)
class SelectionPolicy:
    """How many modes to keep per sample and by what rule."""

    count: int = 10
    strategy: str = "top_amplitude"
    manual_indices: tuple[int, ...] | None = None
    noise_cutoff: float | None = None

    def __post_init__(self):
        if self.count < 1:
            raise DataError(f"selection count must be >= 1, got {self.count}")
        if self.strategy not in ("top_amplitude", "manual_list", "amplitude_with_noise_filter"):
            raise DataError(f"unknown selection strategy {self.strategy!r}")
        if self.strategy == "manual_list" and not self.manual_indices:
            raise DataError("manual_list strategy needs manual_indices")
        if self.strategy == "amplitude_with_noise_filter" and self.noise_cutoff is None:
            raise DataError("amplitude_with_noise_filter strategy needs a noise_cutoff")


@dataclass(frozen=True)
class ModeSelection:
    indices: tuple[int, ...]
    shortage: bool = False


def _scalar_field(spectrum: DmdSpectrum, index: int, geometry: tuple[int, int],
                  rendering: str) -> np.ndarray:
    nx, ny = geometry
    j = spectrum.modes.shape[0]
    if j != nx * ny:
        raise DataError(f"geometry {nx}x{ny} does not match mode length {j}")
    if not 0 <= index < spectrum.m_retained:
        raise DataError(f"mode index {index} out of range (M={spectrum.m_retained})")
    if rendering not in RENDERINGS:
        raise DataError(f"unknown rendering {rendering!r}")
    weighted = (spectrum.amplitudes[index] * spectrum.modes[:, index]).reshape(ny, nx)
    if rendering == "real_part":
        return np.real(weighted)
    if rendering == "modulus":
        return np.abs(weighted)
    return np.angle(weighted)


def roughness(field: np.ndarray) -> float:
    """Total variation of the field divided by its range; 0 for constants."""
    lo, hi = float(np.min(field)), float(np.max(field))
    if hi == lo:
        return 0.0
    return total_variation(field) / (hi - lo)


def render_mode(spectrum: DmdSpectrum, index: int, geometry: tuple[int, int],
                rendering: str = "real_part", source_id: str = "") -> ModeImage:
    """Render one mode's weighted field a_m * u_m as an 8-bit image."""
    scalar = _scalar_field(spectrum, index, geometry, rendering)
    pixels, _, _ = quantize_u8(scalar)
    return ModeImage(
        pixels=pixels,
        mode_index=index,
        rendering=rendering,
        delta=float(spectrum.growth_rates[index]),
        omega=float(spectrum.frequencies[index]),
        amplitude_abs=float(np.abs(spectrum.amplitudes[index])),
        source_id=source_id,
        noise_score=roughness(scalar),
    )


def select_modes(spectrum: DmdSpectrum, policy: SelectionPolicy,
                 geometry: tuple[int, int] | None = None,
                 rendering: str = "real_part") -> ModeSelection:
    """Pick the mode indices to export for one sample.

    Only omega >= 0 representatives are candidates (the conjugate partner
    is redundant in a real-valued rendering). The noise-filter strategy
    needs ``geometry`` to render fields for scoring.
    """
    if spectrum.m_retained == 0:
        raise DataError("cannot select from an empty spectrum")
    if policy.strategy == "manual_list":
        for i in policy.manual_indices:
            if not 0 <= i < spectrum.m_retained:
                raise DataError(f"manual mode index {i} out of range")
        return ModeSelection(indices=tuple(policy.manual_indices))

    candidates = [i for i in range(spectrum.m_retained) if spectrum.frequencies[i] >= 0.0]
    if policy.strategy == "amplitude_with_noise_filter":
        if geometry is None:
            raise DataError("noise-filtered selection needs the frame geometry")
        candidates = [
            i for i in candidates
            if roughness(_scalar_field(spectrum, i, geometry, rendering)) <= policy.noise_cutoff
        ]
    picked = candidates[:policy.count]
    return ModeSelection(indices=tuple(picked), shortage=len(picked) < policy.count)


def export_modes(spectrum: DmdSpectrum, geometry: tuple[int, int], out_dir: str | Path,
                 source_id: str, policy: SelectionPolicy | None = None,
                 rendering: str = "real_part",
                 params: HodmdParams | None = None,
                 class_label: str | None = None) -> dict:
    """Write selected mode PNGs plus a ``modes.json`` provenance manifest.

    Files are named ``{source_id}_mode{rank:03}.png`` with rank 1 the
    largest-amplitude selected mode. Returns the manifest dict.
    """
    policy = policy or SelectionPolicy()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    selection = select_modes(spectrum, policy, geometry, rendering)

    entries = []
    for rank, index in enumerate(selection.indices, start=1):
        image = render_mode(spectrum, index, geometry, rendering, source_id)
        name = f"{source_id}_mode{rank:03d}.png"
        write_frame(out_dir / name, image.pixels)
        entries.append({
            "file": name,
            "rank": rank,
            "mode_index": image.mode_index,
            "delta": image.delta,
            "omega": image.omega,
            "amplitude_abs": image.amplitude_abs,
            "rendering": image.rendering,
            "noise_score": image.noise_score,
        })

    manifest = {
        "source_id": source_id,
        "class_label": class_label,
        "shortage": selection.shortage,
        "policy": {
            "count": policy.count,
            "strategy": policy.strategy,
            "noise_cutoff": policy.noise_cutoff,
        },
        "hodmd_params": None if params is None else {
            "dt": params.dt, "d": params.d,
            "eps_svd": params.eps_svd, "eps_dmd": params.eps_dmd,
        },
        "modes": entries,
    }
    (out_dir / "modes.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest
