"""Synthetic image sequences with exactly known modal content.

The generator runs the modal expansion forward: each requested mode is a
unit-norm spatial pattern evolving as exp((delta + i*omega) t), the real
part is taken, optional uniform noise is added, and the result is mapped
affinely to 8-bit pixels. The pre-quantization float frames and the
affine mapping are kept so spectral comparisons are not polluted by
quantization. Ground truth is returned in the same conventions the
analysis produces: conjugate pairs materialized, unit-norm modes, phase
aligned, amplitude-sorted.

Everything is seeded and reproducible byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DataError
from .hodmd import DmdSpectrum, _amplitude_order, phase_align
from .kernels import evolve_field, quantize_u8
from .serialize import write_float_frames
from .snapshots import FrameSequence, write_frame

PATTERNS = ("gaussian_blob", "plane_wave", "checkerboard")
FLOAT_SIDECAR = "frames.f64"
SAMPLE_META = "sample.json"


@dataclass(frozen=True)
class SynthMode:
    """One generator mode: temporal exponent, weight, spatial pattern.

    ``jitter`` maps parameter names to half-widths for per-sample
    perturbation: pattern parameters are jittered additively; the special
    keys ``delta`` (additive), ``omega_rel`` (relative), ``amplitude_rel``
    and ``amplitude_phase`` perturb the temporal content.
    """

    delta: float
    omega: float
    amplitude: complex
    pattern: str
    params: dict = field(default_factory=dict)
    jitter: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise DataError(f"unknown spatial pattern {self.pattern!r}")
        if self.omega == 0.0 and abs(complex(self.amplitude).imag) > 0:
            raise DataError("a non-oscillating mode must have a real amplitude")


@dataclass(frozen=True)
class SynthSpec:
    modes: tuple[SynthMode, ...]
    nx: int
    ny: int
    k: int
    dt: float
    noise_amplitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise DataError("need at least 2 frames")
        if self.nx < 1 or self.ny < 1:
            raise DataError("geometry must be at least 1x1")
        if self.noise_amplitude < 0:
            raise DataError("noise amplitude must be >= 0")
        if not self.dt > 0:
            raise DataError("dt must be positive")


@dataclass(frozen=True)
class SynthResult:
    sequence: FrameSequence
    truth: DmdSpectrum
    float_frames: np.ndarray   # (K, Ny, Nx), pre-quantization field + noise
    lo: float                  # affine mapping: u8 = (f - lo) * 255 / (hi - lo)
    hi: float


def spatial_pattern(pattern: str, params: dict, nx: int, ny: int) -> np.ndarray:
    """Unit 2-norm flattened field of length nx * ny."""
    ix = (np.arange(nx) + 0.5) / nx
    iy = (np.arange(ny) + 0.5) / ny
    xg, yg = np.meshgrid(ix, iy)
    if pattern == "gaussian_blob":
        cx, cy = params.get("cx", 0.5), params.get("cy", 0.5)
        sigma = max(params.get("sigma", 0.2), 1e-3)
        f = np.exp(-((xg - cx) ** 2 + (yg - cy) ** 2) / (2.0 * sigma ** 2))
    elif pattern == "plane_wave":
        kx, ky = params.get("kx", 1.0), params.get("ky", 0.0)
        phase = params.get("phase", 0.0)
        f = np.cos(2.0 * np.pi * (kx * xg + ky * yg) + phase)
    elif pattern == "checkerboard":
        period = max(int(params.get("period", 4)), 1)
        cols, rows = np.meshgrid(np.arange(nx) // period, np.arange(ny) // period)
        f = ((cols + rows) % 2).astype(np.float64) * 2.0 - 1.0
    else:
        raise DataError(f"unknown spatial pattern {pattern!r}")
    flat = f.ravel()
    norm = np.linalg.norm(flat)
    if norm == 0:
        raise DataError(f"pattern {pattern} produced a zero field")
    return flat / norm


def _expansion(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Materialize the conjugate-closed expansion of the requested modes."""
    seen = set()
    cols, amps, deltas, omegas = [], [], [], []
    for mode in spec.modes:
        key = (round(mode.delta, 12), round(abs(mode.omega), 12))
        if key in seen:
            raise DataError(f"duplicate temporal exponent (delta={mode.delta}, omega={mode.omega})")
        seen.add(key)
        u = spatial_pattern(mode.pattern, mode.params, spec.nx, spec.ny)
        a = complex(mode.amplitude)
        if mode.omega == 0.0:
            cols.append(u)
            amps.append(a)
            deltas.append(mode.delta)
            omegas.append(0.0)
        else:
            for sign in (1.0, -1.0):
                cols.append(u)
                amps.append(a / 2 if sign > 0 else np.conj(a) / 2)
                deltas.append(mode.delta)
                omegas.append(sign * abs(mode.omega))
    if not cols or not np.any(np.abs(amps) > 0):
        raise DataError("degenerate spec: no mode with nonzero amplitude")
    return (np.stack(cols, axis=1).astype(np.complex128), np.asarray(amps, dtype=np.complex128),
            np.asarray(deltas), np.asarray(omegas))


def generate(spec: SynthSpec, source_id: str = "synth",
             class_label: str | None = None) -> SynthResult:
    """Run the expansion forward and package frames plus ground truth."""
    modes, amps, deltas, omegas = _expansion(spec)
    times = np.arange(spec.k) * spec.dt
    data = evolve_field(modes, amps, deltas, omegas, times)   # (J, K)
    if spec.noise_amplitude > 0:
        rng = np.random.default_rng(spec.seed)
        data = data + rng.uniform(-spec.noise_amplitude, spec.noise_amplitude, size=data.shape)
    float_frames = np.ascontiguousarray(data.T.reshape(spec.k, spec.ny, spec.nx))
    pixels, lo, hi = quantize_u8(float_frames)

    aligned, aamps = phase_align(modes, amps)
    order = _amplitude_order(aamps, omegas)
    truth = DmdSpectrum(
        modes=aligned[:, order],
        amplitudes=aamps[order],
        growth_rates=deltas[order],
        frequencies=omegas[order],
        dt=spec.dt,
    )
    seq = FrameSequence(frames=pixels, dt=spec.dt, source_id=source_id, class_label=class_label)
    return SynthResult(sequence=seq, truth=truth, float_frames=float_frames, lo=lo, hi=hi)


def _jitter_mode(mode: SynthMode, rng: np.random.Generator) -> SynthMode:
    if not mode.jitter:
        return mode
    params = dict(mode.params)
    delta, omega, amp = mode.delta, mode.omega, complex(mode.amplitude)
    for key, half in mode.jitter.items():
        draw = rng.uniform(-half, half)
        if key == "delta":
            delta += draw
        elif key == "omega_rel":
            omega *= 1.0 + draw
        elif key == "amplitude_rel":
            amp *= 1.0 + draw
        elif key == "amplitude_phase":
            if omega != 0.0:
                amp *= np.exp(1j * draw)
        elif key in params:
            params[key] += draw
        else:
            raise DataError(f"jitter key {key!r} matches no parameter of {mode.pattern}")
    return replace(mode, delta=delta, omega=omega, amplitude=amp, params=params)


def jitter_spec(template: SynthSpec, rng: np.random.Generator) -> SynthSpec:
    modes = tuple(_jitter_mode(m, rng) for m in template.modes)
    return replace(template, modes=modes, seed=int(rng.integers(0, 2**63 - 1)))


def generate_class_corpus(class_specs: dict[str, SynthSpec], samples_per_class: int,
                          out_dir: str | Path, seed: int = 0,
                          frames_per_sample: int | None = None,
                          float_sidecar: bool = False) -> dict:
    """Write a class/sample/frame_*.png tree of jittered synthetic samples.

    Per-sample RNG streams are derived from (seed, class index, sample
    index), so regeneration with the same arguments is byte-identical.
    Returns a small summary manifest (also written to corpus.json).
    """
    if len(class_specs) < 2:
        raise DataError("a corpus needs at least 2 classes")
    if samples_per_class < 1:
        raise DataError("samples_per_class must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    summary: dict = {"seed": seed, "samples_per_class": samples_per_class, "classes": {}}
    for ci, label in enumerate(sorted(class_specs)):
        template = class_specs[label]
        if frames_per_sample is not None:
            template = replace(template, k=frames_per_sample)
        class_dir = out_dir / label
        class_dir.mkdir(exist_ok=True)
        sample_ids = []
        for si in range(samples_per_class):
            rng = np.random.default_rng(np.random.SeedSequence([seed, ci, si]))
            spec = jitter_spec(template, rng)
            sample_id = f"{label}{si:03d}"
            sample_dir = class_dir / sample_id
            sample_dir.mkdir(exist_ok=True)
            result = generate(spec, source_id=sample_id, class_label=label)
            for k in range(result.sequence.k):
                write_frame(sample_dir / f"frame_{k:04d}.png", result.sequence.frames[k])
            if float_sidecar:
                write_float_frames(sample_dir / FLOAT_SIDECAR, result.float_frames, spec.dt)
            (sample_dir / SAMPLE_META).write_text(json.dumps({
                "source_id": sample_id,
                "class_label": label,
                "dt": spec.dt,
                "k": spec.k,
                "nx": spec.nx,
                "ny": spec.ny,
                "noise_amplitude": spec.noise_amplitude,
                "quantization": {"lo": result.lo, "hi": result.hi},
                "seed": spec.seed,
            }, indent=2, sort_keys=True))
            sample_ids.append(sample_id)
        summary["classes"][label] = {"samples": sample_ids, "dt": template.dt,
                                     "k": template.k, "nx": template.nx, "ny": template.ny}
    (out_dir / "corpus.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return summary


def bundled_spec(n_classes: int = 5, nx: int = 64, ny: int = 64, k: int = 100,
                 dt: float = 0.02, noise_amplitude: float = 0.01) -> dict[str, SynthSpec]:
    """Default multi-class corpus templates.

    Every class shares a dominant steady background and a common set of
    pulsing texture modes; what separates the classes is a faint wave
    pattern with class-specific wavevector, fundamental frequency and
    harmonics. Per-sample nuisance modes (random position, random
    frequency in a band shared by all classes) plus pixel noise keep
    single frames from being trivially separable. Ten modes per sample
    have a non-negative frequency, so downstream selection of ten modes
    never runs short.
    """
    if n_classes < 2:
        raise DataError("need at least 2 classes")
    wavevectors = [(3.0, 0.0), (0.0, 3.0), (2.0, 2.0), (3.0, 1.5), (1.5, 3.0),
                   (4.0, 0.5), (0.5, 4.0), (2.5, 3.5)]
    if n_classes > len(wavevectors):
        raise DataError(f"bundled spec supports at most {len(wavevectors)} classes")
    hz = 2.0 * np.pi
    labels = [f"class{c:02d}" for c in range(n_classes)]
    specs: dict[str, SynthSpec] = {}
    for c, label in enumerate(labels):
        f0 = 1.0 + 0.25 * c                    # class fundamental, Hz
        kx, ky = wavevectors[c]
        wave_jitter = {"omega_rel": 0.02, "phase": 3.1,
                       "amplitude_rel": 0.15, "amplitude_phase": 3.1}
        modes = (
            # Steady anatomy. Its heavy per-sample jitter is the point:
            # every sample has its own background shape, so raw frames
            # carry strong sample identity that does not transfer to
            # unseen samples.
            SynthMode(delta=0.0, omega=0.0, amplitude=1.0,
                      pattern="gaussian_blob",
                      params={"cx": 0.5, "cy": 0.5, "sigma": 0.3},
                      jitter={"cx": 0.15, "cy": 0.15, "sigma": 0.08, "amplitude_rel": 0.15}),
            SynthMode(delta=-0.1, omega=0.0, amplitude=0.12,
                      pattern="gaussian_blob",
                      params={"cx": 0.3, "cy": 0.7, "sigma": 0.18},
                      jitter={"cx": 0.2, "cy": 0.2, "amplitude_rel": 0.3}),
            # Class signature: a faint wave with class-specific wavevector,
            # fundamental frequency and harmonics. These rank directly
            # below the background in amplitude, so they dominate the
            # exported mode images.
            SynthMode(delta=-0.05, omega=hz * f0, amplitude=0.5,
                      pattern="plane_wave", params={"kx": kx, "ky": ky, "phase": 0.0},
                      jitter=wave_jitter),
            SynthMode(delta=-0.05, omega=hz * 2 * f0, amplitude=0.36,
                      pattern="plane_wave", params={"kx": 2 * kx, "ky": 2 * ky, "phase": 0.0},
                      jitter=wave_jitter),
            SynthMode(delta=-0.08, omega=hz * 3 * f0, amplitude=0.18,
                      pattern="plane_wave",
                      params={"kx": kx + 1, "ky": ky + 1, "phase": 0.0},
                      jitter=wave_jitter),
            SynthMode(delta=0.0, omega=hz * 1.5 * f0, amplitude=0.12,
                      pattern="gaussian_blob",
                      params={"cx": 0.6, "cy": 0.4, "sigma": 0.15},
                      jitter={"cx": 0.08, "cy": 0.08, "omega_rel": 0.02,
                              "amplitude_rel": 0.15, "amplitude_phase": 3.1}),
            # Common pulsing textures, identical across classes.
            SynthMode(delta=0.0, omega=hz * 6.6, amplitude=0.1,
                      pattern="checkerboard", params={"period": 6},
                      jitter={"omega_rel": 0.01, "amplitude_rel": 0.2, "amplitude_phase": 3.1}),
            SynthMode(delta=0.0, omega=hz * 7.3, amplitude=0.08,
                      pattern="plane_wave", params={"kx": 5.0, "ky": 5.0, "phase": 0.0},
                      jitter={"omega_rel": 0.01, "amplitude_rel": 0.2, "amplitude_phase": 3.1}),
            # Per-sample nuisance: waves with RANDOM orientation in bands
            # shared by all classes, strong enough that a single frame
            # shows a muddle of class and random orientations, plus an
            # oscillating blob at a random position. Frequency separation
            # keeps them out of the top mode images.
            SynthMode(delta=0.0, omega=hz * 4.4, amplitude=0.3,
                      pattern="plane_wave", params={"kx": 2.5, "ky": 2.5, "phase": 0.0},
                      jitter={"kx": 2.3, "ky": 2.3, "phase": 3.1, "omega_rel": 0.06,
                              "amplitude_rel": 0.3, "amplitude_phase": 3.1}),
            SynthMode(delta=0.0, omega=hz * 5.7, amplitude=0.26,
                      pattern="plane_wave", params={"kx": 2.5, "ky": 2.5, "phase": 0.0},
                      jitter={"kx": 2.3, "ky": 2.3, "phase": 3.1, "omega_rel": 0.05,
                              "amplitude_rel": 0.3, "amplitude_phase": 3.1}),
            SynthMode(delta=0.0, omega=hz * 9.5, amplitude=0.24,
                      pattern="plane_wave", params={"kx": 2.5, "ky": 2.5, "phase": 0.0},
                      jitter={"kx": 2.3, "ky": 2.3, "phase": 3.1, "omega_rel": 0.05,
                              "amplitude_rel": 0.3, "amplitude_phase": 3.1}),
            SynthMode(delta=0.0, omega=hz * 8.2, amplitude=0.16,
                      pattern="gaussian_blob",
                      params={"cx": 0.5, "cy": 0.5, "sigma": 0.15},
                      jitter={"cx": 0.3, "cy": 0.3, "omega_rel": 0.05,
                              "amplitude_rel": 0.3, "amplitude_phase": 3.1}),
        )
        specs[label] = SynthSpec(modes=modes, nx=nx, ny=ny, k=k, dt=dt,
                                 noise_amplitude=noise_amplitude)
    return specs


def _mode_from_json(payload: dict) -> SynthMode:
    amp = payload.get("amplitude", 1.0)
    if isinstance(amp, (list, tuple)):
        amp = complex(amp[0], amp[1])
    return SynthMode(
        delta=float(payload.get("delta", 0.0)),
        omega=float(payload.get("omega", 0.0)),
        amplitude=complex(amp),
        pattern=payload["pattern"],
        params=dict(payload.get("params", {})),
        jitter=dict(payload.get("jitter", {})),
    )


def load_corpus_spec(path: str | Path) -> dict[str, SynthSpec]:
    """Parse a JSON corpus spec into per-class SynthSpec templates."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed spec {path}: line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise DataError(f"cannot read spec {path}: {exc}") from exc
    try:
        common = dict(nx=int(payload["nx"]), ny=int(payload["ny"]), k=int(payload["k"]),
                      dt=float(payload["dt"]),
                      noise_amplitude=float(payload.get("noise_amplitude", 0.0)))
        classes = payload["classes"]
        if not isinstance(classes, dict) or not classes:
            raise DataError(f"spec {path} has no classes")
        return {
            label: SynthSpec(modes=tuple(_mode_from_json(m) for m in mode_list), **common)
            for label, mode_list in classes.items()
        }
    except KeyError as exc:
        raise DataError(f"spec {path} missing key {exc}") from exc
