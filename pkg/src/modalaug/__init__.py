"""Modal decomposition of image sequences and DMD-mode dataset augmentation."""

__version__ = "0.1.0"

from .errors import DataError, ModalaugError, NumericalError
from .hodmd import (DmdSpectrum, HodmdParams, SvdTruncation, analyze, dmd_d,
                    eigen_to_continuous, fit_amplitudes, reconstruct,
                    retain_modes, truncated_svd)
from .modes import ModeImage, SelectionPolicy, export_modes, render_mode, select_modes
from .snapshots import (CropRect, FrameSequence, SnapshotMatrix, crop,
                        load_sequence, to_snapshot_matrix)
from .synth import SynthMode, SynthSpec, generate, generate_class_corpus

__all__ = [
    "DataError", "ModalaugError", "NumericalError",
    "DmdSpectrum", "HodmdParams", "SvdTruncation",
    "analyze", "dmd_d", "eigen_to_continuous", "fit_amplitudes",
    "reconstruct", "retain_modes", "truncated_svd",
    "ModeImage", "SelectionPolicy", "export_modes", "render_mode", "select_modes",
    "CropRect", "FrameSequence", "SnapshotMatrix", "crop",
    "load_sequence", "to_snapshot_matrix",
    "SynthMode", "SynthSpec", "generate", "generate_class_corpus",
    "__version__",
]
