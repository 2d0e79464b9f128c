"""Link-level simulator for Walsh-Hadamard (OTSM), OTFS, OFDM and single-carrier frames."""

from .frame import FrameParams, QamConstellation, build_grid
from .harness import SimConfig, TrialResult, compare, run

__all__ = ["FrameParams", "QamConstellation", "SimConfig", "TrialResult", "build_grid", "compare", "run"]
__version__ = "0.1.0"
