"""Bit-exact fixed-point multirate decimation toolkit.

Modules:

- :mod:`cicdsp.fixword` -- two's-complement fixed-width words
- :mod:`cicdsp.bitarith` -- gate-level adder/subtractor models
- :mod:`cicdsp.cic` -- Hogenauer decimator/interpolator and sizing rules
- :mod:`cicdsp.sdm` -- behavioral sigma-delta modulators
- :mod:`cicdsp.fir` -- half-band and droop-correction FIR design
- :mod:`cicdsp.analysis` -- frequency responses, SNR, truncation noise
- :mod:`cicdsp.chain` -- the multi-stage decimation pipeline
- :mod:`cicdsp.cli` -- the ``cicdsp`` command-line tool
"""

from .fixword import FixedWord
from .cic import CicConfig, CicDecimator, CicInterpolator
from .sdm import SdmConfig, SdmState
from .fir import FirFilter, HalfBandSpec
from .chain import ChainConfig, SignalStream

__all__ = [
    "FixedWord",
    "CicConfig",
    "CicDecimator",
    "CicInterpolator",
    "SdmConfig",
    "SdmState",
    "FirFilter",
    "HalfBandSpec",
    "ChainConfig",
    "SignalStream",
]

__version__ = "0.1.0"
