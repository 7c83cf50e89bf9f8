"""QAM-FBMC and CP-OFDM link-level simulation."""

from .filterbank import FilterBank, FilterBankConfig, make_filter_bank
from .txrx import OfdmConfig

__version__ = "0.1.0"

__all__ = ["FilterBank", "FilterBankConfig", "make_filter_bank", "OfdmConfig", "__version__"]
