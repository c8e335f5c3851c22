"""Coded-modulation simulation lab: 8PSK TTCM and BICM LDPC over correlated AWGN."""

import os

from ._core import *  # noqa: F401,F403
from . import _core


def dvbs2_table_path():
    """Path to the bundled DVB-S2 rate-2/3 address table."""
    env = os.environ.get("CMLAB_DVBS2_TABLE")
    if env:
        return env
    here = os.path.join(os.path.dirname(__file__), "data", "dvbs2_r23_n64800.txt")
    if os.path.exists(here):
        return here
    return _core.default_dvbs2_table_path()


__all__ = [name for name in dir(_core) if not name.startswith("_")] + ["dvbs2_table_path"]
