"""Backend selection for the pCN inner loop.

The compiled extension is used when importable; setting
TORUSGIBBS_FORCE_FALLBACK=1 forces the pure-numpy twin (used by the parity
tests and the benchmark).
"""

import os

from . import _pcn_python

try:
    from . import _pcn_core
except ImportError:  # extension not built; fall back
    _pcn_core = None

HAVE_COMPILED = _pcn_core is not None

if HAVE_COMPILED and os.environ.get("TORUSGIBBS_FORCE_FALLBACK") != "1":
    BACKEND = "compiled"
    run_pcn_block = _pcn_core.run_pcn_block
else:
    BACKEND = "python"
    run_pcn_block = _pcn_python.run_pcn_block


def backends():
    """Mapping of available backend name -> block runner."""
    out = {"python": _pcn_python.run_pcn_block}
    if HAVE_COMPILED:
        out["compiled"] = _pcn_core.run_pcn_block
    return out
