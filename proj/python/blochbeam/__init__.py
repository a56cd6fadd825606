"""Gaussian-beam construction for a Bloch electron in a weak magnetic field.

Thin Python surface over the C++ core: plane-wave band structure, cyclotron
orbits, beam-frame propagation, geometric phases, magnetic levels, and the
asymptotic residual checks. Heavy lifting happens in the `_core` extension;
this module only adds JSON conveniences.
"""

import json as _json

from ._core import (  # noqa: F401
    __version__,
    band_derivs,
    band_energy,
    band_state,
    magnetic_levels,
    trace_orbit,
)
from ._core import run as _run_raw

__all__ = [
    "__version__",
    "band_derivs",
    "band_energy",
    "band_state",
    "magnetic_levels",
    "trace_orbit",
    "run",
]


def run(command, config, out_dir="out"):
    """Run one pipeline command.

    `config` may be a dict or a JSON string. Returns the run summary as a
    dict; artifacts (CSV/JSON files) are written to `out_dir`.
    """
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _json.loads(_run_raw(command, config, out_dir))
