"""Python surface of the causeway pipeline.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its submodules so callers can write ``causeway.causal.ate_iptw``.
"""

from ._core import (  # noqa: F401
    CausewayError,
    __version__,
    causal,
    classify,
    metrics,
    pipeline,
    stance,
    synth,
    weaklabel,
)

__all__ = [
    "CausewayError",
    "__version__",
    "causal",
    "classify",
    "metrics",
    "pipeline",
    "stance",
    "synth",
    "weaklabel",
]
