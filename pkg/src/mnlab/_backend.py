"""Select the kernel implementation at import time.

The compiled extension is used when it imports cleanly, unless the
environment variable ``MNLAB_PURE_PYTHON`` is set to a non-empty value other
than ``0``.
"""

from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)


def _load():
    if os.environ.get("MNLAB_PURE_PYTHON", "") not in ("", "0"):
        from . import _purepy
        return _purepy, "python"
    try:
        from . import _kernels
    except ImportError as exc:  # pragma: no cover - depends on build
        logger.debug("compiled kernels unavailable (%s); using pure Python", exc)
        from . import _purepy
        return _purepy, "python"
    return _kernels, "compiled"


kernels, BACKEND = _load()
timemap_integral = kernels.timemap_integral
integrate_nonlinear = kernels.integrate_nonlinear
