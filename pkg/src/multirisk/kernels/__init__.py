"""Cascade kernel selection: compiled extension when available, numpy otherwise.

Both implementations are importable (``cascade_python``, and
``cascade_compiled`` when the extension was built); ``cascade`` is the one
selected at import time. Set ``MULTIRISK_PURE_PYTHON=1`` to force selection
of the numpy kernel. The active backend name is exposed as ``BACKEND``.
"""

import os

from . import _cascade_py

cascade_python = _cascade_py.cascade
STATE_UNDISTRESSED = _cascade_py.STATE_UNDISTRESSED
STATE_DISTRESSED = _cascade_py.STATE_DISTRESSED
STATE_INACTIVE = _cascade_py.STATE_INACTIVE

try:
    from . import _cascade_cy

    cascade_compiled = _cascade_cy.cascade
except ImportError:
    cascade_compiled = None

if cascade_compiled is not None and not os.environ.get("MULTIRISK_PURE_PYTHON"):
    cascade = cascade_compiled
    BACKEND = "compiled"
else:
    cascade = cascade_python
    BACKEND = "python"
