"""Select the compiled kernels when the extension is built, else the numpy ones.

Set ``LINGERING_BACKEND=python`` to force the fallback.
"""

import os

from . import _core_py

python = _core_py

if os.environ.get("LINGERING_BACKEND", "").lower() == "python":
    compiled = None
    kernels = _core_py
else:
    try:
        from . import _core as compiled
    except ImportError:  # extension not built
        compiled = None
        kernels = _core_py
    else:
        kernels = compiled

BACKEND = kernels.BACKEND
