"""Hot-kernel dispatch.

Uses the compiled ``_ckernels`` extension when it was built, otherwise the
numpy versions in ``_fallback``.  Set ``WDS_KERNELS=python`` to force the
fallback.  Both backends produce bit-identical Gaussian draws.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("WDS_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback

normal_block = _impl.normal_block
normal_ppf = _impl.normal_ppf
sq_diff_sum = _impl.sq_diff_sum
mix64 = _fallback.mix64_int


def thread_count() -> int:
    """Worker cap from ``WDS_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("WDS_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n
