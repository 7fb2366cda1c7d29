"""Numerical core selection.

The compiled Cython kernels are preferred; if the extension was not
built, the pure-Python mirror in ``_pure`` is used instead (identical
algorithm, much slower).  ``USING_COMPILED_CORE`` records the choice.
"""

from . import _pure

try:
    from . import _core as _backend
    USING_COMPILED_CORE = True
except ImportError:  # pragma: no cover - depends on build environment
    _backend = _pure
    USING_COMPILED_CORE = False

SYSTEM_DOUBLE_WELL = 0
SYSTEM_TRIPLE_WELL = 1
SYSTEM_HARMONIC = 2

STATUS_OK = _pure.STATUS_OK
STATUS_ESCAPED = _pure.STATUS_ESCAPED
STATUS_STEPFAIL = _pure.STATUS_STEPFAIL
STATUS_BRANCH = _pure.STATUS_BRANCH

integrate_batch = _backend.integrate_batch
accumulate_gaussians_1d = _backend.accumulate_gaussians_1d
accumulate_gaussians_2d = _backend.accumulate_gaussians_2d
system_dof = _pure.system_dof
