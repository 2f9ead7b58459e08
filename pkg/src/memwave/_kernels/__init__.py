"""Numerical kernels with a compiled fast path and a numpy fallback.

`_fast` is a Cython extension built at install time; when it is missing (or
MEMWAVE_DISABLE_FAST is set) the numpy implementations in `_ref` take over.
Both expose the same functions with identical semantics.
"""

import os

from memwave._kernels import _ref

if os.environ.get("MEMWAVE_DISABLE_FAST"):
    _impl = _ref
    HAVE_FAST = False
else:
    try:
        from memwave._kernels import _fast as _impl
        HAVE_FAST = True
    except ImportError:
        _impl = _ref
        HAVE_FAST = False

backward_exp_integral = _impl.backward_exp_integral
rk4_mode_states = _impl.rk4_mode_states
leapfrog_run = _impl.leapfrog_run

__all__ = ["backward_exp_integral", "rk4_mode_states", "leapfrog_run", "HAVE_FAST"]
