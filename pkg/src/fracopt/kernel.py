"""Backend selection for the batch evaluation kernels.

The compiled extension ``fracopt._kernel`` is used when it imports; otherwise
the pure-Python ``fracopt._kernel_py`` takes over. Set ``FRACOPT_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _kernel_py

BACKENDS = {"python": _kernel_py}

try:
    from . import _kernel as _kernel_c
except ImportError:  # extension not built
    _kernel_c = None
else:
    BACKENDS["cython"] = _kernel_c

if _kernel_c is not None and os.environ.get("FRACOPT_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]


def get_backend(name=None):
    """Return the kernel module ``name`` (default: the active one)."""
    if name is None:
        return _impl
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def eval_batch(program, X, backend=None):
    k = get_backend(backend)
    return k.eval_batch(program.code, program.consts, program.stack_size, X)


def eval_ratio(prog_a, prog_b, X, sign, zero_tol, backend=None):
    k = get_backend(backend)
    stack = max(prog_a.stack_size, prog_b.stack_size)
    return k.eval_ratio(prog_a.code, prog_a.consts, prog_b.code, prog_b.consts, stack, X, float(sign), float(zero_tol))
