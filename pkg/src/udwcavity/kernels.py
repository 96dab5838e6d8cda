"""Kernel backend selection.

Two interchangeable backends provide the hot numerical kernels:

* ``udwcavity._ckernels`` — compiled Cython extension (preferred),
* ``udwcavity._pykernels`` — pure numpy/scipy fallback.

The compiled backend is used when importable; set the environment
variable ``UDWCAVITY_KERNELS=py`` (or ``c``) to force a choice.  The
selected backend is re-exported at module level, so callers use e.g.
``kernels.j0``/``kernels.gauss_cosh`` without caring which one runs.
"""

import os

from . import _pykernels


def _load_compiled():
    from . import _ckernels

    return _ckernels


def get_backend(which=None):
    """Return a kernel backend module by name ("c", "py" or None=selected)."""
    if which in (None, ""):
        return backend
    key = which.strip().lower()
    if key in ("py", "pure", "python"):
        return _pykernels
    if key in ("c", "compiled", "cython"):
        return _load_compiled()
    raise ValueError(f"unknown kernel backend {which!r}")


def available_backends():
    names = ["py"]
    try:
        _load_compiled()
    except ImportError:
        pass
    else:
        names.insert(0, "c")
    return names


_forced = os.environ.get("UDWCAVITY_KERNELS", "")
if _forced:
    backend = get_backend(_forced)
else:
    try:
        backend = _load_compiled()
    except ImportError:
        backend = _pykernels

backend_name = backend.name

j0 = backend.j0
j1 = backend.j1
jn = backend.jn
j0v = backend.j0v
j1v = backend.j1v
jnv = backend.jnv
i0e = backend.i0e
k0e = backend.k0e
i0ev = backend.i0ev
k0ev = backend.k0ev
gauss_cosh = backend.gauss_cosh
gauss_cosh_batch = backend.gauss_cosh_batch
