"""Deterministic compensated reduction.

All tensor-product quadratures in this package funnel their term streams
through :func:`csum`.  Terms are reduced in a fixed order (array order for a
block, block order across blocks), so a result is bit-identical no matter how
many workers evaluated the blocks.

Two backends:

* ``cython`` -- Kahan-Babuska-Neumaier compensated loop in the compiled
  extension ``xxzdw._fastsum`` (built at install time);
* ``python`` -- ``math.fsum`` over the real and imaginary parts, which is
  exactly rounded and therefore also order-independent.

The backends agree to within one ulp of the true sum; ``BACKEND`` records
which one is active.
"""

from __future__ import annotations

import math

import numpy as np

try:  # pragma: no cover - exercised only when the extension is missing
    from . import _fastsum

    BACKEND = "cython"
except ImportError:  # pragma: no cover
    _fastsum = None
    BACKEND = "python"


def csum(values: np.ndarray) -> complex:
    """Compensated sum of a 1-d array in array order.

    Returns a complex number; take ``.real`` for real-valued streams.
    """
    values = np.ascontiguousarray(values)
    if values.size == 0:
        return 0.0 + 0.0j
    if _fastsum is not None:
        if np.iscomplexobj(values):
            return _fastsum.neumaier_sum_complex(values.astype(np.complex128, copy=False))
        return complex(_fastsum.neumaier_sum_real(values.astype(np.float64, copy=False)))
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return complex(math.fsum(values.astype(np.float64, copy=False)))


def csum_pairs(partials: list[complex]) -> complex:
    """Combine block partial sums, again in fixed (list) order."""
    return csum(np.asarray(partials, dtype=np.complex128))
