# Compensated (Kahan-Babuska-Neumaier) reductions over fixed-order arrays.
# These are the hot inner kernels of the tensor-product contour quadrature:
# every multidimensional integral in the package reduces millions of complex
# terms whose magnitudes span many orders (large-radius contours carry
# factors ~ e^{t R'}), so plain accumulation loses the answer.

import numpy as np
cimport numpy as cnp


cdef inline void _neumaier_step(double x, double* s, double* c) nogil:
    cdef double t = s[0] + x
    if (s[0] if s[0] >= 0 else -s[0]) >= (x if x >= 0 else -x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def neumaier_sum_real(double[::1] x):
    """Compensated sum of a real array, in array order."""
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        _neumaier_step(x[i], &s, &c)
    return s + c


def neumaier_sum_complex(double complex[::1] z):
    """Compensated sum of a complex array, in array order."""
    cdef double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0
    cdef Py_ssize_t i
    for i in range(z.shape[0]):
        _neumaier_step(z[i].real, &sr, &cr)
        _neumaier_step(z[i].imag, &si, &ci)
    return complex(sr + cr, si + ci)
