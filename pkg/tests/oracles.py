"""Independent reference computations used by the tests.

Each oracle avoids the code path it checks: direct phasor sums instead of
buckets, mpmath arithmetic instead of numpy QR, plain loops instead of
vectorized numpy.
"""

import cmath
import math

import mpmath

C = 299_792_458.0


def phasor_sum(depths, amplitudes, f0, n):
    """z_n = sum_k G_k exp(j 2 d_k (2 pi f0 n) / c) by straight summation."""
    total = 0j
    for d, a in zip(depths, amplitudes):
        total += a * cmath.exp(1j * 2.0 * d * 2.0 * math.pi * f0 * n / C)
    return total


def bucket_samples(depths, amplitudes, f0, n, s0=1.0, c0=None):
    """m[q] = C0 + (s0^2/2) sum_k G_k cos(q pi/2 + phi_k), one harmonic, loops only."""
    if c0 is None:
        c0 = sum(amplitudes)
    out = []
    for q in range(4):
        acc = 0.0
        for d, a in zip(depths, amplitudes):
            phi = 2.0 * d * 2.0 * math.pi * f0 * n / C
            acc += a * math.cos(q * math.pi / 2.0 + phi)
        out.append(c0 + 0.5 * s0 * s0 * acc)
    return out


def mp_least_squares(z, columns, dps=50):
    """Least squares via mpmath normal equations at ``dps`` digits.

    Returns (coefficients as complex, residual norm as float).
    """
    with mpmath.workdps(dps):
        A = mpmath.matrix([[mpmath.mpc(complex(v)) for v in row] for row in columns])
        b = mpmath.matrix([mpmath.mpc(complex(v)) for v in z])
        AH = A.H
        coef = mpmath.lu_solve(AH * A, AH * b)
        r = b - A * coef
        res = mpmath.sqrt(sum(abs(r[i]) ** 2 for i in range(r.rows)))
        return [complex(coef[i]) for i in range(coef.rows)], float(res)
