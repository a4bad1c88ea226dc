"""Reference computations that share no code with the library's closed forms.

The measure of a starlike reduced support is integrated directly over the
region {s f(e^{i theta}) : 0 <= s <= 1}: Gauss-Jacobi in s absorbs the
|w|^{2n/d-2} singularity at the origin, the periodic theta direction uses
the trapezoidal rule.  Only boundary values f and f' enter.
"""

import math

import numpy as np
from scipy.special import roots_jacobi


def area_quadrature(n, d, T, boundary, boundary_prime, n_theta=1024, n_s=64):
    """Nodes and weights of the density n^2/(pi T d) |w|^{2n/d-2} over a starlike region.

    ``boundary(u)``/``boundary_prime(u)`` evaluate the exterior map and its
    derivative on the unit circle.
    """
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    u = np.exp(1j * theta)
    F, Fp = boundary(u), boundary_prime(u)
    jac = np.real(np.conj(F) * u * Fp)
    if np.any(jac <= 0):
        raise ValueError("region is not starlike with respect to the origin")
    p = 2 * n / d - 2
    x, wx = roots_jacobi(n_s, 0.0, p + 1)
    s = 0.5 * (1 + x)
    ws = wx * 2.0 ** (-(p + 1) - 1)
    angular = (2 * np.pi / n_theta) * n**2 / (math.pi * T * d) * np.abs(F) ** p * jac
    nodes = s[:, None] * F[None, :]
    weights = ws[:, None] * angular[None, :]
    return nodes.ravel(), weights.ravel()


def cauchy_transform(nodes, weights, z):
    return complex(np.sum(weights / (nodes - z)))


def log_potential(nodes, weights, z):
    return float(np.sum(weights * -np.log(np.abs(z - nodes))))


def reduced_field(n, d, T, t, z):
    return d / T * (abs(z) ** (2 * n / d) - 2 * (t * z).real)


def effective_potential(n, d, T, t, nodes, weights, z):
    """Q(z) + 2 U(z) from the quadrature, the real function whose z-derivative is checked."""
    return reduced_field(n, d, T, t, z) + 2 * log_potential(nodes, weights, z)


def radius_polynomial_roots(abs_t, T=1.0):
    """Positive roots r of y(r) for (n, d) = (2, 1): x^3 - (T/2) x + abs_t^2/8 = 0 with x = r^2."""
    x = np.roots([1.0, 0.0, -T / 2, abs_t**2 / 8])
    x = np.sort(x[np.abs(x.imag) < 1e-12].real)
    return np.sqrt(x[x > 0])
