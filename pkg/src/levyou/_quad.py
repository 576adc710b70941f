"""Panel Gauss-Legendre quadrature with doubling refinement.

The integrands in this package (matrix Gramians, time-changed jump exponents,
jump-moment integrals) are entire in the time variable, so fixed-order
Gauss-Legendre panels converge spectrally; doubling the panel count until two
successive results agree gives a cheap, reliable error estimate.
"""

from __future__ import annotations

import numpy as np

from .errors import NonConvergedQuadrature

__all__ = ["panel_nodes", "panel_integrate"]

GL_ORDER = 16


def panel_nodes(a: float, b: float, n_panels: int, order: int = GL_ORDER):
    """Nodes and weights for `n_panels` equal Gauss-Legendre panels on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    nodes = (mid[:, None] + half * x[None, :]).ravel()
    weights = np.broadcast_to(half * w[None, :], (n_panels, order)).ravel()
    return nodes, weights.copy()


def panel_integrate(f, a, b, tol=1e-12, initial_panels=4, max_panels=4096,
                    order: int = GL_ORDER):
    """Integrate a vectorized function over [a, b] to absolute tolerance.

    Parameters
    ----------
    f : callable
        Maps an array of nodes (K,) to values of shape (K, ...); the integral
        is taken over the first axis.
    a, b : float
        Integration limits, a <= b.
    tol : float
        Tolerance on the max-norm difference between two successive
        panel-doubled results, relative to 1 + the result's max-norm (so it
        acts absolutely near zero and relatively for large integrands, whose
        summation roundoff alone can exceed an absolute threshold).

    Returns
    -------
    ndarray or scalar with the integrand's trailing shape.

    Raises
    ------
    NonConvergedQuadrature
        If doubling up to `max_panels` panels never meets the tolerance.
    """
    if b < a:
        raise ValueError("panel_integrate requires a <= b")
    if b == a:
        probe = np.asarray(f(np.array([a])))
        return np.zeros(probe.shape[1:], dtype=probe.dtype) if probe.ndim > 1 else probe.dtype.type(0)

    n_panels = max(1, int(initial_panels))
    prev = None
    while n_panels <= max_panels:
        nodes, weights = panel_nodes(a, b, n_panels, order)
        vals = np.asarray(f(nodes))
        cur = np.tensordot(weights, vals, axes=(0, 0))
        if prev is not None:
            scale = 1.0 + float(np.max(np.abs(cur)))
            if np.max(np.abs(cur - prev)) < tol * scale:
                return cur
        prev = cur
        n_panels *= 2
    raise NonConvergedQuadrature(
        f"panel quadrature on [{a}, {b}] did not reach tol={tol} "
        f"within {max_panels} panels"
    )
