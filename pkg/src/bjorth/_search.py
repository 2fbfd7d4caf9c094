"""Derivative-free compass search shared by the coapproximation and basis searches."""

import numpy as np


def compass_search(f, x0, f0=None, scale=1.0, target=-np.inf,
                   step=0.5, min_step=1e-6, shrink=0.5, max_evals=200_000):
    """Minimize ``f`` by coordinate moves of size ``step * scale``, shrinking on failure.

    Stops once ``f`` drops to ``target``, the step falls below ``min_step``
    or ``max_evals`` evaluations were spent. Returns ``(value, point)``.
    """
    x = np.array(x0, dtype=float)
    shape = x.shape
    x = x.ravel()
    v = f(x.reshape(shape)) if f0 is None else f0
    evals = 0
    while step >= min_step and v > target and evals < max_evals:
        improved = True
        while improved and v > target and evals < max_evals:
            improved = False
            for j in range(x.size):
                for sgn in (1.0, -1.0):
                    trial = x.copy()
                    trial[j] += sgn * step * scale
                    vt = f(trial.reshape(shape))
                    evals += 1
                    if vt < v:
                        x, v, improved = trial, vt, True
                        break
        step *= shrink
    return v, x.reshape(shape)
