"""Independent dense references shared by the test modules.

Everything here is deliberately naive: dense blocks, numpy solves, explicit
loops.  The point is to check the fast paths against arithmetic that cannot
share their failure modes.
"""

import numpy as np

from toepreg.extension import conditions_to_dense
from toepreg.toeplitz import ProblemSpec, ToeplitzSpec, materialize


def dense_normal_matrix(problem: ProblemSpec) -> np.ndarray:
    """The regularized normal matrix assembled from dense blocks."""
    n = problem.n
    if problem.variant == "general":
        t = materialize(problem.T)
        l = materialize(problem.L)
        return t.conj().T @ t + l.conj().T @ l
    if problem.variant == "l2":
        t = materialize(problem.T)
        return t.conj().T @ t + problem.beta_sq * np.eye(n)
    g = materialize(problem.G.as_toeplitz())
    l = materialize(problem.L)
    return g + l.conj().T @ l


def dense_tikhonov(problem: ProblemSpec) -> np.ndarray:
    """Closed-form minimizer via a plain dense solve."""
    return np.linalg.solve(dense_normal_matrix(problem),
                           problem.normal_rhs_vector())


def null_space_solution(system):
    """Solution read off the stacked dense conditions matrix.

    Returns (x, singular values); the conditions matrix must have a
    one-dimensional null space whose constant slot is nonzero.
    """
    a = conditions_to_dense(system)
    _, s, vh = np.linalg.svd(a)
    v = vh[-1].conj()
    return v[: system.n] / v[-1], s


def rel_err(x, ref) -> float:
    return float(np.linalg.norm(x - ref) / np.linalg.norm(ref))


def random_spec(rng, rows: int, cols: int) -> ToeplitzSpec:
    gen = (rng.standard_normal(rows + cols - 1)
           + 1j * rng.standard_normal(rows + cols - 1)) / np.sqrt(2.0)
    return ToeplitzSpec(rows, cols, gen)
