"""Exact tools for N-differential graded algebras: connections of bounded
covariant nilpotency, generalized Chern-Simons Lagrangians, signed path
expansions of covariant powers, depth-bounded differential forms, and
generalized cohomology of finite N-complexes."""

from . import chern_simons, depth, forms, knflat, linalg, ncomplex, riemann, scalar

__all__ = [
    "chern_simons",
    "depth",
    "forms",
    "knflat",
    "linalg",
    "ncomplex",
    "riemann",
    "scalar",
]
