"""Exact computations for the unrolled quantum group of osp(1|2) at roots of unity
and the 3-manifold invariants built from it."""

__version__ = "0.1.0"
