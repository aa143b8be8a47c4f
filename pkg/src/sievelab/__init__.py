"""Neumann sieve experiments: non-local interface conditions as limits of thin passages.

The modules build, bottom-up, a sieve plan of holes and passages
(:mod:`geometry`), triangular meshes (:mod:`mesh`), finite element operators
(:mod:`assembly`), linear and eigen solvers (:mod:`solvers`), heat flows
(:mod:`semigroup`) and the epsilon sweeps comparing sieve and limit models
(:mod:`harness`).
"""
from .kernel import InterfaceKernel, constant_kernel, gaussian_kernel, kernel_from_spec, separable_kernel
from .geometry import DLaw, LimitDomain, SievePlan, audit_assumptions, build_sieve_plan
from .mesh import mesh_limit_domain, mesh_sieve
from .assembly import OperatorPair, assemble_reduced_sieve, assemble_sieve_full, limit_operator
from .solvers import smallest_eigenpairs, solve_shifted
from .semigroup import heat_evolve
from .config import RunConfig, parse_config

__version__ = "0.1.0"
