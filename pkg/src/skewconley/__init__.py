"""Conley decomposition of nonautonomous dynamical systems on box grids.

A cocycle over a base flow is discretized into a directed graph on
``(base sample, box)`` nodes. Strong components of that graph approximate the
chain recurrent set; forward closures give attractor-repeller pairs, which
combine into a complete Lyapunov function. Pullback images approximate local
attractors fiber by fiber.
"""

from .base import BaseFlow, shift
from .conley import (AttractorRepellerPair, MorseDecomposition, attractor_from_seed, basin, chain_exists,
                     enumerate_pairs, morse, numeric_chain, repeller, verify_decomposition)
from .errors import (ConfigError, CorruptHeader, CycleInTransientSet, DegenerateProbe, Diverged,
                     FormatVersionMismatch, IncompatibleSampling, NotForwardInvariant, NotFound, NotNested,
                     SkewConleyError, TooManyBoxes, UnknownName)
from .estimators import ConleyDecomposition, PullbackAttractor
from .grid import BaseSampling, Grid, build_grid, sample_base, subdivide
from .lyapunov import LyapunovField, complete_lyapunov, lambda_ratio, lyapunov_l, pair_function, sup_g
from .pullback import PullbackResult, pullback_attractor, pullback_convergence, pullback_image
from .systems import (BUILTIN_NAMES, BilinearSystemSpec, CocycleSystem, check_energy_conditions,
                      cocycle_residual, evolve, make_builtin, stationary_residual)
from .transition import TransitionGraph, build_transition, load_graph, save_graph

__version__ = "0.1.0"
