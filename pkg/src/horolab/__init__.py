"""Numerical experiments on joint equidistribution of expanding horocycles
on the modular surface, with exact Hecke coset arithmetic for rational slopes."""

__version__ = "0.1.0"

from .sl2 import (ExactMatrix, GroupElement, Slope, UHPoint, conjugation_identity_check,
                  exact_eq, exact_inv, exact_mul, make_a, make_delta, make_u, mobius)
from .modular import (ReducedPoint, ReductionError, invariant_height, quad_F, reduce,
                      reduce_array, sample_F)
from .hecke import (CosetSystem, HeckeSet, apply_double_coset, coset_reps_T, coset_reps_Tn,
                    double_coset_check, enumerate_gamma_cosets, gamma_y_member, hecke_apply)
from .observables import (Observable, cell_indicator, const, eisenstein, height_window,
                          parse_observable, product_observable)
from .experiments import (ExperimentConfig, RunResult, compare_report, horocycle_run,
                          rational_limit_mc, verify_hecke_pointwise)
