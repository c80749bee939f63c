"""Noether symmetries and invariants of the reduced gauged bilayer-graphene model."""

from .algebra import (
    COMMUTATOR_TABLE,
    GeneratorField,
    PhaseFunction,
    canonical_momentum,
    generator,
    lie_bracket,
    poisson_bracket,
    qdot_of,
    verify_commutator_table,
    verify_poisson_table,
)
from .integrate import IntegrationError, Tolerances, Trajectory, quadrature, solve_ivp
from .invariants import (
    FundamentalPair,
    InvariantReport,
    NoetherCoefficients,
    PinneyCoefficients,
    T_solution,
    drift_report,
    ermakov_lewis,
    fundamental_pair,
    g2_by_quadrature,
    gauge_function_F,
    invariance_condition_residual,
    invariant_I,
    noether_invariant,
    pinney_residual,
    pinney_rho,
    third_order_residual,
    wronskian,
)
from .model import (
    GaugeProfile,
    PhaseState,
    RadialMap,
    asymptote_check,
    gauge_A,
    hamiltonian,
    lagrangian,
    omega_squared,
    partner_omega_squared,
    phi_bessel,
    phi_zero,
    radial_to_scaled,
    reduced_rhs,
    standard_lagrangian,
)
from .specfun import bessel_k0, bessel_k1, bessel_k1_deriv

__version__ = "0.1.0"
