"""Built-in consistency checks run by ``noether selftest``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .algebra import default_sample_points, verify_commutator_table, verify_poisson_table
from .integrate import Tolerances, solve_ivp
from .invariants import NoetherCoefficients, drift_report, fundamental_pair
from .model import phi_zero, reduced_vector_field

# (t, K0(t), K1(t)) from 40-digit quadrature of the integral representations
BESSEL_REFERENCE: tuple[tuple[float, float, float], ...] = (
    (1e-3, 7.02368880056238134361208, 999.9962381560855742779534),
    (1e-2, 4.721244730161094965135878, 99.97389411829624764303953),
    (0.1, 2.427069024702016612518506, 9.853844780870606134848547),
    (0.5, 0.9244190712276658617819242, 1.656441120003300893696445),
    (1, 0.4210244382407083333356274, 0.60190723019723457473754),
    (1.5, 0.213805562647525736721621, 0.2773878004568438160853597),
    (2, 0.1138938727495334356527196, 0.1398658818165224272845988),
    (2.5, 0.06234755320036618602916953, 0.07389081634774706364899354),
    (3, 0.03473950438627924807234955, 0.04015643112819418437670578),
    (5, 0.003691098334042594274735261, 0.004044613445452164208365022),
    (10, 0.00001778006231616765181130119, 0.00001864877345382558459681686),
    (20, 5.741237815336524292716702e-10, 5.883057969557038177650282e-10),
    (30, 2.132477496463056371166896e-14, 2.167732001891549424867038e-14),
)


@dataclass
class Check:
    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.value <= self.threshold


def bessel_rows(reference=BESSEL_REFERENCE) -> list[tuple[float, ...]]:
    rows = []
    for t, r0, r1 in reference:
        k0, k1 = specfun.bessel_k0_k1(t)
        rows.append((t, k0, r0, abs(k0 / r0 - 1), k1, r1, abs(k1 / r1 - 1)))
    return rows


def bessel_checks(reference=BESSEL_REFERENCE) -> list[Check]:
    rows = bessel_rows(reference)
    checks = [
        Check("bessel_k0_vs_reference", max(r[3] for r in rows), 1e-12),
        Check("bessel_k1_vs_reference", max(r[6] for r in rows), 1e-12),
    ]
    ts = np.logspace(-4, math.log10(50), 1000)
    rec = 0.0
    for t in ts:
        d = specfun.bessel_k1_deriv(t)
        k0, k1 = specfun.bessel_k0_k1(t)
        rec = max(rec, abs(d + k0 + k1 / t) / (1 + abs(d)))
    checks.append(Check("bessel_recurrence", rec, 1e-11))
    vals = np.array([specfun.bessel_k0_k1(t) for t in ts])
    mono = float(np.max(np.diff(vals, axis=0)))
    checks.append(Check("bessel_monotone_decreasing", max(mono, 0.0), 0.0))
    seam = specfun.SERIES_MAX_T
    # both branches evaluated at the switchover point
    a = specfun._series(seam)
    b = specfun._continued_fraction(seam)
    checks.append(Check("bessel_seam_agreement", max(abs(a[0] / b[0] - 1), abs(a[1] / b[1] - 1)), 1e-13))
    small = max(abs(t * specfun.bessel_k1(t) - 1) for t in np.logspace(-8, -4, 20))
    checks.append(Check("bessel_small_t_law", small, 1e-4))
    return checks


def closed_form_checks(seed: int = 42) -> list[Check]:
    """Vanishing gauge field: every quantity is a trigonometric closed form."""
    prof = phi_zero()
    tol = Tolerances(rel=1e-12, abs=1e-14)
    pair = fundamental_pair(prof, 0.0, 50.0, tol)
    ts = np.linspace(0.0, 50.0, 501)
    err = max(max(abs(pair.g1(t) - math.cos(t)), abs(pair.g2(t) - math.sin(t))) for t in ts)
    traj = solve_ivp(reduced_vector_field(prof), 0.0, [1.0, 0.0], 50.0, tol)
    rep = drift_report(prof, pair, traj, NoetherCoefficients(1, 1, 1, 0, 1), ts)
    rng = np.random.default_rng(seed)
    comm = verify_commutator_table(pair, default_sample_points(pair, 50, rng), tol=1e-8)
    pois = verify_poisson_table(pair, prof, default_sample_points(pair, 50, rng, with_p=True), tol=1e-8)
    return [
        Check("zero_profile_pair_closed_form", err, 1e-9),
        Check("zero_profile_invariant_drift", max(rep.drift.values()), 1e-10),
        Check("zero_profile_commutators", comm.max_scaled_deviation, 1e-8),
        Check("zero_profile_poisson_brackets", pois.max_scaled_deviation, 1e-8),
    ]


def run_selftest(reference=BESSEL_REFERENCE, seed: int = 42) -> list[Check]:
    return bessel_checks(reference) + closed_form_checks(seed)
