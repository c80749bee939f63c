"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line and records it for
the summary printed at the end of the pytest run.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS
from noether_bilayer import cli
from noether_bilayer.algebra import (
    COMMUTATOR_TABLE,
    default_sample_points,
    generator,
    verify_commutator_table,
    verify_poisson_table,
)
from noether_bilayer.integrate import Tolerances, solve_ivp
from noether_bilayer.invariants import (
    GaugeFunction,
    NoetherCoefficients,
    PinneyCoefficients,
    T_solution,
    _t_parts,
    drift_report,
    ermakov_lewis,
    fundamental_pair,
    invariance_condition_residual,
    invariant_I,
    noether_invariant,
    pinney_residual,
    pinney_rho,
    pinney_scale,
    tdho_residual,
    third_order_residual,
    wronskian_part,
)
from noether_bilayer.model import (
    PhaseState,
    asymptote_check,
    lagrangian,
    omega_squared,
    phi_bessel,
    phi_zero,
    reduced_vector_field,
    standard_lagrangian,
)
from noether_bilayer.specfun import bessel_k0, bessel_k1, bessel_k1_deriv
from oracles import bessel_k_quadrature, zero_crossings

PAPER_SETS = ((1, 1e-2), (3, 1e-2), (1, 1e-4))
T_END = 50.0
SEED = 42

# The commutator relations of the reference table: [G_i, G_j] = sum_k C_k G_k.
REFERENCE_COMMUTATORS = {
    (1, 2): (0, 0, 0, 0, 0),
    (1, 3): (0, 0, 0, 0, 0),
    (1, 4): (1, 0, 0, 0, 0),
    (1, 5): (0, 1, 0, 0, 0),
    (2, 3): (-1, 0, 0, 0, 0),
    (2, 4): (0, 0, 0, 0, 0),
    (2, 5): (0, 0, 0, 0, 0),
    (3, 4): (0, 0, 2, 0, 0),
    (3, 5): (0, 0, 0, 1, 0),
    (4, 5): (0, 0, 0, 0, 2),
}


def record(k: int, ok: bool, detail: str) -> None:
    ok = bool(ok)
    ACCEPTANCE_RESULTS[k] = (ok, detail)
    print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_closed_form_suite():
    start = time.perf_counter()
    prof = phi_zero()
    t0 = 0.0
    tol = Tolerances(rel=1e-12, abs=1e-14)
    pair = fundamental_pair(prof, t0, t0 + T_END, tol)
    ts = np.linspace(t0, t0 + T_END, 1001)
    pair_err = max(max(abs(pair.g1(t) - math.cos(t - t0)), abs(pair.g2(t) - math.sin(t - t0)))
                   for t in ts)
    rng = np.random.default_rng(SEED)
    q0, p0 = rng.uniform(-2, 2, 2)
    traj = solve_ivp(reduced_vector_field(prof), t0, [q0, p0], t0 + T_END, tol)
    rep = drift_report(prof, pair, traj, NoetherCoefficients(1, 1, 1, 0, 1), ts[::2])
    drift = max(rep.drift[f"I{k}"] for k in range(1, 6))
    comm = verify_commutator_table(pair, default_sample_points(pair, 100, rng), tol=1e-8)
    pois = verify_poisson_table(pair, prof, default_sample_points(pair, 100, rng, with_p=True), tol=1e-8)
    elapsed = time.perf_counter() - start
    ok = (pair_err <= 1e-9 and drift <= 1e-10 and comm.passed and pois.passed and elapsed < 5)
    record(1, ok, f"pair err {pair_err:.1e} (<=1e-9), invariant drift {drift:.1e} (<=1e-10), "
                  f"commutators {comm.max_scaled_deviation:.1e}, Poisson {pois.max_scaled_deviation:.1e} "
                  f"(<=1e-8), {elapsed:.2f} s (<5 s)")


def test_criterion_02_wronskian_constancy():
    start = time.perf_counter()
    worst = {"default": 0.0, "tight": 0.0}
    for n, t0 in PAPER_SETS:
        for key, tol in (("default", Tolerances()), ("tight", Tolerances(rel=1e-13, abs=1e-15))):
            pair = fundamental_pair(phi_bessel(n), t0, T_END, tol)
            st = pair.trajectory.states
            w_nodes = np.max(np.abs(st[:, 0] * st[:, 3] - st[:, 2] * st[:, 1] - 1))
            dense = pair.trajectory(np.linspace(t0, T_END, 2001))
            w_dense = np.max(np.abs(dense[:, 0] * dense[:, 3] - dense[:, 2] * dense[:, 1] - 1))
            worst[key] = max(worst[key], w_nodes, w_dense)
    elapsed = time.perf_counter() - start
    ok = worst["default"] <= 1e-8 and worst["tight"] <= 1e-11 and elapsed < 10
    record(2, ok, f"max|W-1| {worst['default']:.1e} at default (<=1e-8), {worst['tight']:.1e} "
                  f"at rel=1e-13 (<=1e-11), {elapsed:.2f} s (<10 s)")


def test_criterion_03_conservation(pair1):
    prof = pair1.profile
    rng = np.random.default_rng(SEED)
    grid = np.linspace(pair1.t0, T_END, 501)
    c = NoetherCoefficients(1, 1, 1, 0, 1)
    worst = {}
    for _ in range(20):
        q0, p0 = rng.uniform(-2, 2, 2)
        traj = solve_ivp(reduced_vector_field(prof), pair1.t0, [q0, p0], T_END)
        rep = drift_report(prof, pair1, traj, c, grid)
        for name in ("I1", "I2", "I3", "I4", "I5", "I_EL", "I_total"):
            worst[name] = max(worst.get(name, 0.0), rep.drift[name])
    top = max(worst.values())
    record(3, top <= 1e-7, f"20 initial states, worst drift {top:.1e} "
                           f"({max(worst, key=worst.get)}) <= 1e-7")


def test_criterion_04_determining_equation_residuals():
    details = []
    ok = True
    rng = np.random.default_rng(SEED)
    for n in (1, 3):
        pair = fundamental_pair(phi_bessel(n), 1e-2, T_END)
        prof = pair.profile
        ts = np.linspace(pair.t0, T_END, 1000)
        gmax = pair.max_abs_g()
        tdho = 0.0
        for t in ts:
            local = omega_squared(prof, t) * max(abs(pair.g1(t)), abs(pair.g2(t)))
            tdho = max(tdho, max(map(abs, tdho_residual(pair, t))) / max(gmax, local))
        third = 0.0
        for k in range(3):
            c = PinneyCoefficients(*np.eye(3)[k])
            for t in ts:
                scale = max(1.0, abs(_t_parts(pair, c.c3, c.c4, c.c5, t)[3]))
                third = max(third, abs(third_order_residual(prof, pair, c, t)) / scale)
        pin = 0.0
        for _ in range(10):
            c3, c5 = rng.uniform(0.5, 2.0, 2)
            c4 = rng.uniform(-0.9, 0.9) * math.sqrt(c3 * c5)
            c = PinneyCoefficients(c3, c4, c5).validate(pair)
            for t in ts:
                pin = max(pin, abs(pinney_residual(pair, c, t)) / pinney_scale(pair, c, t))
        ok &= tdho <= 1e-6 and third <= 1e-6 and pin <= 1e-6
        details.append(f"n={n}: TDHO {tdho:.1e}, third-order {third:.1e}, Pinney {pin:.1e}")
    record(4, ok, "; ".join(details) + " (all <=1e-6)")


def test_criterion_05_algebra_tables():
    failures = []
    details = []
    for n in (1, 3):
        pair = fundamental_pair(phi_bessel(n), 1e-2, T_END)
        rng = np.random.default_rng(SEED)
        comm = verify_commutator_table(pair, default_sample_points(pair, 100, rng),
                                       table=REFERENCE_COMMUTATORS)
        pois = verify_poisson_table(pair, pair.profile, default_sample_points(pair, 100, rng, with_p=True))
        for r in comm.relations:
            if not (r.passed and r.extra["structure_constants_match"]):
                failures.append(f"n={n} {r.relation} recovered {r.extra['structure_constants_rounded']}"
                                f" vs table {r.extra['expected']} (dev {r.max_scaled_deviation:.2g})")
        for r in pois.relations:
            if not r.passed:
                failures.append(f"n={n} {r.relation} dev {r.max_scaled_deviation:.2g}")
        n_ok = sum(r.passed for r in (*comm.relations, *pois.relations))
        details.append(f"n={n}: {n_ok}/20 relations")
    record(5, not failures, ", ".join(details) + ("; " + "; ".join(failures) if failures else ""))


def test_criterion_05_reference_corrected_table_passes():
    # same check with the single relation that differs replaced by its computed value
    assert {k: v for k, v in COMMUTATOR_TABLE.items() if k != (2, 4)} == \
        {k: v for k, v in REFERENCE_COMMUTATORS.items() if k != (2, 4)}
    for n in (1, 3):
        pair = fundamental_pair(phi_bessel(n), 1e-2, T_END)
        rng = np.random.default_rng(SEED)
        comm = verify_commutator_table(pair, default_sample_points(pair, 100, rng))
        assert comm.passed
        assert all(r.extra["structure_constants_match"] for r in comm.relations)


def test_criterion_06_identity_suite():
    worst = {}

    def up(name, value):
        worst[name] = max(worst.get(name, 0.0), value)

    for n in (1, 3):
        prof = phi_bessel(n)
        # the Ermakov-Lewis identity is exact only for unit Wronskian, so use the tightest pair
        pair = fundamental_pair(prof, 1e-2, T_END, Tolerances(rel=1e-14, abs=1e-16))
        rng = np.random.default_rng(SEED + n)
        for _ in range(1000):
            c = NoetherCoefficients(*rng.uniform(-1, 1, 2), rng.uniform(0.5, 2),
                                    rng.uniform(-0.3, 0.3), rng.uniform(0.5, 2))
            pc = c.pinney
            t = float(rng.uniform(pair.t0, T_END))
            q, p = rng.uniform(-2, 2, 2)
            s = PhaseState(t, q, p)
            g1, d1, g2, d2 = pair.values(t)
            qd = p + prof.phi(t) * q
            # magnitudes of the terms that make up each side
            a1 = abs(g1 * qd) + abs(d1 * q)
            a2 = abs(g2 * qd) + abs(d2 * q)
            quad_size = abs(pc.c3) * a1 * a1 / 2 + abs(pc.c4) * a1 * a2 + abs(pc.c5) * a2 * a2 / 2
            lin_size = abs(c.c1) * a1 + abs(c.c2) * a2
            I = [invariant_I(pair, k, prof, s) for k in range(1, 6)]
            up("I3=I1^2/2", abs(I[2] - I[0] ** 2 / 2) / (a1 * a1 / 2))
            up("I4=I1*I2", abs(I[3] - I[0] * I[1]) / (a1 * a2))
            up("I5=I2^2/2", abs(I[4] - I[1] ** 2 / 2) / (a2 * a2 / 2))
            T, _, _ = T_solution(pair, pc, t)
            t_size = abs(pc.c3) * g1 * g1 + 2 * abs(pc.c4 * g1 * g2) + abs(pc.c5) * g2 * g2
            up("T=rho^2", abs(pinney_rho(pair, pc, t) ** 2 - T) / t_size)
            el = ermakov_lewis(pair, pc, prof, s)
            up("I_EL=sum", abs(el - (pc.c3 * I[2] + pc.c4 * I[3] + pc.c5 * I[4])) / quad_size)
            total = noether_invariant(prof, pair, c, s)
            up("I=I_EL+W", abs(total - el - wronskian_part(pair, c, prof, s)) / (quad_size + lin_size))
            phi, phid, w2 = prof.phi(t), prof.phi_dot(t), omega_squared(prof, t)
            lhs = lagrangian(prof, q, qd, t) - standard_lagrangian(prof, q, qd, t)
            rhs = -(0.5 * phid * q * q + phi * q * qd)
            l_size = (qd * qd + abs(1 - phi * phi) * q * q + abs(w2) * q * q) / 2 \
                + abs(phi * q * qd) + abs(phid * q * q) / 2
            up("L-Lstd=-d/dt", abs(lhs - rhs) / l_size)
    top = max(worst.values())
    record(6, top <= 1e-12, "2000 samples, worst " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + " (<=1e-12 of term size)")


def test_criterion_07_invariance_condition(pair1):
    prof = pair1.profile
    rng = np.random.default_rng(SEED)
    worst = {}
    for k in range(1, 6):
        G = generator(pair1, k)
        F = GaugeFunction(prof, pair1, NoetherCoefficients.basis(k))
        for _ in range(100):
            q, qd = rng.uniform(-2, 2, 2)
            t = float(rng.uniform(pair1.t0 + 0.1, 0.8 * T_END))
            r = abs(invariance_condition_residual(prof, G.tau, G.eta, F, q, qd, t))
            worst[k] = max(worst.get(k, 0.0), r)
    top = max(worst.values())
    record(7, top <= 1e-6, "max residual per generator " +
           ", ".join(f"G{k} {v:.1e}" for k, v in worst.items()) + " (<=1e-6)")


def test_criterion_08_asymptotics():
    spacing = 0.0
    for n, t0 in PAPER_SETS:
        pair = fundamental_pair(phi_bessel(n), t0, T_END)
        ts = np.linspace(20, T_END, 6001)
        zeros = zero_crossings(ts, [pair.g1(t) for t in ts])
        spacing = max(spacing, float(np.max(np.abs(np.diff(zeros) / math.pi - 1))))
    reports = {n: asymptote_check(phi_bessel(n), n, np.logspace(-5, -4, 20), np.linspace(30, 50, 21))
               for n in (1, 3, 5, 7)}
    ok = spacing <= 0.01 and all(r.passed for r in reports.values())
    record(8, ok, f"zero spacing off pi by {spacing:.1e} (<=1%), asymptotes for n=1,3,5,7: "
                  + ", ".join(f"{n}:{'ok' if r.passed else 'fail'}" for n, r in reports.items()))


def test_criterion_09_special_functions():
    err = 0.0
    for t in np.logspace(-3, math.log10(30), 60):
        err = max(err, abs(bessel_k0(t) / bessel_k_quadrature(0, t) - 1),
                  abs(bessel_k1(t) / bessel_k_quadrature(1, t) - 1))
    rec = 0.0
    for t in np.logspace(-4, math.log10(50), 1000):
        d = bessel_k1_deriv(t)
        rec = max(rec, abs(d + bessel_k0(t) + bessel_k1(t) / t) / (1 + abs(d)))
    record(9, err <= 1e-12 and rec <= 1e-11,
           f"max rel err vs quadrature {err:.1e} (<=1e-12), recurrence {rec:.1e} (<=1e-11)")


def test_criterion_10_figure_regeneration(tmp_path, monkeypatch):
    monkeypatch.delenv("NOETHER_OUT", raising=False)
    runs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert cli.main(["figures", "--seed", str(SEED), "--out", str(out)]) == 0
        runs.append(out)
    names = [f"fig{k}{p}" for k in (1, 2, 3) for p in "ab"]
    problems = []
    for name in names:
        path = runs[0] / f"{name}.csv"
        if not path.exists():
            problems.append(f"{name} missing")
            continue
        if path.read_bytes() != (runs[1] / f"{name}.csv").read_bytes():
            problems.append(f"{name} differs between runs")
        first = path.read_text().splitlines()[1].split(",")
        t0 = 1e-4 if name.startswith("fig3") else 1e-2
        want = [t0, 1.0, 0.0] if name.endswith("a") else [t0, 0.0, 1.0]
        if [float(x) for x in first] != want:
            problems.append(f"{name} initial row {first}")
    record(10, not problems, "six panels, initial rows and byte determinism"
           + (": " + "; ".join(problems) if problems else " ok"))
