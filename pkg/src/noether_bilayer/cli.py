"""Command-line front end.

Usage::

    noether simulate --profile bessel --n 1 --t0 0.01 --out runs/
    noether fundamental --n 3
    noether invariants --c1 1 --c2 1 --c3 1 --c4 0 --c5 1
    noether algebra --seed 42
    noether figures --format csv,svg
    noether selftest

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then ``NOETHER_OUT`` (output directory only), then
command-line flags.

Exit codes: 0 success, 2 invalid configuration or unwritable output,
3 integration failure, 4 a verification failed.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import selftest as _selftest
from .algebra import default_sample_points, verify_commutator_table, verify_poisson_table
from .integrate import IntegrationError, Tolerances, solve_ivp, write_csv
from .invariants import (
    INVARIANT_NAMES,
    NoetherCoefficients,
    drift_report,
    fundamental_pair,
)
from .model import (
    GaugeProfile,
    ModelDomainError,
    ProfileValidationError,
    PhaseState,
    hamiltonian,
    omega_squared,
    profile_from_config,
    reduced_vector_field,
)
from .svgplot import line_plot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_VERIFY = 4

FORMATS = ("csv", "json", "svg")
DRIFT_TOL = 1e-7
REPORT_GRID = 501
ALGEBRA_POINTS = 100
FIGURE_POINTS = 2001
FIGURE_PRESETS = (("fig1", 1, 1e-2), ("fig2", 3, 1e-2), ("fig3", 1, 1e-4))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    profile_kind: str = "bessel"
    n: int = 1
    t0: float = 1e-2
    t_end: float = 50.0
    rtol: float = 1e-10
    atol: float = 1e-12
    q0: float = 1.0
    p0: float = 0.0
    coefficients: NoetherCoefficients = field(
        default_factory=lambda: NoetherCoefficients(1.0, 1.0, 1.0, 0.0, 1.0)
    )
    out: str = "."
    formats: tuple[str, ...] = ("csv", "json")
    seed: int = 42
    allow_even_n: bool = False

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances(rel=self.rtol, abs=self.atol)

    def profile(self) -> GaugeProfile:
        return profile_from_config(self.profile_kind, self.n, self.allow_even_n)

    def validate(self) -> "RunConfig":
        if self.profile_kind not in ("bessel", "zero"):
            raise ConfigError(f"profile must be 'bessel' or 'zero', got {self.profile_kind!r}")
        if not (math.isfinite(self.t0) and math.isfinite(self.t_end)):
            raise ConfigError("t0 and t_end must be finite")
        if not self.t_end > self.t0:
            raise ConfigError(f"t_end ({self.t_end}) must exceed t0 ({self.t0})")
        if self.t0 < 0 or (self.profile_kind == "bessel" and not self.t0 > 0):
            raise ConfigError(f"t0 must be positive for a singular profile, got {self.t0}")
        if not self.formats or any(f not in FORMATS for f in self.formats):
            raise ConfigError(f"formats must be a non-empty subset of {FORMATS}, got {self.formats}")
        try:
            self.tolerances
            prof = self.profile()
            prof.check_t(self.t0)
        except (ValueError, ModelDomainError, ProfileValidationError) as exc:
            raise ConfigError(str(exc)) from exc
        return self


_FIELD_TYPES = {
    "profile": ("profile_kind", str),
    "n": ("n", int),
    "t0": ("t0", float),
    "t_end": ("t_end", float),
    "rtol": ("rtol", float),
    "atol": ("atol", float),
    "q0": ("q0", float),
    "p0": ("p0", float),
    "out": ("out", str),
    "seed": ("seed", int),
}
_COEFF_KEYS = ("c1", "c2", "c3", "c4", "c5")


def _parse_bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_formats(text: str) -> tuple[str, ...]:
    return tuple(f.strip() for f in text.split(",") if f.strip())


def apply_settings(cfg: RunConfig, settings: dict[str, str]) -> RunConfig:
    """Overlay string-valued ``key -> value`` settings onto a config."""
    updates = {}
    coeffs = dict(zip(_COEFF_KEYS, cfg.coefficients.as_tuple()))
    for key, raw in settings.items():
        key = key.strip().lower().replace("-", "_")
        try:
            if key in _FIELD_TYPES:
                name, typ = _FIELD_TYPES[key]
                updates[name] = typ(raw.strip())
            elif key in _COEFF_KEYS:
                coeffs[key] = float(raw)
            elif key == "format":
                updates["formats"] = _parse_formats(raw)
            elif key == "allow_even_n":
                updates["allow_even_n"] = _parse_bool(raw)
            else:
                raise ConfigError(f"unknown configuration key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    updates["coefficients"] = NoetherCoefficients(*(coeffs[k] for k in _COEFF_KEYS))
    return replace(cfg, **updates)


def read_config_file(path) -> dict[str, str]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        text = Path(path).read_text()
        parser.read_string("[run]\n" + text)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return dict(parser["run"])


def build_config(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    cfg = RunConfig()
    if args.config:
        cfg = apply_settings(cfg, read_config_file(args.config))
    if environ.get("NOETHER_OUT"):
        cfg = replace(cfg, out=environ["NOETHER_OUT"])
    flags = {}
    for key in (*_FIELD_TYPES, *_COEFF_KEYS, "format"):
        val = getattr(args, key, None)
        if val is not None:
            flags[key] = str(val)
    if getattr(args, "allow_even_n", False):
        flags["allow_even_n"] = "true"
    return apply_settings(cfg, flags).validate()


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_dict(cfg: RunConfig) -> dict:
    return {
        "profile": {"kind": cfg.profile_kind, "n": cfg.n},
        "t0": cfg.t0,
        "t_end": cfg.t_end,
        "rtol": cfg.rtol,
        "atol": cfg.atol,
        "q0": cfg.q0,
        "p0": cfg.p0,
        "seed": cfg.seed,
    }


def cmd_simulate(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    prof = cfg.profile()
    traj = solve_ivp(reduced_vector_field(prof), cfg.t0, [cfg.q0, cfg.p0], cfg.t_end, cfg.tolerances)
    rows = []
    for t, (q, p) in zip(traj.t_grid, traj.states):
        s = PhaseState(float(t), float(q), float(p))
        rows.append((t, q, p, p + prof.phi(t) * q, hamiltonian(prof, s)))
    if "csv" in cfg.formats:
        write_csv(out / "simulate.csv", ["t", "q", "p", "qdot", "H"], rows)
    if "json" in cfg.formats:
        stats = traj.stats
        _write_json(out / "simulate.json", {
            "config": _config_dict(cfg),
            "final": {"t": float(traj.t_end), "q": float(traj.states[-1, 0]),
                      "p": float(traj.states[-1, 1])},
            "stats": {"steps_accepted": stats.steps_accepted,
                      "steps_rejected": stats.steps_rejected, "rhs_evals": stats.rhs_evals},
        })
    if "svg" in cfg.formats:
        arr = np.array(rows)
        line_plot(out / "simulate.svg", arr[:, 0], {"q": arr[:, 1], "p": arr[:, 2]},
                  title=f"{prof.label}: q, p")
    return EXIT_OK


def cmd_fundamental(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    pair = fundamental_pair(cfg.profile(), cfg.t0, cfg.t_end, cfg.tolerances)
    st = pair.trajectory.states
    w = st[:, 0] * st[:, 3] - st[:, 2] * st[:, 1]
    rows = np.column_stack([pair.trajectory.t_grid, st, w])
    if "csv" in cfg.formats:
        write_csv(out / "fundamental.csv", ["t", "g1", "g1dot", "g2", "g2dot", "wronskian"], rows)
    if "json" in cfg.formats:
        _write_json(out / "fundamental.json", {
            "config": _config_dict(cfg),
            "max_wronskian_deviation": float(np.max(np.abs(w - 1.0))),
            "nodes": int(len(rows)),
        })
    if "svg" in cfg.formats:
        line_plot(out / "fundamental.svg", rows[:, 0], {"g1": rows[:, 1], "g2": rows[:, 3]},
                  title=f"{pair.profile.label}, t0={cfg.t0:g}")
    return EXIT_OK


def cmd_invariants(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    prof = cfg.profile()
    tol = cfg.tolerances
    pair = fundamental_pair(prof, cfg.t0, cfg.t_end, tol)
    traj = solve_ivp(reduced_vector_field(prof), cfg.t0, [cfg.q0, cfg.p0], cfg.t_end, tol)
    grid = np.linspace(cfg.t0, cfg.t_end, REPORT_GRID)
    rep = drift_report(prof, pair, traj, cfg.coefficients, grid, tolerance=DRIFT_TOL)
    if "json" in cfg.formats:
        payload = rep.to_dict()
        payload["config"] = _config_dict(cfg)
        _write_json(out / "invariants.json", payload)
    if "csv" in cfg.formats:
        states = np.array([traj.state(t) for t in grid])
        cols = [grid, states[:, 0], states[:, 1]] + [rep.series[k] for k in INVARIANT_NAMES]
        write_csv(out / "invariants.csv", ["t", "q", "p", *INVARIANT_NAMES], np.column_stack(cols))
    if "svg" in cfg.formats:
        line_plot(out / "invariants.svg", grid,
                  {k: rep.series[k] for k in ("I1", "I2", "I_total")}, title="invariants")
    for name, d in rep.drift.items():
        print(f"{name:8s} drift {d:.3e} {'ok' if d <= rep.tolerance else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_algebra(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    prof = cfg.profile()
    pair = fundamental_pair(prof, cfg.t0, cfg.t_end, cfg.tolerances)
    rng = np.random.default_rng(cfg.seed)
    comm = verify_commutator_table(pair, default_sample_points(pair, ALGEBRA_POINTS, rng))
    pois = verify_poisson_table(pair, prof, default_sample_points(pair, ALGEBRA_POINTS, rng, with_p=True))
    payload = {
        "config": _config_dict(cfg),
        "commutators": comm.to_dict(),
        "poisson_brackets": pois.to_dict(),
        "passed": comm.passed and pois.passed,
    }
    if "json" in cfg.formats:
        _write_json(out / "algebra.json", payload)
    if "csv" in cfg.formats:
        rows = [(r.max_deviation, r.max_scaled_deviation, r.tolerance, int(r.passed))
                for r in (*comm.relations, *pois.relations)]
        labels = [r.relation for r in (*comm.relations, *pois.relations)]
        with open(out / "algebra.csv", "w", newline="\n") as fh:
            fh.write("relation,max_deviation,max_scaled_deviation,tolerance,pass\n")
            for label, row in zip(labels, rows):
                fh.write('"%s",%.17g,%.17g,%.17g,%d\n' % (label, *row))
    for r in (*comm.relations, *pois.relations):
        print(f"{r.relation:22s} {r.max_scaled_deviation:.3e} {'ok' if r.passed else 'FAIL'}")
    return EXIT_OK if payload["passed"] else EXIT_VERIFY


def figure_runs(t_end: float, tol: Tolerances, points: int = FIGURE_POINTS):
    """Yield ``(name, t, g, gdot)`` for the six preset panels."""
    for name, n, t0 in FIGURE_PRESETS:
        prof = profile_from_config("bessel", n)

        def rhs(t, y, prof=prof):
            return np.array([y[1], -omega_squared(prof, t) * y[0]])

        grid = np.linspace(t0, t_end, points)
        for panel, y0 in (("a", (1.0, 0.0)), ("b", (0.0, 1.0))):
            traj = solve_ivp(rhs, t0, y0, t_end, tol)
            vals = traj(grid)
            yield f"{name}{panel}", n, t0, grid, vals[:, 0], vals[:, 1]


def cmd_figures(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    for name, n, t0, grid, g, gd in figure_runs(cfg.t_end, cfg.tolerances):
        write_csv(out / f"{name}.csv", ["t", "g", "gdot"], np.column_stack([grid, g, gd]))
        if "svg" in cfg.formats:
            line_plot(out / f"{name}.svg", grid, {"g": g}, title=f"{name}: n={n}, t0={t0:g}")
        print(f"{name}: n={n} t0={t0:g} max|g|={np.max(np.abs(g)):.6g}")
    return EXIT_OK


def cmd_selftest(cfg: RunConfig | None = None, reference=None) -> int:
    reference = _selftest.BESSEL_REFERENCE if reference is None else reference
    checks = _selftest.run_selftest(reference)
    if cfg is not None and "csv" in cfg.formats:
        out = _out_dir(cfg)
        write_csv(out / "selftest_bessel.csv",
                  ["t", "K0", "K0_ref", "K0_rel_err", "K1", "K1_ref", "K1_rel_err"],
                  _selftest.bessel_rows(reference))
    failed = [c for c in checks if not c.passed]
    for c in checks:
        print(f"{c.name:32s} {c.value:.3e} <= {c.threshold:.1e} {'ok' if c.passed else 'FAIL'}")
    if failed:
        print("selftest failed: " + ", ".join(c.name for c in failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "fundamental": cmd_fundamental,
    "invariants": cmd_invariants,
    "algebra": cmd_algebra,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noether",
        description="Noether invariants of the reduced bilayer-graphene model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="file of 'key = value' settings")
        p.add_argument("--profile", choices=("bessel", "zero"))
        p.add_argument("--n", type=int)
        p.add_argument("--t0", type=float)
        p.add_argument("--t-end", dest="t_end", type=float)
        p.add_argument("--rtol", type=float)
        p.add_argument("--atol", type=float)
        p.add_argument("--q0", type=float)
        p.add_argument("--p0", type=float)
        for c in _COEFF_KEYS:
            p.add_argument(f"--{c}", type=float)
        p.add_argument("--out", help="output directory (overrides NOETHER_OUT)")
        p.add_argument("--format", help="comma-separated subset of csv,json,svg")
        p.add_argument("--seed", type=int)
        p.add_argument("--allow-even-n", action="store_true", default=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "selftest":
            return cmd_selftest(cfg)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
