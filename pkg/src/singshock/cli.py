"""Command-line front end.

Each command runs one stage, prints a short summary and writes the same
numbers (plus plot-ready series) as CSV into ``--out``. Settings come from
defaults, then an optional ``key = value`` config file, then flags.

Exit codes: 0 success, 1 hypothesis violation or degenerate data, 2 solver
failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .errors import DegenerateData, HypothesisViolated, SingShockError
from .flux import RiemannData, State2, analyze
from .output import read_config, write_csv

EXIT_OK, EXIT_HYPOTHESIS, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2, 64

DEFAULTS = {
    "uL": "2,6",
    "uR": "-1.6,4.56",
    "out": "singshock-out",
    "eps": "1e-2:0.7:1e-4",
    "rtol": "1e-12",
    "atol": "1e-14",
    "span": "25",
    "x_min": "-2",
    "x_max": "2",
    "cells": "2000",
    "cfl": "0.05",
    "steps": "50000",
    "snapshot_every": "500",
    "dt_mode": "fixed",
    "lam_ref": "1",
    "gnuplot": "false",
}
COMMANDS = ("analyze", "inner", "outer", "profile", "sweep", "weaklimit", "pde")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="singshock", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--uL", help="left state u1,u2")
    p.add_argument("--uR", help="right state u1,u2")
    p.add_argument("--out", help="output directory")
    p.add_argument("--eps", help="start:ratio:stop or a comma list (profile uses the first value)")
    p.add_argument("--rtol", help="integrator relative tolerance")
    p.add_argument("--atol", help="integrator absolute tolerance")
    p.add_argument("--span", help="half-width of the iota table")
    p.add_argument("--x-min", dest="x_min")
    p.add_argument("--x-max", dest="x_max")
    p.add_argument("--cells")
    p.add_argument("--cfl")
    p.add_argument("--steps")
    p.add_argument("--snapshot-every", dest="snapshot_every")
    p.add_argument("--dt-mode", dest="dt_mode", choices=("fixed", "adaptive"))
    p.add_argument("--lam-ref", dest="lam_ref")
    p.add_argument("--gnuplot", action="store_const", const="true", help="also write a gnuplot script")
    return p


def resolve(args: argparse.Namespace) -> dict[str, str]:
    cfg = dict(DEFAULTS)
    if args.config:
        file_cfg = read_config(args.config)
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(file_cfg)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg["command"] = args.command
    return cfg


def parse_state(text: str) -> State2:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise UsageError(f"state {text!r} must be 'u1,u2'")
    try:
        return State2(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_eps(text: str) -> list[float]:
    from .profile import geometric_eps

    try:
        if ":" in text:
            start, ratio, stop = (float(v) for v in text.split(":"))
            return geometric_eps(start, ratio, stop)
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --eps {text!r}: {exc}") from exc
    if not vals:
        raise UsageError("empty --eps")
    return vals


def _f(cfg, key) -> float:
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise UsageError(f"{key} = {cfg[key]!r} is not a number") from exc


def _line(label: str, value) -> str:
    if isinstance(value, float):
        return f"{label:<22s} {value:.12g}"
    return f"{label:<22s} {value}"


class Runner:
    def __init__(self, cfg: dict[str, str], stdout):
        self.cfg = cfg
        self.stdout = stdout
        self.out = Path(cfg["out"])
        self.summary: list[tuple[str, object]] = []

    def say(self, label: str, value) -> None:
        self.summary.append((label, value))
        print(_line(label, value), file=self.stdout)

    def finish(self, name: str) -> None:
        write_csv(self.out / f"{name}_summary.csv", ["quantity", "value"], self.summary)

    # stages -----------------------------------------------------------------

    def analysis(self):
        rd = RiemannData(parse_state(self.cfg["uL"]), parse_state(self.cfg["uR"]))
        a = analyze(rd)
        return a

    def header(self, a) -> None:
        self.say("s", a.s)
        self.say("w1L", a.wL[0])
        self.say("w2L", a.wL[1])
        self.say("w1R", a.wR[0])
        self.say("w2R", a.wR[1])
        self.say("e0", a.e0)
        self.say("H1", a.h1_holds)
        self.say("H2", a.h2_holds)

    def inner_constants(self, a):
        from .inner import build_iota_table, matching_constants

        table = build_iota_table(span=_f(self.cfg, "span"))
        return table, matching_constants(a, table)

    def run_analyze(self):
        a = self.analysis()
        self.header(a)
        self.finish("analyze")
        return EXIT_OK if (a.h1_holds and a.h2_holds) else EXIT_HYPOTHESIS

    def run_inner(self):
        from .inner import build_gamma0

        a = self.analysis()
        self.header(a)
        table, c = self.inner_constants(a)
        g0 = build_gamma0(a, c, table)
        self.say("iota3(0)", c.iota3_at_0)
        self.say("sigma0", c.sigma0)
        self.say("kappa0", c.kappa0)
        self.say("omega0", c.omega0)
        self.say("gamma0 w2 drop", g0.total_w2_drop)
        table.write_csv(self.out / "iota.csv")
        g0.write_csv(self.out / "gamma0.csv")
        self.finish("inner")
        return EXIT_OK

    def run_outer(self):
        from .outer import compute_gamma1, compute_gamma2, jacobian_at_P, transversality_frames

        a = self.analysis()
        self.header(a)
        if not a.h1_holds:
            raise HypothesisViolated("H1 fails")
        table, c = self.inner_constants(a)
        lin = jacobian_at_P("P_L", a.s, a.wL)
        for i, lam in enumerate(lin.eigenvalues):
            self.say(f"P_L eigenvalue {i + 1}", float(lam))
        g1, g2 = compute_gamma1(a), compute_gamma2(a)
        self.say("gamma1 endpoint error", g1.endpoint_error)
        self.say("gamma2 endpoint error", g2.endpoint_error)
        self.say("p_in beta", g1.section_point.beta)
        self.say("p_out beta", g2.section_point.beta)
        tr = transversality_frames(a, c, table)
        self.say("combined rank", tr.combined_rank)
        self.say("intersection dim", tr.intersection_dim)
        for name, g in (("gamma1", g1), ("gamma2", g2)):
            tr_ = g.trajectory
            write_csv(self.out / f"{name}.csv", ["sigma", "beta", "r"],
                      zip(tr_.times, tr_.states[:, 0], tr_.states[:, 1]))
        self.finish("outer")
        return EXIT_OK

    def _profile_cfg(self):
        from .profile import ProfileConfig

        return ProfileConfig(rel_tol=_f(self.cfg, "rtol"), abs_tol=_f(self.cfg, "atol"))

    def run_profile(self):
        from .profile import shoot_match

        a = self.analysis()
        self.header(a)
        _, c = self.inner_constants(a)
        eps = parse_eps(self.cfg["eps"])[0]
        p = shoot_match(a, c, eps, cfg=self._profile_cfg())
        m = p.maxima
        self.say("epsilon", p.epsilon)
        self.say("kappa0", c.kappa0)
        self.say("omega0", c.omega0)
        self.say("match residual", p.match_residual)
        self.say("max u2", m.max_u2)
        self.say("max u1", m.max_u1)
        self.say("min u1", m.min_u1)
        self.say("eps^2 max u2", eps**2 * m.max_u2)
        self.say("eps max u1", eps * m.max_u1)
        self.say("T1+T2", p.T_layer)
        self.say("xi width", p.xi_width)
        self.say("alpha1", p.shooting.alpha1)
        self.say("alpha2", p.shooting.alpha2)
        p.write_csv(self.out / "profile.csv")
        self.finish("profile")
        return EXIT_OK

    def _sweep(self):
        from .profile import measure_scaling

        a = self.analysis()
        self.header(a)
        _, c = self.inner_constants(a)
        rep = measure_scaling(a, c, parse_eps(self.cfg["eps"]), self._profile_cfg())
        self.say("kappa0^2", c.kappa0**2)
        self.say("omega0", c.omega0)
        print(f"{'epsilon':>12s} {'eps2*maxu2':>12s} {'eps*maxu1':>12s} {'T1+T2':>10s} {'xi width':>12s}",
              file=self.stdout)
        for i, e in enumerate(rep.epsilons):
            print(f"{e:12.5e} {rep.eps2_max_u2[i]:12.8f} {rep.eps_max_u1[i]:12.8f} "
                  f"{rep.T_layer[i]:10.5f} {rep.xi_widths[i]:12.5e}", file=self.stdout)
        rep.write_csv(self.out / "scaling.csv")
        if rep.failure:
            self.say("sweep stopped", rep.failure)
        return a, c, rep

    def run_sweep(self):
        _, _, rep = self._sweep()
        self.finish("sweep")
        if self.cfg["gnuplot"] == "true":
            (self.out / "scaling.gp").write_text(
                "set datafile separator ','\nset logscale x\n"
                "plot 'scaling.csv' using 1:2 with linespoints title 'eps^2 max u2', \\\n"
                "     'scaling.csv' using 1:9 with lines title 'kappa0^2'\n")
        return EXIT_SOLVER if rep.failure and not rep.solutions else EXIT_OK

    def run_weaklimit(self):
        from .weak import bump, layer_integrals, pair_1d, pair_2d, separable, write_pairing_csv

        a, c, rep = self._sweep()
        psis = {"bump(s,0.5)": bump(a.s, 0.5), "bump(s+0.1,1)": bump(a.s + 0.1, 1.0),
                "bump(s-0.2,0.7)*2": bump(a.s - 0.2, 0.7, 2.0)}
        phi = separable(bump(0.0, 1.5), bump(1.5, 0.5))
        rows, lay = [], []
        for p in rep.solutions:
            if not all(math.isfinite(v) for v in p.layer):
                continue
            li = layer_integrals(p, a)
            lay.append([p.epsilon, li.I_u1, li.I_u2, li.I_abs_u1, li.tail_L, li.tail_R, a.e0])
            for label, psi in psis.items():
                rows.append((label, pair_1d(p, psi, a)))
            rows.append(("phi2d", pair_2d(p, phi, a)))
        write_pairing_csv(self.out / "pairings.csv", rows)
        write_csv(self.out / "layer_integrals.csv",
                  ["epsilon", "I_u1", "I_u2", "I_abs_u1", "tail_L", "tail_R", "e0"], lay)
        if lay:
            self.say("final I_u2", lay[-1][2])
            self.say("final I_abs_u1", lay[-1][3])
            finals = [r for r in rows if r[1].epsilon == rep.epsilons[-1]]
            for label, r in finals:
                self.say(f"pairing {label}", r.discrepancy)
        self.finish("weaklimit")
        return EXIT_OK

    def run_pde(self):
        from .pde import GridConfig, fit_spike_growth, run_lf, write_snapshot_csv, write_summary_csv

        a = self.analysis()
        self.header(a)
        try:
            grid = GridConfig(x_min=_f(self.cfg, "x_min"), x_max=_f(self.cfg, "x_max"),
                              cells=int(_f(self.cfg, "cells")), cfl=_f(self.cfg, "cfl"),
                              steps=int(_f(self.cfg, "steps")),
                              snapshot_every=int(_f(self.cfg, "snapshot_every")),
                              dt_mode=self.cfg["dt_mode"], lam_ref=_f(self.cfg, "lam_ref"))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        snaps = run_lf(a.data, grid)
        slope, r2 = fit_spike_growth(snaps)
        self.say("final t", snaps[-1].t)
        self.say("final max u2", snaps[-1].max_u2)
        self.say("final max u1", snaps[-1].max_u1)
        self.say("spike mass slope", slope)
        self.say("slope r^2", r2)
        write_summary_csv(self.out / "pde_series.csv", snaps)
        write_snapshot_csv(self.out / "pde_final.csv", snaps[-1])
        self.finish("pde")
        return EXIT_OK


def _join_state_values(argv: list[str]) -> list[str]:
    # "--uR -1.6,4.56" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--uL", "--uR") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_state_values(argv))
        cfg = resolve(args)
        runner = Runner(cfg, stdout)
        runner.out.mkdir(parents=True, exist_ok=True)
        return getattr(runner, f"run_{cfg['command']}")()
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateData, HypothesisViolated) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except SingShockError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS if isinstance(exc, ValueError) else EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
