"""Command-line entry point: ``topowave chern|spectrum|winding|phase-diagram|bc-check``.

Settings come from an optional flat ``key = value`` file (``--config``) and are
overridden by flags. Exit codes: 0 pass, 1 verdict failure, 2 numerical or
input failure. Every figure is accompanied by the CSV it was drawn from, and
identical settings give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import svg
from .asymptotics import SQRT2, infinity_ansatz, second_order_coefficients
from .boundary import BoundaryCondition, dirichlet_bc, family_a_bc, is_self_adjoint
from .bulk import BAND_M, FluidParams, chern_number
from .edge import count_nb, edge_spectrum, merge_events
from .errors import NonInvariantWarning, TopowaveError, UnderResolvedWarning
from .quadrature import PlaneGrid
from .spin_chern import chern_of_spin_band, polynomial_map, pullback_area, shallow_water_map, spin_matrices
from .winding import DEFAULT_EPSILONS, DEFAULT_LAMBDA, ContourArc, admissible_lambda, default_gauge, epsilon_sweep, winding

SCHEMA_VERSION = 1
FORMATS = ("csv", "json", "svg")
EXIT_OK, EXIT_FAIL, EXIT_NUMERIC = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    f: float = 1.0
    nu: float = 0.2
    a: tuple = (-2.0, -1.0, 1.0, 2.0, "dirichlet")
    bc: str | None = None
    kx_min: float = -20.0
    kx_max: float = 20.0
    n_radial: int = 128
    n_angular: int = 64
    eps: tuple = DEFAULT_EPSILONS
    lam: float = DEFAULT_LAMBDA
    out: str = "out"
    format: tuple = FORMATS
    seed: int = 0
    nu_zero: bool = False
    s_sweep: bool = False
    a_min: float = -3.0
    a_max: float = 3.0
    a_step: float = 0.25
    guard: float = 0.05
    nb_window: float = 40.0
    n_random: int = 0

    def params(self) -> FluidParams:
        return FluidParams(self.f, self.nu)

    def validate(self):
        if not self.nu_zero:
            self.params()
        bad = set(self.format) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown output formats {sorted(bad)}")
        if self.kx_min >= self.kx_max:
            raise ConfigError("kx-min must be below kx-max")
        if not self.eps or any(e <= 0 for e in self.eps):
            raise ConfigError("eps values must be positive")
        if self.lam <= 0:
            raise ConfigError("lambda must be positive")
        if self.a_step <= 0 or self.a_min >= self.a_max:
            raise ConfigError("invalid a grid")
        return self


def _parse_a(text: str) -> tuple:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        out.append("dirichlet" if tok.lower() == "dirichlet" else float(tok))
    return tuple(out)


def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


CONVERTERS = {
    "f": float,
    "nu": float,
    "a": _parse_a,
    "bc": str,
    "kx_min": float,
    "kx_max": float,
    "n_radial": int,
    "n_angular": int,
    "eps": _floats,
    "lam": float,
    "out": str,
    "format": lambda s: tuple(t.strip() for t in s.split(",") if t.strip()),
    "seed": int,
    "nu_zero": _bool,
    "s_sweep": _bool,
    "a_min": float,
    "a_max": float,
    "a_step": float,
    "guard": float,
    "nb_window": float,
    "n_random": int,
}
ALIASES = {"lambda": "lam"}


def _key(raw: str) -> str:
    k = raw.strip().lstrip("-").replace("-", "_").lower()
    k = ALIASES.get(k, k)
    if k not in CONVERTERS:
        raise ConfigError(f"unknown config key {raw.strip()!r}")
    return k


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment. Unknown keys are rejected."""
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        raw, val = line.split("=", 1)
        k = _key(raw)
        try:
            values[k] = CONVERTERS[k](val.strip())
        except ValueError as exc:
            raise ConfigError(f"line {n}: bad value for {k}: {exc}") from None
    return values


def load_config(path: str | None, overrides: dict) -> RunConfig:
    cfg = RunConfig()
    if path:
        cfg = replace(cfg, **parse_config_text(Path(path).read_text()))
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


# ------------------------------------------------------------------ output


def _num(x):
    """Stable textual form for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(round(float(x), 12)) if math.isfinite(x) else str(float(x))
    return "" if x is None else str(x)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return round(v, 12) if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Writer:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.dir = Path(cfg.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written = []

    def json(self, name, doc):
        if "json" in self.cfg.format:
            doc = {"schema_version": SCHEMA_VERSION, **doc}
            self._write(name, json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")

    def csv(self, name, header, rows):
        if "csv" in self.cfg.format:
            path = self.dir / name
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows([_num(v) for v in row] for row in rows)
            self.written.append(str(path))

    def svg(self, name, fig):
        if "svg" in self.cfg.format:
            self._write(name, svg.render(fig))

    def _write(self, name, text):
        path = self.dir / name
        path.write_text(text)
        self.written.append(str(path))


def _bcs(cfg: RunConfig):
    """(tag, boundary) pairs for the configured a values and optional bc file."""
    out = []
    for a in cfg.a:
        if a == "dirichlet":
            out.append(("dirichlet", dirichlet_bc()))
        else:
            out.append((f"a{a:g}", family_a_bc(a)))
    if cfg.bc:
        bc = BoundaryCondition.from_json(Path(cfg.bc).read_text())
        out.append((bc.label or Path(cfg.bc).stem, bc))
    return out


def _params(cfg):
    return {"f": cfg.f, "nu": 0.0 if cfg.nu_zero else cfg.nu}


# ---------------------------------------------------------------- commands


def cmd_chern(cfg: RunConfig) -> int:
    w = Writer(cfg)
    grid = PlaneGrid(cfg.n_radial, cfg.n_angular)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if cfg.nu_zero:
            params = FluidParams.unchecked(cfg.f, 0.0)
            value = chern_number(params, "plus", grid)
            area = pullback_area(shallow_water_map(params), grid) / (2 * np.pi)
            warnings.warn(
                f"nu = 0: the plus-band integral {value:.4f} is not a topological invariant "
                "(the Bloch vector has no limit at infinity)",
                NonInvariantWarning,
            )
            bands = {"plus": {"value": value, "residual": abs(value - round(value))}}
            extra = {"image_area_over_2pi": area, "non_invariant": True}
        else:
            params = cfg.params()
            bands = {}
            for band in BAND_M:
                value = chern_number(params, band, grid)
                bands[band] = {"value": value, "residual": abs(value - round(value))}
            extra = {}
        spin_rows = []
        if cfg.s_sweep:
            for s in ("1/2", "1", "3/2"):
                rep = spin_matrices(s)
                for d in (0, 1, 2):
                    smap = polynomial_map(d)
                    for m in rep.ms:
                        value = chern_of_spin_band(rep, smap, m, grid)
                        spin_rows.append([s, str(m), d, value, float(2 * m * d)])
    under = [str(c.message) for c in caught if issubclass(c.category, UnderResolvedWarning)]
    non_inv = [str(c.message) for c in caught if issubclass(c.category, NonInvariantWarning)]
    for msg in non_inv:
        print(f"warning: {msg}", file=sys.stderr)
    passed = all(b["residual"] < 0.05 for b in bands.values())
    if spin_rows:
        passed = passed and all(abs(r[3] - r[4]) < 0.05 for r in spin_rows)
    w.json("chern.json", {"params": _params(cfg), "bands": bands, "passed": passed, "warnings": under + non_inv, **extra})
    w.csv("chern.csv", ["band", "value", "residual"], [[k, v["value"], v["residual"]] for k, v in bands.items()])
    if spin_rows:
        w.csv("spin_sweep.csv", ["s", "m", "degree", "chern", "expected_2md"], spin_rows)
        w.json("spin_sweep.json", {"rows": spin_rows})
    if under:
        return EXIT_NUMERIC
    return EXIT_OK if passed else EXIT_FAIL


def cmd_spectrum(cfg: RunConfig) -> int:
    params = cfg.params()
    w = Writer(cfg)
    summary, status = {}, EXIT_OK
    for tag, bc in _bcs(cfg):
        sp = edge_spectrum(params, bc, (cfg.kx_min, cfg.kx_max))
        rows = [[k, om, "continuum_edge"] for k, om in zip(sp.kx, sp.band_edge)]
        fig = svg.Figure(f"edge spectrum, {bc.label}", "kx", "omega")
        fig.fill = (
            [sp.kx[0], *sp.kx, sp.kx[-1]],
            [float(sp.band_edge.max()), *sp.band_edge, float(sp.band_edge.max())],
        )
        fig.add(sp.kx, sp.band_edge, color="#000000", width=1.0)
        for i, br in enumerate(sp.branches):
            rows += [[k, om, f"branch_{i}"] for k, om in zip(br.kx, br.omega)]
            fig.add(br.kx, br.omega, color=svg.PALETTE[i % len(svg.PALETTE)], width=2.0)
        w.csv(f"spectrum_{tag}.csv", ["kx", "omega", "kind"], rows)
        w.svg(f"spectrum_{tag}.svg", fig)
        summary[tag] = {
            "bc": bc.label,
            "n_b_window": sp.n_b,
            "n_a": sp.n_a,
            "merges": [[e.kx, e.direction] for e in sp.merges],
            "branches": [{"start": b.start, "end": b.end, "kx": [b.kx[0], b.kx[-1]], "samples": len(b.kx)} for b in sp.branches],
            "lost": len(sp.lost),
        }
        if sp.lost:
            status = EXIT_NUMERIC
    w.json("spectrum.json", {"params": _params(cfg), "kx_range": [cfg.kx_min, cfg.kx_max], "panels": summary})
    return status


def _expected_outer(a):
    if a == "dirichlet":
        return 0
    return 0 if abs(a) > SQRT2 else int(np.sign(a))


def cmd_winding(cfg: RunConfig) -> int:
    params = cfg.params()
    w = Writer(cfg)
    docs, ok = {}, True
    for tag, bc in _bcs(cfg):
        lam = admissible_lambda(params, bc, cfg.lam, cfg.nb_window)
        triples, verdict = epsilon_sweep(params, bc, cfg.eps, lam)
        nb = count_nb(params, bc, (-cfg.nb_window, cfg.nb_window))
        rows = []
        fig = svg.Figure(f"arg S / 2pi on the full contour, {bc.label}", "theta / 2pi", "arg S / 2pi")
        for i, t in enumerate(triples):
            rep = winding(params, bc, default_gauge(t.epsilon), ContourArc(t.epsilon, lam, "full"), keep_samples=True)
            for r in rep.csv_rows():
                rows.append([t.epsilon, r["lambda_x"], r["kx"], r["kappa"], r["re_S"], r["im_S"], r["arg"]])
            n = len(rep.samples["arg"])
            fig.add(
                np.arange(n) / max(n - 1, 1),
                np.array(rep.samples["arg"]) / (2 * np.pi),
                color=svg.PALETTE[i % len(svg.PALETTE)],
                label=f"eps={t.epsilon:g}",
            )
        last = triples[-1]
        checks = {
            "full_equals_2": all(abs(t.full.winding - 2) < 0.02 for t in triples),
            "additivity": all(t.additivity < 0.01 for t in triples),
            "limits_stable": verdict["stable"],
            "inner_equals_nb": abs(last.inner.limit - nb) < 0.02,
        }
        expected_outer = 0 if bc.label == "dirichlet" else (None if bc.a is None else _expected_outer(bc.a))
        if expected_outer is not None:
            checks["outer_matches_diagram"] = abs(last.outer.limit - expected_outer) < 0.02
        ok = ok and all(checks.values())
        docs[tag] = {
            "bc": bc.label,
            "a": bc.a,
            "lambda": lam,
            "n_b": nb,
            "arcs": [t.summary() for t in triples],
            "approaching": verdict["approaching"],
            "checks": checks,
        }
        w.csv(f"winding_{tag}.csv", ["epsilon", "lambda_x", "kx", "kappa", "re_S", "im_S", "arg"], rows)
        w.svg(f"winding_{tag}.svg", fig)
    w.json("winding.json", {"params": _params(cfg), "epsilons": list(cfg.eps), "results": docs})
    return EXIT_OK if ok else EXIT_FAIL


def expected_nb(a: float) -> int:
    if a < -SQRT2:
        return 2
    if a < 0:
        return 3
    if a < SQRT2:
        return 1
    return 2


def a_grid(cfg: RunConfig):
    n = int(round((cfg.a_max - cfg.a_min) / cfg.a_step))
    grid = [round(cfg.a_min + i * cfg.a_step, 12) for i in range(n + 1)]
    return [a for a in grid if all(abs(a - s) > cfg.guard for s in (0.0, SQRT2, -SQRT2))]


def cmd_phase_diagram(cfg: RunConfig) -> int:
    params = cfg.params()
    w = Writer(cfg)
    eps = min(cfg.eps)
    rows, failures = [], 0
    for a in a_grid(cfg):
        row = {"a": a, "n_b": None, "lambda": None, "inner_limit": None, "outer_limit": None, "ansatz": None, "error": "", "warning": ""}
        try:
            bc = family_a_bc(a)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                row["n_b"] = count_nb(params, bc, (-cfg.nb_window, cfg.nb_window))
            row["warning"] = "; ".join(str(c.message) for c in caught)
            row["lambda"] = admissible_lambda(params, bc, cfg.lam, cfg.nb_window)
            (t,), _ = epsilon_sweep(params, bc, (eps,), row["lambda"])
            row["inner_limit"], row["outer_limit"] = round(t.inner.limit), round(t.outer.limit)
            row["ansatz"] = infinity_ansatz(a).bound_state_at
        except (TopowaveError, ValueError, ArithmeticError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            failures += 1
        row["expected_n_b"], row["expected_outer"] = expected_nb(a), _expected_outer(a)
        rows.append(row)

    transition = []
    for sign in (1, -1):
        for delta in (0.1, 0.05, 0.02):
            a = sign * (SQRT2 + delta)
            ev = merge_events(params, family_a_bc(a), (-200.0, 200.0), 40001)
            far = max(ev, key=lambda e: abs(e.kx))
            so = second_order_coefficients(params, a).merge_kx_squared
            transition.append([a, far.kx, far.direction, math.sqrt(so) if so and math.isfinite(so) else None])

    header = ["a", "n_b", "expected_n_b", "lambda", "inner_limit", "outer_limit", "expected_outer", "ansatz", "error", "warning"]
    w.csv("phase_diagram.csv", header, [[r[h] for h in header] for r in rows])
    w.csv("transition.csv", ["a", "outermost_merge_kx", "direction", "second_order_abs_kx"], transition)
    ok_rows = [r for r in rows if not r["error"]]
    match = all(r["n_b"] == r["expected_n_b"] and r["outer_limit"] == r["expected_outer"] for r in ok_rows)
    w.json(
        "phase_diagram.json",
        {"params": _params(cfg), "epsilon": eps, "lambda_max": cfg.lam, "rows": rows, "transition": transition, "matches_diagram": match},
    )
    fig = svg.Figure("n_b(a) and outer winding(a)", "a", "count")
    fig.add([r["a"] for r in ok_rows], [r["n_b"] for r in ok_rows], color=svg.PALETTE[1], markers=True)
    fig.add([r["a"] for r in ok_rows], [r["outer_limit"] for r in ok_rows], color=svg.PALETTE[3], markers=True)
    w.svg("phase_diagram.svg", fig)
    if failures:
        return EXIT_NUMERIC
    return EXIT_OK if match else EXIT_FAIL


def random_bc(rng: np.random.Generator) -> BoundaryCondition:
    """A generic complex 2x6 matrix (rank 2 almost surely)."""
    A = rng.normal(size=(2, 6)) + 1j * rng.normal(size=(2, 6))
    return BoundaryCondition(A, np.zeros((2, 6), dtype=complex), "random")


def cmd_bc_check(cfg: RunConfig, path: str | None) -> int:
    w = Writer(cfg)
    if path:
        bc = BoundaryCondition.from_json(Path(path).read_text())
        cert = is_self_adjoint(bc, cfg.nu)
        w._write("certificate.json", cert.to_json() + "\n")
        print(("PASS " if cert.passed else "FAIL ") + (bc.label or path))
        return EXIT_OK if cert.passed else EXIT_FAIL
    if cfg.n_random <= 0:
        raise ConfigError("bc-check needs a path or --n-random N")
    rng = np.random.default_rng(cfg.seed)
    rows = [[i, is_self_adjoint(random_bc(rng), cfg.nu).passed] for i in range(cfg.n_random)]
    w.csv("random_certificates.csv", ["index", "pass"], rows)
    n_pass = sum(r[1] for r in rows)
    w.json("random_certificates.json", {"seed": cfg.seed, "n": cfg.n_random, "n_pass": n_pass})
    print(f"{n_pass} of {cfg.n_random} random boundary conditions pass")
    return EXIT_OK if n_pass == 0 else EXIT_FAIL


# --------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topowave", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["chern", "spectrum", "winding", "phase-diagram", "bc-check"])
    p.add_argument("path", nargs="?", help="boundary-condition JSON for bc-check")
    p.add_argument("--config")
    p.add_argument("--f", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--a", type=_parse_a, help="comma list of a values; 'dirichlet' adds the Dirichlet panel")
    p.add_argument("--bc")
    p.add_argument("--kx-min", type=float)
    p.add_argument("--kx-max", type=float)
    p.add_argument("--eps", type=_floats)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--out")
    p.add_argument("--format", type=CONVERTERS["format"])
    p.add_argument("--seed", type=int)
    p.add_argument("--nu-zero", action="store_const", const=True)
    p.add_argument("--s-sweep", action="store_const", const=True)
    p.add_argument("--a-min", type=float)
    p.add_argument("--a-max", type=float)
    p.add_argument("--a-step", type=float)
    p.add_argument("--guard", type=float)
    p.add_argument("--n-random", type=int)
    return p


COMMANDS = {"chern": cmd_chern, "spectrum": cmd_spectrum, "winding": cmd_winding, "phase-diagram": cmd_phase_diagram}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k in {f.name for f in fields(RunConfig)}}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "bc-check":
            return cmd_bc_check(cfg, args.path)
        return COMMANDS[args.command](cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TopowaveError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
