"""Command-line front end.

    scthresh threshold --model ldpc:3,6 --method minratio
    scthresh evolve --model ldpc:3,6 --L 33 --w 3 --epsilon 0.45 --out traj.csv
    scthresh spectral --check-rho-lemma --w 1..6

Settings come from an optional ``key = value`` file (``--config``) and are
overridden by flags.  Exit codes: 0 ok, 2 bad configuration, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import continuum, dynamics, potential, spectral, threshold
from .errors import (
    AnalysisError,
    DegenerateModelError,
    InvalidModelError,
    NonConvergenceError,
    NumericDomainError,
    ParameterError,
    ShapeError,
)
from .export import VERSION, to_plain, write_csv, write_json
from .models import CANCELATION_G, load_table_model, make_cancelation, make_ldpc_regular

log = logging.getLogger("scthresh")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
SEED_ENV = "ANALYZER_SEED"
METHODS = ("minratio", "de", "potential", "coupled-de", "cancelation")


class ConfigError(AnalysisError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class RunConfig:
    model: str = "ldpc:3,6"
    L: int = 1
    w: str = "1"  # an integer, or a range "a..b" for the rho check
    variant: str = "inside"
    boundary: str = "anchored"
    epsilon: float | None = None
    epsilon_range: str | None = None  # "lo:hi:n" for the potential sweep
    method: str = "minratio"
    epsilon_tol: float = 1e-6
    de_tol: float = 1e-10
    max_iter: int = 10**6
    record_every: int = 1
    grid: int = 1001
    quad_points: int = 2048
    alpha: float = 4.0
    mesh: int = 64
    L_list: str | None = None
    w_list: str | None = None
    variants: str | None = None
    jobs: int = 1
    seed: int | None = None
    check_rho_lemma: bool = False
    check_lyapunov: bool = False
    dump_matrix: bool = False
    out: str | None = None
    report: str | None = None

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None:
                lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        cfg = cls()
        for k, v in parse_config_text(text).items():
            setattr(cfg, k, v)
        return cfg.validated()

    def validated(self):
        """Coerce string values to field types and check ranges."""
        out = dataclasses.replace(self)
        for f in fields(out):
            v = getattr(out, f.name)
            if v is None:
                continue
            setattr(out, f.name, _coerce(f.name, f.type, v))
        if out.epsilon_tol <= 0:
            raise ConfigError("epsilon_tol", f"must be > 0, got {out.epsilon_tol!r}")
        if out.de_tol <= 0:
            raise ConfigError("de_tol", f"must be > 0, got {out.de_tol!r}")
        if out.L < 1:
            raise ConfigError("L", "must be >= 1")
        if out.max_iter < 1:
            raise ConfigError("max_iter", "must be >= 1")
        if out.jobs < 1:
            raise ConfigError("jobs", "must be >= 1")
        if out.method not in METHODS:
            raise ConfigError("method", f"unknown method {out.method!r}; choose from {', '.join(METHODS)}")
        if out.variant not in ("inside", "outside"):
            raise ConfigError("variant", f"unknown variant {out.variant!r}")
        if out.boundary not in ("anchored", "circular"):
            raise ConfigError("boundary", f"unknown boundary {out.boundary!r}")
        if out.epsilon is not None and out.epsilon < 0:
            raise ConfigError("epsilon", "must be >= 0")
        if out.seed is None:
            env = os.environ.get(SEED_ENV)
            out.seed = _coerce("seed", "int | None", env) if env not in (None, "") else 0
        return out

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _coerce(name, typ, value):
    typ = str(typ)
    if not isinstance(value, str):
        return value
    try:
        if typ.startswith("bool"):
            low = value.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if typ.startswith("int"):
            return int(value)
        if typ.startswith("float"):
            return float(value)
    except ValueError:
        raise ConfigError(name, f"cannot parse {value!r} as {typ.split()[0]}") from None
    return value


def parse_config_text(text):
    values = {}
    known = set(RunConfig.keys())
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
        values[key] = value
    return values


def parse_int_range(text, name="w"):
    """'3' -> [3]; '1..6' -> [1, ..., 6]; '2,4,8' -> [2, 4, 8]."""
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            vals = list(range(int(a), int(b) + 1))
        else:
            vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(name, f"cannot parse {text!r} as an integer list or range") from None
    if not vals or min(vals) < 1:
        raise ConfigError(name, f"{text!r} must list integers >= 1")
    return vals


def single_w(cfg):
    ws = parse_int_range(cfg.w)
    if len(ws) != 1:
        raise ConfigError("w", f"this subcommand takes a single width, got {cfg.w!r}")
    return ws[0]


def parse_model(spec):
    """Build a model from 'ldpc:l,r[:folded]', 'cancelation:g=..,sigma2=..,alpha=..' or 'table:f[,g]'."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "ldpc":
            degs, _, opt = rest.partition(":")
            l, r = (int(t) for t in degs.split(","))
            if opt not in ("", "folded"):
                raise ConfigError("model", f"unknown ldpc option {opt!r}")
            return make_ldpc_regular(l, r, folded=opt == "folded")
        if kind == "cancelation":
            kv = dict(item.split("=", 1) for item in rest.split(",") if item)
            unknown = set(kv) - {"g", "sigma2", "alpha", "x_max"}
            if unknown:
                raise ConfigError("model", f"unknown cancelation parameter(s) {sorted(unknown)}")
            gname = kv.get("g", "expneg")
            if gname not in CANCELATION_G:
                raise ConfigError("model", f"unknown g {gname!r}; choose from {sorted(CANCELATION_G)}")
            g, gp = CANCELATION_G[gname]
            x_max = float(kv["x_max"]) if "x_max" in kv else None
            return make_cancelation(
                g, float(kv.get("sigma2", 0.1)), float(kv.get("alpha", 1.0)), gp, x_max,
                name=f"cancelation:{gname}",
            )
        if kind == "table":
            paths = rest.split(",")
            if not 1 <= len(paths) <= 2 or not paths[0]:
                raise ConfigError("model", "table models need 'table:f_path[,g_path]'")
            return load_table_model(paths[0], paths[1] if len(paths) > 1 else None)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError("model", f"{spec!r}: {exc}") from None
    raise ConfigError("model", f"unknown model kind {kind!r} (ldpc, cancelation, table)")


def coupled_config(cfg, L=None, w=None, variant=None):
    return dynamics.CoupledConfig(
        L=cfg.L if L is None else L,
        w=single_w(cfg) if w is None else w,
        variant=variant or cfg.variant,
        boundary=cfg.boundary,
    )


def _need_epsilon(cfg, model):
    eps = cfg.epsilon if cfg.epsilon is not None else model.default_epsilon
    if eps is None:
        raise ConfigError("epsilon", "required for this subcommand")
    return eps


# -- subcommands -------------------------------------------------------------------


def _threshold(cfg):
    model = parse_model(cfg.model)
    m = cfg.method
    if m == "minratio":
        return threshold.single_threshold_minratio(model, grid_size=max(cfg.grid, 10**4))
    if m == "de":
        return threshold.single_threshold_de(model, cfg.epsilon_tol, cfg.max_iter, cfg.de_tol)
    if m == "potential":
        return threshold.potential_threshold(model, cfg.grid, cfg.epsilon_tol, cfg.quad_points)
    if m == "coupled-de":
        return threshold.coupled_threshold_de(
            model, coupled_config(cfg), cfg.epsilon_tol, cfg.max_iter, cfg.de_tol
        )
    return threshold.cancelation_threshold(model)


def cmd_threshold(cfg):
    res = _threshold(cfg)
    lo, hi = res.bracket
    if cfg.out:
        write_json(cfg.out, res.as_dict(), cfg.as_dict())
    print(f"method={res.method.value} threshold={float(lo):.10g}..{float(hi):.10g}")
    return EXIT_OK


def cmd_evolve(cfg):
    model = parse_model(cfg.model)
    eps = _need_epsilon(cfg, model)
    ccfg = coupled_config(cfg)
    traj = dynamics.run_coupled(
        model, ccfg, None, eps, max_iter=cfg.max_iter, tol=cfg.de_tol, record_every=cfg.record_every
    )
    summary = dynamics.trajectory_summary(traj)
    if cfg.out:
        write_csv(cfg.out, ["iteration", "i", "value"], dynamics.trajectory_rows(traj), cfg.as_dict())
    if cfg.report:
        write_json(cfg.report, summary, cfg.as_dict())
    print(
        f"converged_to_zero={summary['converged_to_zero']} iterations={summary['iterations']} "
        f"max_final={float(np.max(traj.final)):.10g}"
    )
    return EXIT_OK


def cmd_potential(cfg):
    model = parse_model(cfg.model)
    if cfg.epsilon_range:
        try:
            lo, hi, n = cfg.epsilon_range.split(":")
            eps_values = np.linspace(float(lo), float(hi), int(n))
        except ValueError:
            raise ConfigError("epsilon_range", f"expected 'lo:hi:n', got {cfg.epsilon_range!r}") from None
    else:
        eps_values = [_need_epsilon(cfg, model)]
    grid = np.linspace(*model.domain, cfg.grid)
    rows, minima = [], []
    for eps in eps_values:
        prof = potential.PotentialProfile(grid, potential.potential_1d(model, grid, eps, cfg.quad_points), eps)
        minima.append((float(eps), prof.min_value, prof.argmin))
        rows.extend((float(eps), x, u) for x, u in zip(prof.grid, prof.values))
        print(f"epsilon={float(eps):.10g} min={prof.min_value:.6e} argmin={prof.argmin:.10g}")
    if cfg.out:
        if len(eps_values) == 1:
            write_csv(cfg.out, ["x", "U"], [r[1:] for r in rows], cfg.as_dict())
        else:
            write_csv(cfg.out, ["epsilon", "x", "U"], rows, cfg.as_dict())
    if cfg.check_lyapunov:
        reports = []
        for eps in eps_values:
            rep = potential.check_lyapunov_conditions(
                model, coupled_config(cfg), potential.DiagonalGPrime(model), eps, seed=cfg.seed
            )
            reports.append(rep.as_dict())
            print(
                f"epsilon={float(eps):.10g} positivity={'PASS' if rep.positivity_ok else 'FAIL'} "
                f"decrease={'PASS' if rep.decrease_ok else 'FAIL'}"
            )
        if cfg.report:
            write_json(cfg.report, {"reports": reports}, cfg.as_dict())
    return EXIT_OK


def cmd_spectral(cfg):
    status = EXIT_OK
    if cfg.check_rho_lemma:
        rows = spectral.verify_rho_lemma(parse_int_range(cfg.w))
        for w in sorted({r.w for r in rows}):
            mine = [r for r in rows if r.w == w]
            ok = all(r.passed for r in mine)
            detail = " ".join(
                f"L={r.L}:rho={r.rho_circular:.12f}(truncated {r.rho_truncated:.6f})" for r in mine
            )
            print(f"{'PASS' if ok else 'FAIL'} w={w} {detail}")
            if not ok:
                status = EXIT_NUMERIC
        if cfg.report:
            write_json(cfg.report, {"rows": [dataclasses.asdict(r) for r in rows]}, cfg.as_dict())
        return status
    w = single_w(cfg)
    if cfg.dump_matrix:
        D = spectral.build_D(cfg.L, w, circular=cfg.boundary == "circular")
        kind, rows = spectral.matrix_rows(D)
        header = [f"c{j}" for j in range(cfg.L)] if kind == "dense" else ["i", "j", "value"]
        if cfg.out:
            write_csv(cfg.out, header, rows, cfg.as_dict())
        rho, _ = spectral.spectral_radius(D)
        print(f"matrix={kind} n={cfg.L} rho={rho:.12g}")
        return status
    model = parse_model(cfg.model)
    eps = _need_epsilon(cfg, model)
    rep = spectral.instability_test(
        model, coupled_config(cfg, w=w), eps, tol=cfg.de_tol, max_iter=cfg.max_iter
    )
    if cfg.out:
        write_json(cfg.out, rep.as_dict(), cfg.as_dict())
    print(f"rho_A={rep.rho_A:.10g} unstable={rep.has_unstable_eigenvalue} at_origin={rep.at_origin}")
    return status


def cmd_continuum(cfg):
    model = parse_model(cfg.model)
    eps = _need_epsilon(cfg, model)
    w = single_w(cfg)
    report, prof, y = continuum.compare_with_chain(model, cfg.alpha, w, eps, cfg.mesh, tol=cfg.de_tol)
    if cfg.out:
        write_csv(cfg.out, ["x", "v"], zip(prof.grid, prof.values), cfg.as_dict())
    if cfg.report:
        write_json(cfg.report, report, cfg.as_dict())
    print(f"sup_gap={report['sup_gap']:.6e} bound={report['bound']:.6g} ok={report['sup_gap'] <= report['bound']}")
    return EXIT_OK


def _sweep_point(args):
    cfg, L, w, variant = args
    model = parse_model(cfg.model)
    ccfg = dynamics.CoupledConfig(L, w, variant, cfg.boundary)
    res = threshold.coupled_threshold_de(model, ccfg, cfg.epsilon_tol, cfg.max_iter, cfg.de_tol)
    return (L, w, variant, res.method.value, float(res.bracket[0]), float(res.bracket[1]), res.evaluations)


def cmd_sweep(cfg):
    Ls = parse_int_range(cfg.L_list or cfg.L, "L_list")
    ws = parse_int_range(cfg.w_list or cfg.w, "w_list")
    variants = [v.strip() for v in (cfg.variants or cfg.variant).split(",")]
    for v in variants:
        if v not in ("inside", "outside"):
            raise ConfigError("variants", f"unknown variant {v!r}")
    parse_model(cfg.model)  # fail fast on a bad spec
    points = [(cfg, L, w, v) for L in Ls for w in ws for v in variants]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_sweep_point, points))
    else:
        rows = [_sweep_point(p) for p in points]
    header = ["L", "w", "variant", "method", "threshold_lo", "threshold_hi", "evaluations"]
    if cfg.out:
        write_csv(cfg.out, header, rows, cfg.as_dict())
    for row in rows:
        print(f"L={row[0]} w={row[1]} variant={row[2]} method={row[3]} threshold={row[4]:.10g}..{row[5]:.10g}")
    return EXIT_OK


COMMANDS = {
    "threshold": cmd_threshold,
    "evolve": cmd_evolve,
    "potential": cmd_potential,
    "spectral": cmd_spectral,
    "continuum": cmd_continuum,
    "sweep": cmd_sweep,
}


# -- argument parsing ----------------------------------------------------------------


def _add_common(p):
    S = argparse.SUPPRESS
    p.add_argument("--config", help="key = value settings file (flags override it)")
    p.add_argument("--model", default=S, help="ldpc:l,r[:folded] | cancelation:g=..,sigma2=..,alpha=.. | table:f[,g]")
    p.add_argument("--L", type=int, default=S, help="number of coupled copies")
    p.add_argument("--w", default=S, help="coupling width (spectral --check-rho-lemma accepts a..b)")
    p.add_argument("--variant", choices=["inside", "outside"], default=S)
    p.add_argument("--boundary", choices=["anchored", "circular"], default=S)
    p.add_argument("--epsilon", type=float, default=S)
    p.add_argument("--epsilon-tol", dest="epsilon_tol", type=float, default=S)
    p.add_argument("--de-tol", dest="de_tol", type=float, default=S, help="recursion stopping tolerance")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=S)
    p.add_argument("--grid", type=int, default=S)
    p.add_argument("--quad-points", dest="quad_points", type=int, default=S)
    p.add_argument("--seed", type=int, default=S, help=f"sampling seed (falls back to ${SEED_ENV})")
    p.add_argument("--out", default=S, help="primary output file")
    p.add_argument("--report", default=S, help="secondary JSON report")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="scthresh", description="Thresholds of coupled scalar recursions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="compute a threshold")
    _add_common(p)
    p.add_argument("--method", choices=METHODS, default=S)

    p = sub.add_parser("evolve", help="run the (coupled) recursion and dump the trajectory")
    _add_common(p)
    p.add_argument("--record-every", dest="record_every", type=int, default=S)

    p = sub.add_parser("potential", help="potential profile and Lyapunov condition checks")
    _add_common(p)
    p.add_argument("--epsilon-range", dest="epsilon_range", default=S, help="lo:hi:n")
    p.add_argument("--check-lyapunov", dest="check_lyapunov", action="store_const", const=True, default=S)

    p = sub.add_parser("spectral", help="coupling-matrix spectra and linear stability")
    _add_common(p)
    p.add_argument("--check-rho-lemma", dest="check_rho_lemma", action="store_const", const=True, default=S)
    p.add_argument("--dump-matrix", dest="dump_matrix", action="store_const", const=True, default=S)

    p = sub.add_parser("continuum", help="continuum fixed point versus the discrete chain")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--mesh", type=int, default=S)

    p = sub.add_parser("sweep", help="coupled thresholds over a grid of (L, w, variant)")
    _add_common(p)
    p.add_argument("--L-list", dest="L_list", default=S, help="e.g. 17,33 or 9..12")
    p.add_argument("--w-list", dest="w_list", default=S)
    p.add_argument("--variants", default=S, help="comma list of inside,outside")
    p.add_argument("--jobs", type=int, default=S)
    return parser


def resolve_config(ns):
    values = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
    skip = {"config", "command", "verbose"}
    values.update({k: v for k, v in vars(ns).items() if k not in skip})
    cfg = RunConfig()
    for k, v in values.items():
        setattr(cfg, k, v)
    return cfg.validated()


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(ns)
        log.info("resolved config: %s", to_plain(cfg.as_dict()))
        return COMMANDS[ns.command](cfg)
    except (ConfigError, ParameterError, InvalidModelError, ShapeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericDomainError, NonConvergenceError, DegenerateModelError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
