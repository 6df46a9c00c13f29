"""Command-line interface: tables and curves as CSV or JSON.

Every subcommand writes ``#``-prefixed metadata lines (schema, version,
configuration echo, seed) followed by a header row and data rows.  Floats
are printed with 12 significant digits.  Exit status is 0 on success, 1 for
invalid input and 2 for numerical failure; on failure one line
``fcplab-error: {...}`` with a JSON payload goes to standard error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from . import bell_poly, compound, fcp_core, montecarlo, shock_model, tcfcp
from .errors import FcplabError, MomentNonexistenceError, NumericalError, ValidationError
from .fcp_core import FcpParams
from .special_fn import SeriesControl
from .subordinators import AlphaStable, Drift, GammaSub, IncompleteGamma, TemperedStable

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class UsageError(ValidationError):
    """Bad command-line usage."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Validated command-line configuration."""

    subcommand: str
    params: FcpParams
    sub: object = None
    jump: object = None
    ctrl: SeriesControl = field(default_factory=SeriesControl)
    fmt: str = "csv"
    output: Optional[str] = None
    seed: Optional[int] = None
    echo: dict = field(default_factory=dict)
    args: argparse.Namespace = None

    def model(self, required: bool = False):
        sub = self.sub
        if sub is None:
            if required:
                sub = Drift(1.0)
            else:
                return None
        return tcfcp.TcfcpModel(self.params, sub, self.ctrl,
                                allow_asymptotic=self.args.allow_asymptotic)


# ---------------------------------------------------------------------------
# parsing helpers


def parse_grid(text: str, name: str) -> np.ndarray:
    """``a:b[:n]`` (``n`` evenly spaced points, 11 by default) or a comma list."""
    try:
        if ":" in text:
            parts = [float(v) for v in text.split(":")]
            if len(parts) == 2:
                a, b = parts
                n = 1 if a == b else 11
            elif len(parts) == 3:
                a, b, n = parts[0], parts[1], int(parts[2])
            else:
                raise ValueError
            if n < 1:
                raise ValueError
            return np.linspace(a, b, int(n))
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ValidationError(f"{name}: cannot parse grid {text!r}") from None


def parse_jump(text: str):
    """Jump families: ``poisson:RHO``, ``bernoulli:P``, ``geometric:P``,
    ``gamma:A,B``, ``beta``, ``discrete:S1,S2,../P1,P2,..``."""
    kind, _, rest = text.partition(":")
    vals = [float(v) for v in rest.replace("/", ",").split(",")] if rest and kind != "discrete" else []
    try:
        if kind == "poisson":
            return compound.PoissonJump(*vals)
        if kind == "bernoulli":
            return compound.Bernoulli(*vals)
        if kind == "geometric":
            return compound.Geometric(*vals)
        if kind == "gamma":
            return compound.GammaJump(*vals)
        if kind == "beta":
            return compound.BetaUnit()
        if kind == "discrete":
            sup, _, pr = rest.partition("/")
            return compound.DiscretePmf(tuple(int(v) for v in sup.split(",")),
                                        tuple(float(v) for v in pr.split(",")))
    except TypeError:
        raise ValidationError(f"wrong number of values in jump {text!r}") from None
    raise ValidationError(f"unknown jump family {kind!r}")


def _build_sub(a):
    kind = a.sub
    if kind in (None, "none"):
        return None
    if kind == "drift":
        return Drift(a.drift)
    if kind == "stable":
        return AlphaStable(a.alpha)
    if kind == "tempered":
        return TemperedStable(a.alpha, a.varphi)
    if kind == "gamma":
        return GammaSub(a.a_g, a.r_g)
    if kind == "incgamma":
        return IncompleteGamma(a.alpha)
    raise ValidationError(f"unknown subordinator {kind!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("counting law")
    g.add_argument("--mu", type=float, default=1.0)
    g.add_argument("--vartheta", type=float, default=1.0)
    g.add_argument("--zeta", type=float, default=1.0)
    g.add_argument("--theta", type=float, default=1.0)
    g.add_argument("--lambda", dest="lam", type=float, default=1.0)
    c = p.add_argument_group("random clock")
    c.add_argument("--sub", choices=["none", "drift", "stable", "tempered", "gamma", "incgamma"],
                   default="none")
    c.add_argument("--drift", type=float, default=1.0, help="drift rate c")
    c.add_argument("--alpha", type=float, default=0.5)
    c.add_argument("--varphi", type=float, default=1.0)
    c.add_argument("--a-g", type=float, default=1.0, help="gamma clock shape rate")
    c.add_argument("--r-g", type=float, default=1.0, help="gamma clock rate")
    c.add_argument("--allow-asymptotic", action="store_true")
    o = p.add_argument_group("output")
    o.add_argument("--format", choices=["csv", "json"], default="csv")
    o.add_argument("--output", "-o", default=None)
    o.add_argument("--rel-tol", type=float, default=None)
    o.add_argument("--max-terms", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fcplab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"fcplab {__version__}")
    sp = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sp.add_parser("pmf", help="count probabilities")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n-max", type=int, default=None, help="default: automatic truncation")

    p = sp.add_parser("moments", help="mean, variance and raw moments over time")
    _add_common(p)
    p.add_argument("--t-grid", required=True)
    p.add_argument("--orders", type=int, default=2, help="highest raw moment order")

    p = sp.add_parser("waiting-time", help="density of the first event time")
    _add_common(p)
    p.add_argument("--tau-grid", required=True)

    p = sp.add_parser("first-passage", help="first time the count reaches a level")
    _add_common(p)
    p.add_argument("--w", type=int, default=1)
    p.add_argument("--t-grid", required=True)

    p = sp.add_parser("compound", help="compound sums or products")
    _add_common(p)
    p.add_argument("--kind", choices=["fgcp", "mcfcp"], default="fgcp")
    p.add_argument("--jump", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--y-grid", default=None, help="cdf grid")
    p.add_argument("--s-max", type=int, default=None, help="pmf for integer jumps on 0..s-max")

    p = sp.add_parser("bell", help="generalized fractional Bell polynomials")
    _add_common(p)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--m-max", type=int, default=5)
    p.add_argument("--t", type=float, default=1.0, help="clock time for the subordinated column")

    p = sp.add_parser("shock", help="shock-deterioration reliability curve")
    _add_common(p)
    p.add_argument("--a", type=float, required=True, help="gamma shape of a shock")
    p.add_argument("--b", type=float, required=True, help="gamma scale of a shock")
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--k-p", type=float, default=0.0)
    p.add_argument("--gradual-rate", type=float, default=0.0, help="S(t) = rate * t")
    p.add_argument("--tau-grid", required=True)

    p = sp.add_parser("simulate", help="Monte Carlo summary next to analytic values")
    _add_common(p)
    p.add_argument("--target", choices=["fcp", "tcfcp", "fgcp", "mcfcp", "shock"], required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--jump", default="poisson:1")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--histogram", default=None, help="write the empirical histogram here")
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    """Validate everything up front and report all problems at once."""
    problems = []
    params = sub = jump = None
    ctrl = SeriesControl()
    try:
        params = FcpParams(args.mu, args.vartheta, args.zeta, args.theta, args.lam)
    except ValidationError as e:
        problems.append(str(e))
    try:
        sub = _build_sub(args)
    except ValidationError as e:
        problems.append(str(e))
    if getattr(args, "jump", None) is not None and args.subcommand in ("compound", "simulate"):
        try:
            jump = parse_jump(args.jump)
        except (ValidationError, ValueError) as e:
            problems.append(f"jump: {e}")
    try:
        kw = {}
        if args.rel_tol is not None:
            kw["rel_tol"] = args.rel_tol
        if args.max_terms is not None:
            kw["max_terms"] = args.max_terms
        ctrl = SeriesControl(**kw)
    except ValidationError as e:
        problems.append(str(e))
    for name in ("t_grid", "tau_grid", "y_grid"):
        text = getattr(args, name, None)
        if text is not None:
            try:
                grid = parse_grid(text, "--" + name.replace("_", "-"))
                if name != "y_grid" and np.any(grid < 0):
                    problems.append(f"--{name.replace('_', '-')} must be nonnegative")
            except ValidationError as e:
                problems.append(str(e))
    t = getattr(args, "t", None)
    if t is not None and not (t >= 0 and math.isfinite(t)):
        problems.append("--t must be finite and nonnegative")
    if getattr(args, "draws", 2) < 2:
        problems.append("--draws must be at least 2")
    if params is not None and sub is not None and not problems:
        try:
            tcfcp.TcfcpModel(params, sub, ctrl, allow_asymptotic=args.allow_asymptotic)
        except ValidationError as e:
            problems.append(str(e))
    if problems:
        raise ValidationError("; ".join(problems))
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "histogram")}
    return RunConfig(args.subcommand, params, sub, jump, ctrl, args.format, args.output,
                     getattr(args, "seed", None), echo, args)


# ---------------------------------------------------------------------------
# output


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.12g}"


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)


def render(table: Table, cfg: RunConfig, name: Optional[str] = None) -> str:
    schema = f"fcplab/{name or cfg.subcommand}/v{SCHEMA_VERSION}"
    meta = {"schema": schema, "version": __version__, "config": cfg.echo}
    if cfg.seed is not None:
        meta["seed"] = cfg.seed
    meta.update(table.meta)
    if cfg.fmt == "json":
        rows = [[_json_value(v) for v in r] for r in table.rows]
        return json.dumps({**meta, "columns": table.columns, "rows": rows}, sort_keys=True) + "\n"
    lines = [f"# schema: {schema}", f"# version: {__version__}",
             f"# config: {json.dumps(cfg.echo, sort_keys=True)}"]
    if cfg.seed is not None:
        lines.append(f"# seed: {cfg.seed}")
    for k, v in table.meta.items():
        lines.append(f"# {k}: {v if isinstance(v, str) else json.dumps(v, sort_keys=True)}")
    lines.append(",".join(table.columns))
    lines.extend(",".join(fmt_value(v) for v in r) for r in table.rows)
    return "\n".join(lines) + "\n"


def _json_value(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    if isinstance(v, str):
        return v
    return float(fmt_value(v))


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_pmf(cfg: RunConfig) -> Table:
    a = cfg.args
    model = cfg.model()
    if model is None:
        vec = (fcp_core.fcp_pmf_vector(cfg.params, a.t, a.n_max, cfg.ctrl) if a.n_max is not None
               else fcp_core.fcp_pmf_auto(cfg.params, a.t, cfg.ctrl))
    else:
        vec = (tcfcp.tcfcp_pmf_vector(model, a.t, a.n_max) if a.n_max is not None
               else tcfcp.tcfcp_pmf_auto(model, a.t))
    rows = [[n, p] for n, p in enumerate(vec.probs)]
    return Table(["n", "probability"], rows, {"tail_mass": float(vec.tail_mass)})


def _or_inf(fn, *args):
    # a missing clock moment means the count moment is infinite
    try:
        return fn(*args)
    except MomentNonexistenceError:
        return math.inf


def cmd_moments(cfg: RunConfig) -> Table:
    a = cfg.args
    model = cfg.model()
    orders = list(range(3, a.orders + 1))
    rows = []
    for t in parse_grid(a.t_grid, "--t-grid"):
        t = float(t)
        if model is None:
            row = [t, fcp_core.fcp_mean(cfg.params, t), fcp_core.fcp_variance(cfg.params, t)]
            row += [fcp_core.fcp_moment(cfg.params, p, t, cfg.ctrl) for p in orders]
        else:
            row = [t, _or_inf(tcfcp.tcfcp_mean, model, t), _or_inf(tcfcp.tcfcp_variance, model, t)]
            row += [_or_inf(bell_poly.tcfcp_moment, model, p, t) for p in orders]
        rows.append(row)
    return Table(["t", "mean", "variance"] + [f"moment_{p}" for p in orders], rows)


def cmd_waiting_time(cfg: RunConfig) -> Table:
    model = cfg.model(required=True)
    rows = []
    for tau in parse_grid(cfg.args.tau_grid, "--tau-grid"):
        tau = float(tau)
        rows.append([tau, tcfcp.waiting_time_pdf(model, tau) if tau > 0 else math.nan])
    return Table(["tau", "phi"], rows)


def cmd_first_passage(cfg: RunConfig) -> Table:
    model = cfg.model(required=True)
    w = cfg.args.w
    rows = []
    for t in parse_grid(cfg.args.t_grid, "--t-grid"):
        t = float(t)
        pdf = tcfcp.first_passage_pdf(model, w, t) if t > 0 else math.nan
        rows.append([t, tcfcp.first_passage_survival(model, w, t), pdf])
    return Table(["t", "survival", "pdf"], rows, {"level": w})


def cmd_compound(cfg: RunConfig) -> Table:
    a = cfg.args
    p, jump, sub, ctrl = cfg.params, cfg.jump, cfg.sub, cfg.ctrl
    asym = a.allow_asymptotic
    if a.s_max is not None:
        if a.kind != "fgcp":
            raise ValidationError("--s-max applies to --kind fgcp")
        if sub is None:
            rows = [[s, compound.fgcp_pmf_discrete(p, jump, s, a.t, ctrl)] for s in range(a.s_max + 1)]
        else:
            rows = [[s, compound.fgcp_levy_pmf_discrete(p, sub, jump, s, a.t, ctrl, asym)]
                    for s in range(a.s_max + 1)]
        return Table(["s", "probability"], rows)
    if a.y_grid is None:
        raise ValidationError("compound needs --y-grid or --s-max")
    ys = parse_grid(a.y_grid, "--y-grid")
    if a.kind == "fgcp":
        f = ((lambda y: compound.fgcp_cdf(p, jump, y, a.t, ctrl)) if sub is None
             else (lambda y: compound.fgcp_levy_cdf(p, sub, jump, y, a.t, ctrl, asym)))
    else:
        f = ((lambda y: compound.mcfcp_cdf(p, jump, y, a.t, ctrl)) if sub is None
             else (lambda y: compound.mcfcp_levy_cdf(p, sub, jump, y, a.t, ctrl, asym)))
    return Table(["y", "cdf"], [[float(y), f(float(y))] for y in ys])


def cmd_bell(cfg: RunConfig) -> Table:
    a = cfg.args
    shape = cfg.params.shape
    model = cfg.model()
    rows = []
    for m in range(a.m_max + 1):
        bg = bell_poly.gfbp(a.x, m, shape, cfg.ctrl)
        if model is None:
            bs = bell_poly.sgfbn(m, shape, cfg.ctrl)
        else:
            bs = 1.0 if m == 0 else bell_poly.tcfcp_moment(model, m, a.t)
        rows.append([m, bg, bs])
    return Table(["m", "gfbp", "sgfbp"], rows)


def cmd_shock(cfg: RunConfig) -> Table:
    a = cfg.args
    rate = a.gradual_rate
    if rate < 0:
        raise ValidationError("--gradual-rate must be nonnegative")
    model = shock_model.ShockModel(cfg.params, a.a, a.b, a.r0, a.k_p,
                                   gradual=lambda t: rate * t)
    taus = parse_grid(a.tau_grid, "--tau-grid")
    y, q = shock_model.reliability_curve(model, taus, cfg.ctrl)
    return Table(["tau", "survival", "failure"], [[float(u), s, f] for u, s, f in zip(taus, y, q)])


def _simulate_target(cfg: RunConfig):
    """Sampler, analytic mean/variance and analytic pmf (or None)."""
    a = cfg.args
    p, ctrl = cfg.params, cfg.ctrl
    t = a.t
    if a.target == "fcp":
        vec = fcp_core.fcp_pmf_auto(p, t, ctrl) if t > 0 else None
        return ((lambda s, n: montecarlo.sample_fcp_counts(p, t, s, n, ctrl)),
                fcp_core.fcp_mean(p, t), fcp_core.fcp_variance(p, t),
                vec.probs if vec is not None else np.ones(1))
    if a.target == "tcfcp":
        model = cfg.model(required=True)
        vec = tcfcp.tcfcp_pmf_auto(model, t) if t > 0 else None
        return ((lambda s, n: montecarlo.sample_tcfcp_counts(p, model.sub, t, s, n, ctrl)),
                _or_inf(tcfcp.tcfcp_mean, model, t), _or_inf(tcfcp.tcfcp_variance, model, t),
                vec.probs if vec is not None else np.ones(1))
    if a.target == "fgcp":
        target = p if cfg.sub is None else cfg.model()
        mean = var = math.nan
        if cfg.sub is None and hasattr(cfg.jump, "mean"):
            mean, var = compound.fgcp_mean(p, cfg.jump, t), compound.fgcp_variance(p, cfg.jump, t)
        return (lambda s, n: montecarlo.sample_fgcp(target, cfg.jump, t, s, n, ctrl)), mean, var, None
    if a.target == "mcfcp":
        target = p if cfg.sub is None else cfg.model()
        return (lambda s, n: montecarlo.sample_mcfcp(target, cfg.jump, t, s, n, ctrl)), \
            math.nan, math.nan, None
    jump = compound.GammaJump(a.a, a.b)
    return ((lambda s, n: montecarlo.sample_fgcp(p, jump, t, s, n, ctrl)),
            compound.fgcp_mean(p, jump, t), compound.fgcp_variance(p, jump, t), None)


def cmd_simulate(cfg: RunConfig) -> Table:
    a = cfg.args
    sampler, mean, var, pmf = _simulate_target(cfg)
    stream = montecarlo.RngStream(a.seed, a.stream)
    draws = montecarlo.parallel_draws(sampler, a.draws, stream)
    summ = montecarlo.estimate(draws)
    n = summ.n_draws
    m4 = float(np.mean((draws - summ.mean) ** 4))
    se_var = math.sqrt(max(m4 - (n - 3) / (n - 1) * summ.variance ** 2, 0.0) / n)
    rows = [["mean", summ.mean, summ.std_error, mean],
            ["variance", summ.variance, se_var, var]]
    meta = {"n_draws": summ.n_draws}
    if pmf is not None:
        meta["tv_distance"] = float(fmt_value(montecarlo.tv_distance(draws, pmf)))
    if a.histogram is not None:
        hist = Table(["value", "frequency", "analytic"], [], {})
        for k in sorted(summ.histogram, key=lambda v: v if not isinstance(v, tuple) else v[0]):
            if isinstance(k, tuple):
                hist.rows.append([f"{k[0]:.12g}..{k[1]:.12g}", summ.histogram[k], math.nan])
            else:
                ref = pmf[k] if pmf is not None and k < len(pmf) else math.nan
                hist.rows.append([k, summ.histogram[k], ref])
        _write(render(hist, cfg, "simulate-histogram"), a.histogram)
    return Table(["quantity", "simulated", "std_error", "analytic"], rows, meta)


COMMANDS = {
    "pmf": cmd_pmf,
    "moments": cmd_moments,
    "waiting-time": cmd_waiting_time,
    "first-passage": cmd_first_passage,
    "compound": cmd_compound,
    "bell": cmd_bell,
    "shock": cmd_shock,
    "simulate": cmd_simulate,
}


def _fail(code: int, exc: BaseException) -> int:
    payload = {"code": code, "type": type(exc).__name__, "message": str(exc)}
    sys.stderr.write("fcplab-error: " + json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = make_config(args)
        table = COMMANDS[cfg.subcommand](cfg)
        _write(render(table, cfg), cfg.output)
    except NumericalError as e:
        return _fail(EXIT_NUMERICAL, e)
    except (FcplabError, ValueError) as e:
        return _fail(EXIT_INVALID, e)
    except OSError as e:
        return _fail(EXIT_INVALID, e)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
