"""Command-line front end: one subcommand per operation family.

Exit codes: 0 success, 2 invalid input, 3 not found or empty chain,
4 internal invariant violation (including a failing --selftest).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Sequence

from hypercrit import boundary, irs, series
from hypercrit.errors import HypercritError, InvalidInputError, InvariantViolation
from hypercrit.io import dump_csv, dump_json, load_action, load_json, load_subgroup
from hypercrit.space.tree import MAX_RANK, Word, as_word
from hypercrit.subgroups import Stallings, sphere_counts
from hypercrit.subgroups.handles import SubgroupHandle

MAX_RADIUS = 200
MAX_DEPTH = 14


@dataclass
class RunConfig:
    """Validated parameters of one invocation."""

    subcommand: str
    rank: int = 2
    subgroup: str | None = None
    irs: str | None = None
    action: str | None = None
    s: float | None = None
    R: int | None = None
    rmax: int | None = None
    k: int = 1
    depth: int = 3
    delta: float | None = None
    dim: float | None = None
    x: str = "e"
    y: str = "e"
    z: int = 0
    U: list[int] = field(default_factory=list)
    h: str | None = None
    V: list[str] = field(default_factory=list)
    fmt: str = "json"
    output: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if not 2 <= self.rank <= MAX_RANK:
            raise InvalidInputError(f"--rank must be in [2, {MAX_RANK}]")
        for name in ("R", "rmax"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= MAX_RADIUS:
                raise InvalidInputError(f"--{name} must be in [0, {MAX_RADIUS}]")
        if not 0 <= self.k <= MAX_RADIUS:
            raise InvalidInputError(f"--k must be in [0, {MAX_RADIUS}]")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise InvalidInputError(f"--depth must be in [1, {MAX_DEPTH}]")
        if self.s is not None and not (self.s >= 0 and math.isfinite(self.s)):
            raise InvalidInputError("--s must be a finite nonnegative number")
        if self.fmt not in ("csv", "json"):
            raise InvalidInputError("--format must be csv or json")
        return self

    @classmethod
    def from_file(cls, path: str, subcommand: str) -> dict[str, Any]:
        data = load_json(path)
        if not isinstance(data, dict):
            raise InvalidInputError("config file must hold a JSON object")
        known = {f.name for f in fields(cls)} - {"subcommand", "extra"}
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        return data


@dataclass
class Report:
    payload: dict
    header: Sequence[str] = ()
    rows: list = field(default_factory=list)
    exit_code: int = 0


# --- helpers ---------------------------------------------------------------


def _subgroup(cfg: RunConfig) -> SubgroupHandle:
    if cfg.subgroup is None:
        return Stallings.full(cfg.rank)
    h = load_subgroup(cfg.subgroup, cfg.rank)
    if h.rank != cfg.rank:
        raise InvalidInputError(f"subgroup has rank {h.rank} but --rank is {cfg.rank}")
    return h


def _need(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise InvalidInputError(f"{cfg.subcommand} needs " + ", ".join("--" + m for m in missing))


def _words(cfg: RunConfig, items: Sequence[str]) -> list[Word]:
    return [as_word(w, cfg.rank) for w in items]


# --- subcommands -------------------------------------------------------------


def cmd_growth(cfg: RunConfig) -> Report:
    _need(cfg, "rmax")
    h = _subgroup(cfg)
    counts = sphere_counts(h, cfg.rmax)
    rows = [(n, c) for n, c in enumerate(counts)]
    return Report({"rows": [{"n": n, "count": c} for n, c in rows]}, ("n", "count"), rows)


def cmd_delta(cfg: RunConfig) -> Report:
    _need(cfg, "rmax")
    est = series.critical_exponent_estimate(_subgroup(cfg), cfg.rmax)
    payload = est.to_json()
    rows = [
        (r["R"], r["sphereCount"], r["logBallCount"], r["ratioEstimate"], r["differenceEstimate"])
        for r in payload["rows"]
    ]
    return Report(payload, ("R", "sphereCount", "logBallCount", "ratioEstimate", "differenceEstimate"), rows)


def cmd_poincare(cfg: RunConfig) -> Report:
    _need(cfg, "s", "R")
    h = _subgroup(cfg)
    if cfg.action is not None:
        act = load_action(cfg.action)
        subset = cfg.U if cfg.U else range(act.size)
        est = series.partial_poincare_over_action(h, act, cfg.z, subset, cfg.s, cfg.R)
    else:
        est = series.poincare_partial(h, cfg.s, cfg.R)
    payload = est.to_json()
    if cfg.extra.get("diagnose"):
        diag = series.divergence_diagnostic(h, cfg.s, max(cfg.R, 2))
        payload["divergence"] = diag.to_json()
    return Report(payload, ("n", "count", "term", "cumulative"), est.rows())


def cmd_conj_series(cfg: RunConfig) -> Report:
    _need(cfg, "h", "s", "R")
    if not cfg.V:
        raise InvalidInputError("conj-series needs --V")
    h = _subgroup(cfg)
    g = as_word(cfg.h, cfg.rank)
    vs = _words(cfg, cfg.V)
    est = series.conjugation_series(h, g, vs, cfg.s, cfg.R)
    payload = {"series": est.to_json(), "elements": [str(w) for w in series.conjugation_elements(h, g, vs, cfg.R)]}
    payload["halfExponent"] = series.half_exponent_check(h, g, vs, cfg.s, cfg.R).to_json()
    if cfg.s > 0 and est.partial_sum > 0:
        payload["shortestElement"] = series.shortest_element_bound(h, g, vs, cfg.s, cfg.R).to_json()
    code = 0 if est.partial_sum > 0 else 3
    if payload["halfExponent"]["violations"] or not payload.get("shortestElement", {"holds": True})["holds"]:
        code = 4
    return Report(payload, ("n", "count", "term", "cumulative"), est.rows(), code)


def cmd_shadow(cfg: RunConfig) -> Report:
    if cfg.extra.get("cover"):
        _need(cfg, "R")
        r = cfg.extra.get("r")
        if r is None:
            raise InvalidInputError("shadow --cover needs --r")
        rep = boundary.shadow_cover_check(_subgroup(cfg), cfg.k, cfg.R, r)
        return Report(rep.to_json(), ("covered", "maxMultiplicity", "minMultiplicity"),
                      [(rep.covered, rep.max_multiplicity, rep.min_multiplicity)], 0 if rep.covered else 4)
    _need(cfg, "R")
    sh = boundary.shadow(cfg.x, cfg.y, cfg.R, cfg.rank)
    payload = sh.to_json()
    code = 0
    if as_word(cfg.x, cfg.rank) != as_word(cfg.y, cfg.rank):
        bounds = boundary.busemann_shadow_bounds_check(cfg.x, cfg.y, cfg.R, cfg.depth, cfg.rank)
        payload["busemannBounds"] = bounds.to_json()
        code = 4 if bounds.violations else 0
    return Report(payload, ("cylinder",), [(c,) for c in payload["cylinders"]], code)


def cmd_ps_measure(cfg: RunConfig) -> Report:
    if cfg.extra.get("exact"):
        m = boundary.exact_conformal_density(cfg.rank, cfg.x, cfg.depth)
        payload = m.to_json()
    else:
        _need(cfg, "s", "R")
        om = boundary.ws_measure(_subgroup(cfg), cfg.s, cfg.R)
        m = boundary.boundary_project(om, cfg.depth)
        payload = m.to_json()
        payload["degenerateSupport"] = om.degenerate
        payload["atoms"] = len(om.atoms)
        payload["note"] = "interior atoms spread evenly over their cylinder"
    rows = [(stem, mass) for stem, mass in payload["masses"].items()]
    return Report(payload, ("stem", "mass"), rows)


def cmd_shadow_lemma(cfg: RunConfig) -> Report:
    _need(cfg, "R", "rmax")
    h = _subgroup(cfg)
    if cfg.extra.get("density", "exact") == "exact":
        if not h.finite_index:
            raise InvalidInputError("the exact density needs a finite-index subgroup; use --density projected")
        fam = boundary.full_group_density(cfg.rank, cfg.depth)
    else:
        _need(cfg, "s")
        fam = boundary.projected_density(h, cfg.s, cfg.extra.get("measure_radius", 8), cfg.depth)
    tab = boundary.shadow_lemma_check(h, cfg.delta, cfg.R, cfg.rmax, fam)
    payload = tab.to_json()
    payload["density"] = fam.label
    cr = cfg.extra.get("cocycle_radius", 0)
    if cr:
        dens = {h.key: fam}
        res = []
        for g in _ball(cfg.rank, cr):
            for k in _ball(cfg.rank, cr):
                res.append(boundary.quasi_cocycle(dens, h, g, k).residual if h.is_normal else None)
        clean = [r for r in res if r is not None]
        payload["cocycleMaxResidual"] = max(clean) if clean else None
    rows = [(r["gamma"], r["shadowMass"], r["ratio"], r["normalizedRatio"]) for r in payload["rows"]]
    return Report(payload, ("gamma", "shadowMass", "ratio", "normalizedRatio"), rows)


def _ball(rank: int, radius: int) -> list[Word]:
    from hypercrit.space.tree import iter_ball

    return [Word(w) for w in iter_ball(rank, radius)]


def cmd_recurrence(cfg: RunConfig) -> Report:
    _need(cfg, "action", "rmax", "delta")
    act = load_action(cfg.action)
    rep = irs.recurrence_counts(act, cfg.z, cfg.U, cfg.k, cfg.rmax, cfg.delta)
    payload = rep.to_json()
    rows = [(r["r"], r["count"], r["annulus"], r["normalized"]) for r in payload["rows"]]
    return Report(payload, ("r", "count", "annulus", "normalized"), rows)


def cmd_irs_report(cfg: RunConfig) -> Report:
    _need(cfg, "irs", "rmax")
    mu = irs.irs_from_json(load_json(cfg.irs))
    exp = irs.expected_critical_exponent(mu, cfg.rmax)
    payload = {"irs": mu.to_json(), "expected": exp.to_json()}
    infinite = all(not e.finite for _, _, e in exp.members)
    if infinite:
        payload["theorem"] = irs.theorem_one_check(mu, cfg.rmax).to_json()
    else:
        payload["theorem"] = {"verdict": "NOT-APPLICABLE", "reason": "finite support member"}
    cr = cfg.extra.get("cocycle_rmax")
    if cr:
        payload["summedCocycle"] = irs.summed_cocycle_check(mu, cfg.k, cr).to_json()
    rows = [(json.dumps(m["subgroup"], separators=(",", ":"), sort_keys=True), m["weight"], m["slope"], m["bracket"][0], m["bracket"][1])
            for m in payload["expected"]["members"]]
    code = 4 if payload["theorem"].get("verdict") == "CONTRADICTION" else 0
    return Report(payload, ("subgroup", "weight", "slope", "bracketLow", "bracketHigh"), rows, code)


def cmd_pipeline(cfg: RunConfig) -> Report:
    _need(cfg, "R")
    if not cfg.V:
        raise InvalidInputError("pipeline needs --V")
    rep = irs.divergence_pipeline(_subgroup(cfg), cfg.V, cfg.R, cfg.delta)
    payload = rep.to_json()
    rows = [(h, v, s) for h, v, s in rep.per_element]
    if rep.empty_chain:
        code = 3
    elif rep.first_holds and rep.second_holds and not rep.half_violations:
        code = 0
    else:
        code = 4
    return Report(payload, ("h", "v", "series"), rows, code)


def cmd_lambda0(cfg: RunConfig) -> Report:
    _need(cfg, "delta", "dim")
    val = series.lambda0_from_delta(cfg.delta, cfg.dim)
    return Report({"delta": cfg.delta, "dim": cfg.dim, "lambda0": val}, ("delta", "dim", "lambda0"),
                  [(cfg.delta, cfg.dim, val)])


COMMANDS: dict[str, tuple[Callable[[RunConfig], Report], str, str]] = {
    "growth": (cmd_growth, "csv", "sphere counts; CSV columns: n, count"),
    "delta": (cmd_delta, "json", "critical exponent estimate; CSV columns: R, sphereCount, logBallCount, ratioEstimate, differenceEstimate"),
    "poincare": (cmd_poincare, "csv", "truncated Poincare series; CSV columns: n, count, term, cumulative"),
    "conj-series": (cmd_conj_series, "json", "series over conjugators of h into V; CSV columns: n, count, term, cumulative"),
    "shadow": (cmd_shadow, "json", "shadow cylinders or a covering check; CSV columns: cylinder"),
    "ps-measure": (cmd_ps_measure, "json", "projected orbit measure or exact density; CSV columns: stem, mass"),
    "shadow-lemma": (cmd_shadow_lemma, "json", "shadow-lemma ratio table; CSV columns: gamma, shadowMass, ratio, normalizedRatio"),
    "recurrence": (cmd_recurrence, "json", "recurrence counts on a finite action; CSV columns: r, count, annulus, normalized"),
    "irs-report": (cmd_irs_report, "json", "expected exponent and growth check for an IRS; CSV columns: subgroup, weight, slope, bracketLow, bracketHigh"),
    "pipeline": (cmd_pipeline, "json", "truncated divergence chain; CSV columns: h, v, series"),
    "lambda0": (cmd_lambda0, "json", "bottom of spectrum from exponent; CSV columns: delta, dim, lambda0"),
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _word_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypercrit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, (_, default_fmt, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text.split(";")[0], description=help_text)
        p.add_argument("--rank", type=int, default=None)
        p.add_argument("--config", help="JSON file of parameters (unknown keys rejected)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None,
                       help=f"output format (default {default_fmt})")
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--json-errors", action="store_true", help="report errors as JSON on stderr")
        p.add_argument("--selftest", action="store_true", help="run this subcommand's example table")
        _add_specific(name, p)
    return parser


def _add_specific(name: str, p: argparse.ArgumentParser) -> None:
    def add(flag: str, **kw: Any) -> None:
        kw.setdefault("default", None)
        p.add_argument(flag, **kw)

    if name in ("growth", "delta", "poincare", "conj-series", "shadow", "ps-measure", "shadow-lemma", "pipeline"):
        add("--subgroup", help="subgroup JSON file (default: the whole free group)")
    if name in ("growth", "delta", "shadow-lemma", "recurrence", "irs-report"):
        add("--rmax", type=int)
    if name in ("poincare", "conj-series", "ps-measure", "shadow-lemma"):
        add("--s", type=float)
    if name in ("poincare", "conj-series", "shadow", "ps-measure", "shadow-lemma", "pipeline"):
        add("--R", type=int)
    if name == "poincare":
        add("--action", help="finite action JSON; restricts to gamma.z in U")
        add("--z", type=int)
        add("--U", type=_int_list)
        p.add_argument("--diagnose", action="store_true", help="add the divergence diagnostic at s")
    if name == "conj-series":
        add("--h")
        add("--V", type=_word_list)
    if name == "shadow":
        add("--x")
        add("--y")
        add("--depth", type=int, help="sampling depth for the Busemann bounds")
        p.add_argument("--cover", action="store_true", help="run the covering check instead")
        add("--k", type=int)
        add("--r", type=int)
    if name == "ps-measure":
        add("--depth", type=int)
        add("--x")
        p.add_argument("--exact", action="store_true", help="exact conformal density of the full group")
    if name == "shadow-lemma":
        add("--delta", type=float)
        add("--depth", type=int)
        add("--density", choices=("exact", "projected"))
        add("--measure-radius", type=int)
        add("--cocycle-radius", type=int)
    if name == "recurrence":
        add("--action")
        add("--x", type=int, help="starting point")
        add("--U", type=_int_list)
        add("--k", type=int)
        add("--delta", type=float)
    if name == "irs-report":
        add("--irs")
        add("--k", type=int)
        add("--cocycle-rmax", type=int)
    if name == "pipeline":
        add("--V", type=_word_list)
        add("--delta", type=float)
    if name == "lambda0":
        add("--delta", type=float)
        add("--dim", type=float)


_EXTRA_KEYS = ("diagnose", "cover", "r", "exact", "density", "measure_radius", "cocycle_radius", "cocycle_rmax")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {}
    if args.config:
        values.update(RunConfig.from_file(args.config, args.subcommand))
    ns = vars(args)
    for key in ("rank", "subgroup", "irs", "action", "s", "R", "rmax", "k", "depth", "delta", "dim",
                "x", "y", "z", "U", "h", "V", "fmt", "output"):
        v = ns.get(key)
        if v is not None:
            values[key] = v
    if args.subcommand == "recurrence" and "x" in values:
        values["z"] = int(values.pop("x"))
    extra = {k: ns[k] for k in _EXTRA_KEYS if ns.get(k) not in (None, False)}
    if values.get("fmt") is None:
        values["fmt"] = COMMANDS[args.subcommand][1]
    try:
        cfg = RunConfig(subcommand=args.subcommand, extra=extra, **values)
    except TypeError as exc:
        raise InvalidInputError(str(exc)) from None
    return cfg.validate()


def render(report: Report, fmt: str) -> str:
    if fmt == "csv":
        return dump_csv(report.header, report.rows)
    return dump_json(report.payload)


def _emit_error(exc: BaseException, code: int, as_json: bool) -> None:
    if as_json:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exitCode": code}) + "\n")
    else:
        sys.stderr.write(f"hypercrit: error: {exc}\n")


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.selftest:
            from hypercrit.selftest import run_selftest

            failures = run_selftest(args.subcommand, sys.stdout)
            return 4 if failures else 0
        cfg = config_from_args(args)
        report = COMMANDS[cfg.subcommand][0](cfg)
        text = render(report, cfg.fmt)
        if cfg.output:
            Path(cfg.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return report.exit_code
    except HypercritError as exc:
        _emit_error(exc, exc.exit_code, args.json_errors)
        return exc.exit_code
    except (ValueError, OverflowError) as exc:
        _emit_error(exc, 2, args.json_errors)
        return 2
    except AssertionError as exc:
        _emit_error(InvariantViolation(str(exc)), 4, args.json_errors)
        return 4


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
