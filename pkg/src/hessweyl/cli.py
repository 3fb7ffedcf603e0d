"""Command line: ``hessweyl {analyze,weyl,dichotomy,count,examples}``.

Output is tab-separated text.  Lines starting with ``#`` echo the fully
resolved configuration; then comes the main table, a blank line and a
two-column summary table.  Exit codes: 0 success, 2 bad input, 3 budget
exceeded, 4 verification failure.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from fractions import Fraction
from typing import Sequence

from . import _kernels as K
from .circle import (DEFAULT_EXPSUM_BUDGET, DEFAULT_SOLUTION_BUDGET, Box, ExpSumParams,
                     dichotomy_check, param_fraction, parse_alpha)
from .counting import DEFAULT_COUNT_BUDGET, fit_leading_term
from .errors import FormParseError, HessWeylError, VerificationFailed
from .families import VERIFICATION_MATRIX, run_matrix
from .forms import FormSystem, parse_form
from .strata import (DEFAULT_MODP_BUDGET, DEFAULT_PRIMES, hessian_invariant, pencil_sigma,
                     singular_locus_dim)
from .weyl import DEFAULT_NAIVE_BUDGET, loglog_slope, weyl_count


# --------------------------------------------------------------------------
# formatting

def _num(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return "-"
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return f"{x:.10g}"
    return str(x)


def _hist(d: dict[int, int]) -> str:
    return ",".join(f"{k}:{v}" for k, v in sorted(d.items())) or "-"


def _counts(counts) -> str:
    return ",".join(f"{p}:{c}" for p, c in counts)


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.columns: list[str] = []
        self.rows: list[list[str]] = []
        self.summary: list[tuple[str, str]] = []

    def table(self, *cols: str):
        self.columns = list(cols)

    def row(self, *vals):
        self.rows.append([_num(v) for v in vals])

    def put(self, key: str, value):
        self.summary.append((key, _num(value)))

    def render(self) -> str:
        out = io.StringIO()
        out.write(f"# command: {self.command}\n")
        for k, v in self.config.items():
            out.write(f"# {k}: {_num(v)}\n")
        if self.columns:
            out.write("\t".join(self.columns) + "\n")
            for r in self.rows:
                out.write("\t".join(r) + "\n")
            out.write("\n")
        out.write("quantity\tvalue\n")
        for k, v in self.summary:
            out.write(f"{k}\t{v}\n")
        return out.getvalue()


# --------------------------------------------------------------------------
# argument parsing

def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _real_list(text: str) -> list[Fraction]:
    try:
        vals = [param_fraction(v) for v in text.split(",") if v.strip()]
    except (ValueError, FormParseError) as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _real(text: str) -> Fraction:
    vals = _real_list(text)
    if len(vals) != 1:
        raise argparse.ArgumentTypeError(f"expected one real value, got {text!r}")
    return vals[0]


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from exc


def _add_input(p: argparse.ArgumentParser, system: bool = True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--form", action="append", metavar="TEXT",
                     help="form text; repeat for a system" if system else "form text")
    src.add_argument("--form-file", metavar="PATH",
                     help="one form per line, '#' starts a comment line")
    p.add_argument("-n", type=int, required=True, help="number of variables")


def _add_common(p: argparse.ArgumentParser, budget_default: int):
    p.add_argument("--budget", type=int, default=budget_default,
                   help=f"enumeration budget (default {budget_default})")
    p.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")


def _add_primes(p):
    p.add_argument("--primes", type=_int_list, default=list(DEFAULT_PRIMES),
                   help="primes for finite-field counts (default 101,211,401)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hessweyl", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="𝓗, singular locus dimension and the pencil maximum")
    _add_input(p)
    _add_primes(p)
    p.add_argument("--c-radius", type=int, default=3, help="pencil search radius for systems")
    _add_common(p, DEFAULT_MODP_BUDGET)

    p = sub.add_parser("weyl", help="count zeros of the differenced multilinear system")
    _add_input(p, system=False)
    _add_primes(p)
    p.add_argument("--B", type=_int_list, required=True, help="box radii")
    p.add_argument("--method", choices=("auto", "naive", "stratified", "kernel-d2"), default="auto")
    _add_common(p, DEFAULT_NAIVE_BUDGET)

    p = sub.add_parser("dichotomy", help="minor bound or rational approximation at alpha")
    _add_input(p)
    _add_primes(p)
    p.add_argument("--alpha", required=True, help="comma-separated p/q or decimal values")
    p.add_argument("--P", type=_real, required=True, help="scale P >= 1")
    p.add_argument("--eta", type=_real, required=True, help="exponent in (0, 1)")
    p.add_argument("--eps", type=_real, default=Fraction(0), help="slack exponent (default 0)")
    p.add_argument("--sigma", type=int, default=None, help="override the pencil maximum")
    p.add_argument("--c-radius", type=int, default=3)
    p.add_argument("--expsum-budget", type=int, default=DEFAULT_EXPSUM_BUDGET)
    _add_common(p, DEFAULT_SOLUTION_BUDGET)

    p = sub.add_parser("count", help="integer zeros in P times the box and the leading-term fit")
    _add_input(p)
    p.add_argument("--P", type=_real_list, required=True, help="scales, at least four")
    p.add_argument("--box", default=None, help="lo:hi per coordinate (default -1:1)")
    p.add_argument("--method", choices=("auto", "box", "split"), default="auto")
    p.add_argument("--predict", action="store_true", help="compare with the truncated prediction")
    p.add_argument("--qmax", type=int, default=50)
    p.add_argument("--eps-list", type=_float_list, default=[0.02, 0.01, 0.005])
    p.add_argument("--samples", type=int, default=4_000_000)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, DEFAULT_COUNT_BUDGET)

    p = sub.add_parser("examples", help="verify the built-in example matrix")
    p.add_argument("--only", default=None, help="run instances whose name starts with this")
    _add_primes(p)
    p.add_argument("--expect", action="append", default=[], metavar="NAME:H:DIMV",
                   help="replace the expectations of one instance (testing the failure path)")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", metavar="PATH")
    return ap


# --------------------------------------------------------------------------
# input

def _read_forms(args) -> list[str]:
    if args.form_file:
        try:
            with open(args.form_file, encoding="utf-8") as fh:
                lines = [ln.strip() for ln in fh]
        except OSError as exc:
            raise FormParseError(f"cannot read {args.form_file}: {exc}") from exc
        texts = [ln for ln in lines if ln and not ln.startswith("#")]
    else:
        texts = list(args.form)
    if not texts:
        raise FormParseError("no forms given")
    return texts


def _load(args) -> tuple[FormSystem, list[str]]:
    if args.n < 1:
        raise FormParseError("-n must be >= 1")
    texts = _read_forms(args)
    forms = [parse_form(t, args.n) for t in texts]
    try:
        S = FormSystem(tuple(forms))
    except ValueError as exc:
        raise FormParseError(str(exc)) from exc
    return S, texts


def _form_config(S: FormSystem) -> dict:
    cfg = {}
    for i, F in enumerate(S.forms, 1):
        cfg[f"form[{i}]"] = str(F)
    cfg["n"] = S.n
    cfg["d"] = S.d
    cfg["R"] = S.R
    return cfg


def _primes_str(ps) -> str:
    return ",".join(str(p) for p in ps)


# --------------------------------------------------------------------------
# commands

def cmd_analyze(args) -> tuple[Report, int]:
    S, _ = _load(args)
    primes = tuple(args.primes)
    cfg = _form_config(S)
    cfg.update(primes=_primes_str(primes), c_radius=args.c_radius, budget=args.budget)
    rep = Report("analyze", cfg)
    rep.table("quantity", "form", "r", "value", "agreement", "evidence")
    Hs = []
    for i, F in enumerate(S.forms, 1):
        hr = hessian_invariant(F, primes, args.budget)
        Hs.append(hr)
        for r, st in enumerate(hr.strata):
            rep.row("stratum_dim", i, r, "empty" if st.dim is None else st.dim, st.agreement,
                    _counts(st.counts))
        rep.row("H", i, "-", hr.value, hr.agreement, f"method={hr.method}")
    sing = singular_locus_dim(S, primes, args.budget)
    rep.row("dimV*", "all", "-", "empty" if sing.dim is None else sing.dim, sing.agreement,
            _counts(sing.counts))
    if S.R == 1:
        rep.put("H", Hs[0].value)
    else:
        pr = pencil_sigma(S, primes, args.c_radius, args.budget)
        rep.row("sigma", "all", "-", pr.sigma, "-",
                f"c=({','.join(map(str, pr.c))}) radius={pr.c_radius} directions={len(pr.evaluated)}")
        rep.put("sigma", pr.sigma)
        rep.put("sigma_c", "(" + ",".join(map(str, pr.c)) + ")")
        rep.put("c_radius", pr.c_radius)
    dimv = -1 if sing.dim is None else sing.dim
    rep.put("dimV*", "empty" if sing.dim is None else sing.dim)
    rep.put("agreement", all(h.agreement for h in Hs) and sing.agreement)
    if S.R == 1:
        rep.put("H<=dimV*", Hs[0].value <= dimv)
    return rep, 0


def cmd_weyl(args) -> tuple[Report, int]:
    S, _ = _load(args)
    if S.R != 1:
        raise FormParseError("weyl takes a single form")
    F = S.forms[0]
    primes = tuple(args.primes)
    Bs = sorted(set(args.B))
    if Bs[0] < 0:
        raise FormParseError("B values must be >= 0")
    cfg = _form_config(S)
    cfg.update(primes=_primes_str(primes), B=",".join(map(str, Bs)), method=args.method,
               budget=args.budget)
    rep = Report("weyl", cfg)
    rep.table("B", "count", "method", "outer_by_rank", "solutions_by_rank")
    counts = []
    for B in Bs:
        c, used, st = weyl_count(F, B, args.method, args.budget)
        counts.append(c)
        rep.row(B, c, used, _hist(st.outer_by_rank) if st else "-",
                _hist(st.solutions_by_rank) if st else "-")
    H = hessian_invariant(F, primes).value
    predicted = (F.d - 2) * F.n + H
    rep.put("H", H)
    rep.put("predicted_exponent", predicted)
    if len(Bs) >= 3:
        slope, icpt = loglog_slope([2 * b + 1 for b in Bs], counts)
        rep.put("fitted_exponent", round(slope, 10))
        rep.put("fitted_log_constant", round(icpt, 10))
        rep.put("within_bound", slope <= predicted + 0.5)
    else:
        rep.put("fitted_exponent", "n/a (needs three B values)")
    return rep, 0


def cmd_dichotomy(args) -> tuple[Report, int]:
    S, _ = _load(args)
    primes = tuple(args.primes)
    alpha = parse_alpha(args.alpha)
    try:
        params = ExpSumParams(args.P, args.eta, None, args.eps)
    except ValueError as exc:
        raise FormParseError(str(exc)) from exc
    if len(alpha) != S.R:
        raise FormParseError(f"alpha has {len(alpha)} entries, the system has {S.R} forms")
    cfg = _form_config(S)
    cfg.update(alpha=args.alpha, P=params.P, eta=params.eta, eps=params.eps,
               sigma="auto" if args.sigma is None else args.sigma, c_radius=args.c_radius,
               primes=_primes_str(primes), budget=args.budget, expsum_budget=args.expsum_budget)
    res = dichotomy_check(S, alpha, params, args.sigma, primes, args.c_radius,
                          args.budget, args.expsum_budget)
    rep = Report("dichotomy", cfg)
    rep.put("branch", res.branch)
    rep.put("K", res.K)
    rep.put("sigma", res.sigma)
    rep.put("B", res.B)
    rep.put("solutions", res.n_solutions)
    rep.put("rank_M", res.rank_M)
    if res.branch == "RationalApproxFound":
        a = res.approx
        rep.put("q", a.q)
        rep.put("a", ",".join(map(str, a.a)))
        rep.put("det_M0", a.det_M0)
        rep.put("gcd", a.gcd_d)
        rep.put("minor_columns", ",".join(map(str, a.minor_columns)))
        rep.put("residual_max", float(a.max_residual))
        rep.put("residual_exact_zero", all(r == 0 for r in a.residuals))
        rep.put("certified_bound", a.certified_bound)
        rep.put("residual_exponent", a.residual_exponent)
        rep.put("reference_bound", a.reference_bound)
        rep.put("q_exponent", a.q_exponent)
        rep.put("q_reference", a.q_reference)
    else:
        s = res.extras["S"]
        rep.put("S_re", s.real)
        rep.put("S_im", s.imag)
        rep.put("S_abs", res.S_abs)
        rep.put("minor_exponent", res.minor_exponent)
        rep.put("minor_reference", res.minor_reference)
        rep.put("ratio", res.minor_ratio)
    rep.put("certificate_ok", res.certificate_ok())
    return rep, 0


def cmd_count(args) -> tuple[Report, int]:
    S, _ = _load(args)
    box = Box.parse(args.box, S.n) if args.box else Box.symmetric(S.n)
    Ps = sorted(set(args.P))
    cfg = _form_config(S)
    cfg.update(P=",".join(map(str, Ps)), box=str(box), method=args.method, predict=args.predict,
               budget=args.budget)
    if args.predict:
        cfg.update(qmax=args.qmax, eps_list=",".join(map(_num, args.eps_list)),
                   samples=args.samples, seed=args.seed)
    try:
        fit = fit_leading_term(S, Ps, box, args.method, args.budget, args.predict, args.qmax,
                               args.eps_list, args.samples, args.seed)
    except ValueError as exc:
        raise FormParseError(str(exc)) from exc
    rep = Report("count", cfg)
    e = fit.expected_exponent
    rep.table("P", "N", f"N/P^{e}")
    for P, c in zip(fit.P_values, fit.counts):
        rep.row(P, c, c / float(P) ** e)
    rep.put("method", fit.method)
    rep.put("box_theorem_admissible", box.theorem_admissible)
    rep.put("expected_exponent", e)
    rep.put("fitted_exponent", fit.fitted_exponent)
    rep.put("degenerate", fit.degenerate)
    rep.put("c_fit", fit.c_fit)
    rep.put("c_naive", fit.c_naive)
    if args.predict:
        rep.put("series", fit.series.value)
        rep.put("series_stable", fit.series.stable)
        rep.put("series_window_change", fit.series.window_change)
        rep.put("integral", fit.integral.value)
        rep.put("integral_stderr", fit.integral.stderr)
        rep.put("integral_converged", fit.integral.converged)
        rep.put("c_pred", fit.c_pred)
        rep.put("relative_gap", fit.relative_gap)
        rep.put("prediction_reliable", fit.prediction_reliable)
    return rep, 0


def _parse_expect(items: Sequence[str]) -> dict[str, tuple[int, int]]:
    known = {spec.name for spec, _, _ in VERIFICATION_MATRIX}
    out = {}
    for item in items:
        name, _, rest = item.partition(":")
        h, _, dv = rest.partition(":")
        if name not in known:
            raise FormParseError(f"unknown instance {name!r}")
        try:
            out[name] = (int(h), int(dv))
        except ValueError as exc:
            raise FormParseError(f"bad expectation {item!r}") from exc
    return out


def cmd_examples(args) -> tuple[Report, int]:
    primes = tuple(args.primes)
    overrides = _parse_expect(args.expect)
    cfg = {"only": args.only or "all", "primes": _primes_str(primes)}
    if overrides:
        cfg["expect"] = ";".join(f"{k}:{h}:{d}" for k, (h, d) in sorted(overrides.items()))
    reports = run_matrix(args.only, primes, overrides)
    if not reports:
        raise FormParseError(f"no instance matches {args.only!r}")
    rep = Report("examples", cfg)
    rep.table("instance", "form", "H", "expected_H", "dimV*", "expected_dimV*", "agreement",
              "H<=dimV*", "status", "strata", "singular_counts")
    for r in reports:
        strata = ";".join(f"{i}:{'empty' if s.dim is None else s.dim}"
                          for i, s in enumerate(r.hessian.strata))
        rep.row(r.name, r.form, r.H, r.expected_H, r.dimV, r.expected_dimV, r.agreement,
                r.inequality_ok, "pass" if r.passed else "FAIL", strata, _counts(r.singular.counts))
    failed = [r.name for r in reports if not r.passed]
    rep.put("instances", len(reports))
    rep.put("passed", len(reports) - len(failed))
    rep.put("failed", ",".join(failed) or "-")
    return rep, (VerificationFailed.exit_code if failed else 0)


COMMANDS = {"analyze": cmd_analyze, "weyl": cmd_weyl, "dichotomy": cmd_dichotomy,
            "count": cmd_count, "examples": cmd_examples}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        K.set_threads(args.threads)
    try:
        rep, code = COMMANDS[args.command](args)
    except HessWeylError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = rep.render()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
