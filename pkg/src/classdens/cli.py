"""Command line interface: ``classdens <command> [options]``.

Exit codes: 0 success, 2 invalid configuration, 3 resource cap exceeded,
4 verification failure.  Numbers are printed with 12 significant digits;
exact rationals are also given as p/q.  The JSON layout is described in
README.md (schema "classdens/1").
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import census as cen
from . import densities as den
from . import verify
from .arith import factorize, psl2_order

SCHEMA = "classdens/1"
EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_VERIFY = 0, 2, 3, 4


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    modulus: int = 5
    residue: str = "all"
    x: float = 1e6
    primes: int = den.DEFAULT_PRIMES
    terms: int | None = None
    threads: int = 1
    output: str | None = None
    fmt: str = "table"
    cache: str | None = None
    squarefree: bool = False
    twisted: bool = False
    k: int | None = None
    cap: float = cen.DEFAULT_CAP
    census_primes: int = cen.EULER_PRIMES
    h_method: str = "auto"
    odd_max: int = 125
    two_max: int = 256

    def residues(self):
        if self.residue == "all":
            return list(range(self.modulus))
        try:
            vals = [int(s) for s in self.residue.split(",")]
        except ValueError:
            raise ConfigError("--residue must be 'all' or comma-separated integers")
        return sorted({v % self.modulus for v in vals})

    def validate(self):
        if self.modulus < 1:
            raise ConfigError("--modulus must be >= 1")
        if self.primes < 100:
            raise ConfigError("--primes must be >= 100")
        if self.terms is not None and self.terms < 1:
            raise ConfigError("--terms must be >= 1")
        if self.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if self.command in ("census", "compare") and self.x < 10:
            raise ConfigError("--x must be >= 10")
        if self.fmt not in ("table", "csv", "json"):
            raise ConfigError("--format must be table, csv or json")
        self.residues()
        return self


def fmt_num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    return "%.12g" % float(v)


def fmt_exact(v) -> str | None:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return "%d/%d" % (v.numerator, v.denominator)
    if isinstance(v, int):
        return str(v)
    return None


@dataclass
class Report:
    command: str
    params: dict
    columns: list
    rows: list
    summary: dict

    def as_json(self) -> str:
        def conv(v):
            if isinstance(v, Fraction):
                return float(v)
            return v
        doc = {
            "schema": SCHEMA,
            "command": self.command,
            "params": self.params,
            "rows": [{c: conv(r.get(c)) for c in self.columns} for r in self.rows],
            "summary": {k: conv(v) for k, v in self.summary.items()},
        }
        return json.dumps(doc, indent=2)

    def as_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([r.get(c) if isinstance(r.get(c), str) else fmt_num(r.get(c))
                        for c in self.columns])
        return buf.getvalue()

    def as_table(self) -> str:
        cells = [self.columns] + [[r.get(c) if isinstance(r.get(c), str) else fmt_num(r.get(c))
                                   for c in self.columns] for r in self.rows]
        widths = [max(len(row[i] or "") for row in cells) for i in range(len(self.columns))]
        lines = ["  ".join((row[i] or "").rjust(widths[i]) for i in range(len(row))) for row in cells]
        if not self.columns:
            lines = []
        for k, v in self.summary.items():
            lines.append("%s: %s" % (k, v if isinstance(v, str) else fmt_num(v)))
        return "\n".join(lines)

    def render(self, fmt: str) -> str:
        return {"json": self.as_json, "csv": self.as_csv, "table": self.as_table}[fmt]()


# ------------------------------------------------------------ commands

def _tr_row(delta, tr: den.TruncatedReal) -> dict:
    return {"residue": delta, "value": tr.value, "error_bound": tr.error_bound,
            "exact": fmt_exact(tr.exact), "truncation": tr.truncation_parameter}


def cmd_eta(cfg: RunConfig) -> Report:
    fn = den.eta_progression_twisted if cfg.twisted else den.eta_progression
    rows = [_tr_row(d, fn(cfg.modulus, d, cfg.primes)) for d in cfg.residues()]
    summary = {"row_sum": math.fsum(r["value"] for r in rows)}
    if cfg.terms:
        # cross-check W(alpha; n) through the direct m-sum
        We, _ = den._W_euler_table(cfg.modulus, cfg.primes, False)
        Wd, err = den.W_direct_table(cfg.modulus, cfg.terms, cfg.primes)
        summary["max_W_route_gap"] = float(max(abs(We[a] - Wd[a]) for a in range(cfg.modulus)))
        summary["W_direct_error_bound"] = err
    return Report("eta", _params(cfg), ["residue", "value", "error_bound", "exact", "truncation"],
                  rows, summary)


def cmd_eta_fundamental(cfg: RunConfig) -> Report:
    fn = den.eta_fundamental_twisted if cfg.twisted else den.eta_fundamental
    rows = [_tr_row(d, fn(cfg.modulus, d, cfg.primes)) for d in cfg.residues()]
    om = den.omega_prefactor(cfg.modulus, cfg.primes)
    summary = {"row_sum": math.fsum(r["value"] for r in rows), "omega": om.value,
               "variant": "twisted" if cfg.twisted else "printed"}
    return Report("eta-fundamental", _params(cfg),
                  ["residue", "value", "error_bound", "exact", "truncation"], rows, summary)


def _local_key(cfg: RunConfig):
    fac = factorize(cfg.modulus)
    if len(fac) != 1:
        raise ConfigError("local needs a prime power modulus p^r")
    p, r = fac[0]
    return p, r


def cmd_local(cfg: RunConfig) -> Report:
    p, r = _local_key(cfg)
    q = 2 ** (r + 2) if p == 2 else p ** r
    if cfg.residue == "all":
        deltas = range(q)
    else:
        deltas = sorted({int(s) % q for s in cfg.residue.split(",")})
    rows = []
    for d in deltas:
        row = {"residue": d, "class": den.classify_residue(p, r, d).tag,
               "A": fmt_exact(den.count_A(p, r, d)),
               "eta_series": fmt_exact(den.eta_local_series(p, r, d)),
               "eta_closed": fmt_exact(den.eta_local_closed(p, r, d))}
        if cfg.k is not None:
            row["T"] = den.count_T(p, r, cfg.k, d)
            row["gamma_hat"] = fmt_exact(den.gamma_hat_count(p, r, cfg.k, d))
            row["eta_u"] = fmt_exact(den.eta_local_u(p, r, cfg.k, d))
        rows.append(row)
    cols = ["residue", "class", "A"] + (["T", "gamma_hat", "eta_u"] if cfg.k is not None else []) \
        + ["eta_series", "eta_closed"]
    total = sum(den.eta_local_closed(p, r, d) for d in deltas)
    summary = {"p": p, "r": r, "residue_modulus": q, "eta_sum": fmt_exact(total)}
    return Report("local", _params(cfg), cols, rows, summary)


def _get_census(cfg: RunConfig) -> cen.Census:
    method = cfg.h_method
    if method == "auto":
        method = "cycles" if cfg.x <= cen.EXACT_AUTO_LIMIT else "euler"
    if cfg.x > cfg.cap:
        raise MemoryError("census cutoff %g exceeds the configured cap %g" % (cfg.x, cfg.cap))
    directory = cfg.cache or cen.cache_dir()
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "census_x%r_%s.csv" % (float(cfg.x), method))
    if os.path.exists(path):
        return cen.import_csv(path, cfg.x, method)
    c = cen.run_census(cfg.x, method, cfg.threads, cfg.cap, cfg.census_primes,
                       checkpoint=path + ".ckpt.npz")
    cen.export_csv(c, path + ".tmp")
    os.replace(path + ".tmp", path)
    return c


def cmd_census(cfg: RunConfig) -> Report:
    t0 = time.time()
    c = _get_census(cfg)
    s = cen.empirical_eta(c, cen.Condition.everything())
    if cfg.output:
        cen.export_csv(c, cfg.output)
    summary = {"x": cfg.x, "records": len(c), "h_method": c.h_method, "pi": s.pi,
               "li_x2": s.li_x2, "ratio": s.empirical_eta,
               "sarnak_ratio": cen.sarnak_sum(c) / (cfg.x ** 2 / 2),
               "seconds": round(time.time() - t0, 2)}
    return Report("census", _params(cfg), [], [], summary)


def cmd_compare(cfg: RunConfig) -> Report:
    c = _get_census(cfg)
    n = cfg.modulus
    if cfg.squarefree:
        fn = den.eta_fundamental_twisted if cfg.twisted else den.eta_fundamental
    else:
        fn = den.eta_progression_twisted if cfg.twisted else den.eta_progression
    rows = []
    for d in cfg.residues():
        th = fn(n, d, cfg.primes)
        s = cen.empirical_eta(c, cen.Condition.congruence(n, d, squarefree_d=cfg.squarefree))
        dev = (s.empirical_eta - th.value) / th.value if th.value else None
        rows.append({"residue": d, "theory": th.value, "theory_error": th.error_bound,
                     "pi": s.pi, "empirical": s.empirical_eta, "rel_deviation": dev})
    devs = [abs(r["rel_deviation"]) for r in rows if r["rel_deviation"] is not None]
    summary = {"x": cfg.x, "h_method": c.h_method, "max_abs_rel_deviation": max(devs, default=0.0)}
    return Report("compare", _params(cfg),
                  ["residue", "theory", "theory_error", "pi", "empirical", "rel_deviation"],
                  rows, summary)


def cmd_oracle_verify(cfg: RunConfig) -> Report:
    results = verify.run_all(cfg.odd_max, cfg.two_max)
    rows = [{"suite": r.name, "cases": r.cases, "passed": r.passed,
             "first_failure": "" if r.first_failure is None else repr(r.first_failure),
             "detail": r.detail} for r in results]
    failed = [r for r in results if not r.passed]
    summary = {"status": "fail" if failed else "pass"}
    if failed:
        summary["first_failing_key"] = "%s %r" % (failed[0].name, failed[0].first_failure)
    return Report("oracle-verify", _params(cfg),
                  ["suite", "cases", "passed", "first_failure", "detail"], rows, summary)


def cmd_selftest(cfg: RunConfig) -> Report:
    checks = []

    def check(name, ok):
        checks.append({"check": name, "passed": bool(ok)})

    F = Fraction
    check("eta_local p=5", [den.eta_local(5, 1, d) for d in range(5)]
          == [F(25, 62), F(63, 248), F(125, 372), F(1, 372), F(1, 248)])
    check("2-adic sets", den.eta_two_residue_set({1}, 2) == F(19, 56)
          and den.eta_two_residue_set({8, 12}, 4) == F(37, 112))
    check("eta_local_not_p2(5,1,0)", den.eta_local_not_p2(5, 1, 0) == F(10, 31))
    e = [den.eta_progression(5, d, 10 ** 4).value for d in range(5)]
    check("eta mod 5", max(abs(a - b) for a, b in zip(e, (0.40322, 0.20461, 0.27013, 0.06857, 0.05344))) < 1e-4)
    check("W sum mod 12", abs(sum(den._W_euler_table(12, 10 ** 4, False)[0]) - 1) < 1e-8)
    check("eta divides 6", den.eta_divides(6) == den.eta_divides(2) * den.eta_divides(3))
    small = cen.run_census(100, "cycles")
    check("census x=100 records", all(r.t1 ** 2 - r.D * r.u1 ** 2 == 4 for r in small.records()))
    check("u-divisibility mod 2 at x=1000", abs(
        cen.empirical_eta(cen.run_census(1000), cen.Condition(1, frozenset({0}), False, 2)).empirical_eta
        * psl2_order(2) - 1) < 0.5)
    for r in verify.run_all(27, 32):
        check("oracle " + r.name, r.passed)
    summary = {"status": "pass" if all(c["passed"] for c in checks) else "fail"}
    return Report("selftest", _params(cfg), ["check", "passed"], checks, summary)


COMMANDS = {
    "eta": cmd_eta,
    "eta-fundamental": cmd_eta_fundamental,
    "local": cmd_local,
    "census": cmd_census,
    "compare": cmd_compare,
    "oracle-verify": cmd_oracle_verify,
    "selftest": cmd_selftest,
}


def _params(cfg: RunConfig) -> dict:
    keep = {"eta": ("modulus", "residue", "primes", "terms", "twisted"),
            "eta-fundamental": ("modulus", "residue", "primes", "twisted"),
            "local": ("modulus", "residue", "k"),
            "census": ("x", "threads", "h_method", "census_primes"),
            "compare": ("modulus", "residue", "x", "primes", "squarefree", "twisted", "h_method"),
            "oracle-verify": ("odd_max", "two_max"),
            "selftest": ()}[cfg.command]
    return {k: getattr(cfg, k) for k in keep}


# -------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--modulus", "-n", type=int, default=5)
    common.add_argument("--residue", default="all", help="'all' or comma-separated residues")
    common.add_argument("--x", type=float, default=1e6, help="census cutoff on eps(D)")
    common.add_argument("--primes", type=int, default=den.DEFAULT_PRIMES,
                        help="prime cutoff P for Euler products")
    common.add_argument("--terms", type=int, default=None,
                        help="m-cutoff M for the direct W sum (cross-check)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--output", "-o", default=None)
    common.add_argument("--format", dest="fmt", default="table", choices=["table", "csv", "json"])
    common.add_argument("--cache", default=None,
                        help="census cache directory (default $%s or ~/.cache/classdens)" % cen.CACHE_ENV)
    common.add_argument("--cap", type=float, default=cen.DEFAULT_CAP, help="largest allowed census cutoff")
    common.add_argument("--h-method", dest="h_method", default="auto", choices=["auto", "cycles", "euler"])
    common.add_argument("--census-primes", dest="census_primes", type=int, default=cen.EULER_PRIMES,
                        help="prime cutoff for the Euler-product class numbers")

    p = argparse.ArgumentParser(prog="classdens", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    e = sub.add_parser("eta", parents=[common], help="eta(D = delta mod n)")
    e.add_argument("--twisted", action="store_true", help="account for the twist by u at other primes")
    f = sub.add_parser("eta-fundamental", parents=[common], help="eta(d squarefree, d = delta mod n)")
    f.add_argument("--twisted", action="store_true")
    lo = sub.add_parser("local", parents=[common], help="local counts at a prime power modulus")
    lo.add_argument("--k", type=int, default=None, help="u-valuation for T, gamma-hat and eta_u")
    sub.add_parser("census", parents=[common], help="run or load a census and summarize it")
    c = sub.add_parser("compare", parents=[common], help="theory against census per residue")
    c.add_argument("--squarefree", action="store_true", help="compare squarefree-d densities")
    c.add_argument("--twisted", action="store_true")
    o = sub.add_parser("oracle-verify", parents=[common], help="closed forms against enumeration")
    o.add_argument("--odd-max", dest="odd_max", type=int, default=125)
    o.add_argument("--two-max", dest="two_max", type=int, default=256)
    sub.add_parser("selftest", parents=[common], help="quick end-to-end checks")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**fields)
    try:
        cfg.validate()
        report = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except MemoryError as exc:
        print("resource cap: %s" % exc, file=sys.stderr)
        return EXIT_CAP
    except ValueError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    text = report.render(cfg.fmt)
    if cfg.output and cfg.command != "census":
        with open(cfg.output, "w") as fh:
            fh.write(text + "\n")
    print(text)
    status = report.summary.get("status")
    if status == "fail":
        if cfg.command == "oracle-verify":
            print("first failing key: %s" % report.summary["first_failing_key"], file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
