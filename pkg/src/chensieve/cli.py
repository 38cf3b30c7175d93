"""Command-line driver.

    python3 -m chensieve <subcommand> [flags]

Every subcommand writes a JSON report (and, where there is a table, a CSV)
into --out and prints the JSON to stdout.  Exit codes: 0 pass, 1 invariant
failure, 2 usage or configuration error, 3 interrupted with checkpoint kept.
"""

import argparse
import csv
import dataclasses
import json
import math
import os
import random
import sys
from dataclasses import dataclass, field

import numpy as np

from . import arith, characters, chen, fourier, goldbach, models, sieves

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERRUPTED = 0, 1, 2, 3
THREADS_ENV = "CHENSIEVE_THREADS"
SPEC_KEYS = ("P0", "P1", "D1", "DM1", "DM2", "R0", "R1", "Rt", "level_M", "level_P1P0", "eta")


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    N: int | None = None
    delta1: float = 1e-3
    beta: float = 2.0
    R: int | None = None
    P: int | None = None
    threads: int | None = None
    out: str = "chensieve-out"
    checkpoint: str | None = None
    oversample: int = 8
    cutoff: int = 10**5
    seed: int = 0
    spec: dict = field(default_factory=dict)   # SieveSpec overrides

    def n_or(self, default: int) -> int:
        return self.N if self.N is not None else default

    def sieve_spec(self, N: int) -> sieves.SieveSpec:
        return sieves.SieveSpec.desk(N, self.delta1, self.beta, **self.spec)

    def validate(self) -> None:
        if self.N is not None and self.N < 16:
            raise ConfigError("N must be at least 16")
        if not 0 < self.delta1 < 1 / 6:
            raise ConfigError("delta1 must lie in (0, 1/6)")
        if self.beta < 1:
            raise ConfigError("beta must be >= 1")
        for name in ("R", "P", "threads", "oversample"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be positive")
        if self.cutoff < 1000:
            raise ConfigError("cutoff must be at least 1000")
        # the desk preset breaks the hierarchy in known places; overrides may not add more
        N = self.n_or(10**6)
        base = set(sieves.SieveSpec.desk(N, self.delta1, self.beta).hierarchy_violations())
        extra = set(self.sieve_spec(N).hierarchy_violations()) - base
        if extra:
            raise ConfigError("parameter hierarchy violated: " + ", ".join(sorted(extra)))


_TYPES = {f.name: f.type for f in dataclasses.fields(Config)}


def _coerce(key: str, text: str):
    if key in SPEC_KEYS:
        return float(text)
    kind = _TYPES[key]
    if "int" in str(kind):
        v = float(text)
        if v != int(v):
            raise ConfigError(f"{key} must be an integer")
        return int(v)
    if "float" in str(kind):
        return float(text)
    return text


def read_config(path) -> dict:
    """key = value lines; '#' starts a comment."""
    vals = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, text = (s.strip() for s in line.split("=", 1))
            if key not in _TYPES and key not in SPEC_KEYS or key == "spec":
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                vals[key] = _coerce(key, text)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return vals


def load_config(args: argparse.Namespace) -> Config:
    vals = read_config(args.config) if args.config else {}
    for key in ("N", "delta1", "beta", "R", "P", "threads", "out", "checkpoint",
                "oversample", "cutoff", "seed"):
        v = getattr(args, key)
        if v is not None:
            vals[key] = int(v) if key == "N" else v
    spec = {k: vals.pop(k) for k in SPEC_KEYS if k in vals}
    cfg = Config(**vals, spec=spec)
    if cfg.threads is None:
        env = os.environ.get(THREADS_ENV)
        try:
            cfg.threads = int(env) if env else (os.cpu_count() or 1)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from None
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# output


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def write_json(cfg: Config, name: str, obj: dict) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    text = json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"
    with open(os.path.join(cfg.out, name + ".json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def write_csv(cfg: Config, name: str, header, rows) -> None:
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, name + ".csv"), "w", encoding="utf-8", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _emit(cfg, name, obj, quiet=False):
    text = write_json(cfg, name, obj)
    if not quiet:
        sys.stdout.write(text)


def _f(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# subcommands


def cmd_scan(cfg: Config, args) -> int:
    N = cfg.n_or(10**6)
    t = arith.build_factor_table(N + 4)
    ckpt = cfg.checkpoint or os.path.join(cfg.out, "scan.ckpt.json")
    os.makedirs(os.path.dirname(os.path.abspath(ckpt)), exist_ok=True)
    try:
        rep = goldbach.exceptional_scan(N, t, checkpoint=ckpt, chunk=args.chunk)
    except KeyboardInterrupt:
        sys.stderr.write(f"interrupted; checkpoint kept at {ckpt}\n")
        return EXIT_INTERRUPTED
    above = rep.exceptions_above(1000)
    d = rep.to_dict()
    d["exceptions_above_1000"] = above
    _emit(cfg, "scan", d)
    write_csv(cfg, "scan_decades", ["decade", "count", "exceptions", "min", "avg"],
              [[k, r["count"], r["exceptions"], r["min"], _f(r["sum"] / r["count"])]
               for k, r in sorted(rep.stats.items(), key=lambda kv: float(kv[0]))])
    # per-m detail; ratio = rep(m) log^4 m / (m S(m)) is the normalised count
    counts = goldbach.rep_counts_upto(t, N)
    ss = goldbach.singular_series_array(t, N, cfg.cutoff)
    chen_mask = goldbach.chen_indicator(t, N)
    rows = []
    for m in range(4, N + 1, 6):
        k = int(counts[m])
        half = int(chen_mask[m // 2])
        rows.append([m, k, (k + half) // 2, _f(ss[m]),
                     _f(k * math.log(m) ** 4 / (m * ss[m]))])
    write_csv(cfg, "scan_detail", ["m", "rep_count", "unordered", "singular_series", "ratio"],
              rows)
    return EXIT_OK if rep.verified and not above else EXIT_FAIL


def cmd_sieve_audit(cfg: Config, args) -> int:
    N = cfg.n_or(10**5)
    spec = cfg.sieve_spec(N)
    t = arith.build_factor_table(N + 2)
    lo, up = sieves.presieves(spec.P1, spec.D1, spec.beta)
    r = sieves.cramer_array(t, spec.P1, N)
    a, b = sieves.presieve_array(lo, N), sieves.presieve_array(up, N)
    sandwich = [int(np.sum(a[1:] > r[1:] + 1e-12)), int(np.sum(r[1:] > b[1:] + 1e-12))]
    gap = sieves.fundlem_gap_array(spec, t, N)
    fl = [int(np.sum(np.abs(w[1:] - r[1:]) > gap + 1e-12)) for w in (a, b)]
    out = {"N": N, "spec": spec.to_dict(), "hierarchy_violations": spec.hierarchy_violations(),
           "sandwich_violations": {"lower": sandwich[0], "upper": sandwich[1]},
           "fundlem_violations": {"lower": fl[0], "upper": fl[1]},
           "fundlem_precondition": sieves.fundlem_precondition(spec)}
    failed = sum(sandwich) + sum(fl) > 0
    if not args.skip_minorisation:
        res = chen.minorisation_audit(N, cfg.delta1, t, coefficient=args.coefficient)
        os.makedirs(cfg.out, exist_ok=True)
        res.to_csv(os.path.join(cfg.out, "minorisation.csv"))
        out["minorisation"] = {"checked": res.checked, "violations": res.violations,
                               "coefficient": res.coefficient,
                               "required_coefficient": res.required_coefficient}
        failed = failed or res.violations > 0
    out["pass"] = not failed
    _emit(cfg, "sieve_audit", out)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_singular_series(cfg: Config, args) -> int:
    if args.m:
        hi = max(args.m) + 4
        t = arith.build_factor_table(max(hi, 16))
        vals = [goldbach.singular_series(m, t, cfg.cutoff) for m in args.m]
        _emit(cfg, "singular_series", {"values": [dataclasses.asdict(v) for v in vals]})
        return EXIT_OK
    N = cfg.n_or(1000)
    t = arith.build_factor_table(N + 4)
    arr = goldbach.singular_series_array(t, N, cfg.cutoff)
    write_csv(cfg, "singular_series", ["m", "value"],
              [[m, _f(arr[m])] for m in range(4, N + 1, 6)])
    _emit(cfg, "singular_series", {"N": N, "cutoff": cfg.cutoff,
                                   "tail_bound": goldbach.tail_bound(cfg.cutoff),
                                   "rows": len(range(4, N + 1, 6))})
    return EXIT_OK


def cmd_fourier(cfg: Config, args) -> int:
    N = cfg.n_or(10**6)
    R = cfg.R or 3
    t = arith.build_factor_table(N + 2)
    if args.kind == "chen":
        vals = chen.chen_prime_mask(t, N).astype(float)
    else:
        vals = arith.prime_mask(t, N).astype(float)
    f = fourier.Window.from_array(N, vals)
    norm, defect = fourier.fourier_norm(f, cfg.oversample)
    arcs = fourier.major_arcs(R, N)
    maj = fourier.restricted_norm(f, arcs, "major", cfg.oversample)
    mnr = fourier.restricted_norm(f, arcs, "minor", cfg.oversample)
    br = fourier.bR_transform_check(N, R, samples=args.samples, seed=cfg.seed, strict=False)
    ok = br.major_max_dev <= 10 / R and br.minor_max <= 10
    _emit(cfg, "fourier", {
        "N": N, "R": R, "kind": args.kind, "oversample": cfg.oversample,
        "norm": norm, "defect": defect, "parseval_gap": fourier.parseval_gap(f, cfg.oversample),
        "major_norm": maj[0], "minor_norm": mnr[0],
        "bR": dataclasses.asdict(br), "bR_pass": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_gallagher(cfg: Config, args) -> int:
    N = cfg.n_or(10**4)
    R = cfg.R or 10
    d = characters.gallagher_discrepancy(args.kind, N, R, delta1=cfg.delta1, exact=args.exact)
    _emit(cfg, "gallagher", {"kind": args.kind, "N": N, "R": R, "exact": args.exact,
                             "value": d.value, "defect": d.defect})
    return EXIT_OK


def cmd_bv(cfg: Config, args) -> int:
    N = cfg.n_or(10**5)
    Q = args.Q or 10
    P = cfg.P or 5
    v = characters.bv_discrepancy(args.kind, N, Q, P, delta1=cfg.delta1)
    _emit(cfg, "bv", {"kind": args.kind, "N": N, "Q": Q, "P": P, "value": v})
    return EXIT_OK


def cmd_chen_constant(cfg: Config, args) -> int:
    v = chen.chen_constant(cfg.delta1, args.coefficient, refine=args.refine)
    _emit(cfg, "chen_constant", {"delta1": cfg.delta1, "coefficient": args.coefficient,
                                 "refine": args.refine, "value": v})
    return EXIT_OK if v > 0 else EXIT_FAIL


def _plain_additive(cfg: Config, args) -> int:
    N = cfg.n_or(10**6)
    spec = cfg.sieve_spec(N)
    hi = 7 * N // 4 + 4
    t = arith.build_factor_table(hi)
    fs = goldbach._presieve_pair(spec, hi)
    rng = random.Random(cfg.seed)
    ms = []
    while len(ms) < args.samples:
        m = rng.randint(5 * N // 4, 7 * N // 4)
        if m % 6 == 4:
            ms.append(m)
    kinds = tuple(args.kinds)
    res = [goldbach.presieve_additive_check(m, N, spec, kinds, t, sieves=fs, cutoff=cfg.cutoff)
           for m in ms]
    write_csv(cfg, "additive_plain", ["m", "lhs", "main", "ratio"],
              [[r.m, _f(r.lhs), _f(r.main), _f(r.ratio)] for r in res])
    inside = sum(0.9 <= r.ratio <= 1.1 for r in res)
    ok = inside >= 0.9 * len(res)
    _emit(cfg, "additive_plain", {"N": N, "kinds": list(kinds), "samples": len(res),
                                  "in_range": inside, "pass": ok})
    return EXIT_OK if ok else EXIT_FAIL


def _divisor_count(n: int) -> int:
    return math.prod(e + 1 for _, e in characters._factor(n)) if n > 1 else 1


def _exceptional_additive(cfg: Config, args) -> int:
    top = cfg.R or 200
    N = cfg.n_or(10**6)
    rng = random.Random(cfg.seed)
    rows, bad = [], 0
    for r in range(3, top + 1):
        bound = 3 * math.sqrt(r) * _divisor_count(r)
        for chi in characters.real_primitive_characters(r):
            for _ in range(args.samples):
                m = rng.randrange(4, N + 1, 6)
                S, S7, _, _ = goldbach.character_sums(m, chi)
                s1 = S[2] / S[0] if S[0] else 0.0
                s2 = S[3] / S[0] if S[0] else 0.0
                ok = abs(s1) <= 1 and abs(s2) <= 1 and abs(S[5]) <= bound
                bad += not ok
                rows.append([r, chi.index, m, _f(s1), _f(s2), S[5], _f(bound), int(ok)])
    write_csv(cfg, "additive_exceptional",
              ["r", "character", "m", "sigma1", "sigma2", "S6", "S6_bound", "pass"], rows)
    _emit(cfg, "additive_exceptional", {"max_modulus": top, "rows": len(rows),
                                        "violations": bad, "pass": bad == 0})
    return EXIT_OK if bad == 0 else EXIT_FAIL


def cmd_additive_check(cfg: Config, args) -> int:
    if args.mode == "plain":
        return _plain_additive(cfg, args)
    return _exceptional_additive(cfg, args)


def cmd_models_check(cfg: Config, args) -> int:
    N = cfg.n_or(10**4)
    t = arith.build_factor_table(max(N, 16))
    Rs = [cfg.R] if cfg.R else [20, 50]
    summary, rows = [], []
    for R in Rs:
        for r in args.r:
            viol, checked, worst = models.hb_violations(R, r, t, N, C=args.C)
            summary.append({"R": R, "r": r, "checked": checked, "violations": len(viol),
                            "worst_ratio": worst})
            rows += [[R, r, n, _f(lhs), _f(H)] for n, lhs, H in viol]
    write_csv(cfg, "models_violations", ["R", "r", "n", "lhs", "H_R"], rows)
    total = sum(s["violations"] for s in summary)
    _emit(cfg, "models_check", {"N": N, "C": args.C, "sweeps": summary, "violations": total,
                                "pass": total == 0})
    return EXIT_OK if total == 0 else EXIT_FAIL


def cmd_exceptional_zero(cfg: Config, args) -> int:
    P = cfg.P or 100
    rep = characters.exceptional_zero_search(P, args.kappa)
    _emit(cfg, "exceptional_zero", rep.to_dict())
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "sieve-audit": cmd_sieve_audit,
    "singular-series": cmd_singular_series,
    "fourier": cmd_fourier,
    "gallagher": cmd_gallagher,
    "bv": cmd_bv,
    "chen-constant": cmd_chen_constant,
    "additive-check": cmd_additive_check,
    "models-check": cmd_models_check,
    "exceptional-zero": cmd_exceptional_zero,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help="key = value file; flags override it")
    g.add_argument("--N", type=float)
    g.add_argument("--delta1", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--R", type=int)
    g.add_argument("--P", type=int)
    g.add_argument("--threads", type=int, help=f"default ${THREADS_ENV} or all cores")
    g.add_argument("--out", help="output directory")
    g.add_argument("--checkpoint")
    g.add_argument("--oversample", type=int)
    g.add_argument("--cutoff", type=int, help="singular-series product cutoff")
    g.add_argument("--seed", type=int)

    p = argparse.ArgumentParser(prog="chensieve", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")

    s = sub.add_parser("scan", parents=[common], help="exceptional set of the Chen-prime count")
    s.add_argument("--chunk", type=int, default=1 << 17)
    s = sub.add_parser("sieve-audit", parents=[common],
                       help="pre-sieve sandwich, fundamental-lemma gap, Chen minorant")
    s.add_argument("--coefficient", type=float, help="factor in front of the E3 term")
    s.add_argument("--skip-minorisation", action="store_true")
    s = sub.add_parser("singular-series", parents=[common], help="singular series values")
    s.add_argument("m", type=int, nargs="*")
    s = sub.add_parser("fourier", parents=[common], help="grid Fourier norms and b_R check")
    s.add_argument("--kind", choices=("chen", "prime"), default="chen")
    s.add_argument("--samples", type=int, default=100)
    s = sub.add_parser("gallagher", parents=[common], help="large-sieve discrepancy over characters")
    s.add_argument("--kind", choices=("lambda", "prime_indicator", "e3"), default="lambda")
    s.add_argument("--exact", action="store_true", help="O(N^2) interval sweep, N <= 2*10^4")
    s = sub.add_parser("bv", parents=[common], help="Bombieri-Vinogradov style discrepancy")
    s.add_argument("--kind", choices=("lambda", "rough", "e3"), default="lambda")
    s.add_argument("--Q", type=int)
    s = sub.add_parser("chen-constant", parents=[common], help="Chen positivity constant")
    s.add_argument("--coefficient", type=float)
    s.add_argument("--refine", type=int, default=0)
    s = sub.add_parser("additive-check", parents=[common], help="four-form additive sums")
    s.add_argument("--mode", choices=("plain", "exceptional"), default="plain")
    s.add_argument("--samples", type=int, default=50)
    s.add_argument("--kinds", nargs=4, choices=("lower", "upper"), default=["lower"] * 4)
    s = sub.add_parser("models-check", parents=[common], help="majorant sweep for Lambda_{R,r}")
    s.add_argument("--r", type=int, nargs="+", default=[1, 3, 5, 7, 15])
    s.add_argument("--C", type=float, default=1.0)
    s = sub.add_parser("exceptional-zero", parents=[common], help="search for a real zero near 1")
    s.add_argument("--kappa", type=float, default=0.1)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](cfg, args)
    except (ValueError, arith.CapacityError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
