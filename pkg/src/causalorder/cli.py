"""Command-line front end.

Exit codes: 0 success, 1 I/O or parse failure, 2 validation failure or an
inconclusive result.  JSON output keeps a fixed key order and writes floats in
their shortest round-trip form, so re-runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import count, crit, measure, qmat, qubit, recon, sim, strat, verify
from .errors import CausalOrderError

CONFIG_ENV = "CAUSALORDER_CONFIG"


class InputError(Exception):
    """Unreadable or unparsable input (exit code 1)."""


@dataclass(frozen=True)
class RunConfig:
    tol_eq: float = 1e-9
    tol_psd: float = 1e-9
    seed: int = 0
    # receiving-party setting used for the identity slot of the direct Choi estimate
    y2_anchor_choice: int = 1
    threads: int = 1

    def validated(self) -> "RunConfig":
        if not (self.tol_eq > 0 and self.tol_psd > 0):
            raise ValueError("tolerances must be positive")
        if self.seed < 0 or self.threads < 1 or self.y2_anchor_choice < 1:
            raise ValueError("seed must be >= 0, threads >= 1 and y2_anchor_choice >= 1")
        return self

    def merged(self, obj: dict) -> "RunConfig":
        known = {f.name: f.type for f in fields(self)}
        unknown = set(obj) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        vals = {}
        for k, v in obj.items():
            vals[k] = int(v) if k in ("seed", "y2_anchor_choice", "threads") else float(v)
        return replace(self, **vals)


def _read_json(path) -> dict:
    try:
        with open(Path(path), encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the file named by the environment variable, then `path`, then overrides."""
    cfg = RunConfig()
    for p in (os.environ.get(CONFIG_ENV), path):
        if p:
            cfg = cfg.merged(_read_json(p))
    if overrides:
        cfg = cfg.merged({k: v for k, v in overrides.items() if v is not None})
    return cfg.validated()


# ---- output helpers ------------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _load_family(spec: str | None):
    if spec is None or spec == "pauli":
        return measure.build_pauli_family()
    try:
        return measure.family_from_json(_read_json(spec))
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad family file {spec}: {exc}") from exc


def _families_and_bases(args):
    f1, c1 = _load_family(args.family1)
    f2, c2 = _load_family(args.family2)
    return f1, f2, measure.build_operator_basis(f1, c1), measure.build_operator_basis(f2, c2)


def _load_dist(path) -> sim.JointDistribution:
    return sim.JointDistribution.from_json(_read_json(path))


# ---- commands ---------------------------------------------------------------------------


def cmd_simulate(args, cfg: RunConfig) -> int:
    if args.preset:
        s = strat.preset(args.preset, args.lam, strict=not args.allow_degenerate)
    elif args.strategy:
        s = strat.strategy_from_json(_read_json(args.strategy))
    else:
        raise ValueError("give --strategy FILE or --preset NAME")
    f1 = _load_family(args.family1)[0]
    f2 = _load_family(args.family2)[0]
    dist = sim.simulate_born(s, f1, f2) if args.method == "born" else sim.simulate_exact(s, f1, f2)
    if args.shots is None:
        _emit(dumps(dist.to_json()), args.out)
        return 0
    ss = sim.sample(dist, args.shots, cfg.seed, cfg.threads)
    try:
        emp = ss.empirical().to_json()
    except ValueError:
        emp = None
    _emit(dumps({"n_shots": ss.n_shots, "seed": ss.seed, "counts": ss.counts, "empirical": emp}), args.out)
    if args.csv:
        try:
            Path(args.csv).write_text(ss.to_csv(), encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot write {args.csv}: {exc}") from exc
    return 0


def cmd_reconstruct(args, cfg: RunConfig) -> int:
    dist = _load_dist(args.dist)
    _, _, b1, b2 = _families_and_bases(args)
    rep: dict = {"estimator": args.estimator, "direction": args.direction}
    if args.estimator == "hat":
        h = recon.hat_choi_full(dist, args.direction, b1, b2, cfg.y2_anchor_choice)
        m = h.choi
        rep["anchor_spread"] = h.anchor_spread
    elif args.estimator == "tilde":
        m = recon.tilde_choi(dist, args.direction, b1, b2)
    elif args.estimator == "pdm":
        m = recon.pdm(dist, b1, b2)
    elif args.estimator == "rho1":
        m = recon.rho1(dist, b1, b2)
    else:
        m = recon.rho2(dist, b1, b2)
    psd = qmat.is_psd(m, cfg.tol_psd)
    rep["min_eig"] = psd.min_eig
    rep["psd"] = psd.ok
    rep["matrix"] = qmat.matrix_to_json(m)
    _emit(dumps(rep), args.out)
    return 0


def cmd_classify(args, cfg: RunConfig) -> int:
    dist = _load_dist(args.dist)
    _, _, b1, b2 = _families_and_bases(args)
    rep = crit.classify(dist, b1, b2, cfg.tol_eq, cfg.tol_psd)
    _emit(dumps(rep), args.out)
    return 0 if rep["status"] == "classified" else 2


SCAN_AXES = {
    "depolarizing": ("mu", "kappa"),
    "pauli": ("lam1", "lam2", "lam3", "kappa"),
    "pd1": ("lam2", "lam3", "kappa"),
    "pd3": ("lam1", "kappa"),
}

SCAN_COLUMNS = (
    "D1", "D2", "D3", "D1_analytic", "D2_analytic", "D3_analytic", "kappa_max",
    "indistinguishable_analytic", "indistinguishable_numeric",
    "min_eig_tildeC21", "min_eig_hatC12", "min_eig_R",
)


def parse_grid(spec: str) -> dict[str, np.ndarray]:
    """'mu:0:1:0.05,kappa:-1:1:0.1' -> inclusive value arrays per axis."""
    axes = {}
    try:
        for part in spec.split(","):
            name, lo, hi, step = part.strip().split(":")
            lo, hi, step = float(lo), float(hi), float(step)
            if step <= 0 or hi < lo:
                raise ValueError(f"bad range in {part!r}")
            n = int(round((hi - lo) / step)) + 1
            axes[name] = np.round(np.linspace(lo, hi, n), 12)
    except ValueError as exc:
        raise ValueError(f"bad --grid {spec!r}: {exc}") from exc
    return axes


def _scan_lambdas(family: str, p: dict) -> np.ndarray:
    if family == "depolarizing":
        return strat.family_lambdas("depolarizing", {"mu": p["mu"]})
    if family == "pauli":
        return np.array([p["lam1"], p["lam2"], p["lam3"]])
    if family == "pd1":
        return np.array([1.0, p.get("lam2", -p["lam3"]), p["lam3"]])
    return np.array([p["lam1"], -p["lam1"], 1.0])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return repr(float(v))


def scan_point(family: str, p: dict, cfg: RunConfig) -> dict | None:
    lam = _scan_lambdas(family, p)
    choi = qubit.pauli_choi_from_lambdas(lam)
    if np.linalg.eigvalsh(choi)[0] < -1e-12:
        return None  # not a channel
    kappa = float(p["kappa"])
    dist = sim.simulate_exact(strat.seq("1to2", qmat.bloch_state((kappa, 0.0, 0.0)), choi))
    dc = crit.d1d2d3(dist, tol_eq=cfg.tol_eq, tol_psd=cfg.tol_psd, require_member=False)
    a1, a2, a3 = qubit.pauli_D_conditions(kappa, *lam)
    kmax = None
    if family == "depolarizing":
        b = qubit.depol_D3_bound(p["mu"])
        kmax = b.kappa_max
        a3 = abs(kappa) < kmax if b.open_interval else abs(kappa) <= kmax + qubit.BOUNDARY_EPS
        ind_an = qubit.depol_indistinguishable(p["mu"], kappa)
    else:
        if family == "pd1":
            a3 = qubit.phase_damping_D3("s1", kappa, 1.0, lam[1], lam[2])
        elif family == "pd3":
            a3 = qubit.phase_damping_D3("s3", kappa, lam[0])
        ind_an = a1 and a2 and a3
    row = {
        "D1": None if dc.D1 is None else bool(dc.D1),
        "D2": None if dc.D2 is None else bool(dc.D2),
        "D3": None if dc.D3 is None else bool(dc.D3),
        "D1_analytic": a1, "D2_analytic": a2, "D3_analytic": bool(a3), "kappa_max": kmax,
        "indistinguishable_analytic": bool(ind_an),
        "indistinguishable_numeric": dc.indistinguishable,
        "min_eig_tildeC21": None if dc.D3 is None else dc.D3.residual,
        "min_eig_hatC12": None,
        "min_eig_R": qmat.is_psd(recon.pdm(dist)).min_eig,
    }
    if crit.check_C0(dist):
        row["min_eig_hatC12"] = qmat.is_psd(recon.hat_choi(dist, "1to2")).min_eig
    return row


def cmd_scan(args, cfg: RunConfig) -> int:
    axes = parse_grid(args.grid)
    names = SCAN_AXES[args.family]
    required = set(names) - ({"lam2"} if args.family == "pd1" else set())
    missing = required - set(axes)
    extra = set(axes) - set(names)
    if missing or extra:
        raise ValueError(f"family {args.family} takes axes {names}; missing {sorted(missing)}, unexpected {sorted(extra)}")
    order = [n for n in names if n in axes]
    points = [dict(zip(order, vals)) for vals in np.array(np.meshgrid(*[axes[n] for n in order], indexing="ij")).reshape(len(order), -1).T]

    def work(p):
        return scan_point(args.family, {k: float(v) for k, v in p.items()}, cfg)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(work, points))
    else:
        rows = [work(p) for p in points]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(order + list(SCAN_COLUMNS))
    for p, row in zip(points, rows):
        if row is None:
            continue
        w.writerow([repr(float(p[n])) for n in order] + [_fmt(row[c]) for c in SCAN_COLUMNS])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    results = []
    for name in names:
        fn = verify.SUITES[name]
        kwargs = {}
        if name in ("axial", "canonical", "symmetric"):
            kwargs["seed"] = cfg.seed
            if args.n is not None:
                kwargs["n"] = args.n
        if name in ("depolarizing", "symmetric"):
            kwargs["tol_eq"] = cfg.tol_eq
        r = fn(**kwargs)
        results.append(r)
        sys.stdout.write(f"{'PASS' if r.passed else 'FAIL'} {r.name}: checked={r.checked} "
                         f"disagreements={r.disagreements} {json.dumps(_clean(r.detail), sort_keys=True)}\n")
    if args.json:
        _emit(dumps([r.to_json() for r in results]), args.json)
    return 0 if all(r.passed for r in results) else 2


def cmd_count_dim(args, cfg: RunConfig) -> int:
    try:
        vals = [int(x) for x in args.dims.split(",")]
    except ValueError as exc:
        raise ValueError(f"bad --dims {args.dims!r}") from exc
    if len(vals) != 4:
        raise ValueError("--dims takes four comma-separated integers d_in1,d_out1,d_in2,d_out2")
    dims = count.InterfaceDims(*vals)
    rep: dict = {"dims": list(dims.as_tuple()), "quotient_dim": count.quotient_dim(dims)}
    if args.family1 or args.family2:
        f1 = _load_family(args.family1)[0]
        f2 = _load_family(args.family2)[0]
        rep.update(count.impossibility_report(f1, f2, dims).to_json())
    if args.json:
        sys.stdout.write(dumps(rep))
    else:
        sys.stdout.write(f"quotient_dim{tuple(vals)} = {rep['quotient_dim']}\n")
        if "message" in rep:
            sys.stdout.write(f"accessible_count = {rep['accessible_count']}\n{rep['message']}\n")
    return 0


# ---- argument parsing ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON run configuration (default from ${CONFIG_ENV})")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--tol-eq", type=float, dest="tol_eq")
    common.add_argument("--tol-psd", type=float, dest="tol_psd")

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family1", help="measurement family JSON for the first party (default: Pauli)")
    fam.add_argument("--family2", help="measurement family JSON for the second party (default: Pauli)")

    p = argparse.ArgumentParser(prog="causalorder", description="Causal-order analysis of two-party measurement statistics.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common, fam], help="strategy -> distribution table or shot sample")
    s.add_argument("--strategy", help="strategy JSON file")
    s.add_argument("--preset", choices=strat.PRESETS)
    s.add_argument("--lam", type=float, help="mixing weight for classical_flip")
    s.add_argument("--allow-degenerate", action="store_true", help="accept classical_flip weights 0 and 1")
    s.add_argument("--method", choices=("exact", "born"), default="exact")
    s.add_argument("--shots", type=int)
    s.add_argument("--csv", help="write shot records here")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reconstruct", parents=[common, fam], help="distribution -> reconstructed operator")
    r.add_argument("dist")
    r.add_argument("--direction", choices=recon.DIRECTIONS, default="1to2")
    r.add_argument("--estimator", choices=("hat", "tilde", "pdm", "rho1", "rho2"), default="hat")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reconstruct)

    c = sub.add_parser("classify", parents=[common, fam], help="distribution -> hierarchy report")
    c.add_argument("dist")
    c.add_argument("--out")
    c.set_defaults(func=cmd_classify)

    sc = sub.add_parser("scan", parents=[common], help="grid scan of a qubit channel family")
    sc.add_argument("--family", choices=tuple(SCAN_AXES), required=True)
    sc.add_argument("--grid", required=True, help="axis:min:max:step,...")
    sc.add_argument("--out")
    sc.set_defaults(func=cmd_scan)

    v = sub.add_parser("verify", parents=[common], help="run analytic-vs-numeric oracle suites")
    v.add_argument("--suite", choices=("all", *verify.SUITES), default="all")
    v.add_argument("--n", type=int, help="sample count for the randomized suites")
    v.add_argument("--json", help="also write results as JSON here")
    v.set_defaults(func=cmd_verify)

    cd = sub.add_parser("count-dim", parents=[common], help="quotient-space dimension and accessible count")
    cd.add_argument("--dims", required=True, help="d_in1,d_out1,d_in2,d_out2")
    cd.add_argument("--family1", help="family JSON or 'pauli'")
    cd.add_argument("--family2", help="family JSON or 'pauli'")
    cd.add_argument("--json", action="store_true")
    cd.set_defaults(func=cmd_count_dim)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, {k: getattr(args, k) for k in ("seed", "threads", "tol_eq", "tol_psd")})
        return args.func(args, cfg)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (CausalOrderError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
