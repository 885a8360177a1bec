"""Command-line front end: ``wigprod verify | zeros | lyapunov | rerun``.

Exit codes: 0 pass, 1 statistical fail (or rerun mismatch), 2 inconclusive,
3 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, replace

from . import __version__
from .asymptotics import (
    check_prop1,
    check_prop2,
    find_zeros,
    prop1_sample_points,
    prop2_grid,
    refined_zero_offset,
    refined_zero_prediction,
    zeros_weak_limit_histogram,
)
from .envelope import ExperimentConfig, ResultEnvelope, csv_text, jsonable, write_csv
from .lyapunov import compare_zeros_vs_lyapunov, gaussian_lyapunov, lyapunov_run
from .sampling import EnsembleSpec, parse_dist, parse_dists
from .verifier import (
    IDENTITIES,
    verify_hermite,
    verify_lemma1,
    verify_thm1_hermitised,
    verify_thm1_mixed,
    verify_thm2_kernel,
    verify_trivial_single,
    z_score,
)

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
SEED_ENV = "WIGPROD_SEED"

_VERDICT_EXIT = {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}

COMPARE_COLUMNS = ["j", "rescaled_zero_finiteM", "rescaled_zero_limit", "mu_closed_form", "mu_estimated", "se",
                   "diff"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wigprod", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, need_n=True):
        sp.add_argument("--n", type=int, required=need_n)
        sp.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or 0)")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out", default=None, help="output file (stdout if omitted)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    v = sub.add_parser("verify", help="Monte Carlo check of an expectation identity")
    common(v)
    v.add_argument("--identity", required=True, choices=IDENTITIES)
    v.add_argument("--m", type=int, default=1)
    v.add_argument("--dist", required=True, help="e.g. rademacher:1, gaussian-c:1, or a comma list per factor")
    v.add_argument("--samples", type=int, default=100_000)
    v.add_argument("--z-threshold", type=float, default=5.0)
    v.add_argument("--r", type=int, default=None, help="minor size for lemma1-*")
    v.add_argument("--diag-factor", type=float, default=1.0, help="diagonal variance factor for eq5-hermite")

    z = sub.add_parser("zeros", help="zeros of the average polynomial and their asymptotics")
    common(z)
    z.add_argument("--m", type=int, required=True)
    z.add_argument("--sigma", type=float, default=1.0)
    z.add_argument("--check", choices=("refined", "prop1", "prop2"), default=None)
    z.add_argument("--epsilon", type=float, default=0.1)
    z.add_argument("--emit-complex-zeros", metavar="PATH", default=None)

    ly = sub.add_parser("lyapunov", help="Lyapunov exponents of random products")
    common(ly)
    ly.add_argument("--m", type=int, required=True, help="number of factors per repetition")
    ly.add_argument("--dist", default=None)
    ly.add_argument("--reps", type=int, default=20)
    ly.add_argument("--beta", type=int, choices=(1, 2), default=None)
    ly.add_argument("--sigma", type=float, default=None)
    ly.add_argument("--z-threshold", type=float, default=3.0)
    ly.add_argument("--compare-closed-form", action="store_true")
    ly.add_argument("--compare-zeros", action="store_true")

    rr = sub.add_parser("rerun", help="re-run an envelope's config and compare payloads")
    rr.add_argument("envelope")
    rr.add_argument("--workers", type=int, default=None)
    rr.add_argument("--out", default=None)
    return p


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    seed = ns.seed if ns.seed is not None else _default_seed()
    cfg = ExperimentConfig(command=ns.command, n=ns.n, m=ns.m, seed=seed, workers=ns.workers, out=ns.out,
                           format=ns.format)
    if ns.command == "verify":
        return replace(cfg, identity=ns.identity, dist=ns.dist, samples=ns.samples, z_threshold=ns.z_threshold,
                       r=ns.r, diag_factor=ns.diag_factor)
    if ns.command == "zeros":
        return replace(cfg, sigma=ns.sigma, check=ns.check, epsilon=ns.epsilon,
                       emit_complex_zeros=ns.emit_complex_zeros)
    return replace(cfg, dist=ns.dist, reps=ns.reps, beta=ns.beta,
                   sigma=ns.sigma if ns.sigma is not None else 1.0, z_threshold=ns.z_threshold,
                   compare_closed_form=ns.compare_closed_form, compare_zeros=ns.compare_zeros)


# --- runners: config -> (payload_type, payload, csv rows, csv columns, exit code)

def run_verify(cfg: ExperimentConfig):
    ident = cfg.identity
    kw = dict(samples=cfg.samples, seed=cfg.seed, z_threshold=cfg.z_threshold, workers=cfg.workers)
    if ident in ("eq5-hermite", "lemma1-part1", "lemma1-part2"):
        dist = parse_dist(cfg.dist)
        if ident == "eq5-hermite":
            rep = verify_hermite(cfg.n, dist.sigma, dist, diag_variance_factor=cfg.diag_factor, **kw)
        else:
            if cfg.r is None:
                raise UsageError(f"{ident} needs --r")
            parts = verify_lemma1(cfg.n, cfg.r, dist, exhaustive=cfg.n <= 5, **kw)
            rep = parts[0] if ident == "lemma1-part1" else parts[1]
    else:
        spec = EnsembleSpec(cfg.n, cfg.m, tuple(parse_dists(cfg.dist, cfg.m)))
        fn = {
            "thm1-hermitised": verify_thm1_hermitised,
            "thm1-mixed": verify_thm1_mixed,
            "thm2-kernel": verify_thm2_kernel,
            "eq6-trivial": verify_trivial_single,
        }[ident]
        rep = fn(spec, **kw)
    rows = [asdict(r) for r in rep.records]
    cols = ["index", "est_re", "est_im", "se", "ref_re", "ref_im", "z"]
    return "VerificationReport", rep.to_dict(include_timing=False), rows, cols, _VERDICT_EXIT[rep.verdict]


def run_zeros(cfg: ExperimentConfig):
    zs = find_zeros(cfg.n, cfg.m, cfg.sigma)
    payload = {"zeros": zs.to_dict()}
    rows = [{"j": j, "log_zero": lz, "rescaled": rz}
            for j, (lz, rz) in enumerate(zip(zs.log_zeros, zs.rescaled), start=1)]
    cols = ["j", "log_zero", "rescaled"]
    if cfg.check == "refined":
        table = []
        for j in range(1, cfg.n + 1):
            pred = refined_zero_prediction(cfg.n, cfg.m, j, cfg.sigma)
            table.append({"j": j, "rescaled": zs.rescaled[j - 1], "prediction": pred,
                          "residual": refined_zero_offset(cfg.n, cfg.m, j)})
        payload["refined"] = table
        rows, cols = table, ["j", "rescaled", "prediction", "residual"]
    elif cfg.check == "prop1":
        pts = prop1_sample_points(cfg.n, cfg.epsilon, 200, cfg.seed)
        q = cfg.n / (cfg.n + cfg.epsilon)
        table = [{"region": name, "max_dev": check_prop1(cfg.n, cfg.m, cfg.epsilon, p)} for name, p in pts.items()]
        payload["prop1"] = {"epsilon": cfg.epsilon, "q": q, "q_pow_M": q ** cfg.m, "regions": table,
                            "max_dev": max(t["max_dev"] for t in table)}
        rows, cols = table, ["region", "max_dev"]
    elif cfg.check == "prop2":
        grid = prop2_grid()
        table = []
        for nu in range(1, cfg.n + 1):
            r = check_prop2(cfg.n, nu, cfg.m, grid)
            table.append({"nu": nu, "max_dev_finite": r.max_dev_finite, "max_dev_limit": r.max_dev_limit})
        payload["prop2"] = {"grid_points": len(grid), "radius": 3.0, "rows": table}
        rows, cols = table, ["nu", "max_dev_finite", "max_dev_limit"]
    if cfg.emit_complex_zeros:
        summ = zeros_weak_limit_histogram(cfg.n, cfg.m, cfg.sigma, cfg.epsilon)
        write_csv(cfg.emit_complex_zeros, ({"re": w.real, "im": w.imag} for w in summ.zeros), ["re", "im"])
        payload["complex_zeros"] = summ.to_dict()
    return "ZeroSet", payload, rows, cols, EXIT_PASS


def run_lyapunov(cfg: ExperimentConfig):
    payload: dict = {}
    rows, cols = [], []
    code = EXIT_PASS
    run = None
    sigma = cfg.sigma
    beta = cfg.beta
    if cfg.dist is not None:
        dist = parse_dist(cfg.dist)
        spec = EnsembleSpec.uniform(cfg.n, 1, dist)
        run = lyapunov_run(spec, cfg.m, cfg.reps, cfg.seed, cfg.workers)
        payload["run"] = run.to_dict()
        sigma = dist.sigma if dist.tag != "const" else sigma
        if beta is None and dist.tag in ("complex-gaussian", "real-gaussian"):
            beta = 2 if dist.is_complex else 1
        rows = [{"j": j, "mu_estimated": m, "se": s}
                for j, (m, s) in enumerate(zip(run.mean.tolist(), run.se.tolist()), start=1)]
        cols = ["j", "mu_estimated", "se"]
    elif not cfg.compare_zeros:
        raise UsageError("lyapunov needs --dist unless --compare-zeros is given")
    if cfg.compare_closed_form:
        if run is None or beta is None:
            raise UsageError("--compare-closed-form needs --dist and a Gaussian law or --beta")
        ref = gaussian_lyapunov(cfg.n, beta, sigma)
        for row, mu in zip(rows, ref):
            row["mu_closed_form"] = mu
            row["z"] = z_score(row["mu_estimated"], mu, row["se"]) if not math.isnan(row["se"]) else math.nan
        cols = cols + ["mu_closed_form", "z"]
        ok = all(abs(r["z"]) <= cfg.z_threshold for r in rows)
        payload["closed_form"] = {"beta": beta, "sigma": sigma, "mu": ref, "z": [r["z"] for r in rows],
                                  "z_threshold": cfg.z_threshold, "verdict": "pass" if ok else "fail"}
        if dist.tag not in ("complex-gaussian", "real-gaussian"):
            payload["closed_form"]["note"] = "closed form is proven for Gaussian factors only; exploratory"
        code = EXIT_PASS if ok else EXIT_FAIL
    if cfg.compare_zeros:
        if beta is None:
            raise UsageError("--compare-zeros needs --beta or a Gaussian --dist")
        table = compare_zeros_vs_lyapunov(cfg.n, cfg.m, beta, sigma, run)
        payload["compare_zeros"] = table
        rows, cols = table, COMPARE_COLUMNS
    return "LyapunovRun", payload, rows, cols, code


RUNNERS = {"verify": run_verify, "zeros": run_zeros, "lyapunov": run_lyapunov}


def execute(cfg: ExperimentConfig) -> tuple[ResultEnvelope, list[dict], list[str], int]:
    t0 = time.perf_counter()
    ptype, payload, rows, cols, code = RUNNERS[cfg.command](cfg)
    env = ResultEnvelope(cfg, ptype, jsonable(payload), wall_time=time.perf_counter() - t0)
    return env, rows, cols, code


def _emit(env: ResultEnvelope, rows, cols, out: str | None, fmt: str) -> None:
    text = env.to_json() + "\n" if fmt == "json" else csv_text(rows, cols)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rerun(ns) -> int:
    old = ResultEnvelope.load(ns.envelope)
    cfg = old.config
    if ns.workers is not None:
        cfg = replace(cfg, workers=ns.workers)
    env, rows, cols, _ = execute(cfg)
    same = json.dumps(env.payload, sort_keys=True) == json.dumps(old.payload, sort_keys=True)
    if ns.out:
        env.save(ns.out)
    print("identical" if same else "MISMATCH: payload differs from the stored envelope")
    return EXIT_PASS if same else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.command == "rerun":
            return _rerun(ns)
        cfg = config_from_args(ns)
        env, rows, cols, code = execute(cfg)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"wigprod: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(env, rows, cols, cfg.out, cfg.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
