"""Command-line entry point.

Subcommands: simulate, sweep, lemma, density, order-stats, goodset. Flags
override values loaded from an optional JSON config file (--config) whose
keys mirror ExperimentConfig field names.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import harness, lemma_mc
from .noise import derive_seed
from .numtheory import make_instance
from .peaks import build_peak_set

_CONFIG_KEYS = {
    "n": "n_values",
    "b": "b",
    "epsilon": "epsilons",
    "gamma": "gamma",
    "cap_c": "C",
    "prime_mode": "prime_mode",
    "prime": "prime",
    "trials": "trials",
    "ustar_samples": "ustar_samples",
    "seed": "master_seed",
    "out": "out",
    "format": "fmt",
    "x_max": "x_max",
    "c1": "c1",
    "samples": "samples",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--n", type=int, nargs="+", help="bit lengths to run")
    p.add_argument("--b", type=int, help="noise cutoff exponent")
    p.add_argument("--epsilon", type=float, nargs="+", help="noise levels")
    p.add_argument("--gamma", help="window half-width as a fraction, e.g. 1/2 or 3")
    p.add_argument("--cap-c", dest="cap_c", type=int, help="v-condition divisor C")
    p.add_argument(
        "--prime-mode", dest="prime_mode", choices=["random", "fouvry", "explicit"]
    )
    p.add_argument("--prime", type=int, help="explicit prime modulus")
    p.add_argument("--trials", type=int, help="noise realizations per cell")
    p.add_argument("--ustar-samples", dest="ustar_samples", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output path")
    p.add_argument("--format", dest="format", choices=["csv", "json"])


def _build_config(args: argparse.Namespace, mode: str) -> harness.ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data.update(json.load(fh))
    for flag, key in _CONFIG_KEYS.items():
        val = getattr(args, flag, None)
        if val is not None:
            data[key] = val
    data["mode"] = mode
    if "n_values" in data and isinstance(data["n_values"], int):
        data["n_values"] = [data["n_values"]]
    return harness.ExperimentConfig.from_dict(data)


def _write_records(cfg: harness.ExperimentConfig, records) -> None:
    for rec in records:
        print(
            f"n={rec.n} P={rec.P} eps={rec.epsilon:g} gamma={rec.gamma} "
            f"estimate={rec.estimate:.6g} std_err={rec.std_err:.3g} "
            f"baseline={rec.baseline:.6g}"
        )
    if cfg.out:
        if cfg.fmt == "json":
            harness.emit_summary(records, cfg.out)
        else:
            harness.emit_csv(records, cfg.out)
        print(f"wrote {cfg.out}")


def _cmd_simulate(args) -> int:
    cfg = _build_config(args, "simulate")
    _write_records(cfg, harness.run_sweep(cfg))
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_config(args, "sweep")
    _write_records(cfg, harness.run_sweep(cfg))
    return 0


def _cmd_lemma(args) -> int:
    cfg = _build_config(args, "lemma")
    rng = np.random.default_rng(derive_seed(cfg.master_seed, 7))
    rows = []
    failures = 0
    for K in (2, 8, 32):
        for a in (2.0, 8.0, 32.0):
            for t in (0.25, 1.0):
                universe = 32
                size = int(args.set_size if args.set_size is not None else universe // 2)
                inst = lemma_mc.synthetic_instance(K, size, universe, a, t, rng)
                mean, se = lemma_mc.mc_mean(inst, cfg.trials, rng)
                bound = lemma_mc.lemma_bound(K, inst.zeta_emp, t)
                ok = mean <= bound + 4.0 * se
                failures += 0 if ok else 1
                rows.append(
                    {
                        "K": K, "a": a, "t": t, "set_size": size,
                        "zeta_emp": inst.zeta_emp, "mean": mean,
                        "std_err": se, "bound": bound, "ok": ok,
                    }
                )
                print(
                    f"K={K:3d} a={a:5g} t={t:4g} mean={mean:10.4f} "
                    f"bound={bound:10.4f} {'ok' if ok else 'VIOLATION'}"
                )
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump({"cells": rows, "failures": failures}, fh, indent=2)
        print(f"wrote {cfg.out}")
    return 0 if failures == 0 else 1


def _cmd_density(args) -> int:
    cfg = _build_config(args, "density")
    result = harness.density_scan(cfg.x_max)
    for band in result["bands"]:
        print(
            f"[{band['lo']:>8d}, {band['hi']:>8d})  primes={band['primes']:>6d}  "
            f"fouvry={band['fouvry']:>6d}  fraction={band['fraction']:.4f}"
        )
    print(f"total fraction {result['fraction']:.4f} over {result['total_primes']} primes")
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2)
        print(f"wrote {cfg.out}")
    return 0


def _cmd_order_stats(args) -> int:
    cfg = _build_config(args, "order-stats")
    results = []
    for i, n in enumerate(cfg.n_values):
        rng = np.random.default_rng(derive_seed(cfg.master_seed, 4, i))
        res = harness.order_stats(n, cfg.c1, cfg.samples, rng)
        results.append(res)
        print(
            f"n={n:3d} c1={res['c1']} fraction={res['fraction']:.5f} "
            f"(std err {res['std_err']:.5f}, {res['samples']} samples)"
        )
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2)
        print(f"wrote {cfg.out}")
    return 0


def _cmd_goodset(args) -> int:
    cfg = _build_config(args, "goodset")
    n = cfg.n_values[0] if cfg.prime is None else None
    rng = np.random.default_rng(derive_seed(cfg.master_seed, 1, n if n is not None else 0))
    if cfg.prime is not None:
        inst = make_instance(prime_mode="explicit", rng=rng, prime=cfg.prime)
    else:
        inst = make_instance(n=n, prime_mode=cfg.prime_mode, rng=rng)
    pk = build_peak_set(inst, cfg.peak_params(), b=cfg.b)
    print(
        f"P={inst.P} g={inst.g} y={inst.y} d={inst.d} |pi1|={len(pk.pi1)} "
        f"|G|={pk.size()} |pi1'|={len(pk.gprime_pi1)}"
    )
    if cfg.out:
        pk.save(cfg.out)
        print(f"wrote {cfg.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="noisyshor",
        description="Discrete-log simulation lab with noisy QFT rotation gates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (
        ("simulate", _cmd_simulate),
        ("sweep", _cmd_sweep),
        ("density", _cmd_density),
        ("order-stats", _cmd_order_stats),
        ("goodset", _cmd_goodset),
    ):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "density":
            p.add_argument("--x-max", dest="x_max", type=int)
        if name == "order-stats":
            p.add_argument("--c1", help="order threshold exponent, e.g. 2/3")
            p.add_argument("--samples", type=int)
        p.set_defaults(fn=fn)

    p = sub.add_parser("lemma")
    _add_common(p)
    p.add_argument("--set-size", dest="set_size", type=int)
    p.set_defaults(fn=_cmd_lemma)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
