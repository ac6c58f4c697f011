"""Command-line entry point: build, params, certify, repair, distance, table."""
from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import analysis, codes, constructions, locality
from .curves import BadCurveParams
from .funcspace import BadPartition, DegreeTooLarge, PoleAtPoint
from .gf import FieldError

EXIT_OK, EXIT_USAGE, EXIT_BUILD, EXIT_CERT = 0, 1, 2, 3

BUILD_ERRORS = (constructions.ConstructionError, BadCurveParams, BadPartition, DegreeTooLarge,
                PoleAtPoint, FieldError, codes.FormatError, codes.LengthMismatch,
                analysis.MissingEllG, analysis.BudgetExceeded)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        cfg = tomllib.load(fh)
    if "construction" not in cfg:
        raise UsageError("config needs a 'construction' key")
    return cfg


def sidecar_path(path) -> Path:
    return Path(str(path) + ".rec")


def _print_record(rec: analysis.ParamRecord):
    for key, val in rec.row().items():
        if val not in (None, ""):
            print(f"{key}: {val}")


def cmd_build(args) -> int:
    if not args.config or not args.out:
        raise UsageError("build needs --config and --out")
    cfg = load_config(args.config)
    b = constructions.build(cfg)
    codes.save(b.code, args.out)
    if b.structure is not None:
        sidecar_path(args.out).write_bytes(locality.dumps_structure(b.structure, b.code.field))
    rec = analysis.ParamRecord(b.name, b.code.n, b.code.k, d_designed=b.designed_d, s=cfg.get("s"))
    if b.structure is not None:
        rec.locality = b.structure.sizes()
        rec.availability = locality.availability(b.structure)[1]
        if b.structure.dropped:
            rec.notes.append(f"{len(b.structure.dropped)} positions lack a set on some axis")
    if b.expected_k is not None and b.expected_k != b.code.k:
        rec.notes.append(f"closed-form k {b.expected_k}")
    _print_record(rec)
    return EXIT_OK


def cmd_params(args) -> int:
    if not args.config:
        raise UsageError("params needs --config")
    cfg = load_config(args.config)
    name = cfg["construction"]
    q = cfg.get("q")
    if name == "params_only":
        rec = analysis.theorem_params(cfg.get("which", "prop1"), q, cfg.get("alpha"), cfg.get("ellG"))
    elif name == "suzuki_tilde":
        rec = analysis.theorem_params("thm1", q or 8, cfg.get("alpha", 1))
    elif name == "suzuki_fiber":
        rec = analysis.theorem_params("thm3", q or 8, cfg.get("alpha", 1))
    elif name == "ree_dual_lrc":
        info = constructions.ree_dual_lrc_params(q or 27, cfg.get("s", 0))
        rec = analysis.ParamRecord(name, info["n"], info["k"], 8, 3, s=info["s"],
                                   notes=[f"rank of sum {info['rank_sum']}"])
    else:
        b = constructions.build(cfg)
        rec = analysis.ParamRecord(b.name, b.code.n, b.code.k, d_designed=b.designed_d, s=cfg.get("s"))
    _print_record(rec)
    return EXIT_OK


def _load(args):
    if not args.inp:
        raise UsageError("--in is required")
    C = codes.load(args.inp)
    sc = sidecar_path(args.inp)
    st = locality.loads_structure(sc.read_bytes(), C.field) if sc.exists() else None
    return C, st


def cmd_certify(args) -> int:
    C, st = _load(args)
    if st is None:
        if C.k == 1 and C.n >= 2 and np.all(C.gen[0] != 0):
            st = locality.repetition_structure(C)
        else:
            print("no recovery sidecar found", file=sys.stderr)
            return EXIT_CERT
    bad_disjoint = locality.disjointness_violations(st)
    cert = locality.certify_structure(C, st)
    reps = locality.check_repair_weights(C, st)
    failed = [key for key, ok in cert.items() if not ok]
    wrong = [key for key, ok in reps.items() if not ok]
    per, avail = locality.availability(st, cert)
    sizes = sorted(st.sizes())
    missing = int(np.sum([len(s) == 0 for s in st.sets]))
    print(f"positions: {st.n}, sets: {len(cert)}")
    print(f"localities: {{{', '.join(map(str, sizes))}}}")
    print(f"availability {avail}")
    if missing:
        print(f"positions without any set: {missing}")
    if bad_disjoint:
        print(f"disjointness failures: {len(bad_disjoint)} (first at position {bad_disjoint[0][0]})")
    if failed:
        print(f"certification failures: {len(failed)} (first at position {failed[0][0]})")
    if wrong:
        print(f"repair-weight failures: {len(wrong)}")
    if bad_disjoint or failed or wrong:
        return EXIT_CERT
    print("all certified")
    return EXIT_OK


def cmd_repair(args) -> int:
    C, st = _load(args)
    if st is None:
        print("no recovery sidecar found", file=sys.stderr)
        return EXIT_CERT
    rng = np.random.default_rng(args.seed)
    F = C.field
    ok = unrecoverable = wrong = 0
    reads = Counter()
    words = np.zeros((0, C.n), dtype=np.int64)
    for t in range(args.trials):
        if t % 128 == 0:
            words = codes.random_codewords(C, min(128, args.trials - t), rng)
        word = words[t % 128]
        j = int(rng.integers(C.n))
        erased = np.zeros(C.n, dtype=bool)
        erased[j] = True
        sets = sorted(st.sets[j], key=lambda s: s.size)
        if args.pattern == "set" and sets:
            erased[sets[0].positions] = True
        elif args.pattern == "all-sets":
            for s in sets:
                erased[s.positions] = True
        try:
            val = locality.repair(C, st, np.where(erased, 0, word), erased, j)
        except locality.AllRecoverySetsErased:
            unrecoverable += 1
            continue
        used = min((s for s in st.sets[j] if not erased[s.positions].any()), key=lambda s: s.size)
        reads[used.size] += 1
        if val == word[j]:
            ok += 1
        else:
            wrong += 1
    covered = ok + wrong
    rate = 100.0 * ok / covered if covered else 0.0
    print(f"trials: {args.trials}, pattern: {args.pattern}, field: GF({F.order})")
    print(f"repaired: {ok}/{covered} ({rate:.1f}%)")
    print(f"unrecoverable (every set erased): {unrecoverable}")
    print("symbols read: " + ", ".join(f"{k}:{v}" for k, v in sorted(reads.items())))
    return EXIT_CERT if wrong else EXIT_OK


def cmd_distance(args) -> int:
    C, _ = _load(args)
    method = args.method
    rep = analysis.distance_report(C, 1, args.budget, args.trials, args.seed, method)
    print(f"n: {C.n}, k: {C.k}, method: {rep.method}")
    if rep.exact is not None:
        print(f"d: {rep.exact}")
    else:
        print(f"d <= {rep.upper_bound}")
    return EXIT_OK


def cmd_table(args) -> int:
    if not args.family:
        raise UsageError("table needs --family")
    recs = analysis.table_report(args.family, budget=args.budget, trials=args.trials, seed=args.seed,
                                 compare=args.compare)
    text = analysis.to_csv(recs)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{len(recs)} rows written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="curvelrc", description=__doc__)
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)
    for name in ("build", "params", "certify", "repair", "distance", "table"):
        s = sub.add_parser(name)
        s.add_argument("--config")
        s.add_argument("--in", dest="inp")
        s.add_argument("--out")
        s.add_argument("--trials", type=int, default=None)
        s.add_argument("--budget", type=int, default=analysis.DEFAULT_BUDGET)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--compare", action="store_true")
        s.add_argument("--method", choices=("exhaustive", "random"))
        s.add_argument("--family", choices=("suzuki_f8", "hermitian_f16", "ree_f27", "products"))
        s.add_argument("--pattern", choices=("single", "set", "all-sets"), default="single")
    return p


COMMANDS = {"build": cmd_build, "params": cmd_params, "certify": cmd_certify, "repair": cmd_repair,
            "distance": cmd_distance, "table": cmd_table}


def main(argv=None) -> int:
    p = make_parser()
    args = p.parse_args(argv)
    if not args.cmd:
        p.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.trials is None:
        args.trials = {"repair": 1000, "distance": 10, "table": 2}.get(args.cmd, 0)
    if args.cmd == "table" and args.budget == analysis.DEFAULT_BUDGET:
        args.budget = 2**24
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except tomllib.TOMLDecodeError as exc:
        print(f"TOMLDecodeError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BUILD_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUILD


if __name__ == "__main__":
    sys.exit(main())
