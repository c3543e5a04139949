"""``beeid`` command-line front end.

Exit codes: 0 success (a decoder reporting failure is still a success),
2 usage, 3 input-semantic error, 4 malformed data, 5 guard breached.

Every command given ``--out`` also writes ``<out>.manifest.json`` recording the
argument vector, resolved parameters and input digests; ``beeid replay
MANIFEST`` re-runs it after checking the inputs are unchanged.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__, estimation, identifiers, simulate
from .channels import parse_outputs
from .codes import Codebook, build_linear_code, build_reed_muller, ErasedWord
from .errors import BeeIDError, MalformedInput, ParamRange
from .presets import PRESETS

log = logging.getLogger("beeid")

MANIFEST_SUFFIX = ".manifest.json"


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_manifest(args, argv, inputs, outputs) -> None:
    if not args.out:
        return
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "parser")}
    manifest = {
        "subcommand": args.command,
        "argv": list(argv),
        "params": params,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": list(outputs),
    }
    Path(args.out + MANIFEST_SUFFIX).write_text(_dump(manifest))


def _load_codebook(args) -> tuple[Codebook, list]:
    if args.preset:
        return PRESETS[args.preset](), []
    if not args.codebook:
        raise ParamRange("give --codebook FILE or --preset NAME")
    try:
        return Codebook.load(args.codebook), [args.codebook]
    except OSError as exc:
        raise MalformedInput(f"cannot read codebook: {exc}") from exc


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args, argv) -> int:
    groups = [args.generator is not None, args.r is not None or args.m is not None, args.preset is not None]
    if sum(groups) != 1:
        args.parser.error("give exactly one of --generator, --r/--m, --preset")
    code = args.code or ("linear" if groups[0] else "rm" if groups[1] else "preset")
    if (code, groups.index(True)) not in (("linear", 0), ("rm", 1), ("preset", 2)):
        args.parser.error(f"--code {code} conflicts with the source flags given")
    inputs = []
    if code == "linear":
        gen = _read_json(args.generator)
        if isinstance(gen, dict):
            gen = gen.get("generator")
        cb = build_linear_code(gen, name=args.name or Path(args.generator).stem)
        inputs.append(args.generator)
    elif code == "rm":
        if args.r is None or args.m is None:
            args.parser.error("--code rm needs both --r and --m")
        cb = build_reed_muller(args.r, args.m)
    else:
        cb = PRESETS[args.preset]()
    text = cb.dumps() + "\n"
    if args.out:
        Path(args.out).write_text(text)
        _write_manifest(args, argv, inputs, [args.out])
    summary = {"name": cb.name, "n": cb.n, "M": cb.M, "d": cb.min_distance}
    print(json.dumps(summary), file=sys.stderr if not args.out else sys.stdout)
    if not args.out:
        sys.stdout.write(text)
    return 0


def _load_outputs(path, n):
    doc = _read_json(path)
    raw = doc.get("outputs") if isinstance(doc, dict) else doc
    channel = doc.get("channel") if isinstance(doc, dict) else None
    return parse_outputs(raw, n), channel


def cmd_decode(args, argv) -> int:
    cb, inputs = _load_codebook(args)
    outputs, channel = _load_outputs(args.outputs, cb.n)
    inputs.append(args.outputs)
    erased = bool(outputs) and isinstance(outputs[0], ErasedWord)
    absent = args.absent if args.absent is not None else cb.M - len(outputs)
    if absent < 0:
        raise MalformedInput(f"{len(outputs)} outputs for {cb.M} codewords")
    decoder = args.decoder or ("jedi" if erased or channel == "bec" else "jmdi")
    if decoder == "jedi" and not erased:
        outputs = [ErasedWord(cb.n, y, 0) for y in outputs]
    if decoder != "jedi" and erased:
        raise ParamRange(f"decoder {decoder} needs outputs without erasures")
    if absent:
        res = identifiers.identify_with_absentees(cb, outputs, "bec" if decoder == "jedi" else "bsc", absent)
    elif decoder == "jedi":
        res = identifiers.jedi(cb, outputs)
    elif decoder == "jmdi":
        res = identifiers.jmdi(cb, outputs)
    else:
        if args.radius is None:
            args.parser.error("jldi needs --radius")
        res = identifiers.jldi(cb, outputs, args.radius, fallback=args.fallback)
    doc = res.to_json()
    doc.pop("strategy", None)
    _emit(_dump(doc), args.out)
    _write_manifest(args, argv, inputs, [args.out] if args.out else [])
    return 0


def cmd_estimate(args, argv) -> int:
    cb, inputs = _load_codebook(args)
    channel = args.channel
    U = estimation.estimate_U(cb, args.p, channel)
    doc: dict = {"code": cb.name, "channel": channel, "p": args.p, "M": cb.M}
    if isinstance(U, tuple):
        doc["U"] = {"lower": U[0].to_json(), "upper": U[1].to_json()}
    else:
        doc["U"] = U.to_json()
    V = None
    if args.with_v:
        V = estimation.estimate_V(cb, args.p, channel)
        if isinstance(V, tuple):
            doc["V"] = {"lower": V[0].to_json(), "upper": V[1].to_json()}
        else:
            doc["V"] = V.to_json()
        doc["per2_stats"] = estimation.trellis_stats(cb.M).to_json()
    b = estimation.error_bounds(U, V)
    doc["upper"] = b.upper
    doc["lower"] = b.lower
    doc["vacuous"] = b.vacuous
    if args.closed_form:
        d = cb.min_distance
        th = estimation.theta(channel, args.p, d)
        cf = estimation.closed_form_upper_bound(cb.M, th)
        doc["closed_form"] = {"theta": th, "d": d, **cf.to_json(), "upper": min(max(float(cf - 1), 0.0), 1.0)}
    _emit(_dump(doc), args.out)
    _write_manifest(args, argv, inputs, [args.out] if args.out else [])
    return 0


def cmd_simulate(args, argv) -> int:
    cb, inputs = _load_codebook(args)
    grid = simulate.parse_grid(args.p_grid)
    decoder = args.decoder or ("jedi" if args.channel == "bec" else "jmdi")
    results = simulate.sweep(
        cb, args.channel, grid, trials=args.trials, seed=args.seed, decoder=decoder,
        with_bounds=args.with_bounds, radius=args.radius, workers=args.workers,
    )
    text = simulate.write_csv(results)
    if not args.out:
        sys.stdout.write(text)
        return 0
    Path(args.out).write_text(text)
    plot_path = str(Path(args.out).with_suffix(".plot.json"))
    Path(plot_path).write_text(_dump(simulate.plot_spec(results, Path(args.out).name)))
    _write_manifest(args, argv, inputs, [args.out, plot_path])
    return 0


def cmd_trellis_stats(args, argv) -> int:
    stats = estimation.trellis_stats(args.m)
    doc = {"M": args.m, **stats.to_json()}
    _emit(_dump(doc), args.out)
    _write_manifest(args, argv, [], [args.out] if args.out else [])
    return 0


def cmd_replay(args, argv) -> int:
    manifest = _read_json(args.manifest)
    try:
        old_argv = manifest["argv"]
        digests = manifest["inputs"]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad manifest: {exc}") from exc
    for path, digest in digests.items():
        if _sha256(path) != digest:
            raise MalformedInput(f"input {path} changed since the manifest was written")
    return main(old_argv)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _codebook_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--codebook", metavar="FILE", help="codebook JSON")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in example code")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beeid", description="Joint decoding for the bee-identification problem.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="build a codebook")
    p.add_argument("--code", choices=["linear", "rm", "preset"])
    p.add_argument("--generator", metavar="FILE", help="JSON list of generator rows")
    p.add_argument("--r", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--name")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("decode", help="identify a set of channel outputs")
    _codebook_flags(p)
    p.add_argument("--outputs", metavar="FILE", required=True)
    p.add_argument("--decoder", choices=["jedi", "jmdi", "jldi"])
    p.add_argument("--radius", type=int)
    p.add_argument("--absent", type=int)
    p.add_argument("--fallback", action="store_true", help="rerun JLDI as JMDI when pruning disconnects")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("estimate", help="U, V and error bounds")
    _codebook_flags(p)
    p.add_argument("--channel", choices=["bec", "bsc"], required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--with-v", action="store_true")
    p.add_argument("--closed-form", action="store_true")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="Monte Carlo failure rates over a p grid")
    _codebook_flags(p)
    p.add_argument("--channel", choices=["bec", "bsc"], required=True)
    p.add_argument("--p-grid", required=True, metavar="LO:HI:STEP")
    p.add_argument("--trials", type=int, default=simulate.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decoder", choices=["jedi", "jmdi", "jldi"])
    p.add_argument("--radius", type=int)
    p.add_argument("--with-bounds", action="store_true")
    p.add_argument("--workers", type=int, help="worker processes (default: BEEID_THREADS or CPU count)")
    p.add_argument("--out", metavar="CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("trellis-stats", help="size of the second-order-permanent trellis")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_trellis_stats)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay, out=None)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args.parser = parser
    try:
        code = args.func(args, argv)
    except BeeIDError as exc:
        print(f"beeid: error: {exc}", file=sys.stderr)
        return exc.exit_code
    finally:
        del args.parser
    return code


if __name__ == "__main__":
    sys.exit(main())
