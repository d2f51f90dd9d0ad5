"""Command-line front end.

Exit codes: 0 success, 1 protocol refusal or detection, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import secrets
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import adversary, partition, piggy, qutrit
from .dual_ttp import run_distribution
from .errors import ConfigError, ModulusTooSmall, NotPrime, ShareFormatError, TTPShareError, ZeroSecret
from .field import PrimeContext
from .rng import ScriptedSource, SplitMix64

EXIT_OK, EXIT_REFUSED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _context(p: int) -> PrimeContext:
    try:
        return PrimeContext(p)
    except NotPrime as exc:
        raise UsageError(str(exc)) from None


def _seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(64)


def _secret_blocks(text: str, ctx: PrimeContext) -> list[int]:
    if text.startswith("@"):
        try:
            data = Path(text[1:]).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {text[1:]}: {exc.strerror}") from None
        blocks = partition.encode_blocks(data, ctx)
        if not blocks:
            raise UsageError("secret file is empty")
        return blocks
    try:
        d = int(text)
    except ValueError:
        raise UsageError(f"secret must be a decimal integer or @file, got {text!r}") from None
    if not 0 <= d < ctx.p:
        raise UsageError(f"secret must lie in [1, {ctx.p - 1}]")
    if d == 0:
        raise ZeroSecret("secret must be nonzero mod p")
    return [d]


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _check_kn(k: int, n: int, ctx: PrimeContext) -> None:
    if not 2 <= k <= n <= ctx.p - 1:
        raise UsageError(f"need 2 <= k <= n <= p - 1, got k={k}, n={n}")


def cmd_split(args) -> int:
    ctx = _context(args.p)
    _check_kn(args.k, args.n, ctx)
    blocks = _secret_blocks(args.secret, ctx)
    shares = partition.split_blocks(blocks, args.k, args.n, ctx, SplitMix64(_seed(args)))
    out = Path(args.out_dir)
    for name, text in partition.share_files(shares):
        _write(out / name, text)
        print(out / name)
    return EXIT_OK


def _load_shares(paths: Sequence[str]) -> list[partition.ShareFile]:
    loaded = []
    for path in paths:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        try:
            loaded.append(partition.parse_share(text))
        except ShareFormatError as exc:
            raise UsageError(f"{path}: {exc}") from None
    headers = {(s.p, s.k, s.n) for s in loaded}
    if len(headers) > 1:
        raise UsageError("shares disagree on p/k/n")
    return loaded


def cmd_reconstruct(args) -> int:
    loaded = _load_shares([s for s in args.shares.split(",") if s])
    if not loaded:
        raise UsageError("no shares given")
    head = loaded[0]
    ctx = _context(head.p)
    parts = list({s.partition.x: s.partition for s in loaded}.values())
    if len(parts) < head.k:
        print(f"quorum not met: need {head.k} of {head.n} shares, got {len(parts)}", file=sys.stderr)
        return EXIT_REFUSED
    blocks = partition.reconstruct_blocks(parts[:head.k], head.k, ctx)
    if args.raw:
        sys.stdout.buffer.write(partition.decode_blocks(blocks, ctx))
        sys.stdout.flush()
    else:
        print(",".join(map(str, blocks)))
    return EXIT_OK


def cmd_distribute(args) -> int:
    ctx = _context(args.p)
    _check_kn(args.k, args.n, ctx)
    blocks = _secret_blocks(args.secret, ctx)
    key = None
    if args.transport == "piggy":
        cfg = adversary.ScenarioConfig(p=args.p, pb_n=args.pb_n, pb_e=args.pb_e)
        key = cfg.keypair()
        if key.n <= ctx.p:
            raise UsageError("--pb-n must exceed p")
    received, log = run_distribution(blocks, args.k, args.n, ctx, SplitMix64(_seed(args)),
                                     args.transport, ttp1_key=key)
    out = Path(args.out_dir)
    _write(out / "transcript.log", log.render())
    print(out / "transcript.log")
    for i, part in sorted(received.items()):
        _write(out / f"recipient_{i}.txt", partition.format_share(part, ctx, args.k, args.n))
        print(out / f"recipient_{i}.txt")
    return EXIT_OK


def _parse_sweep(text: str) -> range:
    lo, sep, hi = text.partition("..")
    if not sep or not lo.isdigit() or not hi.isdigit() or int(hi) < int(lo):
        raise UsageError(f"--sweep-seeds expects a..b, got {text!r}")
    return range(int(lo), int(hi) + 1)


def _device_access(args, seed: int) -> int:
    ctx = PrimeContext(19)
    roles, log = adversary.setup_custody((12,), ctx, seed)
    try:
        wanted = {adversary.Role(r.strip()) for r in args.roles.split(",") if r.strip()}
    except ValueError:
        raise UsageError(f"--roles takes names from {[r.value for r in adversary.Role]}") from None
    holders = [r for r in roles if r.name in wanted]
    result = adversary.device_access(holders, ctx)
    if args.out:
        _write(Path(args.out), log.render())
    print("roles=" + ",".join(r.name.value for r in holders))
    if isinstance(result, adversary.Refusal):
        print(result)
        return EXIT_REFUSED
    print("secret=" + ",".join(map(str, result)))
    return EXIT_OK


def cmd_scenario(args) -> int:
    if (args.config is None) == (args.name is None):
        raise UsageError("give exactly one of --config or --name")
    seed = args.seed if args.seed is not None else 42
    if args.name == "device_access":
        return _device_access(args, seed)
    if args.config is not None:
        try:
            config = adversary.parse_config(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    else:
        config = adversary.builtin_config(args.name, seed)

    if args.sweep_seeds:
        worst = EXIT_OK
        for s in _parse_sweep(args.sweep_seeds):
            rep = adversary.run_scenario(replace(config, seed=s))
            print(f"seed={s} candidates={rep.candidate_count} contains_true={int(rep.contains_true)} "
                  f"tamper={int(rep.tamper_detected)}")
            if rep.tamper_detected or rep.error:
                worst = EXIT_REFUSED
        return worst

    report = adversary.run_scenario(config)
    text = report.render()
    if args.out:
        _write(Path(args.out), text)
    sys.stdout.write(text[text.index("REPORT\n"):])
    return EXIT_REFUSED if report.tamper_detected or report.error else EXIT_OK


def cmd_demo(args) -> int:
    if not args.paper_examples:
        raise UsageError("demo needs --paper-examples")
    results = []

    def check(label: str, got, want) -> None:
        ok = got == want
        results.append(ok)
        print(f"{'PASS' if ok else 'FAIL'} {label}={got}" + ("" if ok else f" (expected {want})"))

    print("# partition example: d=12, p=19, k=2, r1=13")
    ctx = PrimeContext(19)
    roots = partition.generate_roots(12, 2, ctx, ScriptedSource([13]))
    check("r1", roots.roots[0], 13)
    check("r2", roots.roots[1], 17)
    poly = partition.poly_from_roots(roots)
    check("a1", poly.coefficients[0], 8)
    check("a0", poly.constant, 12)
    shares = partition.expand_shares(roots, n=3)
    check("shares", [(s.x, s.c[0]) for s in shares.partitions], [(1, 11), (2, 9), (3, 7)])
    for a, b in ((1, 2), (1, 3), (2, 3)):
        rt = partition.reconstruct_roots([shares[a], shares[b]], 2, ctx)
        check(f"d[{a},{b}]", partition.recover_secret(rt), 12)

    print("# piggy bank example: n=85, e=5, R=19, S=6, K=11")
    key = piggy.keygen(5, 17, 5)
    check("n", key.n, 85)
    check("d", key.d_secret, 13)
    chal = piggy.ttp_challenge(key, ScriptedSource([19]))
    check("f_r", chal.f_r, 49)
    resp = piggy.user_respond(chal.f_r, 6, 11, key.public)
    check("m1", resp.m1, 50)
    check("m2", resp.m2, 41)
    s, k = piggy.ttp_recover(resp, chal, key)
    check("S", s, 6)
    check("K", k, 11)

    ok = all(results)
    print(f"{sum(results)}/{len(results)} passed")
    return EXIT_OK if ok else EXIT_REFUSED


def _fmt_complex(z: complex) -> str:
    re, im = round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0
    return f"{re:.12f}{im:+.12f}j"


def cmd_qutrit(args) -> int:
    try:
        amps = [complex(a.strip().replace(" ", "")) for a in args.secret.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse amplitudes {args.secret!r}") from None
    if len(amps) != 3:
        raise UsageError("need exactly 3 amplitudes")
    try:
        secret = qutrit.normalize(amps)
    except TTPShareError:
        raise UsageError("secret amplitudes are all zero") from None
    try:
        pair = tuple(int(v) for v in args.pair.split(","))
    except ValueError:
        raise UsageError(f"bad --pair {args.pair!r}") from None
    if pair not in qutrit.PAIRS:
        raise UsageError("--pair must be one of 1,2 2,3 3,1")
    recovered, _ = qutrit.reconstruct(qutrit.encode(secret), pair)
    print("secret=" + ",".join(_fmt_complex(z) for z in secret))
    print("recovered=" + ",".join(_fmt_complex(z) for z in recovered))
    print(f"fidelity={qutrit.fidelity(secret, recovered):.12f}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ttpshare", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="show warnings")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("split", help="split a secret into share files")
    sp.add_argument("--secret", required=True, help="decimal value, or @path for a file")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out-dir", default=".")
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("reconstruct", help="rebuild a secret from share files")
    sp.add_argument("--shares", required=True, help="comma-separated share files")
    sp.add_argument("--raw", action="store_true", help="write decoded bytes")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("distribute", help="run the two-TTP distribution protocol")
    sp.add_argument("--secret", required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--transport", choices=("direct", "piggy"), default="direct")
    sp.add_argument("--pb-n", type=int, default=85)
    sp.add_argument("--pb-e", type=int, default=5)
    sp.add_argument("--out-dir", default=".")
    sp.set_defaults(func=cmd_distribute)

    sp = sub.add_parser("scenario", help="run an adversary scenario")
    sp.add_argument("--config")
    sp.add_argument("--name", choices=adversary.BUILTIN_SCENARIOS)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="write transcript and report here")
    sp.add_argument("--roles", default="law_enforcement,judiciary",
                    help="device_access only: authorities pooling shares")
    sp.add_argument("--sweep-seeds", help="run seeds a..b and print one line each")
    sp.set_defaults(func=cmd_scenario)

    sp = sub.add_parser("demo", help="replay the worked examples")
    sp.add_argument("--paper-examples", action="store_true")
    sp.set_defaults(func=cmd_demo)

    sp = sub.add_parser("qutrit", help="simulate the ((2,3)) qutrit scheme")
    sp.add_argument("--secret", required=True, help="three amplitudes, e.g. 1,0,0 or 0.5+0.5j,0,0.7")
    sp.add_argument("--pair", default="1,2")
    sp.set_defaults(func=cmd_qutrit)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ZeroSecret, ModulusTooSmall) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except TTPShareError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())
