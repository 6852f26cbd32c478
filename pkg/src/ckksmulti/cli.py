"""``ckksmulti`` command-line front end.

Exit codes: 0 ok, 2 bad parameters or files, 3 plan or depth problems,
4 missing keys, 5 verification mismatch.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import acceptance, fileio
from .context import Context, build_context, load_context, save_context
from .cost import mult3_cost, plan_cost_report
from .counters import OpCounters
from .errors import (
    DepthBudgetExceeded,
    FormatError,
    LevelMismatch,
    LevelTooLow,
    MessageTooLarge,
    MissingEvalKey,
    NoPrimeFound,
    ParameterError,
    ParseError,
    PlanArityMismatch,
    SearchSpaceExhausted,
)
from .keys import decrypt_tuple, encrypt, keygen, keygen_eval
from .multiply import RelinMode, mult_n
from .oracle import exact_ring_product, noise_measure, rounded_division
from .planner import (
    baseline_binary_plan,
    cost_of,
    optimize_partition,
    plan_from_string,
    to_string,
    validate,
)

EXIT_OK, EXIT_PARAM, EXIT_PLAN, EXIT_KEYS, EXIT_MISMATCH = 0, 2, 3, 4, 5

SECRET_FILE, PUBLIC_FILE, EVAL_FILE = "secret.key", "public.key", "eval.key"

_EXIT_FOR = [
    (MissingEvalKey, EXIT_KEYS),
    ((ParseError, PlanArityMismatch, DepthBudgetExceeded, SearchSpaceExhausted, LevelTooLow), EXIT_PLAN),
    ((ParameterError, NoPrimeFound, FormatError, MessageTooLarge, LevelMismatch, OSError, ValueError), EXIT_PARAM),
]


def _ctx(args) -> Context:
    return load_context(args.ctx)


def _emit(payload, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2))
    else:
        for k, v in payload.items():
            print(f"{k:<14} {v}")


# -- commands ---------------------------------------------------------------


def cmd_params(args) -> int:
    ctx = build_context(args.N, args.L, args.K, args.wq, args.wp, args.delta, args.sigma, args.h, args.seed)
    if args.out:
        save_context(ctx, args.out)
    print(f"N={ctx.N} L={ctx.L} K={ctx.K} delta=2^{ctx.delta_log2} sigma={ctx.sigma} h={ctx.hamming_weight}")
    for name, mods in (("q", ctx.q_moduli), ("p", ctx.p_moduli)):
        for i, m in enumerate(mods):
            print(f"  {name}_{i} = {m.value} ({m.value.bit_length()} bits)")
    return EXIT_OK


def cmd_keygen(args) -> int:
    ctx = _ctx(args)
    out = Path(args.keys)
    out.mkdir(parents=True, exist_ok=True)
    sk, pk = keygen(ctx, args.seed)
    eks = keygen_eval(ctx, sk, args.max_t, args.seed + 1)
    fileio.write(out / SECRET_FILE, fileio.dump_secret_key(ctx, sk))
    fileio.write(out / PUBLIC_FILE, fileio.dump_public_key(pk))
    fileio.write(out / EVAL_FILE, fileio.dump_eval_keys(eks))
    print(f"wrote keys to {out} (evaluation keys for s^2..s^{args.max_t})")
    return EXIT_OK


def _read_message(args, N: int) -> list[int]:
    text = Path(args.message_file).read_text() if args.message_file else args.message
    text = text.strip()
    vals = json.loads(text) if text.startswith("[") else [int(x) for x in text.replace(",", " ").split()]
    if len(vals) > N:
        raise ParameterError(f"message has {len(vals)} coefficients, ring degree is {N}")
    return [int(v) for v in vals] + [0] * (N - len(vals))


def cmd_encrypt(args) -> int:
    ctx = _ctx(args)
    pk = fileio.load_public_key(ctx, fileio.read(Path(args.keys) / PUBLIC_FILE))
    ct = encrypt(ctx, pk, _read_message(args, ctx.N), args.seed)
    fileio.write(args.out, fileio.dump_ciphertext(ct))
    print(f"ciphertext at level {ct.level} written to {args.out}")
    return EXIT_OK


def cmd_decrypt(args) -> int:
    ctx = _ctx(args)
    sk = fileio.load_secret_key(ctx, fileio.read(Path(args.keys) / SECRET_FILE))
    ct = fileio.load_ciphertext(ctx, fileio.read(args.input))
    vals = decrypt_tuple(ctx, sk, ct)
    if not args.raw:
        vals = rounded_division(vals, ctx.delta ** ct.scale_exp)
    if args.trim:
        while len(vals) > 1 and vals[-1] == 0:
            vals.pop()
    print(json.dumps(vals))
    return EXIT_OK


def _plan_for(args, n: int):
    if args.plan:
        plan = plan_from_string(args.plan)
    else:
        plan, _ = optimize_partition(n)
    validate(plan, n, getattr(args, "depth", None))
    return plan


def cmd_multiply(args) -> int:
    ctx = _ctx(args)
    keydir = Path(args.keys)
    eval_path = keydir / EVAL_FILE
    if not eval_path.exists():
        raise MissingEvalKey(2)
    eks = fileio.load_eval_keys(ctx, fileio.read(eval_path))
    cts = [fileio.load_ciphertext(ctx, fileio.read(p)) for p in args.inputs]
    plan = _plan_for(args, len(cts))
    counters = OpCounters()
    out = mult_n(ctx, plan, cts, eks, counters, relin_mode=args.relin)
    fileio.write(args.out, fileio.dump_ciphertext(out))
    if args.counters:
        Path(args.counters).write_text(json.dumps(counters.as_dict(), indent=2))
    print(f"plan {to_string(plan)}: result at level {out.level} written to {args.out}")
    return EXIT_OK


def cmd_plan(args) -> int:
    if args.baseline:
        plan = baseline_binary_plan(args.n)
        cost = cost_of(plan)
    else:
        plan, cost = optimize_partition(args.n, args.depth)
    payload = {
        "n": args.n,
        "plan": to_string(plan),
        "depth": plan.depth,
        "units": cost.units_str,
        "intt_ntt": cost.expr_str,
    }
    _emit(payload, args.format)
    return EXIT_OK


def cmd_cost(args) -> int:
    if args.variant:
        if args.n != 3:
            raise ParameterError("--variant applies to the three-input multiplier only")
        report = mult3_cost(args.L, args.K, args.N, args.variant, args.w)
    elif args.baseline:
        report = plan_cost_report(args.n, None, args.L, args.K, args.N, args.w)
    else:
        plan = plan_from_string(args.plan) if args.plan else optimize_partition(args.n)[0]
        report = plan_cost_report(args.n, plan, args.L, args.K, args.N, args.w)
    print(report.render(args.format))
    return EXIT_OK


def cmd_verify(args) -> int:
    ctx = _ctx(args)
    keydir = Path(args.keys)
    sk = fileio.load_secret_key(ctx, fileio.read(keydir / SECRET_FILE))
    pk = fileio.load_public_key(ctx, fileio.read(keydir / PUBLIC_FILE))
    eks = fileio.load_eval_keys(ctx, fileio.read(keydir / EVAL_FILE))
    plan = _plan_for(args, args.n)
    rng = np.random.default_rng(args.seed)
    worst, failures = 0, 0
    threshold = None
    for trial in range(args.trials):
        msgs, cts = acceptance.fresh_ciphertexts(ctx, pk, args.n, rng, seed0=args.seed * 1000 + 50 * trial)
        out = mult_n(ctx, plan, cts, eks)
        expected = [ctx.delta * v for v in exact_ring_product([list(map(int, m)) for m in msgs])]
        err = noise_measure(ctx, sk, out, expected)
        threshold = out.moduli[-1].value // 4
        worst = max(worst, err)
        failures += err >= threshold
    print(
        f"plan {to_string(plan)}: {args.trials} trials, max noise 2^{math.log2(max(worst, 1)):.1f}, "
        f"threshold 2^{math.log2(threshold):.1f}, {failures} failures"
    )
    return EXIT_MISMATCH if failures else EXIT_OK


def _partition_suite() -> bool:
    res = acceptance.check_partition_table()
    print(f"{'n':>2}  {'binary plan':<30} {'units':>5}  {'(I)NTTs':<16} {'optimized plan':<22} {'units':>5}  (I)NTTs")
    for n in range(3, 13):
        b = baseline_binary_plan(n)
        p, c = optimize_partition(n)
        bc = cost_of(b)
        print(f"{n:>2}  {to_string(b):<30} {bc.units_str:>5}  {bc.expr_str:<16} {to_string(p):<22} {c.units_str:>5}  {c.expr_str}")
    print(res.line())
    return res.passed


def _mult3_suite() -> bool:
    for variant in ("prior", "improved"):
        print(f"[{variant}] L=K=24, N=2^16")
        print(mult3_cost(24, 24, 1 << 16, variant).to_table())
        print()
    res = acceptance.check_three_input_costs()
    print(res.line())
    return res.passed


def cmd_bench(args) -> int:
    if args.suite == "tableII":
        ok = _partition_suite()
    elif args.suite == "tableV":
        ok = _mult3_suite()
    else:
        ok = all(r.passed for r in acceptance.run_all(echo=lambda s: print(s, flush=True)))
    return EXIT_MISMATCH if args.check and not ok else EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ckksmulti", description="Multi-input RNS-CKKS ciphertext multiplication")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="generate a context file")
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--L", type=int, default=8)
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--wq", type=int, default=50)
    p.add_argument("--wp", type=int, default=None)
    p.add_argument("--delta", type=int, default=50, help="log2 of the scale")
    p.add_argument("--sigma", type=float, default=3.2)
    p.add_argument("--h", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("keygen", help="generate secret, public and evaluation keys")
    p.add_argument("--ctx", required=True)
    p.add_argument("--keys", required=True, help="output directory")
    p.add_argument("--max-t", type=int, default=12, dest="max_t")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt an integer polynomial")
    p.add_argument("--ctx", required=True)
    p.add_argument("--keys", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--message", help="coefficients, comma or space separated, or a JSON list")
    g.add_argument("--message-file", dest="message_file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a ciphertext and print its coefficients")
    p.add_argument("--ctx", required=True)
    p.add_argument("--keys", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--raw", action="store_true", help="print the scaled value without dividing by the scale")
    p.add_argument("--trim", action="store_true", help="drop trailing zero coefficients")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("multiply", help="multiply ciphertexts along a partition plan")
    p.add_argument("--ctx", required=True)
    p.add_argument("--keys", required=True)
    p.add_argument("--plan", help='partition, e.g. "(3,3)"; optimized when omitted')
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--counters")
    p.add_argument("--relin", choices=[m.value for m in RelinMode], default=RelinMode.IMPROVED.value)
    p.set_defaults(func=cmd_multiply)

    p = sub.add_parser("plan", help="cheapest partition for n inputs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--baseline", action="store_true")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("cost", help="architectural cost report")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--plan")
    p.add_argument("--baseline", action="store_true")
    p.add_argument("--variant", choices=["prior", "improved"])
    p.add_argument("--N", type=int, default=1 << 16)
    p.add_argument("--L", type=int, default=24)
    p.add_argument("--K", type=int, default=24)
    p.add_argument("--w", type=int, default=64)
    p.add_argument("--format", choices=["table", "json", "csv"], default="table")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("verify", help="end-to-end homomorphism trials")
    p.add_argument("--ctx", required=True)
    p.add_argument("--keys", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--plan")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="reproduce the reference tables and acceptance checks")
    p.add_argument("--suite", choices=["tableII", "tableV", "all"], default="all")
    p.add_argument("--check", action="store_true", help="exit 5 when any check fails")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        for kinds, code in _EXIT_FOR:
            if isinstance(exc, kinds):
                print(f"error: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
