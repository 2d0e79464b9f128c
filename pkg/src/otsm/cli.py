"""Command-line entry point: ``otsm run | compare | selftest``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .harness import ConfigError, SimConfig, compare, compare_csv, load_config, run, to_csv

EXIT_INVALID = 2


def _add_scheme_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--snr", help="comma-separated SNR list in dB")
    p.add_argument("--frames", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.add_argument("--modem")
    p.add_argument("--detector")
    p.add_argument("--csi")
    p.add_argument("--speed-kmh", type=float)
    p.add_argument("--beta-db", type=float)
    p.add_argument("--interp", choices=("linear", "spline"))
    p.add_argument("--workers", type=int)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otsm", description="OTSM/OTFS/OFDM link-level Monte-Carlo simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_scheme_flags(sub.add_parser("run", help="simulate one scheme over an SNR sweep"))
    cmp = sub.add_parser("compare", help="simulate several schemes on paired channel draws")
    _add_scheme_flags(cmp)
    cmp.add_argument(
        "--scheme",
        action="append",
        default=[],
        metavar="LABEL:KEY=VAL[,KEY=VAL]",
        help="one scheme, e.g. ofdm:modem=ofdm,detector=single_tap",
    )
    cmp.add_argument("--modems", help="shorthand: comma-separated modems, each labelled by name")
    sub.add_parser("selftest", help="fast algebraic checks of the transform, channel and coding layers")
    return parser


def _overrides(args) -> dict:
    values = {
        "snr_db": args.snr,
        "frames": args.frames,
        "seed": args.seed,
        "modem": args.modem,
        "detector": args.detector,
        "csi": args.csi,
        "speed_kmh": args.speed_kmh,
        "beta_db": args.beta_db,
        "interp": args.interp,
        "workers": args.workers,
    }
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError([f"--set expects KEY=VALUE, got {item!r}"])
        values[key.strip()] = value.strip()
    return values


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_scheme(text: str) -> tuple[str, dict]:
    label, sep, rest = text.partition(":")
    if not sep or not label:
        raise ConfigError([f"scheme {text!r} must look like LABEL:KEY=VAL,..."])
    values = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError([f"scheme {label}: {item!r} is not KEY=VAL"])
        values[key.strip()] = value.strip()
    return label, values


def cmd_run(args) -> int:
    cfg = load_config(args.config, **_overrides(args))
    results = run(cfg)
    _emit(to_csv(cfg, results), args.out)
    return 0


def cmd_compare(args) -> int:
    base = _overrides(args)
    base.pop("modem", None)
    schemes = [_parse_scheme(s) for s in args.scheme]
    if args.modems:
        for m in args.modems.split(","):
            m = m.strip()
            schemes.append((m, {"modem": m, "detector": "single_tap" if m == "ofdm" else None}))
    if not schemes:
        raise ConfigError(["compare needs at least one --scheme or --modems"])
    configs = {}
    for label, values in schemes:
        merged = {**base, **{k: v for k, v in values.items() if v is not None}}
        configs[label] = load_config(args.config, **merged)
    results = compare(configs)
    _emit(compare_csv(configs, results), args.out)
    return 0


def selftest() -> list[tuple[str, bool]]:
    """Quick oracles; each entry is ``(name, passed)``."""
    from . import channel as ch
    from .coding import ldpc_decode, ldpc_encode, shipped_code
    from .frame import FrameParams, QamConstellation
    from .modem import modulate
    from .transforms import dyadic_convolution, perfect_shuffle, walsh_matrix, wht

    rng = np.random.default_rng(1)
    checks = []
    W = walsh_matrix(64)
    checks.append(("walsh involution", np.allclose(W @ W, np.eye(64), atol=1e-12)))
    a, b = rng.standard_normal(16), rng.standard_normal(16)
    checks.append(("dyadic convolution theorem", np.allclose(wht(dyadic_convolution(a, b)), 4 * wht(a) * wht(b))))
    A, B = rng.standard_normal((4, 4)), rng.standard_normal((8, 8))
    P = perfect_shuffle(8, 4).matrix()
    checks.append(("perfect shuffle", np.allclose(np.kron(A, B), P @ np.kron(B, A) @ P.T)))

    p = FrameParams(N=8, M=16, l_max=2)
    paths = ch.PathSet(rng.standard_normal(3) + 1j * rng.standard_normal(3), np.array([0.0, 1.0, 2.0]), rng.uniform(0, 1, 3))
    taps = ch.discretize(paths, p)
    X = np.zeros((p.M, p.N), dtype=complex)
    X[p.data_mask] = QamConstellation(4).map(rng.integers(0, 2, 2 * p.n_data))
    rx = ch.apply(taps, modulate(X, "otsm", p.cp_len))
    H = ch.build_delay_sequency_matrix(taps, p, "otsm")
    from .modem import otsm_demodulate

    Y = otsm_demodulate(rx, p.M, p.N)
    checks.append(("channel matrix equals time-domain simulation", np.allclose(H @ X.reshape(-1), Y.reshape(-1), atol=1e-10)))
    E1, E2 = ch.received_energy(taps, p, "otsm"), ch.received_energy(taps, p, "otfs")
    checks.append(("otsm/otfs received energy", np.allclose(E1, E2, atol=1e-9)))

    code = shipped_code()
    info = rng.integers(0, 2, (4, code.k))
    cw = ldpc_encode(code, info)
    dec = ldpc_decode(8.0 * (1 - 2.0 * cw), code)
    checks.append(("ldpc encode/decode", bool(dec.parity_ok.all() and np.array_equal(dec.bits, cw))))
    return checks


def cmd_selftest(args) -> int:
    results = selftest()
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if all(ok for _, ok in results) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": cmd_run, "compare": cmd_compare, "selftest": cmd_selftest}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
