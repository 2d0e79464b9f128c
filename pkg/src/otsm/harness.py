"""Monte-Carlo BER/FER engine: configuration, per-frame simulation, CSV output.

Every frame draws its channel, payload and noise from seeds derived from
``(seed, trial)`` only. Two schemes run with the same seed therefore see the
same channel realizations and the same unit-variance noise, and results do
not depend on how trials are spread over workers.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import channel as ch
from .chanest import db_to_linear, estimate_taps, interpolate, pilot_power, pilot_time_row
from .coding.demap import soft_demap
from .coding.ldpc import ParityCheckMatrix, extract_info, ldpc_decode, load_parity_matrix, shipped_code
from .coding.turbo import CodedLayout, TurboConfig, turbo_decode
from .detector import (
    DetectorConfig,
    blocks_to_grid,
    decide,
    gs_detect,
    matched_filter,
    ofdm_channel_gains,
    single_tap_blocks,
    single_tap_mmse,
)
from .frame import FrameParams, QamConstellation, build_grid, pilot_grid
from .modem import MODEMS, demodulate, modulate

DETECTORS = ("gs_iterative", "single_tap")
CSV_COLUMNS = (
    "snr_db",
    "ber",
    "fer",
    "bit_errors",
    "bits",
    "frame_errors",
    "frames",
    "mean_det_iters",
    "mean_turbo_iters",
    "seconds",
    "channel_hash",
)


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def parse_profile(text: str) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """``"EVA"`` or comma-separated ``delay_ns:power_db`` pairs."""
    if text.strip().upper() == "EVA":
        return tuple(map(float, ch.EVA_DELAYS_NS)), ch.EVA_POWERS_DB
    delays, powers = [], []
    for item in text.split(","):
        d, sep, p = item.partition(":")
        if not sep:
            raise ValueError(f"profile entry {item!r} is not delay_ns:power_db")
        delays.append(float(d))
        powers.append(float(p))
    if not delays or min(delays) < 0:
        raise ValueError("profile needs non-negative delays")
    return tuple(delays), tuple(powers)


def _snr_list(value) -> tuple[float, ...]:
    if isinstance(value, str):
        return tuple(float(v) for v in value.replace(" ", "").split(",") if v)
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(v) for v in value)


@dataclass(frozen=True)
class SimConfig:
    modem: str = "otsm"
    detector: str = "gs_iterative"
    csi: str = "perfect"
    beta_db: float = 0.0
    interp: str = "linear"
    coding: str = "none"
    code_path: str = ""  # empty selects the bundled rate-1/2 code
    interleaver_seed: int = 0
    turbo_iters: int = 5
    turbo_det_iters: int = 4
    decoder_iters: int = 25
    N: int = 64
    M: int = 64
    delta_f: float = 15e3
    carrier_hz: float = 4e9
    l_max: int = -1  # negative derives it from the profile
    l_zp: int = -1  # negative means 2*l_max + 1
    qam_order: int = 4
    profile: str = "EVA"
    speed_kmh: float = 120.0
    doppler: str = "one_sided"
    discretize: str = "round_delay"
    det_iters: int = 15
    relaxation: float = -1.0  # negative picks the modulation default
    initializer: str = "zero"
    stop_tol: float = 1e-6
    snr_db: tuple[float, ...] = (15.0,)
    frames: int = 10_000
    stop_frame_errors: int = 100  # 0 runs every frame
    seed: int = 0
    workers: int = 1
    chunk: int = 25
    record_timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "snr_db", _snr_list(self.snr_db))

    # -- construction ---------------------------------------------------
    @classmethod
    def from_mapping(cls, values: dict) -> "SimConfig":
        """Build from string or typed values; unknown keys and bad types are all reported."""
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs, errors = {}, []
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in types:
                errors.append(f"unknown key {key!r}")
                continue
            try:
                kwargs[key] = _coerce(types[key], raw)
            except ValueError as exc:
                errors.append(f"{key}: {exc}")
        if errors:
            raise ConfigError(errors)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def with_overrides(self, **changes) -> "SimConfig":
        values = {k: v for k, v in changes.items() if v is not None}
        merged = dataclasses.asdict(self) | values
        return SimConfig.from_mapping(merged)

    # -- derived objects --------------------------------------------------
    def profile_arrays(self):
        return parse_profile(self.profile)

    def frame_params(self) -> FrameParams:
        delays, _ = self.profile_arrays()
        kw = {"carrier_hz": self.carrier_hz, "qam_order": self.qam_order}
        if self.l_zp >= 0:
            kw["l_zp"] = self.l_zp
        if self.l_max >= 0:
            return FrameParams(N=self.N, M=self.M, delta_f=self.delta_f, l_max=self.l_max, **kw)
        return FrameParams.for_delay_spread(self.N, self.M, max(delays) * 1e-9, self.delta_f, **kw)

    def detector_config(self) -> DetectorConfig:
        kw = {"max_iters": self.det_iters, "initializer": self.initializer, "stop_tol": self.stop_tol}
        if self.relaxation > 0:
            kw["relaxation"] = self.relaxation
        return DetectorConfig.for_qam(self.qam_order, **kw)

    def turbo_config(self) -> TurboConfig:
        return TurboConfig(self.turbo_iters, self.turbo_det_iters, self.decoder_iters)

    def load_code(self) -> ParityCheckMatrix:
        return load_parity_matrix(self.code_path) if self.code_path else shipped_code()

    def frame_signature(self) -> tuple:
        p = self.frame_params()
        return (p.N, p.M, p.delta_f, p.carrier_hz, p.l_max, p.l_zp, self.qam_order)

    # -- validation ---------------------------------------------------------
    def validate(self) -> None:
        errors = []

        def check(ok, msg):
            if not ok:
                errors.append(msg)

        check(self.modem in MODEMS, f"modem must be one of {MODEMS}, got {self.modem!r}")
        check(self.detector in DETECTORS, f"detector must be one of {DETECTORS}, got {self.detector!r}")
        check(self.csi in ("perfect", "estimated"), f"csi must be perfect or estimated, got {self.csi!r}")
        check(self.interp in ("linear", "spline"), f"interp must be linear or spline, got {self.interp!r}")
        check(self.coding in ("none", "ldpc"), f"coding must be none or ldpc, got {self.coding!r}")
        check(self.doppler in ("one_sided", "symmetric"), f"unknown doppler model {self.doppler!r}")
        check(self.discretize in ("round_delay", "sinc"), f"unknown discretize mode {self.discretize!r}")
        check(self.initializer in ("zero", "mmse_single_tap"), f"unknown initializer {self.initializer!r}")
        if self.modem == "ofdm":
            check(self.detector == "single_tap", "ofdm supports only the single_tap detector")
        if self.csi == "estimated":
            check(self.modem in ("otsm", "otfs"), "estimated csi needs an otsm or otfs frame")
        check(math.isfinite(self.beta_db), "beta_db must be finite")
        check(self.speed_kmh >= 0, "speed_kmh must be non-negative")
        check(len(self.snr_db) > 0, "snr_db needs at least one value")
        check(not any(math.isnan(s) for s in self.snr_db), "snr_db contains NaN")
        check(self.frames >= 1, "frames must be at least 1")
        check(self.stop_frame_errors >= 0, "stop_frame_errors must be non-negative")
        check(self.workers >= 1, "workers must be at least 1")
        check(self.chunk >= 1, "chunk must be at least 1")
        check(self.det_iters >= 1, "det_iters must be at least 1")
        check(self.relaxation <= 1.0 and self.relaxation != 0, "relaxation must lie in (0, 1]")
        check(self.stop_tol >= 0, "stop_tol must be non-negative")
        check(self.seed >= 0, "seed must be non-negative")
        for name in ("turbo_iters", "turbo_det_iters", "decoder_iters"):
            check(getattr(self, name) >= 1, f"{name} must be at least 1")
        params = None
        try:
            delays, _ = self.profile_arrays()
        except ValueError as exc:
            errors.append(f"profile: {exc}")
        else:
            try:
                params = self.frame_params()
            except ValueError as exc:
                errors.append(f"frame: {exc}")
            else:
                l_need = max(delays) * 1e-9 * self.M * self.delta_f
                check(round(l_need) <= params.l_max, f"l_max={params.l_max} shorter than the profile delay spread")
        if self.coding == "ldpc":
            if self.code_path and not Path(self.code_path).is_file():
                errors.append(f"code file {self.code_path!r} not found")
            elif params is not None:
                try:
                    code = self.load_code()
                    n_bits = _data_positions(self, params) * params.bits_per_symbol
                    check(n_bits >= code.n, f"frame carries {n_bits} bits, fewer than codeword length {code.n}")
                except ValueError as exc:
                    errors.append(f"code: {exc}")
        if errors:
            raise ConfigError(errors)

    def header_lines(self) -> list[str]:
        out = []
        for key, value in dataclasses.asdict(self).items():
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            out.append(f"# {key} = {value}")
        p = self.frame_params()
        out.append(
            f"# derived: l_max = {p.l_max}, l_zp = {p.l_zp}, m_p = {p.m_p}, "
            f"data_rows = {p.data_rows}, cp_len = {p.cp_len}"
        )
        return out


def _coerce(kind, raw):
    kind = kind if isinstance(kind, str) else kind.__name__
    if kind.startswith("tuple"):
        return _snr_list(raw)
    if kind == "bool":
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "int":
        if isinstance(raw, float) and not raw.is_integer():
            raise ValueError(f"not an integer: {raw!r}")
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ValueError(f"not an integer: {raw!r}") from None
    if kind == "float":
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ValueError(f"not a number: {raw!r}") from None
    return str(raw).strip()


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError([f"line {lineno}: expected key = value"])
        values[key.strip()] = value.strip()
    return values


def load_config(path, **overrides) -> SimConfig:
    values = parse_config_text(Path(path).read_text()) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig.from_mapping(values)


# -- per-frame simulation ----------------------------------------------------


@dataclass
class FrameOutcome:
    bit_errors: int
    bits: int
    det_iters: int
    turbo_iters: int
    channel_digest: str
    parity_trace: tuple[int, ...] = ()  # codewords passing parity per turbo iteration

    @property
    def frame_error(self) -> bool:
        return self.bit_errors > 0


@dataclass(frozen=True, eq=False)
class _Context:
    cfg: SimConfig
    params: FrameParams
    constellation: QamConstellation
    det_cfg: DetectorConfig
    layout: CodedLayout | None
    delays: tuple
    powers: tuple
    pilot_amp: float
    pilot_row: np.ndarray | None

    @classmethod
    def build(cls, cfg: SimConfig) -> "_Context":
        params = cfg.frame_params()
        delays, powers = cfg.profile_arrays()
        layout = None
        if cfg.coding == "ldpc":
            n_bits = _data_positions(cfg, params) * params.bits_per_symbol
            layout = CodedLayout(cfg.load_code(), n_bits, cfg.interleaver_seed)
        amp, row = 0.0, None
        if cfg.csi == "estimated":
            amp = pilot_power(params, db_to_linear(cfg.beta_db)).amplitude
            row = pilot_time_row(params, amp, cfg.modem)
        return cls(cfg, params, QamConstellation(params.qam_order), cfg.detector_config(), layout, delays, powers, amp, row)


def _data_positions(cfg: SimConfig, params: FrameParams) -> int:
    return params.M * params.N if cfg.modem == "ofdm" else params.n_data


def trial_streams(seed: int, trial: int) -> tuple[np.random.Generator, ...]:
    """Independent channel, payload and noise generators for one frame."""
    children = np.random.SeedSequence(seed, spawn_key=(trial,)).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


def noise_variance(snr_db: float, es: float = 1.0) -> float:
    return 0.0 if math.isinf(snr_db) and snr_db > 0 else es / 10.0 ** (snr_db / 10.0)


def simulate_frame(ctx: _Context, snr_db: float, trial: int) -> FrameOutcome:
    cfg, p, const = ctx.cfg, ctx.params, ctx.constellation
    rng_ch, rng_bits, rng_noise = trial_streams(cfg.seed, trial)
    sigma2 = noise_variance(snr_db)
    paths = ch.sample_profile(p, ctx.delays, ctx.powers, cfg.speed_kmh, rng_ch, cfg.doppler)
    digest = paths.digest()
    Q = p.bits_per_symbol
    n_sym = _data_positions(cfg, p)

    info = None
    if ctx.layout is not None:
        lay = ctx.layout
        info = rng_bits.integers(0, 2, (lay.n_codewords, lay.code.k), dtype=np.uint8)
        pad = rng_bits.integers(0, 2, lay.n_pad, dtype=np.uint8)
        _, tx_bits = lay.encode(info, pad)
    else:
        tx_bits = rng_bits.integers(0, 2, n_sym * Q, dtype=np.uint8)
    symbols = const.map(tx_bits)

    if cfg.modem == "ofdm":
        return _ofdm_frame(ctx, paths, symbols, tx_bits, sigma2, rng_noise, digest, info)

    X = build_grid(p, symbols, ctx.pilot_amp)
    tx = modulate(X, cfg.modem, p.cp_len)
    taps = ch.discretize(paths, p, cfg.discretize)
    rx = ch.apply(taps, tx, sigma2, rng_noise)
    if cfg.csi == "estimated":
        est = interpolate(estimate_taps(rx, p, ctx.pilot_row), p, cfg.interp)
        rx_taps = est.as_taps()
    else:
        rx_taps = taps
    bc = ch.build_block_channel(rx_taps, p)
    known = pilot_grid(p, ctx.pilot_amp)
    mask = p.data_mask

    if ctx.layout is not None and cfg.detector == "gs_iterative":
        mb = matched_filter(bc, rx.body)
        res = turbo_decode(mb, ctx.layout, cfg.turbo_config(), ctx.det_cfg, const, cfg.modem, mask, known, sigma2)
        errs = int(np.count_nonzero(res.info != info))
        return FrameOutcome(errs, info.size, res.detector_iters, res.turbo_iters, digest, tuple(res.parity_trace))

    if cfg.detector == "gs_iterative":
        mb = matched_filter(bc, rx.body)
        init = None
        if ctx.det_cfg.initializer == "mmse_single_tap":
            init = single_tap_blocks(bc, rx.body, sigma2)
        det = gs_detect(mb, ctx.det_cfg, const, cfg.modem, mask, known, init, sigma2)
        soft, hard, iters = det.soft, det.grid, det.iterations
    else:
        soft = blocks_to_grid(single_tap_blocks(bc, rx.body, sigma2), cfg.modem)
        hard = decide(soft, const, mask, known)
        iters = 1

    if ctx.layout is not None:
        bits = _decode_once(ctx, soft[mask], 1.0, sigma2)
        errs = int(np.count_nonzero(bits != info))
        return FrameOutcome(errs, info.size, iters, 1, digest)
    rx_bits = const.demap_hard(hard[mask])
    return FrameOutcome(int(np.count_nonzero(rx_bits != tx_bits)), tx_bits.size, iters, 0, digest)


def _decode_once(ctx: _Context, y, gain, sigma2) -> np.ndarray:
    lay = ctx.layout
    llr = soft_demap(y, gain, max(sigma2, 1e-10), ctx.constellation)
    cw_llr, _ = lay.split(llr)
    dec = ldpc_decode(cw_llr, lay.code, iters=ctx.cfg.decoder_iters)
    return extract_info(lay.code, dec.bits)


def _ofdm_frame(ctx, paths, symbols, tx_bits, sigma2, rng_noise, digest, info) -> FrameOutcome:
    p, const = ctx.params, ctx.constellation
    X = symbols.reshape(p.M, p.N)
    cp = p.l_max
    tx = modulate(X, "ofdm", cp)
    taps = ch.discretize(paths, p, ctx.cfg.discretize, start=0, length=tx.body.size)
    rx = ch.apply(taps, tx, sigma2, rng_noise)
    Y = demodulate(rx, "ofdm", p.M, p.N, cp)
    H = ofdm_channel_gains(taps, p.M, p.N, cp)
    if info is not None:
        bits = _decode_once(ctx, Y.reshape(-1), H.reshape(-1), sigma2)
        return FrameOutcome(int(np.count_nonzero(bits != info)), info.size, 1, 1, digest)
    Xh = single_tap_mmse(Y, H, sigma2)
    rx_bits = const.demap_hard(Xh.reshape(-1))
    return FrameOutcome(int(np.count_nonzero(rx_bits != tx_bits)), tx_bits.size, 1, 0, digest)


# -- sweeps --------------------------------------------------------------------


@dataclass
class TrialResult:
    snr_db: float
    bit_errors: int = 0
    bits: int = 0
    frame_errors: int = 0
    frames: int = 0
    det_iters: int = 0
    turbo_iters: int = 0
    seconds: float = 0.0
    channel_hash: str = ""
    _hasher: object = field(default_factory=hashlib.sha256, repr=False, compare=False)

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def mean_det_iters(self) -> float:
        return self.det_iters / self.frames if self.frames else 0.0

    @property
    def mean_turbo_iters(self) -> float:
        return self.turbo_iters / self.frames if self.frames else 0.0

    def add(self, outcome: FrameOutcome) -> None:
        self.bit_errors += outcome.bit_errors
        self.bits += outcome.bits
        self.frame_errors += int(outcome.frame_error)
        self.frames += 1
        self.det_iters += outcome.det_iters
        self.turbo_iters += outcome.turbo_iters
        self._hasher.update(outcome.channel_digest.encode())
        self.channel_hash = self._hasher.hexdigest()[:16]

    def row(self) -> dict:
        return {
            "snr_db": self.snr_db,
            "ber": self.ber,
            "fer": self.fer,
            "bit_errors": self.bit_errors,
            "bits": self.bits,
            "frame_errors": self.frame_errors,
            "frames": self.frames,
            "mean_det_iters": self.mean_det_iters,
            "mean_turbo_iters": self.mean_turbo_iters,
            "seconds": round(self.seconds, 3),
            "channel_hash": self.channel_hash,
        }


def frame_outcomes(cfg: SimConfig, snr_db: float, trials=None) -> list[FrameOutcome]:
    """Per-frame outcomes for trials ``0..frames-1``, e.g. for paired statistics."""
    cfg.validate()
    ctx = _Context.build(cfg)
    return [simulate_frame(ctx, snr_db, t) for t in (range(cfg.frames) if trials is None else trials)]


def _run_chunk(cfg: SimConfig, snr_db: float, trials: range) -> list[FrameOutcome]:
    ctx = _Context.build(cfg)
    return [simulate_frame(ctx, snr_db, t) for t in trials]


def _chunks(cfg: SimConfig):
    for start in range(0, cfg.frames, cfg.chunk):
        yield range(start, min(start + cfg.chunk, cfg.frames))


def run_point(cfg: SimConfig, snr_db: float, pool: ProcessPoolExecutor | None = None) -> TrialResult:
    """Simulate one SNR point, stopping early once enough frame errors are seen.

    The stop rule is evaluated after each chunk in trial order, so the result
    is the same for any worker count.
    """
    res = TrialResult(snr_db=snr_db)
    t0 = time.perf_counter()
    chunks = list(_chunks(cfg))
    if pool is None:
        ctx = _Context.build(cfg)
        batches = ([simulate_frame(ctx, snr_db, t) for t in trials] for trials in chunks)
    else:
        batches = _pooled(pool, cfg, snr_db, chunks)
    for outcomes in batches:
        for o in outcomes:
            res.add(o)
        if cfg.stop_frame_errors and res.frame_errors >= cfg.stop_frame_errors:
            break
    res.seconds = time.perf_counter() - t0 if cfg.record_timing else 0.0
    return res


def _pooled(pool, cfg, snr_db, chunks):
    # keep a bounded window of futures in flight, consume in order
    window = 2 * cfg.workers
    futures = [pool.submit(_run_chunk, cfg, snr_db, c) for c in chunks[:window]]
    nxt = len(futures)
    i = 0
    try:
        while i < len(futures):
            out = futures[i].result()
            if nxt < len(chunks):
                futures.append(pool.submit(_run_chunk, cfg, snr_db, chunks[nxt]))
                nxt += 1
            i += 1
            yield out
    finally:
        for f in futures[i:]:
            f.cancel()


def run(cfg: SimConfig, out: str | Path | None = None) -> list[TrialResult]:
    """Sweep every SNR point; optionally write the CSV to ``out``."""
    cfg.validate()
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = [run_point(cfg, s, pool) for s in cfg.snr_db]
    else:
        results = [run_point(cfg, s) for s in cfg.snr_db]
    if out is not None:
        Path(out).write_text(to_csv(cfg, results))
    return results


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def to_csv(cfg: SimConfig, results: list[TrialResult]) -> str:
    buf = io.StringIO()
    buf.write("\n".join(cfg.header_lines()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        row = r.row()
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_csv(path_or_text) -> list[dict]:
    text = str(path_or_text)
    if "\n" not in text:
        text = Path(text).read_text()
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(rows))


def compare(configs: dict[str, SimConfig], out: str | Path | None = None) -> dict[str, list[TrialResult]]:
    """Run several schemes on paired channel draws and merge their results.

    All schemes must share frame parameters, seed and SNR sweep. The merged
    CSV has one ``snr_db`` column followed by every result column prefixed
    with ``<label>_``.
    """
    if not configs:
        raise ValueError("nothing to compare")
    items = list(configs.items())
    ref_label, ref = items[0]
    errors = []
    for label, cfg in items[1:]:
        if cfg.frame_signature() != ref.frame_signature():
            errors.append(f"{label}: frame parameters differ from {ref_label}")
        if cfg.seed != ref.seed:
            errors.append(f"{label}: seed differs from {ref_label}")
        if cfg.snr_db != ref.snr_db:
            errors.append(f"{label}: snr sweep differs from {ref_label}")
    if errors:
        raise ConfigError(errors)
    results = {label: run(cfg) for label, cfg in items}
    if out is not None:
        Path(out).write_text(compare_csv(configs, results))
    return results


def compare_csv(configs: dict[str, SimConfig], results: dict[str, list[TrialResult]]) -> str:
    buf = io.StringIO()
    for label, cfg in configs.items():
        for line in cfg.header_lines():
            buf.write(f"# [{label}] {line[2:]}\n")
    cols = ["snr_db"] + [f"{label}_{c}" for label in configs for c in CSV_COLUMNS[1:]]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    labels = list(configs)
    for i, snr in enumerate(configs[labels[0]].snr_db):
        row = [_fmt(snr)]
        for label in labels:
            r = results[label][i].row()
            row += [_fmt(r[c]) for c in CSV_COLUMNS[1:]]
        w.writerow(row)
    return buf.getvalue()
