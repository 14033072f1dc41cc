"""Monte Carlo experiment engine: coded FER sweeps and capacity CDFs.

Every random draw in a sweep is keyed by (seed, frame_index, purpose), so
results are a pure function of the configuration: the same config gives
bit-identical CSV output whatever the chunking or worker count. Noise
purposes do not key on the SNR point, so a sweep reuses the same channel,
impairment, and thermal realisations at every SNR (common random
numbers), and toggling whitening changes no random draw at all.
"""

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .capacity import OutageTable, format_number, outage_cdf
from .detect import FrameDetector
from .model import SystemParams, derive_noise_params, draw_channel, transmit
from .modem import (
    build_frame,
    deinterleave,
    frame_info_bit_count,
    qam16,
    viterbi_decode,
)
from .streams import PURPOSES, derived_seed, frame_stream
from .whiten import apply_symbol_rate, preprocess

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "FerResultRow",
    "run_fer_sweep",
    "run_capacity_cdf",
    "write_fer_csv",
    "fer_rows_to_csv_text",
    "parse_config_file",
    "build_config",
    "CONFIG_KEYS",
    "snr_at_fer",
]

DETECTORS = ("zf", "mmse", "ml", "app")

_CHUNK = 16


class ConfigError(ValueError):
    """Invalid experiment configuration (bad flag, file, or combination)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment.

    kind selects the engine: "capacity_cdf" ignores detector/whitening/
    frames, "fer_sweep" ignores rates/trials.
    """

    kind: str
    m_t: int = 4
    m_r: int = 4
    evm_db: float = float("-inf")
    snr_db_list: tuple = ()
    rates: tuple = ()
    detector: str = "zf"
    whitening: bool = False
    frames: int = 1000
    trials: int = 10000
    min_frame_errors: int = 100
    seed: int = 1
    out: str = None

    def validate(self):
        if self.kind not in ("capacity_cdf", "fer_sweep"):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if not (self.m_r >= self.m_t >= 1):
            raise ConfigError("need mr >= mt >= 1")
        if not self.snr_db_list:
            raise ConfigError("snr-db list must not be empty")
        if any(not np.isfinite(s) for s in self.snr_db_list):
            raise ConfigError("snr-db values must be finite")
        if np.isnan(self.evm_db) or self.evm_db == np.inf:
            raise ConfigError("evm-db must be finite or -inf")
        if self.kind == "capacity_cdf":
            if not self.rates:
                raise ConfigError("capacity_cdf needs a non-empty rates list")
            if self.trials < 1:
                raise ConfigError("trials must be at least 1")
        else:
            if self.detector not in DETECTORS:
                raise ConfigError(f"detector must be one of {DETECTORS}")
            if self.frames < 1:
                raise ConfigError("frames must be at least 1")
            if self.min_frame_errors < 1:
                raise ConfigError("min-frame-errors must be at least 1")
        return self


@dataclass(frozen=True)
class FerResultRow:
    """One (SNR point, detector) result of a FER sweep."""

    snr_db: float
    detector: str
    whitening: bool
    evm_db: float
    frames_run: int
    frame_errors: int
    fer: float


def _frame_error_flags(config, frame_idx, snr_points):
    """Simulate one frame at the given SNR points; True marks a frame error.

    Pure function of (config, frame_idx, snr_points): every draw comes
    from a substream keyed by seed and frame index.
    """
    const = qam16()
    n_info = frame_info_bit_count(config.m_t, const.bits_per_symbol)
    bit_rng = frame_stream(config.seed, frame_idx, "info_bits")
    info_bits = bit_rng.integers(0, 2, n_info, dtype=np.int64)
    h = draw_channel(
        frame_stream(config.seed, frame_idx, "channel"), config.m_r, config.m_t
    )
    il_seed = derived_seed(config.seed, frame_idx, PURPOSES["interleaver"])
    frame = build_frame(info_bits, config.m_t, const, il_seed)

    flags = np.zeros(len(snr_points), dtype=bool)
    for pos, snr_db in enumerate(snr_points):
        sigma_r2, sigma_t2 = derive_noise_params(config.m_t, snr_db, config.evm_db)
        y = transmit(
            h,
            frame.symbol_vectors,
            sigma_t2,
            sigma_r2,
            frame_stream(config.seed, frame_idx, "noise"),
        )
        if config.whitening:
            pre = preprocess(h, sigma_t2, sigma_r2)
            obs, h_det = apply_symbol_rate(y, pre), pre.r
        else:
            obs, h_det = y, h
        det = FrameDetector(h_det, const, config.detector, sigma_r2=sigma_r2)
        if config.detector == "app":
            llrs = det.llrs(obs, sigma_r2)
            decoded = viterbi_decode(deinterleave(llrs, il_seed), soft=True)
        else:
            hard = det.hard_bits(obs)
            decoded = viterbi_decode(deinterleave(hard, il_seed), soft=False)
        flags[pos] = not np.array_equal(decoded, info_bits)
    return flags


def run_fer_sweep(config, workers=1):
    """Run the coded FER experiment, one result row per SNR point.

    Frames are consumed in index order; an SNR point stops counting at
    the frame where its error total reaches min_frame_errors (or at the
    frame cap). Worker count changes scheduling only, never the rows.
    """
    config.validate()
    if config.kind != "fer_sweep":
        raise ConfigError("run_fer_sweep needs a fer_sweep config")
    snr = [float(s) for s in config.snr_db_list]
    n = len(snr)
    errors = [0] * n
    frames_run = [0] * n
    stopped = [False] * n

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for start in range(0, config.frames, _CHUNK):
            chunk = range(start, min(start + _CHUNK, config.frames))
            active = [j for j in range(n) if not stopped[j]]
            if not active:
                break
            active_snr = [snr[j] for j in active]
            if pool is None:
                results = [
                    _frame_error_flags(config, idx, active_snr) for idx in chunk
                ]
            else:
                results = list(
                    pool.map(
                        _frame_error_flags,
                        [config] * len(chunk),
                        chunk,
                        [active_snr] * len(chunk),
                    )
                )
            for flags in results:
                for pos, j in enumerate(active):
                    if stopped[j]:
                        continue
                    frames_run[j] += 1
                    errors[j] += bool(flags[pos])
                    if errors[j] >= config.min_frame_errors:
                        stopped[j] = True
    finally:
        if pool is not None:
            pool.shutdown()

    return [
        FerResultRow(
            snr_db=snr[j],
            detector=config.detector,
            whitening=config.whitening,
            evm_db=config.evm_db,
            frames_run=frames_run[j],
            frame_errors=errors[j],
            fer=errors[j] / frames_run[j],
        )
        for j in range(n)
    ]


def run_capacity_cdf(config):
    """Run the outage experiment described by the config."""
    config.validate()
    if config.kind != "capacity_cdf":
        raise ConfigError("run_capacity_cdf needs a capacity_cdf config")
    params = SystemParams(
        m_t=config.m_t,
        m_r=config.m_r,
        snr_db=float(config.snr_db_list[0]),
        evm_db=config.evm_db,
    )
    return outage_cdf(
        params, config.rates, config.snr_db_list, config.trials, config.seed
    )


def write_fer_csv(rows, path_or_buf):
    """Write rows under the header
    `snr_db,detector,whitening,evm_db,frames_run,frame_errors,fer`."""
    own = isinstance(path_or_buf, (str, bytes))
    f = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        f.write("snr_db,detector,whitening,evm_db,frames_run,frame_errors,fer\n")
        for r in rows:
            f.write(
                f"{format_number(r.snr_db)},{r.detector},"
                f"{'on' if r.whitening else 'off'},{format_number(r.evm_db)},"
                f"{r.frames_run},{r.frame_errors},{format_number(r.fer)}\n"
            )
    finally:
        if own:
            f.close()


def fer_rows_to_csv_text(rows):
    buf = io.StringIO()
    write_fer_csv(rows, buf)
    return buf.getvalue()


def snr_at_fer(rows, target_fer):
    """SNR (dB) where a FER curve crosses target_fer, by log-linear
    interpolation between bracketing points; nan if it never does."""
    pts = sorted((r.snr_db, r.fer) for r in rows)
    for (s0, f0), (s1, f1) in zip(pts, pts[1:]):
        if f0 >= target_fer >= f1 and f1 > 0.0:
            if f0 == f1:
                return float(s0)
            t = (np.log(f0) - np.log(target_fer)) / (np.log(f0) - np.log(f1))
            return float(s0 + t * (s1 - s0))
        if f0 >= target_fer and f1 == 0.0:
            return float(s1)
    return float("nan")


# Configuration plumbing: flat `key = value` files mirroring the CLI flags.

CONFIG_KEYS = (
    "mt",
    "mr",
    "evm-db",
    "snr-db",
    "rates",
    "detector",
    "whitening",
    "frames",
    "trials",
    "min-frame-errors",
    "seed",
    "out",
)


def parse_config_file(path):
    """Read a flat `key = value` config file into a string dict.

    Blank lines and lines starting with # are skipped; keys must be CLI
    flag names without the leading dashes.
    """
    values = {}
    try:
        with open(path) as f:
            lines = f.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`")
        key, _, value = text.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _to_int(key, value):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be an integer, got {value!r}") from None


def _to_float(key, value):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}") from None
    if np.isnan(x):
        raise ConfigError(f"{key} must not be NaN")
    return x


def _to_float_list(key, value):
    if isinstance(value, (tuple, list)):
        return tuple(float(v) for v in value)
    parts = [p for p in str(value).split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{key} must be a non-empty comma list")
    return tuple(_to_float(key, p.strip()) for p in parts)


def _to_flag(key, value):
    text = str(value).strip().lower()
    if text in ("on", "true", "1", "yes"):
        return True
    if text in ("off", "false", "0", "no"):
        return False
    raise ConfigError(f"{key} must be on or off, got {value!r}")


_CONVERTERS = {
    "mt": _to_int,
    "mr": _to_int,
    "frames": _to_int,
    "trials": _to_int,
    "min-frame-errors": _to_int,
    "seed": _to_int,
    "evm-db": _to_float,
    "snr-db": _to_float_list,
    "rates": _to_float_list,
    "detector": lambda k, v: str(v).strip().lower(),
    "whitening": _to_flag,
    "out": lambda k, v: str(v),
}

_FIELD_OF_KEY = {
    "mt": "m_t",
    "mr": "m_r",
    "evm-db": "evm_db",
    "snr-db": "snr_db_list",
    "rates": "rates",
    "detector": "detector",
    "whitening": "whitening",
    "frames": "frames",
    "trials": "trials",
    "min-frame-errors": "min_frame_errors",
    "seed": "seed",
    "out": "out",
}


def build_config(kind, file_values=None, cli_values=None):
    """Merge config-file values and CLI values (CLI wins) into a
    validated ExperimentConfig."""
    config = ExperimentConfig(kind=kind)
    for source in (file_values or {}, cli_values or {}):
        fields = {}
        for key, raw in source.items():
            if raw is None:
                continue
            if key not in _CONVERTERS:
                raise ConfigError(f"unknown config key {key!r}")
            fields[_FIELD_OF_KEY[key]] = _CONVERTERS[key](key, raw)
        config = replace(config, **fields)
    return config.validate()
