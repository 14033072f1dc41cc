"""Canonical experiment definitions and golden-fixture plumbing.

Three experiment families are pinned here with fixed seeds and
desk-scale sizes:

  fig1: outage CDF of the 4x4 channel at -16 dB EVM,
  fig2: coded FER of ZF/ML/APP at -30 dB EVM and with an ideal
        transmitter, no whitening,
  fig3: the same sweeps with whitening enabled (same seed, so the two
        families are sample-paired).

reproduce() runs a family and emits one CSV per configuration plus the
matching flat config files, so every number can be regenerated from the
command line.
"""

import hashlib
import os
from dataclasses import dataclass

from .capacity import format_number
from .harness import (
    ExperimentConfig,
    build_config,
    fer_rows_to_csv_text,
    parse_config_file,
    run_capacity_cdf,
    run_fer_sweep,
)

__all__ = [
    "FIGURE_IDS",
    "figure_configs",
    "config_to_text",
    "run_config",
    "reproduce",
    "GoldenFixture",
]

FIGURE_IDS = ("fig1", "fig2", "fig3")

_CDF_SNR = tuple(float(s) for s in range(0, 37))
_CDF_RATES = (4.0, 8.0, 12.0, 16.0, 20.0)
_FER_SNR = tuple(float(s) for s in range(12, 33, 2))
_FER_SEED = 202
_CDF_SEED = 101


def _fer_config(detector, evm_db, whitening):
    return ExperimentConfig(
        kind="fer_sweep",
        m_t=4,
        m_r=4,
        evm_db=evm_db,
        snr_db_list=_FER_SNR,
        detector=detector,
        whitening=whitening,
        frames=1000,
        min_frame_errors=100,
        seed=_FER_SEED,
    )


def figure_configs(figure_id):
    """The named experiment family as (label, ExperimentConfig) pairs."""
    if figure_id == "fig1":
        return [
            (
                "fig1_cdf_evm-16db",
                ExperimentConfig(
                    kind="capacity_cdf",
                    m_t=4,
                    m_r=4,
                    evm_db=-16.0,
                    snr_db_list=_CDF_SNR,
                    rates=_CDF_RATES,
                    trials=10000,
                    seed=_CDF_SEED,
                ),
            )
        ]
    if figure_id in ("fig2", "fig3"):
        whitening = figure_id == "fig3"
        tag = "wht" if whitening else "unwht"
        out = []
        for evm_db, evm_tag in ((-30.0, "evm-30db"), (float("-inf"), "evm-ideal")):
            for det in ("zf", "ml", "app"):
                out.append(
                    (
                        f"{figure_id}_{tag}_{det}_{evm_tag}",
                        _fer_config(det, evm_db, whitening),
                    )
                )
        return out
    raise ValueError(f"unknown figure id {figure_id!r}")


def config_to_text(config):
    """Flat `key = value` form of a config (loadable via --config)."""
    lines = [
        f"# {config.kind.replace('_', '-')} experiment",
        f"mt = {config.m_t}",
        f"mr = {config.m_r}",
        f"evm-db = {format_number(config.evm_db)}",
        "snr-db = " + ",".join(format_number(s) for s in config.snr_db_list),
    ]
    if config.kind == "capacity_cdf":
        lines.append("rates = " + ",".join(format_number(r) for r in config.rates))
        lines.append(f"trials = {config.trials}")
    else:
        lines.append(f"detector = {config.detector}")
        lines.append(f"whitening = {'on' if config.whitening else 'off'}")
        lines.append(f"frames = {config.frames}")
        lines.append(f"min-frame-errors = {config.min_frame_errors}")
    lines.append(f"seed = {config.seed}")
    return "\n".join(lines) + "\n"


def run_config(config, workers=1):
    """Run one config and return its CSV text."""
    if config.kind == "capacity_cdf":
        return run_capacity_cdf(config).to_csv_text()
    rows = run_fer_sweep(config, workers=workers)
    return fer_rows_to_csv_text(rows)


def reproduce(figure_id, out_dir=None, frames=None, trials=None, workers=1):
    """Run a whole figure family; optionally scale it down and write files.

    Returns a list of (label, config, csv_text). When out_dir is given,
    writes `<label>.cfg` and `<label>.csv` there.
    """
    results = []
    for label, config in figure_configs(figure_id):
        if frames is not None and config.kind == "fer_sweep":
            config = ExperimentConfig(
                **{**config.__dict__, "frames": frames}
            )
        if trials is not None and config.kind == "capacity_cdf":
            config = ExperimentConfig(
                **{**config.__dict__, "trials": trials}
            )
        csv_text = run_config(config, workers=workers)
        results.append((label, config, csv_text))
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            with open(os.path.join(out_dir, label + ".cfg"), "w") as f:
                f.write(config_to_text(config))
            with open(os.path.join(out_dir, label + ".csv"), "w") as f:
                f.write(csv_text)
    return results


@dataclass(frozen=True)
class GoldenFixture:
    """A pinned config plus the SHA-256 of the CSV it must regenerate.

    notes records how strict the comparison is meant to be; the digest
    check itself is always byte-exact.
    """

    name: str
    kind: str
    config_file: str
    sha256: str
    notes: str = "byte-exact for the embedded seed"

    def regenerate(self):
        values = parse_config_file(self.config_file)
        config = build_config(self.kind, file_values=values)
        return run_config(config)

    def verify(self):
        text = self.regenerate()
        digest = hashlib.sha256(text.encode()).hexdigest()
        return digest == self.sha256, digest, text
