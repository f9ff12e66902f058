"""Flat ``key=value`` run configs, the run manifest, and output files."""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .experiments import ExperimentConfig, RunResult, compare_report
from .hecke import enumerate_gamma_cosets
from .sl2 import Slope

HEADER = "horolab-config v1"
KEYS = ("slope", "interval", "T", "N", "sampling", "observable", "seed", "limit_N")
CSV_COLUMNS = ("T", "estimate", "stderr", "N", "product_ref", "rational_ref",
               "z_product", "z_rational")


class ConfigError(ValueError):
    pass


def _num(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 1e16 else repr(v)


def dumps(cfg: ExperimentConfig) -> str:
    lines = [
        HEADER,
        f"slope={cfg.slope}",
        "interval={} {}".format(*map(_num, cfg.interval)),
        "T=" + " ".join(_num(t) for t in cfg.T_schedule),
        f"N={cfg.sample_count}",
        f"sampling={cfg.sampling}",
        f"observable={cfg.observable}",
        f"seed={cfg.seed}",
        f"limit_N={cfg.limit_samples}",
    ]
    return "\n".join(lines) + "\n"


def loads(text: str, seed: int | None = None) -> ExperimentConfig:
    """Parse a config.  ``seed`` overrides the file; a missing seed falls back
    to ``$HOROLAB_SEED`` and then 0."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != HEADER:
        raise ConfigError(f"config must start with {HEADER!r}")
    vals: dict[str, str] = {}
    for ln in lines[1:]:
        key, sep, val = ln.partition("=")
        key = key.strip()
        if not sep or key not in KEYS:
            raise ConfigError(f"bad config line {ln!r}")
        if key in vals:
            raise ConfigError(f"duplicate key {key!r}")
        vals[key] = val.strip()
    if "slope" not in vals:
        raise ConfigError("config needs a slope")
    try:
        kwargs = {"slope": Slope.parse(vals["slope"])}
        if "interval" in vals:
            lo, hi = vals["interval"].split()
            kwargs["interval"] = (float(lo), float(hi))
        if "T" in vals:
            kwargs["T_schedule"] = tuple(float(t) for t in vals["T"].split())
        if "N" in vals:
            kwargs["sample_count"] = int(vals["N"])
        if "sampling" in vals:
            kwargs["sampling"] = vals["sampling"]
        if "observable" in vals:
            kwargs["observable"] = vals["observable"]
        if "limit_N" in vals:
            kwargs["limit_samples"] = int(vals["limit_N"])
        if seed is None:
            seed = vals.get("seed", os.environ.get("HOROLAB_SEED", "0"))
        kwargs["seed"] = int(seed)
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load(path, seed: int | None = None) -> ExperimentConfig:
    return loads(Path(path).read_text(), seed)


@dataclass
class RunManifest:
    config_text: str
    seed: int
    version: str = __version__
    started: float = field(default_factory=time.time)
    finished: float | None = None
    counters: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        """Hash of the inputs only; timestamps and counters are excluded."""
        blob = f"{self.version}\n{self.seed}\n{self.config_text}".encode()
        return hashlib.sha256(blob).hexdigest()

    def to_json(self) -> str:
        return json.dumps({
            "manifest_sha256": self.digest,
            "version": self.version,
            "seed": self.seed,
            "config": self.config_text,
            "started": self.started,
            "finished": self.finished,
            "counters": self.counters,
        }, indent=2, sort_keys=True) + "\n"


def _f(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return "%.17g" % v


def run_csv(result: RunResult, digest: str) -> str:
    rows = [f"# manifest_sha256={digest}", ",".join(CSV_COLUMNS)]
    rational = result.rational_limit[0] if result.rational_limit else None
    for rec in result.records:
        rows.append(",".join(_f(v) for v in (
            rec.T, rec.estimate, rec.stderr, rec.N, result.product_limit, rational,
            result.z_product(rec), result.z_rational(rec))))
    return "\n".join(rows) + "\n"


def rational_limit_text(result: RunResult, digest: str) -> str:
    cfg = result.config
    system = enumerate_gamma_cosets(cfg.slope.p, cfg.slope.q)
    value, se = result.rational_limit
    lines = [
        f"# manifest_sha256={digest}",
        f"p={system.p}",
        f"q={system.q}",
        f"M={system.M}",
        f"psi={system.psi}",
        f"paper_index={system.paper_index}",
        f"index_agrees={'yes' if system.index_agrees else 'no'}",
        f"value={_f(value)}",
        f"stderr={_f(se)}",
        f"N={cfg.limit_samples}",
        f"eigenform_closed_form={_f(result.eigenform_limit)}",
    ]
    return "\n".join(lines) + "\n"


GNUPLOT = """# manifest_sha256={digest}
set datafile separator ','
set logscale x
set xlabel 'T'
set ylabel 'estimate'
plot 'run.csv' skip 2 using 1:2:3 with yerrorbars title 'horocycle average'{extra}
"""


def write_outputs(result: RunResult, manifest: RunManifest, out_dir) -> list[Path]:
    """Write the run files into ``out_dir`` and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = manifest.digest
    report = compare_report(result)
    files = {
        "run.csv": run_csv(result, digest),
        "report.txt": f"# manifest_sha256={digest}\n{report}\n",
    }
    extra = ""
    if result.product_limit is not None:
        extra += f", {result.product_limit!r} title 'product measure'"
    if result.rational_limit is not None:
        files["rational_limit.txt"] = rational_limit_text(result, digest)
        extra += f", {result.rational_limit[0]!r} title 'rational limit'"
    files["run.gnuplot"] = GNUPLOT.format(digest=digest, extra=extra)
    manifest.finished = time.time()
    manifest.counters.update(result.counters)
    files["manifest.json"] = manifest.to_json()
    paths = []
    for name, body in files.items():
        p = out / name
        p.write_text(body)
        paths.append(p)
    return paths
