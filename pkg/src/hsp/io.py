"""File formats: data matrices, partition lists, traces, run metadata, configs.

Numbers are written with 17 significant digits so that reading a file back
reproduces the written doubles exactly.  CSV output follows RFC 4180 via
the standard ``csv`` module.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import DataFormatError, InvalidArgumentError
from .metrics import CoClusterMatrix
from .model import DataMatrix, Hyperparams
from .partition import Partition, canonicalize, format_partition, parse_partition
from .sampler import PartitionTrace, SamplerConfig

TRACE_MAGIC = "# hsp-trace"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def read_data_matrix(path) -> DataMatrix:
    """Read a conditions-by-subjects CSV with subject ids in the header row."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot open data file ({exc.strerror})", path) from exc
    with fh:
        rows = [(n, r) for n, r in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataFormatError("need a header row and at least one condition row", path)
    header_line, header = rows[0]
    subjects = [c.strip() for c in header[1:]]
    if not subjects:
        raise DataFormatError("header names no subjects", path, header_line)
    names, values = [], []
    for line, row in rows[1:]:
        if len(row) != len(header):
            raise DataFormatError(
                f"expected {len(header)} fields, found {len(row)}", path, line
            )
        names.append(row[0].strip())
        try:
            vals = [float(c) for c in row[1:]]
        except ValueError as exc:
            raise DataFormatError(f"non-numeric value ({exc})", path, line) from exc
        if not all(math.isfinite(v) for v in vals):
            raise DataFormatError("non-finite value", path, line)
        values.append(vals)
    return DataMatrix(np.array(values), names, subjects)


def write_data_matrix(data: DataMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["condition", *data.subject_names])
        for name, row in zip(data.condition_names, data.values):
            w.writerow([name, *(fmt(v) for v in row)])


def read_partitions(path) -> list[Partition]:
    """One comma-separated label vector per non-blank line."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot open partition file ({exc.strerror})", path) from exc
    out = []
    for n, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            out.append(parse_partition(line))
        except InvalidArgumentError as exc:
            raise DataFormatError(str(exc), path, n) from exc
    if not out:
        raise DataFormatError("no partitions found", path)
    sizes = {p.n_items for p in out}
    if len(sizes) != 1:
        raise DataFormatError(f"partitions have differing sizes {sorted(sizes)}", path)
    return out


def write_partitions(partitions, path) -> None:
    with open(path, "w") as fh:
        for p in partitions:
            fh.write(format_partition(canonicalize(p)) + "\n")


def write_trace(trace: PartitionTrace, path, metadata_ref: str = "run.json") -> None:
    J, I = trace.n_subjects, trace.n_conditions
    with open(path, "w") as fh:
        fh.write(f"{TRACE_MAGIC} metadata={metadata_ref} subjects={J} conditions={I}\n")
        for t in range(trace.kept_count):
            parts = [str(int(trace.iterations[t])), "c=" + format_partition(trace.subject[t])]
            parts += [f"pi_{j + 1}=" + format_partition(trace.condition[t, j]) for j in range(J)]
            fh.write(";".join(parts) + "\n")


def read_trace(path) -> PartitionTrace:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot open trace ({exc.strerror})", path) from exc
    if not lines or not lines[0].startswith(TRACE_MAGIC):
        raise DataFormatError("missing trace header", path, 1)
    iters, subj, cond = [], [], []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields_ = line.split(";")
        try:
            iters.append(int(fields_[0]))
            if not fields_[1].startswith("c="):
                raise ValueError("second field must be c=")
            subj.append(parse_partition(fields_[1][2:]).labels)
            pis = []
            for j, f in enumerate(fields_[2:], start=1):
                key, _, labels = f.partition("=")
                if key != f"pi_{j}":
                    raise ValueError(f"expected pi_{j}, found {key!r}")
                pis.append(parse_partition(labels).labels)
        except (ValueError, IndexError) as exc:
            raise DataFormatError(f"bad trace line ({exc})", path, n) from exc
        if len(pis) != len(subj[-1]) or (cond and len(pis[0]) != len(cond[0][0])):
            raise DataFormatError("trace line has inconsistent dimensions", path, n)
        if len({len(p) for p in pis}) != 1:
            raise DataFormatError("condition partitions differ in size", path, n)
        cond.append(pis)
    if not iters:
        raise DataFormatError("trace holds no iterations", path)
    return PartitionTrace(np.array(iters), np.array(subj, np.int16), np.array(cond, np.int16))


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_coclustering(m: CoClusterMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["", *m.item_names])
        for name, row in zip(m.item_names, m.probs):
            w.writerow([name, *(fmt(v) for v in row)])


def write_sensitivity(rows, parameter: str, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow([parameter, "subject_ari", "subject_f1", "condition_ari", "condition_f1"])
        for r in rows:
            w.writerow([fmt(r.value), fmt(r.subject_ari), fmt(r.subject_f1),
                        fmt(r.condition_ari), fmt(r.condition_f1)])


# ---------------------------------------------------------------- config

class ConfigError(InvalidArgumentError):
    def __init__(self, message, path=None, line=None):
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)


@dataclass
class RunConfig:
    """Everything a ``fit`` run needs; read from a flat ``key = value`` file.

    Paths are resolved against the config file's directory.  ``c0`` and
    ``nu0`` take inline labels (``1,1,2``); ``c0_file`` and ``nu0_file`` name
    partition files instead.  Unset base partitions default to one block.
    """

    data: Path | None = None
    out: Path | None = None
    c0: tuple | None = None
    nu0: tuple | None = None
    c0_file: Path | None = None
    nu0_file: Path | None = None
    standardize: bool = True
    tau: float = 0.0
    rho: float = 0.0
    lam: float = 0.0
    alpha0: float = 1.0
    beta0: float = 1.0
    beta: float = 1.0
    a0: float | None = None
    b0: float | None = None
    d0: float = 7.25
    e0: float = 1.0
    iterations: int = 10000
    burn_in: int = 2000
    thin: int = 1
    seed: int = 0
    shuffle_size: int = 0
    record_nu_star: bool = False
    extra: dict = field(default_factory=dict, repr=False)

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(iterations=self.iterations, burn_in=self.burn_in, thin=self.thin,
                             seed=self.seed, record_nu_star=self.record_nu_star,
                             shuffle_size=self.shuffle_size)

    def base_partitions(self, data: DataMatrix):
        c0 = self.c0
        nu0 = self.nu0
        if self.c0_file is not None:
            c0 = read_partitions(self.c0_file)[0].labels
        if self.nu0_file is not None:
            nu0 = read_partitions(self.nu0_file)[0].labels
        c0 = c0 or (1,) * data.n_subjects
        nu0 = nu0 or (1,) * data.n_conditions
        if len(c0) != data.n_subjects:
            raise ConfigError(f"c0 has {len(c0)} labels but the data have {data.n_subjects} subjects")
        if len(nu0) != data.n_conditions:
            raise ConfigError(
                f"nu0 has {len(nu0)} labels but the data have {data.n_conditions} conditions"
            )
        return canonicalize(c0), canonicalize(nu0)

    def hyperparams(self, data: DataMatrix) -> Hyperparams:
        c0, nu0 = self.base_partitions(data)
        kw = dict(tau=self.tau, rho=self.rho, lam=self.lam, alpha0=self.alpha0,
                  beta0=self.beta0, beta=self.beta, d0=self.d0, e0=self.e0)
        if self.a0 is not None:
            kw["a0"] = self.a0
        if self.b0 is not None:
            kw["b0"] = self.b0
        return Hyperparams.for_data(data, c0=c0, nu0=nu0, **kw)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        return {k: (str(v) if isinstance(v, Path) else list(v) if isinstance(v, tuple) else v)
                for k, v in d.items()}


_KEY_ALIASES = {"lambda": "lam", "burn-in": "burn_in", "burnin": "burn_in"}


def _convert(name, raw, kind, base_dir):
    if kind in ("Path | None",):
        return (base_dir / raw).resolve() if not Path(raw).is_absolute() else Path(raw)
    if kind == "tuple | None":
        return parse_partition(raw).labels
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind == "int":
        return int(raw)
    return float(raw)


def parse_config(text: str, path=None) -> RunConfig:
    base_dir = Path(path).parent if path is not None else Path.cwd()
    kinds = {f.name: str(f.type) for f in fields(RunConfig) if f.name != "extra"}
    values = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise ConfigError("expected key = value", path, n)
        key = _KEY_ALIASES.get(key.strip(), key.strip())
        raw = raw.strip()
        if key not in kinds:
            raise ConfigError(f"unknown key {key!r}", path, n)
        try:
            values[key] = _convert(key, raw, kinds[key], base_dir)
        except (ValueError, InvalidArgumentError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}", path, n) from exc
    return RunConfig(**values)


def read_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config ({exc.strerror})", path) from exc
    return parse_config(text, path)
