"""Dataset ingestion, covariate encoding, synthetic generation, persistence.

Dataset files are comma-delimited text with a header holding ``region``,
``family``, the outcome column, and covariate columns.  Category ordering,
reference levels, and log transforms are declared in a line-oriented sidecar:

    # outcome, ordered worst-last
    y = ordinal(good, fair, poor)
    income = numeric(log)
    age = numeric
    gender = categorical(Male, Female, ref=Male)

Draws persist as long-format text (``chain,iter,name,value``; canonical for
tests) or as a compact ``.npz`` binary, chosen by file extension.  Both round
trip bitwise.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, field

import numpy as np

from . import bridge
from .model import Dataset
from .sampler import DrawsStore, SamplerConfig

__all__ = ["DataError", "ColumnPlan", "EncodingPlan", "encode", "load",
           "frequency_report", "TrueParams", "generate", "write_dataset_csv",
           "write_numeric_encoding", "save_draws", "load_draws",
           "sha256_file", "atomic_write_text"]

DRAWS_MAGIC = "# ordbridge draws 1"


class DataError(ValueError):
    """Input files or tables violating the documented contracts."""


# ---------------------------------------------------------------------------
# encoding sidecar

@dataclass(frozen=True)
class ColumnPlan:
    name: str
    kind: str                      # "numeric" | "categorical"
    levels: tuple = ()
    ref: str | None = None
    log_transform: bool = False

    def width(self) -> int:
        return len(self.levels) - 1 if self.kind == "categorical" else 1

    def labels(self) -> list:
        if self.kind == "numeric":
            return [f"log({self.name})" if self.log_transform else self.name]
        return [f"{self.name}={lvl}" for lvl in self.levels if lvl != self.ref]


@dataclass
class EncodingPlan:
    outcome: str
    outcome_levels: tuple
    columns: list = field(default_factory=list)

    @property
    def n_categories(self) -> int:
        return len(self.outcome_levels)

    def design_width(self) -> int:
        return sum(col.width() for col in self.columns)

    def design_labels(self) -> list:
        out = []
        for col in self.columns:
            out.extend(col.labels())
        return out

    @classmethod
    def from_text(cls, text: str) -> "EncodingPlan":
        outcome = None
        outcome_levels = ()
        columns = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            m = re.fullmatch(r"(\w+)\s*=\s*(\w+)(?:\((.*)\))?", line)
            if not m:
                raise DataError(f"encoding line {lineno}: cannot parse {line!r}")
            name, kind, args = m.group(1), m.group(2), m.group(3)
            parts = [a.strip() for a in args.split(",")] if args else []
            if kind == "ordinal":
                if outcome is not None:
                    raise DataError(f"encoding line {lineno}: second ordinal "
                                    "column; only one outcome is allowed")
                if len(parts) < 2:
                    raise DataError(f"encoding line {lineno}: ordinal needs "
                                    "at least two levels")
                outcome, outcome_levels = name, tuple(parts)
            elif kind == "numeric":
                log_flag = False
                if parts == ["log"]:
                    log_flag = True
                elif parts:
                    raise DataError(f"encoding line {lineno}: numeric takes "
                                    "only an optional 'log' flag")
                columns.append(ColumnPlan(name, "numeric",
                                          log_transform=log_flag))
            elif kind == "categorical":
                ref = None
                levels = []
                for part in parts:
                    if part.startswith("ref="):
                        ref = part[4:].strip()
                    else:
                        levels.append(part)
                if len(levels) < 2:
                    raise DataError(f"encoding line {lineno}: categorical "
                                    "needs at least two levels")
                ref = ref if ref is not None else levels[0]
                if ref not in levels:
                    raise DataError(f"encoding line {lineno}: reference "
                                    f"level {ref!r} not among levels")
                columns.append(ColumnPlan(name, "categorical",
                                          levels=tuple(levels), ref=ref))
            else:
                raise DataError(f"encoding line {lineno}: unknown column "
                                f"type {kind!r}")
        if outcome is None:
            raise DataError("encoding declares no ordinal outcome column")
        return cls(outcome, outcome_levels, columns)

    @classmethod
    def from_file(cls, path) -> "EncodingPlan":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def encode(value: str, plan: ColumnPlan) -> np.ndarray:
    """Reference-cell indicator sub-vector for one categorical value."""
    if plan.kind != "categorical":
        raise DataError(f"column {plan.name!r} is not categorical")
    if value not in plan.levels:
        raise DataError(f"unknown level {value!r} for column {plan.name!r}")
    out = np.zeros(plan.width())
    pos = 0
    for lvl in plan.levels:
        if lvl == plan.ref:
            continue
        if lvl == value:
            out[pos] = 1.0
        pos += 1
    return out


# ---------------------------------------------------------------------------
# dataset loading

def load(path, plan: EncodingPlan, spec=None) -> Dataset:
    """Read and validate a dataset file against an encoding plan.

    Region and family identifiers are arbitrary strings mapped to dense
    0-based indices in order of first appearance; the labels are kept on the
    returned :class:`Dataset`.  Every cell must be present; errors carry
    1-based file line numbers.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        for required in ("region", "family", plan.outcome):
            if required not in header:
                raise DataError(f"{path}: header lacks column {required!r}")
        for col in plan.columns:
            if col.name not in header:
                raise DataError(f"{path}: header lacks declared column "
                                f"{col.name!r}")
        idx = {name: header.index(name) for name in header}

        regions: dict = {}
        families: dict = {}
        family_region: list = []
        y_list, x_rows, g_list, f_list = [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise DataError(f"{path} line {lineno}: expected "
                                f"{len(header)} cells, got {len(row)}")
            cells = {name: row[idx[name]].strip() for name in header}
            for name, value in cells.items():
                if value == "":
                    raise DataError(f"{path} line {lineno}: missing value "
                                    f"in column {name!r}")
            out_val = cells[plan.outcome]
            if out_val not in plan.outcome_levels:
                raise DataError(f"{path} line {lineno}: outcome {out_val!r} "
                                f"not among declared levels")
            y_list.append(plan.outcome_levels.index(out_val) + 1)

            region = cells["region"]
            family = cells["family"]
            g = regions.setdefault(region, len(regions))
            if family in families:
                f = families[family]
                if family_region[f] != g:
                    raise DataError(
                        f"{path} line {lineno}: family {family!r} appears "
                        "under more than one region")
            else:
                f = families[family] = len(family_region)
                family_region.append(g)
            g_list.append(g)
            f_list.append(f)

            x_row = []
            for col in plan.columns:
                value = cells[col.name]
                if col.kind == "numeric":
                    try:
                        num = float(value)
                    except ValueError:
                        raise DataError(
                            f"{path} line {lineno}: column {col.name!r} "
                            f"is not numeric: {value!r}") from None
                    if col.log_transform:
                        if num <= 0:
                            raise DataError(
                                f"{path} line {lineno}: log transform needs "
                                f"a positive value in {col.name!r}")
                        num = math.log(num)
                    x_row.append(num)
                else:
                    try:
                        x_row.extend(encode(value, col))
                    except DataError as exc:
                        raise DataError(f"{path} line {lineno}: {exc}") \
                            from None
            x_rows.append(x_row)

    if not y_list:
        raise DataError(f"{path}: no data rows")
    dataset = Dataset(
        y=np.array(y_list, dtype=np.int32),
        x=np.array(x_rows, dtype=float).reshape(len(y_list),
                                                plan.design_width()),
        region_idx=np.array(g_list, dtype=np.int32),
        family_idx=np.array(f_list, dtype=np.int32),
        family_region=np.array(family_region, dtype=np.int32),
        n_categories=plan.n_categories,
        region_labels=list(regions),
        family_labels=list(families),
        covariate_names=plan.design_labels(),
        outcome_labels=list(plan.outcome_levels),
    )
    if spec is not None:
        if spec.n_categories != dataset.n_categories:
            raise DataError("model spec and encoding disagree on category "
                            "count")
        if spec.n_covariates != dataset.n_covariates:
            raise DataError("model spec and encoding disagree on design "
                            "width")
    return dataset


def frequency_report(dataset: Dataset, plan: EncodingPlan) -> str:
    """Level-frequency table for the load report."""
    lines = [f"observations = {dataset.n_obs}",
             f"regions = {dataset.n_regions}",
             f"families = {dataset.n_families}", ""]
    counts = np.bincount(dataset.y, minlength=dataset.n_categories + 1)[1:]
    lines.append(f"outcome {plan.outcome}:")
    for label, count in zip(plan.outcome_levels, counts):
        lines.append(f"  {label} = {count}")
    pos = 0
    for col in plan.columns:
        if col.kind == "categorical":
            lines.append(f"covariate {col.name}:")
            width = col.width()
            block = dataset.x[:, pos:pos + width]
            non_ref = block.sum(axis=0).astype(int)
            lines.append(f"  {col.ref} (ref) = "
                         f"{dataset.n_obs - int(non_ref.sum())}")
            k = 0
            for lvl in col.levels:
                if lvl == col.ref:
                    continue
                lines.append(f"  {lvl} = {non_ref[k]}")
                k += 1
            pos += width
        else:
            pos += 1
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# synthetic data

@dataclass
class TrueParams:
    """Ground truth for the synthetic-data harness.

    ``family_sizes`` may be an integer or a sequence of choices sampled
    uniformly per family; covariates are independent standard normals.
    """

    alpha_c: np.ndarray
    beta_c: np.ndarray
    phi_ustar: float | None
    phi_v: float | None
    n_regions: int
    families_per_region: int
    family_sizes: tuple = (2, 3, 4)

    def __post_init__(self):
        self.alpha_c = np.asarray(self.alpha_c, dtype=float)
        self.beta_c = np.asarray(self.beta_c, dtype=float)
        if np.any(np.diff(self.alpha_c) <= 0.0):
            raise ValueError("alpha_c must be strictly increasing")
        if self.phi_ustar is not None and self.phi_v is None:
            raise ValueError("a three-level truth needs phi_v as well")
        if self.n_regions < 1 or self.families_per_region < 1:
            raise ValueError("need at least one region and family")

    @property
    def level(self) -> str:
        if self.phi_ustar is not None:
            return "three_level"
        if self.phi_v is not None:
            return "two_level"
        return "fixed"


def generate(truth: TrueParams, rng: np.random.Generator):
    """Simulate a dataset from the model; returns (Dataset, u, v).

    Region effects follow the modified Bridge law, family effects the Bridge
    law, and outcomes the cumulative-logit categorical distribution.
    """
    s = truth.n_regions
    n_fam = s * truth.families_per_region
    sizes_opt = np.atleast_1d(np.asarray(truth.family_sizes, dtype=int))
    sizes = sizes_opt[rng.integers(0, sizes_opt.size, n_fam)] \
        if sizes_opt.size > 1 else np.full(n_fam, sizes_opt[0])

    family_region = np.repeat(np.arange(s, dtype=np.int32),
                              truth.families_per_region)
    f_idx = np.repeat(np.arange(n_fam, dtype=np.int32), sizes)
    g_idx = family_region[f_idx]
    n = int(sizes.sum())
    p = truth.beta_c.shape[0]
    x = rng.standard_normal((n, p))

    if truth.level == "three_level":
        u = bridge.modified_bridge_sample(truth.phi_ustar, truth.phi_v, rng,
                                          size=s)
        v = bridge.bridge_sample(truth.phi_v, rng, size=n_fam)
    elif truth.level == "two_level":
        u = np.zeros(s)
        v = bridge.bridge_sample(truth.phi_v, rng, size=n_fam)
    else:
        u = np.zeros(s)
        v = np.zeros(n_fam)

    eta = x @ truth.beta_c + u[g_idx] + v[f_idx]
    gamma = bridge.logistic(truth.alpha_c[None, :] - eta[:, None])
    uni = rng.random(n)
    y = (1 + np.sum(uni[:, None] > gamma, axis=1)).astype(np.int32)

    A = truth.alpha_c.shape[0] + 1
    dataset = Dataset(
        y=y, x=x, region_idx=g_idx, family_idx=f_idx,
        family_region=family_region, n_categories=A,
        region_labels=[f"R{i + 1:02d}" for i in range(s)],
        family_labels=[f"F{j + 1:04d}" for j in range(n_fam)],
        covariate_names=[f"x{k + 1}" for k in range(p)],
        outcome_labels=[str(a) for a in range(1, A + 1)],
    )
    return dataset, u, v


def write_dataset_csv(dataset: Dataset, path):
    """Write a dataset back out in the canonical text format."""
    lines = ["region,family,y," + ",".join(dataset.covariate_names)]
    labels = dataset.outcome_labels or \
        [str(a) for a in range(1, dataset.n_categories + 1)]
    for i in range(dataset.n_obs):
        cells = [dataset.region_labels[dataset.region_idx[i]],
                 dataset.family_labels[dataset.family_idx[i]],
                 labels[dataset.y[i] - 1]]
        cells.extend(repr(float(val)) for val in dataset.x[i])
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_numeric_encoding(dataset: Dataset, path):
    """Sidecar matching a generated (all-numeric covariates) dataset."""
    labels = dataset.outcome_labels or \
        [str(a) for a in range(1, dataset.n_categories + 1)]
    lines = [f"y = ordinal({', '.join(labels)})"]
    lines.extend(f"{name} = numeric" for name in dataset.covariate_names)
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# draws persistence

def save_draws(store: DrawsStore, path):
    """Persist a draws store; text by default, ``.npz`` for binary."""
    path = os.fspath(path)
    if path.endswith(".npz"):
        _save_draws_npz(store, path)
    else:
        _save_draws_csv(store, path)


def load_draws(path) -> DrawsStore:
    path = os.fspath(path)
    if path.endswith(".npz"):
        return _load_draws_npz(path)
    return _load_draws_csv(path)


def _config_to_json(config: SamplerConfig) -> str:
    return json.dumps({
        "n_chains": config.n_chains, "n_iterations": config.n_iterations,
        "n_warmup": config.n_warmup, "target_accept": config.target_accept,
        "max_tree_depth": config.max_tree_depth,
        "divergence_threshold": config.divergence_threshold,
        "seed": config.seed}, sort_keys=True)


def _config_from_json(text: str) -> SamplerConfig:
    return SamplerConfig(**json.loads(text))


def _save_draws_csv(store: DrawsStore, path):
    rows = []
    append = rows.append
    for c in range(store.n_chains):
        for r in range(store.n_retained):
            for k, name in enumerate(store.names):
                append(f"{c},{r},{name},{float(store.draws[c, r, k])!r}")
            append(f"{c},{r},divergent,{int(store.divergent[c, r])}")
            append(f"{c},{r},tree_depth,{int(store.tree_depth[c, r])}")
            append(f"{c},{r},step_size,{float(store.step_size[c, r])!r}")
            append(f"{c},{r},accept_stat,{float(store.accept_stat[c, r])!r}")
    body = "\n".join(rows)
    text = (f"{DRAWS_MAGIC}\n"
            f"# config {_config_to_json(store.config)}\n"
            f"# shape {store.n_chains} {store.n_retained}\n"
            f"# names {','.join(store.names)}\n"
            "chain,iter,name,value\n"
            + (body + "\n" if rows else "")
            + f"# rows {len(rows)}\n")
    atomic_write_text(path, text)


def _load_draws_csv(path) -> DrawsStore:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != DRAWS_MAGIC:
        raise DataError(f"{path}: not an ordbridge draws file (bad or "
                        "missing version line)")
    if len(lines) < 6 or not lines[1].startswith("# config ") \
            or not lines[2].startswith("# shape ") \
            or not lines[3].startswith("# names"):
        raise DataError(f"{path}: malformed draws header")
    config = _config_from_json(lines[1][len("# config "):])
    try:
        n_chains, n_retained = map(int, lines[2][len("# shape "):].split())
    except ValueError:
        raise DataError(f"{path}: malformed shape line") from None
    names_text = lines[3][len("# names"):].strip()
    names = names_text.split(",") if names_text else []
    if lines[4] != "chain,iter,name,value":
        raise DataError(f"{path}: missing column header")
    if not lines[-1].startswith("# rows "):
        raise DataError(f"{path}: truncated draws file (missing row trailer)")
    expected_rows = int(lines[-1][len("# rows "):])
    data_lines = lines[5:-1]
    if len(data_lines) != expected_rows \
            or expected_rows != n_chains * n_retained * (len(names) + 4):
        raise DataError(f"{path}: truncated draws file (expected "
                        f"{expected_rows} rows, found {len(data_lines)})")

    values: dict = {}
    for line in data_lines:
        try:
            c_str, r_str, name, value = line.split(",", 3)
            c, r = int(c_str), int(r_str)
        except ValueError:
            raise DataError(f"{path}: malformed row {line!r}") from None
        if not (0 <= c < n_chains and 0 <= r < n_retained):
            raise DataError(f"{path}: chain/iteration {c},{r} outside the "
                            "declared shape")
        values[(c, r, name)] = value

    draws = np.empty((n_chains, n_retained, len(names)))
    divergent = np.zeros((n_chains, n_retained), dtype=bool)
    tree_depth = np.zeros((n_chains, n_retained), dtype=np.int16)
    step_size = np.zeros((n_chains, n_retained))
    accept = np.zeros((n_chains, n_retained))
    try:
        for c in range(n_chains):
            for r in range(n_retained):
                for k, name in enumerate(names):
                    draws[c, r, k] = float(values[(c, r, name)])
                divergent[c, r] = bool(int(values[(c, r, "divergent")]))
                tree_depth[c, r] = int(values[(c, r, "tree_depth")])
                step_size[c, r] = float(values[(c, r, "step_size")])
                accept[c, r] = float(values[(c, r, "accept_stat")])
    except KeyError as exc:
        raise DataError(f"{path}: incomplete draws file, missing entry "
                        f"{exc.args[0]}") from None
    return DrawsStore(names=names, draws=draws, divergent=divergent,
                      tree_depth=tree_depth, step_size=step_size,
                      accept_stat=accept, config=config)


def _save_draws_npz(store: DrawsStore, path):
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        np.savez(fh, names=np.array(store.names, dtype=object),
                 draws=store.draws, divergent=store.divergent,
                 tree_depth=store.tree_depth, step_size=store.step_size,
                 accept_stat=store.accept_stat,
                 config=np.array(_config_to_json(store.config)))
    os.replace(tmp, path)


def _load_draws_npz(path) -> DrawsStore:
    try:
        with np.load(path, allow_pickle=True) as payload:
            return DrawsStore(
                names=[str(n) for n in payload["names"]],
                draws=payload["draws"],
                divergent=payload["divergent"],
                tree_depth=payload["tree_depth"],
                step_size=payload["step_size"],
                accept_stat=payload["accept_stat"],
                config=_config_from_json(str(payload["config"])))
    except (OSError, KeyError, ValueError) as exc:
        raise DataError(f"{path}: cannot read draws archive ({exc})") from None


# ---------------------------------------------------------------------------
# small shared helpers

def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def atomic_write_text(path, text: str):
    """Write-then-rename so partially written files never appear."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)
