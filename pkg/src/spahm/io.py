"""JSON interchange formats (schema version 1).

Reals are written with ``repr`` precision, so reading a file back yields
bit-identical floats.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


class InputError(ValueError):
    """A file is malformed or violates its schema."""


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def _load(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise InputError(f"{path}: top level must be an object")
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InputError(f"{path}: unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    return obj


def _atoms(raw, where: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise InputError(f"{where}: atoms must be a non-empty list of vectors")
    rows = []
    for k, vec in enumerate(raw):
        if not isinstance(vec, list) or not vec or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in vec):
            raise InputError(f"{where}: atom {k} is not a list of numbers")
        rows.append(vec)
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise InputError(f"{where}: atoms have mixed dimensions {sorted(lengths)}")
    arr = np.array(rows, dtype=np.float64)
    if dim is not None and arr.shape[1] != dim:
        raise InputError(f"{where}: atoms have dimension {arr.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{where}: atoms must be finite")
    return arr


def _index_list(raw, where: str, length: int | None = None) -> np.ndarray:
    if not isinstance(raw, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in raw):
        raise InputError(f"{where}: expected a list of integers")
    if length is not None and len(raw) != length:
        raise InputError(f"{where}: expected {length} indices, got {len(raw)}")
    return np.array(raw, dtype=np.int64)


@dataclass
class LocalParams:
    """Local parameter sets: one (id, atoms) entry per group."""

    group_ids: list[str]
    atoms: list[np.ndarray]
    true_assignments: list[np.ndarray] | None = None

    @property
    def dim(self) -> int:
        return self.atoms[0].shape[1]

    def to_json(self) -> str:
        groups = [{"id": gid, "atoms": a.tolist()} for gid, a in zip(self.group_ids, self.atoms)]
        obj = {"schema_version": SCHEMA_VERSION, "groups": groups}
        if self.true_assignments is not None:
            obj["true_assignments"] = {gid: a.tolist() for gid, a in zip(self.group_ids, self.true_assignments)}
        return _dump(obj)

    @classmethod
    def from_dict(cls, obj: dict, source: str = "input") -> "LocalParams":
        groups = obj.get("groups")
        if not isinstance(groups, list) or not groups:
            raise InputError(f"{source}: 'groups' must be a non-empty list")
        ids, atoms = [], []
        dim = None
        for k, g in enumerate(groups):
            if not isinstance(g, dict) or not isinstance(g.get("id"), str):
                raise InputError(f"{source}: group {k} needs a string 'id'")
            gid = g["id"]
            if gid in ids:
                raise InputError(f"{source}: duplicate group id {gid!r}")
            arr = _atoms(g.get("atoms"), f"{source}: group {gid!r}", dim)
            dim = arr.shape[1]
            ids.append(gid)
            atoms.append(arr)
        truth = obj.get("true_assignments")
        true_assignments = None
        if truth is not None:
            if not isinstance(truth, dict) or set(truth) != set(ids):
                raise InputError(f"{source}: 'true_assignments' must map every group id to indices")
            true_assignments = [_index_list(truth[gid], f"{source}: true_assignments[{gid!r}]", a.shape[0])
                                for gid, a in zip(ids, atoms)]
        return cls(ids, atoms, true_assignments)

    @classmethod
    def read(cls, path) -> "LocalParams":
        return cls.from_dict(_load(path), str(path))

    def write(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def _hyper_dict(raw, where: str) -> dict:
    if not isinstance(raw, dict):
        raise InputError(f"{where}: 'hyperparameters' must be an object")
    out = {}
    for name, value in raw.items():
        if name == "mu0":
            out[name] = np.array(value, dtype=np.float64)
        else:
            out[name] = float(value)
    return out


@dataclass
class FusionOutput:
    """Result of a fusion run as written by ``spahm fuse``."""

    global_atoms: np.ndarray
    group_ids: list[str]
    assignments: list[np.ndarray]
    hyperparameters: dict
    trace: list[dict]
    config: dict
    seed: int
    converged: bool
    warning: str | None = None
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        hyper = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.hyperparameters.items()}
        obj = {
            "schema_version": SCHEMA_VERSION,
            "global_atoms": self.global_atoms.tolist(),
            "assignments": [{"id": gid, "global_index": a.tolist()}
                            for gid, a in zip(self.group_ids, self.assignments)],
            "hyperparameters": hyper,
            "trace": self.trace,
            "config": self.config,
            "seed": self.seed,
            "converged": self.converged,
            "warning": self.warning,
            "metadata": self.metadata,
        }
        return _dump(obj)

    @classmethod
    def from_dict(cls, obj: dict, source: str = "result") -> "FusionOutput":
        try:
            atoms = _atoms(obj["global_atoms"], f"{source}: global_atoms")
            entries = obj["assignments"]
            ids = [e["id"] for e in entries]
            assignments = [_index_list(e["global_index"], f"{source}: assignments[{e['id']!r}]")
                           for e in entries]
            out = cls(atoms, ids, assignments, _hyper_dict(obj["hyperparameters"], source),
                      list(obj["trace"]), dict(obj["config"]), int(obj["seed"]), bool(obj["converged"]),
                      obj.get("warning"), dict(obj.get("metadata", {})))
        except (KeyError, TypeError) as exc:
            raise InputError(f"{source}: missing or malformed field ({exc})") from None
        for gid, a in zip(ids, assignments):
            if a.size and (a.min() < 0 or a.max() >= atoms.shape[0]):
                raise InputError(f"{source}: group {gid!r} refers to a global atom that does not exist")
        return out

    @classmethod
    def read(cls, path) -> "FusionOutput":
        return cls.from_dict(_load(path), str(path))

    def write(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


@dataclass
class GroundTruth:
    """Generating global atoms, per-group matching and hyperparameters of a simulation."""

    global_atoms: np.ndarray
    group_ids: list[str]
    assignments: list[np.ndarray]
    hyperparameters: dict
    spec: dict = field(default_factory=dict)

    def to_json(self) -> str:
        hyper = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.hyperparameters.items()}
        obj = {
            "schema_version": SCHEMA_VERSION,
            "global_atoms": self.global_atoms.tolist(),
            "assignments": [{"id": gid, "global_index": a.tolist()}
                            for gid, a in zip(self.group_ids, self.assignments)],
            "hyperparameters": hyper,
            "spec": self.spec,
        }
        return _dump(obj)

    @classmethod
    def from_dict(cls, obj: dict, source: str = "truth") -> "GroundTruth":
        try:
            atoms = _atoms(obj["global_atoms"], f"{source}: global_atoms")
            entries = obj.get("assignments") or []
            ids = [e["id"] for e in entries]
            assignments = [_index_list(e["global_index"], f"{source}: assignments[{e['id']!r}]")
                           for e in entries]
            return cls(atoms, ids, assignments, _hyper_dict(obj.get("hyperparameters", {}), source),
                       dict(obj.get("spec", {})))
        except (KeyError, TypeError) as exc:
            raise InputError(f"{source}: missing or malformed field ({exc})") from None

    @classmethod
    def read(cls, path) -> "GroundTruth":
        return cls.from_dict(_load(path), str(path))

    def write(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def write_raw_data(path, group_ids: list[str], raw_data) -> None:
    arrays = {}
    for gid, (points, labels) in zip(group_ids, raw_data):
        arrays[f"{gid}__points"] = points
        arrays[f"{gid}__labels"] = labels
    np.savez_compressed(path, **arrays)


def read_raw_data(path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    with np.load(path) as data:
        ids = sorted({k.rsplit("__", 1)[0] for k in data.files})
        return {gid: (data[f"{gid}__points"], data[f"{gid}__labels"]) for gid in ids}


def finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None
