"""JSON and CSV formats for states, interferometers and distributions.

JSON layouts:

* pure state   -- interleaved amplitudes ``[re0, im0, re1, im1, ...]``
* mixed state  -- row-major matrix of ``[re, im]`` pairs
* Bloch vector -- ``[x, y, z]`` (inside a config: ``{"bloch": [x, y, z]}``)
* interferometer rows -- row-major matrix of ``[re, im]`` pairs
* experiment config -- ``{"n": int, "phases": [...], "states": [...],
  "partition": [[...], [...]]}``

CSV floats are written with 17 significant digits so doubles round-trip.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .cyclic import CyclicConfig, InterferometerRows, OutcomePattern
from .errors import InvalidInputError
from .states import BlochVector, MixedState, PureState, pure_from_bloch


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def pure_to_json(state: PureState) -> list[float]:
    amps = state.amplitudes
    return [float(v) for pair in zip(amps.real, amps.imag) for v in pair]


def pure_from_json(data: Sequence[float]) -> PureState:
    vals = [float(v) for v in data]
    if len(vals) % 2 or len(vals) < 4:
        raise InvalidInputError("pure state needs an even number (>= 4) of reals")
    arr = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return PureState(arr)


def _matrix_to_json(m: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed complex matrix: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidInputError("complex matrix must be rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def mixed_to_json(state: MixedState) -> list:
    return _matrix_to_json(state.matrix)


def mixed_from_json(data) -> MixedState:
    return MixedState(_matrix_from_json(data))


def bloch_to_json(b: BlochVector) -> list[float]:
    return [b.x, b.y, b.z]


def bloch_from_json(data) -> BlochVector:
    return BlochVector.from_array(data)


def state_to_json(state) -> Any:
    if isinstance(state, PureState):
        return pure_to_json(state)
    if isinstance(state, MixedState):
        return mixed_to_json(state)
    if isinstance(state, BlochVector):
        return {"bloch": bloch_to_json(state)}
    raise InvalidInputError(f"cannot serialize {type(state).__name__}")


def state_from_json(data) -> PureState | MixedState:
    if isinstance(data, Mapping):
        if "bloch" not in data:
            raise InvalidInputError("state object must carry a 'bloch' key")
        return pure_from_bloch(bloch_from_json(data["bloch"]))
    if data and isinstance(data[0], (list, tuple)):
        return mixed_from_json(data)
    return pure_from_json(data)


def rows_to_json(rows: InterferometerRows) -> list:
    return _matrix_to_json(rows.matrix)


def rows_from_json(data) -> InterferometerRows:
    return InterferometerRows(_matrix_from_json(data))


@dataclass(frozen=True)
class ExperimentConfig:
    config: CyclicConfig
    states: tuple
    partition: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    labels: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return self.config.n_photons


def experiment_from_json(data: Mapping) -> ExperimentConfig:
    try:
        n = int(data["n"])
        phases = data.get("phases", [0.0] * n)
        states = tuple(state_from_json(s) for s in data["states"])
    except KeyError as exc:
        raise InvalidInputError(f"experiment config is missing {exc}") from None
    cfg = CyclicConfig(n, tuple(phases))
    if len(states) != n:
        raise InvalidInputError(f"config lists {len(states)} states for n={n}")
    partition = data.get("partition")
    if partition is not None:
        partition = tuple(tuple(int(s) for s in part) for part in partition)
    labels = data.get("labels")
    return ExperimentConfig(cfg, states, partition, tuple(labels) if labels else None)


def experiment_to_json(exp: ExperimentConfig) -> dict:
    out = {
        "n": exp.n,
        "phases": list(exp.config.phases),
        "states": [state_to_json(s) for s in exp.states],
    }
    if exp.partition is not None:
        out["partition"] = [list(p) for p in exp.partition]
    if exp.labels:
        out["labels"] = list(exp.labels)
    return out


def load_json(path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON ({exc})") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def distribution_csv(dist: Mapping[OutcomePattern, float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pattern", "k", "probability"])
    for pattern, p in dist.items():
        w.writerow([pattern.label, pattern.weight, fmt(p)])
    return buf.getvalue()


def port_distribution_csv(dist: Mapping[tuple[int, ...], float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pattern", "probability"])
    for ports, p in dist.items():
        w.writerow(["-".join(str(x) for x in ports), fmt(p)])
    return buf.getvalue()


def records_csv(records: Iterable[Mapping], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([fmt(rec[c]) if isinstance(rec[c], float) else rec[c] for c in columns])
    return buf.getvalue()


def write_text(path, text: str) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
