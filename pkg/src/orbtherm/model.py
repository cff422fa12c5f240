"""Lumped-parameter thermal model and periodic heat-input profile.

Temperatures are kelvin throughout, heat rates watts, capacitances J/K,
conduction couplings W/K and radiation couplings W/K^4.  Node indices in
files are 1-based; in memory they are 0-based.
"""
from __future__ import annotations

import csv
import io
import json
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ModelValidationError, ProfileError

DEFAULT_ENV_TEMPERATURE = 2.73  # K, cosmic microwave background

_PERIOD_RE = re.compile(r"^\s*#\s*period\s*=\s*([^\s#]+)", re.IGNORECASE)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ThermalModel:
    """Node capacitances plus conduction and radiation couplings.

    Construction validates every invariant; an instance that exists is a
    valid model.

    Attributes:
        capacitance: Node heat capacities ``C_i`` (J/K), shape ``(N,)``.
        conduction: Symmetric conduction matrix ``K_ij`` (W/K).
        radiation: Symmetric radiation matrix ``R_ij`` (W/K^4).
        env_radiation: Radiation-to-environment coefficients ``R_i`` (W/K^4).
        env_temperature: Environment temperature ``T_0`` (K).
        node_labels: Human-readable node names.
        mean_inputs: Optional reference orbit-mean heat inputs (W), used by
            the synthetic profile generator.
    """

    capacitance: np.ndarray
    conduction: np.ndarray
    radiation: np.ndarray
    env_radiation: np.ndarray
    env_temperature: float = DEFAULT_ENV_TEMPERATURE
    node_labels: tuple = ()
    mean_inputs: Optional[np.ndarray] = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "capacitance", _frozen(np.atleast_1d(self.capacitance)))
        n = self.capacitance.shape[0]
        set_(self, "conduction", _frozen(np.atleast_2d(self.conduction)))
        set_(self, "radiation", _frozen(np.atleast_2d(self.radiation)))
        set_(self, "env_radiation", _frozen(np.atleast_1d(self.env_radiation)))
        set_(self, "env_temperature", float(self.env_temperature))
        labels = tuple(self.node_labels) if self.node_labels else tuple(f"node{i + 1}" for i in range(n))
        set_(self, "node_labels", labels)
        if self.mean_inputs is not None:
            set_(self, "mean_inputs", _frozen(np.atleast_1d(self.mean_inputs)))
        self._validate()

    @property
    def node_count(self) -> int:
        return self.capacitance.shape[0]

    def _validate(self) -> None:
        n = self.node_count
        if self.capacitance.ndim != 1 or n < 1:
            raise ModelValidationError("capacitance must be a non-empty vector")
        for name in ("conduction", "radiation"):
            if getattr(self, name).shape != (n, n):
                raise ModelValidationError(f"{name} matrix must have shape ({n}, {n}), "
                                           f"got {getattr(self, name).shape}")
        if self.env_radiation.shape != (n,):
            raise ModelValidationError(f"env_radiation must have length {n}")
        if len(self.node_labels) != n:
            raise ModelValidationError(f"expected {n} node labels, got {len(self.node_labels)}")
        if self.mean_inputs is not None and self.mean_inputs.shape != (n,):
            raise ModelValidationError(f"mean_inputs must have length {n}")

        arrays = [self.capacitance, self.conduction, self.radiation, self.env_radiation]
        if not all(np.all(np.isfinite(a)) for a in arrays) or not np.isfinite(self.env_temperature):
            raise ModelValidationError("model contains non-finite values")

        bad = np.flatnonzero(self.capacitance <= 0)
        if bad.size:
            raise ModelValidationError(f"capacitance must be > 0; violated at nodes {_one_based(bad)}")
        for name, mat in (("conduction", self.conduction), ("radiation", self.radiation)):
            diag = np.flatnonzero(np.diag(mat) != 0)
            if diag.size:
                raise ModelValidationError(f"{name} diagonal must be zero; violated at nodes {_one_based(diag)}")
            neg = np.argwhere(mat < 0)
            if neg.size:
                i, j = neg[0]
                raise ModelValidationError(f"{name} coupling ({i + 1},{j + 1}) is negative")
            asym = np.argwhere(np.triu(mat != mat.T))
            if asym.size:
                i, j = asym[0]
                raise ModelValidationError(
                    f"{name} matrix not symmetric at ({i + 1},{j + 1}): {mat[i, j]!r} != {mat[j, i]!r}")
        bad = np.flatnonzero(self.env_radiation < 0)
        if bad.size:
            raise ModelValidationError(f"env_radiation must be >= 0; violated at nodes {_one_based(bad)}")
        if self.env_temperature < 0:
            raise ModelValidationError("env_temperature must be >= 0")

        unreached = self._nodes_without_escape()
        if unreached:
            raise ModelValidationError(
                "coupling graph is not connected to the environment; isolated nodes "
                f"{unreached}")

    def _nodes_without_escape(self) -> list:
        # environment is node N; breadth-first search from it
        n = self.node_count
        adj = (self.conduction > 0) | (self.radiation > 0)
        seen = np.zeros(n, dtype=bool)
        queue = deque(np.flatnonzero(self.env_radiation > 0))
        seen[list(queue)] = True
        while queue:
            i = queue.popleft()
            for j in np.flatnonzero(adj[i] & ~seen):
                seen[j] = True
                queue.append(j)
        return _one_based(np.flatnonzero(~seen))

    def to_dict(self) -> dict:
        n = self.node_count
        nodes = [
            {"label": self.node_labels[i], "capacitance": float(self.capacitance[i]),
             "env_radiation": float(self.env_radiation[i])}
            for i in range(n)
        ]
        out = {
            "nodes": nodes,
            "env_temperature": self.env_temperature,
            "conduction": _pairs(self.conduction),
            "radiation": _pairs(self.radiation),
        }
        if self.mean_inputs is not None:
            out["mean_inputs"] = [float(v) for v in self.mean_inputs]
        return out


def _one_based(idx) -> list:
    return [int(i) + 1 for i in idx]


def _pairs(mat: np.ndarray) -> list:
    iu, ju = np.nonzero(np.triu(mat, 1))
    return [{"i": int(i) + 1, "j": int(j) + 1, "value": float(mat[i, j])} for i, j in zip(iu, ju)]


def model_from_dict(data: dict) -> ThermalModel:
    """Build a validated :class:`ThermalModel` from the JSON object layout."""
    try:
        nodes = data["nodes"]
        n = len(nodes)
        capacitance = [float(node["capacitance"]) for node in nodes]
        env_radiation = [float(node.get("env_radiation", 0.0)) for node in nodes]
        labels = [str(node.get("label", f"node{i + 1}")) for i, node in enumerate(nodes)]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelValidationError(f"malformed 'nodes' block: {exc}") from exc
    if n == 0:
        raise ModelValidationError("model has no nodes")

    matrices = {}
    for name in ("conduction", "radiation"):
        mat = np.zeros((n, n))
        given = np.zeros((n, n), dtype=bool)
        for entry in data.get(name, []):
            try:
                i, j, value = int(entry["i"]), int(entry["j"]), float(entry["value"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ModelValidationError(f"malformed {name} entry {entry!r}: {exc}") from exc
            if not (1 <= i <= n and 1 <= j <= n):
                raise ModelValidationError(f"{name} index ({i},{j}) out of range 1..{n}")
            if i == j:
                raise ModelValidationError(f"{name} diagonal entry ({i},{j}) not allowed")
            a, b = i - 1, j - 1
            # a pair listed in both orders must agree
            if given[a, b] and mat[a, b] != value:
                lo, hi = sorted((i, j))
                raise ModelValidationError(
                    f"{name} matrix not symmetric at ({lo},{hi}): {mat[a, b]!r} != {value!r}")
            mat[a, b] = mat[b, a] = value
            given[a, b] = given[b, a] = True
        matrices[name] = mat

    mean_inputs = data.get("mean_inputs")
    return ThermalModel(
        capacitance=capacitance,
        conduction=matrices["conduction"],
        radiation=matrices["radiation"],
        env_radiation=env_radiation,
        env_temperature=float(data.get("env_temperature", DEFAULT_ENV_TEMPERATURE)),
        node_labels=labels,
        mean_inputs=mean_inputs,
    )


def load_model(path) -> ThermalModel:
    """Read a model JSON file and return a validated :class:`ThermalModel`.

    Raises:
        ModelValidationError: if the file does not parse or the model breaks
            an invariant; the message names the offending indices.
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"cannot parse model file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ModelValidationError(f"model file {path} must hold a JSON object")
    return model_from_dict(data)


def save_model(model: ThermalModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


@dataclass(frozen=True, eq=False)
class HeatProfile:
    """Heat inputs sampled uniformly over one orbit period.

    Row ``k`` of ``samples`` holds ``Qdot_i(k * period / n)``; the sequence
    wraps around periodically.  When ``capacitance`` is given the driving
    function ``(Qdot - <Qdot>) / C`` is precomputed.
    """

    period: float
    samples: np.ndarray
    capacitance: Optional[np.ndarray] = None
    means: np.ndarray = field(init=False)
    _driving: Optional[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        set_ = object.__setattr__
        samples = np.array(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        set_(self, "period", float(self.period))
        if samples.ndim != 2 or samples.shape[0] < 2:
            raise ProfileError("profile needs at least 2 samples")
        if not self.period > 0 or not np.isfinite(self.period):
            raise ProfileError(f"period must be positive, got {self.period}")
        if not np.all(np.isfinite(samples)):
            raise ProfileError("profile samples must be finite")
        samples.setflags(write=False)
        set_(self, "samples", samples)
        set_(self, "means", _frozen(samples.mean(axis=0)))
        driving = None
        if self.capacitance is not None:
            cap = _frozen(np.atleast_1d(self.capacitance))
            if cap.shape != (samples.shape[1],):
                raise ProfileError(f"profile has {samples.shape[1]} nodes, model has {cap.shape[0]}")
            set_(self, "capacitance", cap)
            driving = _frozen((samples - self.means) / cap)
        set_(self, "_driving", driving)

    @property
    def sample_count(self) -> int:
        return self.samples.shape[0]

    @property
    def node_count(self) -> int:
        return self.samples.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.sample_count) * (self.period / self.sample_count)

    @property
    def driving(self) -> np.ndarray:
        """Driving function samples ``F_i(k T/n)`` in K/s, shape ``(n, N)``."""
        if self._driving is None:
            raise ProfileError("profile has no capacitances attached; build it with a model")
        return self._driving

    def with_model(self, model: ThermalModel) -> "HeatProfile":
        return HeatProfile(self.period, self.samples, model.capacitance)

    def scaled(self, factor: float) -> "HeatProfile":
        """Profile with the same means and the oscillation scaled by ``factor``."""
        samples = self.means + factor * (self.samples - self.means)
        return HeatProfile(self.period, samples, self.capacitance)


def constant_profile(qdot: Sequence[float], model: ThermalModel, n: int = 111,
                     period: float = 6660.0) -> HeatProfile:
    """Profile with every row equal to ``qdot``."""
    samples = np.tile(np.asarray(qdot, dtype=float), (n, 1))
    return HeatProfile(period, samples, model.capacitance)


def parse_profile(text: str, model: Optional[ThermalModel] = None,
                  rel_tol: float = 1e-6) -> HeatProfile:
    """Parse profile CSV text; see :func:`load_profile`."""
    period = None
    rows = []
    for raw in io.StringIO(text):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _PERIOD_RE.match(line)
            if m:
                try:
                    period = float(m.group(1))
                except ValueError as exc:
                    raise ProfileError(f"bad period comment: {line!r}") from exc
            continue
        rows.append(line)
    if not rows:
        raise ProfileError("profile is empty")
    body = list(csv.reader(rows[1:]))
    try:
        data = np.array([[float(x) for x in row] for row in body], dtype=float)
    except ValueError as exc:
        raise ProfileError(f"non-numeric profile entry: {exc}") from exc
    if data.ndim != 2 or data.shape[0] < 2:
        raise ProfileError("profile needs at least 2 data rows")
    if model is not None and data.shape[1] != model.node_count + 1:
        raise ProfileError(f"profile has {data.shape[1]} columns, expected {model.node_count + 1} "
                           "(time plus one per node)")

    t = data[:, 0]
    n = t.size
    if t[0] != 0.0:
        raise ProfileError(f"time column must start at 0, got {t[0]}")
    if period is None:
        period = n / (n - 1) * t[-1]
    step = period / n
    expected = np.arange(n) * step
    off = np.flatnonzero(np.abs(t - expected) > rel_tol * step)
    if off.size:
        k = int(off[0])
        raise ProfileError(f"non-uniform time spacing at row {k + 1}: t={t[k]!r}, expected {expected[k]!r} "
                           f"(period {period}, {n} samples)")
    cap = model.capacitance if model is not None else None
    return HeatProfile(period, data[:, 1:], cap)


def load_profile(path, model: Optional[ThermalModel] = None) -> HeatProfile:
    """Read a heat-input CSV: header row, time column, one column per node.

    The period defaults to ``n/(n-1)`` times the last time stamp and may be
    overridden with a ``# period = <seconds>`` comment line.
    """
    return parse_profile(Path(path).read_text(), model)


def format_profile(profile: HeatProfile, labels: Optional[Sequence[str]] = None) -> str:
    labels = labels or [f"node{i + 1}" for i in range(profile.node_count)]
    lines = [f"# period = {profile.period!r}",
             ",".join(["time_s"] + [f"{lab}_W" for lab in labels])]
    for t, row in zip(profile.times, profile.samples):
        lines.append(",".join(f"{v:.17g}" for v in (t, *row)))
    return "\n".join(lines) + "\n"


def save_profile(profile: HeatProfile, path, labels: Optional[Sequence[str]] = None) -> None:
    Path(path).write_text(format_profile(profile, labels))


def total_load(profile: HeatProfile) -> np.ndarray:
    """Total heat input on the spacecraft at each sample position (W)."""
    return profile.samples.sum(axis=1)
