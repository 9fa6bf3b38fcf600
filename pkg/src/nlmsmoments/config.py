"""
Experiment configuration files.

A config is a JSON object::

    {
      "scenario": {
        "w_opt": [0.227, 0.46, [0.688, 0.0], 0.46, 0.227],
        "mu": [0.1, 0.01],
        "noise_var": 0.01,
        "input_cov": {"toeplitz_alpha": 0.5},
        "walk_cov": null
      },
      "iterations": 20000,
      "runs": 100,
      "master_seed": 2024,
      "oracle_samples": 1000000,
      "output_path": null
    }

Complex numbers are written either as plain numbers or as ``[re, im]``
pairs. ``input_cov`` is ``{"toeplitz_alpha": a}`` or ``{"matrix": [[...]]}``;
``walk_cov`` is null, ``{"scaled_identity": q}`` or ``{"matrix": [[...]]}``.
``mu`` may be a single number or a list.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from importlib import resources

import numpy as np

from .errors import ValidationError
from .momentmat import InputCovariance, toeplitz_covariance
from .predictor import FilterScenario
from .spectrum import DEFAULT_GAP_TOLERANCE

__all__ = ["ExperimentConfig", "load_config", "parse_config", "bundled_config_path"]

_TOP_KEYS = {
    "scenario",
    "iterations",
    "runs",
    "master_seed",
    "oracle_samples",
    "output_path",
    "stability_mu_grid",
}
_SCENARIO_KEYS = {"w_opt", "mu", "noise_var", "input_cov", "walk_cov", "gap_tolerance", "spread"}


def _fail(where, msg):
    raise ValidationError(f"{where}: {msg}")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(where, f"expected a number, got {json.dumps(value)}")
    if not math.isfinite(value):
        _fail(where, "must be finite")
    return float(value)


def _complex(value, where):
    if isinstance(value, list):
        if len(value) != 2:
            _fail(where, "complex entries are written as [re, im]")
        return complex(_number(value[0], where + "[0]"), _number(value[1], where + "[1]"))
    return complex(_number(value, where))


def _integer(value, where, minimum=0):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(where, f"expected an integer, got {json.dumps(value)}")
    if value < minimum:
        _fail(where, f"must be at least {minimum}")
    return value


def _encode_complex(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _matrix(value, where):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        _fail(where, "expected a non-empty list of rows")
    n = len(value)
    rows = []
    for i, row in enumerate(value):
        if len(row) != n:
            _fail(f"{where}[{i}]", f"expected {n} entries, got {len(row)}")
        rows.append(tuple(_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)))
    return tuple(rows)


def _cov_spec(value, where, kinds):
    if not isinstance(value, dict) or len(value) != 1:
        _fail(where, f"expected an object with exactly one of {sorted(kinds)}")
    (kind, arg), = value.items()
    if kind not in kinds:
        _fail(where, f"unknown covariance form {kind!r}; expected one of {sorted(kinds)}")
    if kind == "matrix":
        return ("matrix", _matrix(arg, f"{where}.matrix"))
    return (kind, _number(arg, f"{where}.{kind}"))


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Validated experiment description.

    Covariances are stored in their declared form, ``("toeplitz_alpha", a)``,
    ``("scaled_identity", q)`` or ``("matrix", rows)``, so a dumped config
    reads back the way it was written.
    """

    w_opt: tuple
    mu: tuple
    noise_var: float
    input_cov: tuple
    walk_cov: tuple | None = None
    gap_tolerance: float = DEFAULT_GAP_TOLERANCE
    spread: bool = False
    iterations: int = 20000
    runs: int = 100
    master_seed: int = 0
    oracle_samples: int = 1_000_000
    output_path: str | None = None
    stability_mu_grid: tuple | None = None

    @property
    def M(self):
        return len(self.w_opt)

    def covariance(self) -> InputCovariance:
        kind, arg = self.input_cov
        if kind == "toeplitz_alpha":
            try:
                return toeplitz_covariance(self.M, arg)
            except ValidationError as exc:
                _fail("scenario.input_cov.toeplitz_alpha", str(exc))
        try:
            cov = InputCovariance(np.array(arg, dtype=complex))
        except ValidationError as exc:
            _fail("scenario.input_cov.matrix", str(exc))
        if cov.M != self.M:
            _fail("scenario.input_cov.matrix", f"is {cov.M}x{cov.M} but w_opt has length {self.M}")
        return cov

    def walk_matrix(self):
        if self.walk_cov is None:
            return None
        kind, arg = self.walk_cov
        if kind == "scaled_identity":
            if arg < 0:
                _fail("scenario.walk_cov.scaled_identity", "must be nonnegative")
            return arg * np.eye(self.M)
        return np.array(arg, dtype=complex)

    def scenarios(self):
        """One :class:`FilterScenario` per configured step size."""
        cov = self.covariance()
        walk = self.walk_matrix()
        out = []
        for i, mu in enumerate(self.mu):
            try:
                out.append(
                    FilterScenario(
                        np.array(self.w_opt),
                        mu,
                        self.noise_var,
                        cov,
                        walk_cov=walk,
                        gap_tolerance=self.gap_tolerance,
                        spread=self.spread,
                    )
                )
            except ValidationError as exc:
                _fail(f"scenario (mu[{i}] = {mu})", str(exc))
        return out

    def with_overrides(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes) if changes else self

    def to_dict(self):
        def cov(spec):
            if spec is None:
                return None
            kind, arg = spec
            if kind == "matrix":
                return {"matrix": [[_encode_complex(v) for v in row] for row in arg]}
            return {kind: arg}

        scenario = {
            "w_opt": [_encode_complex(v) for v in self.w_opt],
            "mu": list(self.mu),
            "noise_var": self.noise_var,
            "input_cov": cov(self.input_cov),
            "walk_cov": cov(self.walk_cov),
            "gap_tolerance": self.gap_tolerance,
            "spread": self.spread,
        }
        d = asdict(self)
        out = {"scenario": scenario}
        for key in ("iterations", "runs", "master_seed", "oracle_samples", "output_path"):
            out[key] = d[key]
        out["stability_mu_grid"] = None if self.stability_mu_grid is None else list(self.stability_mu_grid)
        return out

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def parse_config(data) -> ExperimentConfig:
    """Validate a decoded JSON object; errors name the offending field."""
    if not isinstance(data, dict):
        _fail("config", "top level must be an object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        _fail("config", f"unknown keys {sorted(unknown)}")
    if "scenario" not in data:
        _fail("config", "missing 'scenario'")
    sc = data["scenario"]
    if not isinstance(sc, dict):
        _fail("scenario", "must be an object")
    unknown = set(sc) - _SCENARIO_KEYS
    if unknown:
        _fail("scenario", f"unknown keys {sorted(unknown)}")
    for key in ("w_opt", "mu", "noise_var", "input_cov"):
        if key not in sc:
            _fail("scenario", f"missing {key!r}")
    w = sc["w_opt"]
    if not isinstance(w, list) or not w:
        _fail("scenario.w_opt", "expected a non-empty list")
    w_opt = tuple(_complex(v, f"scenario.w_opt[{i}]") for i, v in enumerate(w))
    mus = sc["mu"] if isinstance(sc["mu"], list) else [sc["mu"]]
    if not mus:
        _fail("scenario.mu", "needs at least one step size")
    mu = tuple(_number(v, f"scenario.mu[{i}]") for i, v in enumerate(mus))
    for i, m in enumerate(mu):
        if m < 0:
            _fail(f"scenario.mu[{i}]", "must be nonnegative")
    noise_var = _number(sc["noise_var"], "scenario.noise_var")
    if noise_var < 0:
        _fail("scenario.noise_var", "must be nonnegative")
    input_cov = _cov_spec(sc["input_cov"], "scenario.input_cov", {"toeplitz_alpha", "matrix"})
    walk = sc.get("walk_cov")
    walk_cov = None if walk is None else _cov_spec(walk, "scenario.walk_cov", {"scaled_identity", "matrix"})
    kwargs = dict(w_opt=w_opt, mu=mu, noise_var=noise_var, input_cov=input_cov, walk_cov=walk_cov)
    if "gap_tolerance" in sc:
        kwargs["gap_tolerance"] = _number(sc["gap_tolerance"], "scenario.gap_tolerance")
    if "spread" in sc:
        if not isinstance(sc["spread"], bool):
            _fail("scenario.spread", "expected true or false")
        kwargs["spread"] = sc["spread"]
    for key, minimum in (("iterations", 0), ("runs", 1), ("master_seed", 0), ("oracle_samples", 10_000)):
        if key in data:
            kwargs[key] = _integer(data[key], key, minimum)
    if data.get("output_path") is not None:
        if not isinstance(data["output_path"], str):
            _fail("output_path", "expected a string or null")
        kwargs["output_path"] = data["output_path"]
    grid = data.get("stability_mu_grid")
    if grid is not None:
        if not isinstance(grid, list) or not grid:
            _fail("stability_mu_grid", "expected a non-empty list of step sizes")
        kwargs["stability_mu_grid"] = tuple(
            _number(v, f"stability_mu_grid[{i}]") for i, v in enumerate(grid)
        )
    cfg = ExperimentConfig(**kwargs)
    # surface covariance and length mismatches at load time
    cfg.scenarios()
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a config file; JSON syntax errors report line and column."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return parse_config(data)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def bundled_config_path(name="fig1.json"):
    return resources.files("nlmsmoments").joinpath("data", name)
