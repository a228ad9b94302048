"""Experiment configuration files.

A configuration is an INI-style file read with :mod:`configparser`::

    [experiment]
    name = fmt-line
    kind = fmt

    [curve]
    affine = "z"

    [divisor]
    Q = "w1"

    [grid]
    min = 2
    max = 128
    points = 13

Expressions are double-quoted; a key may hold a comma-separated list of
quoted expressions.  Validation collects every problem it finds, each
tagged with a line and column, before raising :class:`ConfigError`.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from holocurve.errors import ExpressionSyntaxError, HolocurveError
from holocurve.expression import Expression, as_polynomial, free_variables, parse

__all__ = [
    "KINDS",
    "ConfigIssue",
    "ConfigError",
    "GridSpec",
    "SampleSpec",
    "ExperimentConfig",
    "parse_config",
    "parse_config_text",
]

KINDS = {
    "fmt": "First Main Theorem: T - m - N is flat in r",
    "jensen": "Jensen's formula residual for analytic functions",
    "thm24": "Jacobian-scalar zeros equal the zeros of the assembled wedge",
    "thm25": "g <= ||phi|| at random chart points",
    "smt-identity": "curvature identity residual is flat in r",
    "smt-inequality": "[T(K) + N_Ram - T(E)] / log T bounded outside an exceptional set",
    "ramification": "counting function of the Jacobian zeros",
    "first-integral": "deviation of a first integral along the curve",
    "autoparallel": "Wronskian of covariant jets",
    "siu-residual": "normalised residual for a connection plus pole-divisor membership",
    "diagnostic": "calculus-lemma ratio and Borel exceptional set",
}

# sections each kind cannot do without
REQUIRED = {
    "fmt": ("curve", "divisor"),
    "jensen": ("function",),
    "thm24": ("curve", "fields"),
    "thm25": ("curve", "fields"),
    "smt-identity": ("curve", "fields"),
    "smt-inequality": ("curve", "fields"),
    "ramification": ("curve", "fields"),
    "first-integral": ("curve", "first-integral"),
    "autoparallel": ("curve", "connection"),
    "siu-residual": ("curve", "connection"),
    "diagnostic": ("density",),
}

_QUOTED = re.compile(r'"([^"]*)"')
_GAMMA_KEY = re.compile(r"^G\[(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\]$")
_FIELD_KEY = re.compile(r"^X(\d+)$")


@dataclass(frozen=True)
class ConfigIssue:
    line: int
    column: int
    message: str

    def format(self, path: str = "<config>") -> str:
        return f"{path}:{self.line}:{self.column}: {self.message}"


class ConfigError(HolocurveError):
    """One or more configuration problems; ``issues`` lists all of them."""

    def __init__(self, issues: list[ConfigIssue], path: str = "<config>"):
        self.issues = list(issues)
        self.path = path
        super().__init__("\n".join(i.format(path) for i in self.issues))


@dataclass(frozen=True)
class GridSpec:
    r_min: float = 2.0
    r_max: float = 128.0
    points: int = 13
    geometric: bool = True

    def radii(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.r_min])
        if self.geometric:
            return np.geomspace(self.r_min, self.r_max, self.points)
        return np.linspace(self.r_min, self.r_max, self.points)


@dataclass(frozen=True)
class SampleSpec:
    count: int = 1000
    radius: float = 3.0
    seed: int | None = None
    points: tuple[complex, ...] = ()

    def draw(self, seed: int) -> np.ndarray:
        """Explicit points if given, else ``count`` uniform points in ``|z| < radius``."""
        if self.points:
            return np.array(self.points, dtype=complex)
        rng = np.random.default_rng(seed)
        rho = self.radius * np.sqrt(rng.random(self.count))
        theta = 2 * np.pi * rng.random(self.count)
        return rho * np.exp(1j * theta)


@dataclass
class ExperimentConfig:
    """Validated experiment description; expressions are already parsed."""

    name: str
    kind: str
    path: str = "<config>"
    curve: tuple[Expression, ...] | None = None
    curve_affine: bool = True
    nadel: bool = False
    divisor: Expression | None = None
    fields: tuple[tuple[Expression, ...], ...] = ()
    section: Expression | None = None
    connection: dict = field(default_factory=dict)
    first_integral: Expression | None = None
    functions: tuple[Expression, ...] = ()
    inner: float = 1.0
    outer: float = 2.0
    density_constant: float | None = None
    density_curve: tuple[Expression, ...] | None = None
    delta: float = 0.1
    grid: GridSpec = field(default_factory=GridSpec)
    tolerance: dict = field(default_factory=dict)
    samples: SampleSpec = field(default_factory=SampleSpec)
    expect: dict = field(default_factory=dict)

    @property
    def n(self) -> int | None:
        if self.curve is None:
            return None
        return len(self.curve) if self.curve_affine else len(self.curve) - 1


class _Reader:
    """configparser plus a record of where each key sits in the file."""

    def __init__(self, text: str):
        self.text = text
        self.issues: list[ConfigIssue] = []
        self.positions: dict[tuple[str, str], tuple[int, int, str]] = {}
        self.section_lines: dict[str, int] = {}
        self.parser = configparser.ConfigParser(
            interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"), strict=True
        )
        self.parser.optionxform = str
        self._index()
        try:
            self.parser.read_string(text)
        except configparser.ParsingError as err:
            for lineno, line in err.errors:
                self.issues.append(ConfigIssue(lineno, 1, f"cannot parse line {line.strip()!r}"))
        except configparser.MissingSectionHeaderError as err:
            self.issues.append(ConfigIssue(err.lineno, 1, "key outside of any [section]"))
        except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as err:
            self.issues.append(ConfigIssue(err.lineno or 1, 1, err.message.split(":")[-1].strip() or str(err)))

    def _index(self):
        section = None
        for lineno, line in enumerate(self.text.splitlines(), 1):
            stripped = line.strip()
            if not stripped or stripped[0] in "#;":
                continue
            if stripped.startswith("[") and stripped.endswith("]") and "=" not in stripped:
                section = stripped[1:-1].strip()
                self.section_lines.setdefault(section, lineno)
                continue
            if section is not None and "=" in line:
                key, _, value = line.partition("=")
                col = len(key) + 2 + (len(value) - len(value.lstrip()))
                self.positions[(section, key.strip())] = (lineno, col, value.strip())

    def has(self, section: str) -> bool:
        return self.parser.has_section(section)

    def keys(self, section: str) -> list[str]:
        return list(self.parser[section].keys()) if self.has(section) else []

    def where(self, section: str, key: str | None = None) -> tuple[int, int]:
        if key is not None and (section, key) in self.positions:
            line, col, _ = self.positions[(section, key)]
            return line, col
        return self.section_lines.get(section, 1), 1

    def error(self, section: str, key: str | None, message: str, offset: int = 0):
        line, col = self.where(section, key)
        self.issues.append(ConfigIssue(line, col + offset, message))

    def get(self, section: str, key: str, default=None):
        if self.has(section) and key in self.parser[section]:
            return self.parser[section][key].strip()
        return default

    def number(self, section: str, key: str, default, kind=float):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            value = kind(raw)
        except ValueError:
            self.error(section, key, f"{key} must be {'an integer' if kind is int else 'a number'}, got {raw!r}")
            return default
        if kind is float and not math.isfinite(value):
            self.error(section, key, f"{key} must be finite")
            return default
        return value

    def boolean(self, section: str, key: str, default: bool) -> bool:
        raw = self.get(section, key)
        if raw is None:
            return default
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        self.error(section, key, f"{key} must be true or false, got {raw!r}")
        return default

    def expressions(self, section: str, key: str, allowed: set[str] | None = None) -> tuple[Expression, ...] | None:
        """Parse a list of quoted expressions, reporting each bad one at its column."""
        raw = self.get(section, key)
        if raw is None:
            return None
        line, col, value = self.positions.get((section, key), (1, 1, raw))
        matches = list(_QUOTED.finditer(value))
        leftover = _QUOTED.sub("", value).replace(",", "").strip()
        if not matches or leftover:
            self.error(section, key, f"{key} must be a comma-separated list of double-quoted expressions")
            return None
        out = []
        ok = True
        for m in matches:
            try:
                expr = parse(m.group(1))
            except ExpressionSyntaxError as err:
                self.issues.append(
                    ConfigIssue(line, col + m.start(1) + err.position, f"bad expression in {key}: {err.reason}")
                )
                ok = False
                continue
            if allowed is not None:
                extra = free_variables(expr) - allowed
                if extra:
                    self.issues.append(
                        ConfigIssue(line, col + m.start(1), f"{key} uses unknown variables {sorted(extra)}")
                    )
                    ok = False
                    continue
            out.append(expr)
        return tuple(out) if ok else None

    def expression(self, section: str, key: str, allowed: set[str] | None = None) -> Expression | None:
        exprs = self.expressions(section, key, allowed)
        if exprs is None:
            return None
        if len(exprs) != 1:
            self.error(section, key, f"{key} takes exactly one expression")
            return None
        return exprs[0]


def _chart_vars(n: int) -> set[str]:
    return {f"w{j}" for j in range(1, n + 1)}


def _hom_vars(n: int) -> set[str]:
    return {f"w{j}" for j in range(0, n + 1)}


def parse_config_text(text: str, path: str = "<config>") -> ExperimentConfig:
    """Validate configuration text; raises :class:`ConfigError` listing every issue."""
    rd = _Reader(text)
    if rd.issues:
        raise ConfigError(rd.issues, path)
    name = rd.get("experiment", "name")
    kind = rd.get("experiment", "kind")
    if not rd.has("experiment"):
        rd.error("experiment", None, "missing section [experiment]")
    if rd.has("experiment") and not name:
        rd.error("experiment", None, "missing key 'name' in [experiment]")
    if rd.has("experiment") and not kind:
        rd.error("experiment", None, "missing key 'kind' in [experiment]")
    if kind and kind not in KINDS:
        rd.error("experiment", "kind", f"unknown kind {kind!r}; expected one of {', '.join(sorted(KINDS))}")
    if name and not re.fullmatch(r"[A-Za-z0-9_.\-]+", name):
        rd.error("experiment", "name", "name may only contain letters, digits, '.', '_' and '-'")
    cfg = ExperimentConfig(name=name or "unnamed", kind=kind or "", path=path)

    if kind in REQUIRED:
        for section in REQUIRED[kind]:
            if not rd.has(section):
                rd.error("experiment", "kind", f"kind {kind!r} requires a [{section}] section")

    # curve
    if rd.has("curve"):
        affine = rd.get("curve", "affine")
        hom = rd.get("curve", "homogeneous")
        if (affine is None) == (hom is None):
            rd.error("curve", None, "[curve] needs exactly one of 'affine' or 'homogeneous'")
        else:
            key = "affine" if affine is not None else "homogeneous"
            cfg.curve = rd.expressions("curve", key, {"z"})
            cfg.curve_affine = key == "affine"
            if cfg.curve is not None and not cfg.curve_affine and len(cfg.curve) < 2:
                rd.error("curve", key, "a homogeneous curve needs at least two components")
        cfg.nadel = rd.boolean("curve", "nadel", False)
    n = cfg.n

    if rd.has("divisor"):
        if n is None:
            rd.error("divisor", None, "[divisor] needs a [curve]")
        else:
            cfg.divisor = rd.expression("divisor", "Q", _hom_vars(n))
            if cfg.divisor is None and rd.get("divisor", "Q") is None:
                rd.error("divisor", None, "missing key 'Q' in [divisor]")

    if rd.has("fields"):
        keys = sorted((int(m.group(1)), k) for k in rd.keys("fields") if (m := _FIELD_KEY.match(k)))
        for k in rd.keys("fields"):
            if not _FIELD_KEY.match(k) and k not in ("t", "p"):
                rd.error("fields", k, f"unknown key {k!r} in [fields]")
        if n is not None:
            if not keys:
                rd.error("fields", None, "[fields] needs at least one vector field X1 = ...")
            fields = []
            for _, key in keys:
                comps = rd.expressions("fields", key, _chart_vars(n))
                if comps is not None and len(comps) != n:
                    rd.error("fields", key, f"{key} has {len(comps)} components, the chart has {n}")
                elif comps is not None:
                    fields.append(comps)
            cfg.fields = tuple(fields)
            cfg.section = rd.expression("fields", "t", _hom_vars(n)) if rd.get("fields", "t") else None
            _check_degree(rd, "fields", cfg.section)

    if rd.has("connection") and n is not None:
        table = {}
        for key in rd.keys("connection"):
            if key in ("t", "p"):
                continue
            m = _GAMMA_KEY.match(key)
            if not m:
                rd.error("connection", key, f"unknown key {key!r}; Christoffel symbols are written G[a,b,c]")
                continue
            idx = tuple(int(g) for g in m.groups())
            if not all(1 <= i <= n for i in idx):
                rd.error("connection", key, f"index {idx} outside [1, {n}]")
                continue
            expr = rd.expression("connection", key, _chart_vars(n))
            if expr is not None:
                table[idx] = expr
        cfg.connection = table
        if rd.get("connection", "t"):
            cfg.section = rd.expression("connection", "t", _hom_vars(n))
            _check_degree(rd, "connection", cfg.section)

    if rd.has("first-integral") and n is not None:
        cfg.first_integral = rd.expression("first-integral", "phi", _chart_vars(n) | {"x", "y"})
        if rd.get("first-integral", "phi") is None:
            rd.error("first-integral", None, "missing key 'phi' in [first-integral]")

    if rd.has("function"):
        cfg.functions = rd.expressions("function", "g", {"z"}) or ()
        if rd.get("function", "g") is None:
            rd.error("function", None, "missing key 'g' in [function]")
        cfg.inner = rd.number("function", "inner", 1.0)
        cfg.outer = rd.number("function", "outer", 2.0)
        if not 0 < cfg.inner < cfg.outer:
            rd.error("function", "outer", "need 0 < inner < outer")

    if rd.has("density"):
        const = rd.get("density", "constant")
        curve = rd.get("density", "curve")
        if (const is None) == (curve is None):
            rd.error("density", None, "[density] needs exactly one of 'constant' or 'curve'")
        elif const is not None:
            cfg.density_constant = rd.number("density", "constant", 1.0)
            if cfg.density_constant is not None and cfg.density_constant < 0:
                rd.error("density", "constant", "density must be nonnegative")
        else:
            cfg.density_curve = rd.expressions("density", "curve", {"z"})
        cfg.delta = rd.number("density", "delta", 0.1)
        if cfg.delta <= 0:
            rd.error("density", "delta", "delta must be positive")

    if rd.has("grid"):
        r_min = rd.number("grid", "min", 2.0)
        r_max = rd.number("grid", "max", 128.0)
        points = rd.number("grid", "points", 13, int)
        geometric = rd.boolean("grid", "geometric", True)
        if r_min < 1:
            rd.error("grid", "min", "grid radii must be >= 1")
        if r_max < r_min or (r_max == r_min and points != 1):
            rd.error("grid", "max", "grid max must exceed min")
        if points < 1:
            rd.error("grid", "points", "need at least one grid point")
        cfg.grid = GridSpec(r_min, r_max, points, geometric)
    else:
        cfg.grid = GridSpec(2.0, 128.0, 13, True)

    if rd.has("tolerance"):
        for key in rd.keys("tolerance"):
            value = rd.number("tolerance", key, None)
            if value is not None:
                if value <= 0:
                    rd.error("tolerance", key, "tolerances must be positive")
                cfg.tolerance[key] = value

    if rd.has("samples"):
        pts = rd.get("samples", "points")
        points: tuple[complex, ...] = ()
        if pts is not None:
            try:
                points = tuple(complex(p.strip().replace(" ", "").replace("i", "j")) for p in pts.split(","))
            except ValueError:
                rd.error("samples", "points", "points must be comma-separated complex numbers like 1+2i")
        seed = rd.number("samples", "seed", None, int)
        cfg.samples = SampleSpec(
            rd.number("samples", "count", 1000, int), rd.number("samples", "radius", 3.0), seed, points
        )
        if cfg.samples.count < 1:
            rd.error("samples", "count", "count must be positive")

    if rd.has("expect"):
        for key in rd.keys("expect"):
            cfg.expect[key] = rd.get("expect", key)

    if kind in ("thm24", "thm25", "smt-identity", "smt-inequality", "ramification") and n and cfg.fields:
        if len(cfg.fields) != n - 1:
            rd.error("fields", None, f"a curve in P^{n} pairs with {n - 1} vector field(s), got {len(cfg.fields)}")

    if rd.issues:
        raise ConfigError(rd.issues, path)
    return cfg


def _check_degree(rd: _Reader, section: str, expr):
    declared = rd.number(section, "p", None, int)
    if declared is None or expr is None:
        return
    names = sorted(free_variables(expr))
    poly = as_polynomial(expr, names) if names else {(): 1}
    degrees = {sum(e) for e in poly} if poly else set()
    if degrees and degrees != {declared}:
        rd.error(section, "p", f"p = {declared} does not match the degree of t")


def parse_config(path) -> ExperimentConfig:
    """Read and validate a configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError([ConfigIssue(1, 1, f"cannot read file: {err.strerror}")], str(path)) from None
    return parse_config_text(text, str(path))
