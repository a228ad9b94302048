"""Execute validated experiment configurations and write their reports."""

from __future__ import annotations

import csv
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from holocurve.config import ExperimentConfig, parse_config
from holocurve.connection import (
    MeromorphicConnection,
    autoparallel_wronskian,
    is_autoparallel,
    nadel_transform,
    pole_membership,
    siu_smt_residual,
)
from holocurve.errors import ChartError, DegenerateConfigurationError
from holocurve.expression import Const, to_text
from holocurve.jacobian import (
    HolomorphicField,
    MeromorphicVectorField,
    PoleSection,
    first_integral_check,
    g_ratio,
    jacobian_zeros,
    ramification,
    smt_identity,
    smt_inequality,
)
from holocurve.nevanlinna import (
    Divisor,
    GrowthTable,
    ProjectiveCurve,
    calculus_lemma_diagnostic,
    fmt_tables,
    fs_pullback_density,
    jensen_check,
    write_tables,
)
from holocurve.quadrature import DEFAULT_AREA_TOL
from holocurve.zeros import ZeroList

__all__ = ["ExperimentReport", "run_experiment", "run_config_file", "run_batch", "write_batch_summary"]

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class ExperimentReport:
    name: str
    kind: str
    status: str = FAIL
    seed: int = 0
    files: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    checks: list[tuple[str, bool, str]] = field(default_factory=list)
    error: str | None = None

    def check(self, label: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((label, bool(ok), detail))
        return bool(ok)

    def summary_text(self) -> str:
        lines = [
            f"experiment: {self.name}",
            f"kind: {self.kind}",
            f"status: {self.status}",
            f"seed: {self.seed}",
        ]
        for key in sorted(self.stats):
            value = self.stats[key]
            lines.append(f"stat {key}: {value!r}" if isinstance(value, float) else f"stat {key}: {value}")
        for label, ok, detail in self.checks:
            lines.append(f"check {label}: {'pass' if ok else 'fail'}" + (f" ({detail})" if detail else ""))
        for path in self.files:
            lines.append(f"file: {path}")
        for note in self.notes:
            lines.append(f"note: {note}")
        if self.error:
            lines.append(f"error: {self.error}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# building objects from a config


def _curve(cfg: ExperimentConfig) -> ProjectiveCurve:
    f = ProjectiveCurve.affine(*cfg.curve) if cfg.curve_affine else ProjectiveCurve(cfg.curve)
    f = nadel_transform(f) if cfg.nadel else f
    f.check_reduced(max(cfg.grid.r_max, cfg.samples.radius))
    return f


def _section(cfg: ExperimentConfig, n: int) -> PoleSection:
    return PoleSection(cfg.section if cfg.section is not None else Const(1), n)


def _field(cfg: ExperimentConfig, n: int) -> HolomorphicField:
    fields = tuple(MeromorphicVectorField(c) for c in cfg.fields)
    phi = HolomorphicField(fields, _section(cfg, n))
    rng = np.random.default_rng(12345)
    probes = rng.normal(size=(1000, n)) + 1j * rng.normal(size=(1000, n))
    phi.check_pole_clearing(probes)
    return phi


def _connection(cfg: ExperimentConfig, n: int) -> MeromorphicConnection:
    D = MeromorphicConnection(n, cfg.connection, _section(cfg, n))
    rng = np.random.default_rng(12345)
    D.check_pole_clearing(rng.normal(size=(1000, n)) + 1j * rng.normal(size=(1000, n)))
    return D


def _expect_float(cfg: ExperimentConfig, key: str, default=None):
    raw = cfg.expect.get(key)
    if raw is None:
        return default
    return float(raw)


def _expect_bool(cfg: ExperimentConfig, key: str, default=None):
    raw = cfg.expect.get(key)
    if raw is None:
        return default
    return raw.strip().lower() in ("true", "yes", "1", "on")


def _expected_zeros(cfg: ExperimentConfig):
    """``zeros = "0:1; 1+2i:2"`` -> list of (location, multiplicity)."""
    raw = cfg.expect.get("zeros")
    if raw is None:
        return None
    raw = raw.strip().strip('"')
    if not raw:
        return []
    out = []
    for item in raw.split(";"):
        loc, _, mult = item.strip().rpartition(":")
        out.append((complex(loc.replace(" ", "").replace("i", "j")), int(mult)))
    return out


def _tol(cfg: ExperimentConfig, key: str, default: float) -> float:
    return float(cfg.tolerance.get(key, default))


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _spread_stats(report: ExperimentReport, table: GrowthTable, prefix: str = "residual"):
    report.stats[f"{prefix}_max"] = float(table.values.max())
    report.stats[f"{prefix}_min"] = float(table.values.min())
    report.stats[f"{prefix}_spread"] = table.spread


# --------------------------------------------------------------------------
# kinds


def _run_fmt(cfg, out: Path, report: ExperimentReport, seed: int):
    f = _curve(cfg)
    D = Divisor(cfg.divisor, f.n)
    r = cfg.grid.radii()
    tables = fmt_tables(f, D, r, _tol(cfg, "quadrature", DEFAULT_AREA_TOL))
    write_tables(out / "fmt.csv", [tables[k] for k in ("T", "m", "N", "residual")])
    report.files.append("fmt.csv")
    report.notes.extend(tables["residual"].notes)
    _spread_stats(report, tables["residual"])
    ok = report.check("flatness", tables["residual"].spread <= _tol(cfg, "flatness", 1e-3),
                      f"spread {tables['residual'].spread:.3e}")
    ok &= report.check("proximity nonnegative", bool(np.all(tables["m"].values >= -1e-12)))
    target = _expect_float(cfg, "residual")
    if target is not None:
        tol = _expect_float(cfg, "residual_tol", _tol(cfg, "flatness", 1e-3))
        dev = float(np.max(np.abs(tables["residual"].values - target)))
        report.stats["residual_deviation"] = dev
        ok &= report.check("residual value", dev <= tol, f"max deviation {dev:.3e} from {target!r}")
    degree = _expect_float(cfg, "degree")
    if degree is not None:
        rel = _expect_float(cfg, "degree_tol", 0.02)
        ratio = float(tables["T"].values[-1] / math.log(r[-1])) / D.degree
        report.stats["degree_ratio"] = ratio
        ok &= report.check("degree recovery", abs(ratio - degree) <= rel * degree,
                           f"T(r)/log r = {ratio:.6f} at r = {float(r[-1])!r}")
    return ok


def _run_jensen(cfg, out: Path, report: ExperimentReport, seed: int):
    bound = _expect_float(cfg, "residual", 1e-8)
    rows = []
    worst = 0.0
    for g in cfg.functions:
        res = jensen_check(g, cfg.outer, cfg.inner)
        rows.append((to_text(g), cfg.inner, cfg.outer, res))
        worst = max(worst, abs(res))
    _write_rows(out / "jensen.csv", ["g", "inner", "outer", "residual"], rows)
    report.files.append("jensen.csv")
    report.stats["max_abs_residual"] = worst
    return report.check("jensen residual", worst <= bound, f"max |residual| {worst:.3e} <= {bound:g}")


def _run_thm24(cfg, out: Path, report: ExperimentReport, seed: int):
    f = _curve(cfg)
    phi = _field(cfg, f.n)
    radius = cfg.samples.radius
    formula, notes_a = jacobian_zeros(f, phi, radius, "formula")
    wedge_list, notes_b = jacobian_zeros(f, phi, radius, "wedge")
    report.notes.extend(notes_a + notes_b)
    rows = [("formula", a.real, a.imag, m) for a, m in formula] + [("wedge", a.real, a.imag, m) for a, m in wedge_list]
    _write_rows(out / "zeros.csv", ["route", "re", "im", "multiplicity"], rows)
    report.files.append("zeros.csv")
    report.stats["zeros_formula"] = formula.total
    report.stats["zeros_wedge"] = wedge_list.total
    ok = report.check("zero lists agree", formula.matches(wedge_list, 1e-9))
    expected = _expected_zeros(cfg)
    if expected is not None:
        ok &= report.check("expected zeros", formula.matches(ZeroList(tuple(expected), radius), 1e-8))
    return ok


def _run_thm25(cfg, out: Path, report: ExperimentReport, seed: int):
    f = _curve(cfg)
    phi = _field(cfg, f.n)
    z = cfg.samples.draw(seed)
    keep = []
    for zi in z:
        try:
            f.chart_jets(np.array([zi]), 1)
            keep.append(zi)
        except ChartError:
            report.notes.append(f"sample {zi!r} outside the chart, skipped")
    z = np.array(keep, dtype=complex)
    g, norm = g_ratio(f, phi, z)
    excess = float(np.max(g - norm))
    _write_rows(out / "thm25.csv", ["re", "im", "g", "phi_norm"], zip(z.real, z.imag, g, norm))
    report.files.append("thm25.csv")
    report.stats["points"] = int(z.size)
    report.stats["max_excess"] = excess
    slack = _expect_float(cfg, "slack", 1e-9)
    return report.check("g <= |phi|", excess <= slack, f"max(g - |phi|) = {excess:.3e}")


def _run_smt_identity(cfg, out: Path, report: ExperimentReport, seed: int):
    f = _curve(cfg)
    phi = _field(cfg, f.n)
    tables = smt_identity(f, phi, cfg.grid.radii(), _tol(cfg, "quadrature", DEFAULT_AREA_TOL))
    order = ("T", "T_K", "T_E", "N_Ram", "half_log_xi", "residual")
    write_tables(out / "identity.csv", [tables[k] for k in order])
    report.files.append("identity.csv")
    report.notes.extend(tables["residual"].notes)
    _spread_stats(report, tables["residual"])
    flat = _tol(cfg, "flatness", 0.1)
    return report.check("flatness", tables["residual"].spread <= flat, f"spread {tables['residual'].spread:.3e}")


def _inequality_checks(cfg, report: ExperimentReport, rep):
    report.stats["constant"] = rep.constant
    report.stats["max_ratio"] = rep.max_ratio
    report.stats["max_ratio_log_plus"] = rep.max_ratio_plus
    report.stats["exceptional_fraction"] = rep.exceptional_fraction
    report.stats["exceptional_radii"] = ", ".join(repr(float(x)) for x in rep.r[rep.exceptional]) or "none"
    limit = _expect_float(cfg, "exceptional_fraction", 0.05)
    if not np.isfinite(rep.constant) or not np.any(np.isfinite(rep.ratio)):
        report.status = INCONCLUSIVE
        return None
    return report.check("bounded outside exceptional set", rep.exceptional_fraction <= limit,
                        f"log-measure fraction {rep.exceptional_fraction:.3f} <= {limit:g}")


def _run_smt_inequality(cfg, out: Path, report: ExperimentReport, seed: int):
    f = _curve(cfg)
    phi = _field(cfg, f.n)
    rep = smt_inequality(f, phi, cfg.grid.radii(), _expect_float(cfg, "constant"),
                         _tol(cfg, "quadrature", DEFAULT_AREA_TOL))
    write_tables(out / "inequality.csv", rep.tables())
    report.files.append("inequality.csv")
    return _inequality_checks(cfg, report, rep)


def _run_ramification(cfg, out: Path, report: ExperimentReport, seed: int):
    f = _curve(cfg)
    phi = _field(cfg, f.n)
    r = cfg.grid.radii()
    N = ramification(f, phi, r)
    write_tables(out / "ramification.csv", [N])
    report.files.append("ramification.csv")
    report.notes.extend(N.notes)
    report.stats["N_Ram_max"] = float(N.values.max())
    ok = report.check("nondecreasing", bool(np.all(np.diff(N.values) >= -1e-12)))
    expected = _expected_zeros(cfg)
    if expected is not None:
        want = np.zeros(r.shape)
        for a, m in expected:
            want += np.where(abs(a) < r, m * np.log(r / max(abs(a), 1.0)), 0.0)
        dev = float(np.max(np.abs(N.values - want)))
        report.stats["deviation"] = dev
        ok &= report.check("matches expected zeros", dev <= 1e-8, f"max deviation {dev:.3e}")
    return ok


def _run_first_integral(cfg, out: Path, report: ExperimentReport, seed: int):
    f = _curve(cfg)
    z = cfg.samples.draw(seed)
    dev = first_integral_check(f, cfg.first_integral, z)
    report.stats["max_deviation"] = dev
    _write_rows(out / "first_integral.csv", ["samples", "max_deviation"], [(int(z.size), dev)])
    report.files.append("first_integral.csv")
    ok = True
    upper = _expect_float(cfg, "max_deviation")
    lower = _expect_float(cfg, "min_deviation")
    if upper is not None:
        ok &= report.check("deviation small", dev <= upper, f"{dev:.3e} <= {upper:g}")
    if lower is not None:
        ok &= report.check("deviation large", dev > lower, f"{dev:.3e} > {lower:g}")
    return ok


def _run_autoparallel(cfg, out: Path, report: ExperimentReport, seed: int):
    f = _curve(cfg)
    D = _connection(cfg, f.n)
    z = cfg.samples.draw(seed)
    W = np.asarray(autoparallel_wronskian(f, D, z))
    _write_rows(out / "wronskian.csv", ["re", "im", "det_re", "det_im"], zip(z.real, z.imag, W.real, W.imag))
    report.files.append("wronskian.csv")
    report.stats["max_abs_det"] = float(np.max(np.abs(W)))
    report.stats["min_abs_det"] = float(np.min(np.abs(W)))
    verdict = bool(np.all(np.abs(W) <= 1e-12))
    report.stats["autoparallel"] = verdict
    ok = True
    want = _expect_bool(cfg, "autoparallel")
    if want is not None:
        ok &= report.check("autoparallel verdict", verdict == want, f"max |det| = {np.max(np.abs(W)):.3e}")
    value = cfg.expect.get("value")
    if value is not None:
        target = complex(value.replace(" ", "").replace("i", "j"))
        dev = float(np.max(np.abs(W - target)))
        ok &= report.check("determinant value", dev <= 1e-12, f"max |det - {value}| = {dev:.3e}")
    return ok


def _run_siu(cfg, out: Path, report: ExperimentReport, seed: int):
    f = _curve(cfg)
    D = _connection(cfg, f.n)
    z = cfg.samples.draw(seed)
    members = pole_membership(f, D.section, z)
    with open(out / "membership.txt", "w") as fh:
        for zi, v in members:
            fh.write(f"{zi!r}, {v!r}\n")
    report.files.append("membership.txt")
    top = max(v for _, v in members)
    report.stats["max_abs_t"] = top
    ok = True
    membership = cfg.expect.get("membership")
    if membership == "contained":
        ok &= report.check("curve inside {t = 0}", top <= 1e-12, f"max |t(f)| = {top:.3e}")
    elif membership == "disjoint":
        low = min(v for _, v in members)
        ok &= report.check("curve off {t = 0} at samples", low > 1e-12, f"min |t(f)| = {low:.3e}")
    want_auto = _expect_bool(cfg, "autoparallel", False)
    auto = f.is_constant or is_autoparallel(f, D, z[:16] if z.size else [0.5])
    report.stats["autoparallel"] = auto
    if auto:
        return ok & report.check("rejected as autoparallel", want_auto)
    if want_auto:
        return report.check("rejected as autoparallel", False)
    rep = siu_smt_residual(f, D, cfg.grid.radii(), _expect_float(cfg, "constant"),
                           _tol(cfg, "quadrature", DEFAULT_AREA_TOL))
    report.notes.extend(rep.notes)
    write_tables(out / "siu.csv", [rep.T, rep.N_ram, rep.lhs, rep.normalized])
    report.files.append("siu.csv")
    inner = _inequality_checks(cfg, report, rep.inequality)
    return None if inner is None else ok & inner


def _run_diagnostic(cfg, out: Path, report: ExperimentReport, seed: int):
    if cfg.density_constant is not None:
        c = cfg.density_constant

        def kappa(z):
            return np.full(np.shape(z), c)
    else:
        curve = ProjectiveCurve.affine(*cfg.density_curve)

        def kappa(z):
            return np.pi * fs_pullback_density(curve, z)

    rep = calculus_lemma_diagnostic(kappa, cfg.grid.radii(), cfg.delta, _tol(cfg, "quadrature", DEFAULT_AREA_TOL))
    r = rep.r
    tables = [
        GrowthTable(r, rep.circle_mean, "circle_mean"),
        GrowthTable(r, rep.T, "T"),
        GrowthTable(r, rep.ratio, "ratio"),
        GrowthTable(r, rep.violations.astype(float), "borel_violation"),
    ]
    write_tables(out / "diagnostic.csv", tables)
    report.files.append("diagnostic.csv")
    report.stats["max_ratio"] = rep.max_ratio
    frac = rep.exceptional_length / rep.total_length if rep.total_length > 0 else 0.0
    report.stats["exceptional_length"] = rep.exceptional_length
    report.stats["exceptional_fraction"] = frac
    ok = True
    bound = _expect_float(cfg, "max_ratio")
    if bound is not None:
        ok &= report.check("ratio bounded", rep.max_ratio <= bound, f"max ratio {rep.max_ratio:.4f} <= {bound:g}")
    limit = _expect_float(cfg, "exceptional_fraction")
    if limit is not None:
        ok &= report.check("small exceptional set", frac <= limit, f"length fraction {frac:.4f}")
    return ok


RUNNERS: dict[str, Callable] = {
    "fmt": _run_fmt,
    "jensen": _run_jensen,
    "thm24": _run_thm24,
    "thm25": _run_thm25,
    "smt-identity": _run_smt_identity,
    "smt-inequality": _run_smt_inequality,
    "ramification": _run_ramification,
    "first-integral": _run_first_integral,
    "autoparallel": _run_autoparallel,
    "siu-residual": _run_siu,
    "diagnostic": _run_diagnostic,
}


# --------------------------------------------------------------------------
# orchestration


def run_experiment(cfg: ExperimentConfig, output_dir, seed: int | None = None) -> ExperimentReport:
    """Run one experiment into ``output_dir/<name>/``; never raises for module errors."""
    seed = cfg.samples.seed if cfg.samples.seed is not None else (seed if seed is not None else 0)
    report = ExperimentReport(cfg.name, cfg.kind, seed=seed)
    out = Path(output_dir) / cfg.name
    out.mkdir(parents=True, exist_ok=True)
    try:
        with np.errstate(all="ignore"):
            ok = RUNNERS[cfg.kind](cfg, out, report, seed)
        if report.status != INCONCLUSIVE:
            report.status = PASS if ok else FAIL
    except DegenerateConfigurationError as err:
        report.status = FAIL
        report.error = f"{type(err).__name__}: {err}"
    except Exception as err:  # report, never crash
        report.status = FAIL
        report.error = f"{type(err).__name__}: {err}"
        report.notes.append(traceback.format_exc().strip().splitlines()[-1])
    (out / "summary.txt").write_text(report.summary_text())
    report.files.append("summary.txt")
    return report


def run_config_file(path, output_dir, seed: int | None = None) -> ExperimentReport:
    return run_experiment(parse_config(path), output_dir, seed)


def _worker(args):
    cfg, output_dir, seed = args
    return run_experiment(cfg, output_dir, seed)


def run_batch(
    configs: Sequence[ExperimentConfig], output_dir, seed: int | None = None, jobs: int = 1
) -> list[ExperimentReport]:
    """Run experiments (concurrently when ``jobs > 1``) and write the batch summary."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    work = [(cfg, str(output_dir), seed) for cfg in configs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_worker, work))
    else:
        reports = [_worker(w) for w in work]
    write_batch_summary(output_dir / "summary.txt", reports)
    return reports


def write_batch_summary(path, reports: Sequence[ExperimentReport]) -> None:
    lines = [f"{r.name}\t{r.kind}\t{r.status}" + (f"\t{r.error}" if r.error else "") for r in reports]
    passed = sum(r.status == PASS for r in reports)
    lines.append(f"# {passed}/{len(reports)} passed")
    Path(path).write_text("\n".join(lines) + "\n")
