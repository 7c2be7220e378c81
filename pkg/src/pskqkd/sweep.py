"""Distance sweeps, modulation-variance optimization and CSV/config I/O."""

from __future__ import annotations

import csv
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .channel import Detection, DetectorParams, LinkParams
from .errors import ConfigError, PhysicalityError
from .keyrate import KeyRateReport, Path, secret_key_rate
from .modulation import ModulationScheme, correlation_Z, gaussian_correlation

PATH_TOL = 1e-8
VA_BOUNDS = (0.05, 2.0)
OPTIMIZE = "optimize"


def make_scheme(protocol: str, va: float) -> ModulationScheme:
    protocol = protocol.lower()
    if protocol == "gaussian":
        return ModulationScheme.gaussian(va)
    m = re.fullmatch(r"psk(\d+)", protocol)
    if not m:
        raise ValueError(f"unknown protocol {protocol!r}")
    return ModulationScheme.psk_from_variance(int(m.group(1)), va)


# ---------------------------------------------------------------- config

def _parse_float(value):
    return float(value)


def _parse_protocol(value):
    v = str(value).strip().lower()
    if v != "gaussian" and not (re.fullmatch(r"psk(\d+)", v) and int(v[3:]) >= 2):
        raise ValueError("expected psk4, psk8 or gaussian")
    return v


def _parse_va(value):
    if isinstance(value, str) and value.strip().lower() == OPTIMIZE:
        return OPTIMIZE
    return float(value)


def _parse_float_list(value):
    if isinstance(value, str):
        items = [s for s in (p.strip() for p in value.split(",")) if s]
        return tuple(float(s) for s in items)
    return tuple(float(v) for v in value)


def _parse_path(value):
    v = str(value).strip().lower()
    if v not in ("closed", "matrix", "both"):
        raise ValueError("expected closed, matrix or both")
    return v


_PARSERS: dict[str, Callable] = {
    "protocol": _parse_protocol,
    "detection": lambda v: Detection(str(v).strip().lower()),
    "va": _parse_va,
    "beta": _parse_float,
    "eta": _parse_float,
    "eps_ele": _parse_float,
    "mu_db_per_km": _parse_float,
    "excess_noise": _parse_float_list,
    "distance_start": _parse_float,
    "distance_stop": _parse_float,
    "distance_step": _parse_float,
    "path": _parse_path,
    "seed": int,
    "output": str,
}
REQUIRED = ("protocol", "detection")


@dataclass(frozen=True)
class SweepConfig:
    protocol: str
    detection: Detection
    va: float | str = 1.0
    beta: float = 0.8
    eta: float = 0.6
    eps_ele: float = 0.05
    mu_db_per_km: float = 0.2
    excess_noise: tuple[float, ...] = (0.005, 0.01, 0.02)
    distance_start: float = 0.0
    distance_stop: float = 150.0
    distance_step: float = 1.0
    path: str = "matrix"
    seed: int = 0
    output: str = "-"

    def __post_init__(self):
        try:
            object.__setattr__(self, "detection", Detection(self.detection))
            object.__setattr__(self, "protocol", _parse_protocol(self.protocol))
            object.__setattr__(self, "path", _parse_path(self.path))
            object.__setattr__(self, "excess_noise", _parse_float_list(self.excess_noise))
            object.__setattr__(self, "va", _parse_va(self.va))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        problems = []
        if self.va != OPTIMIZE and not self.va >= 0:
            problems.append(f"va: must be >= 0 or '{OPTIMIZE}', got {self.va!r}")
        if not 0.0 <= self.beta <= 1.0:
            problems.append(f"beta: must lie in [0, 1], got {self.beta}")
        if not 0.0 < self.eta <= 1.0:
            problems.append(f"eta: must lie in (0, 1], got {self.eta}")
        if self.eps_ele < 0:
            problems.append(f"eps_ele: must be >= 0, got {self.eps_ele}")
        if self.mu_db_per_km < 0:
            problems.append(f"mu_db_per_km: must be >= 0, got {self.mu_db_per_km}")
        if not self.excess_noise:
            problems.append("excess_noise: needs at least one value")
        elif min(self.excess_noise) < 0:
            problems.append(f"excess_noise: values must be >= 0, got {self.excess_noise}")
        if self.distance_step <= 0:
            problems.append(f"distance_step: must be > 0, got {self.distance_step}")
        if self.distance_start < 0:
            problems.append(f"distance_start: must be >= 0, got {self.distance_start}")
        if self.distance_stop < self.distance_start:
            problems.append(f"distance_stop: must be >= distance_start, got {self.distance_stop}")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def from_mapping(cls, values: dict) -> SweepConfig:
        """Strictly parse a mapping of field names to strings or typed values."""
        unknown = sorted(set(values) - set(_PARSERS))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        for key in REQUIRED:
            if key not in values:
                raise ConfigError(f"missing required config key: {key}")
        parsed = {}
        for key, raw in values.items():
            try:
                parsed[key] = _PARSERS[key](raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from None
        return cls(**parsed)

    def distances(self) -> list[float]:
        n = int(math.floor((self.distance_stop - self.distance_start) / self.distance_step + 1e-9)) + 1
        return [round(self.distance_start + i * self.distance_step, 10) for i in range(n)]

    def detector(self) -> DetectorParams:
        return DetectorParams(self.detection, self.eta, self.eps_ele)

    def link(self, length_km: float, excess_noise: float) -> LinkParams:
        return LinkParams(length_km, excess_noise, self.mu_db_per_km)


def _format_value(value) -> str:
    if isinstance(value, Detection):
        return value.value
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: SweepConfig) -> str:
    """Serialize as the flat ``key = value`` format read by :func:`load_config`."""
    return "".join(f"{f.name} = {_format_value(getattr(config, f.name))}\n" for f in fields(config))


def parse_config_text(text: str) -> dict:
    """Flat key = value lines; blank lines and lines starting with '#' are ignored."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def load_config(path, overrides: dict | None = None) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    values.update(overrides or {})
    return SweepConfig.from_mapping(values)


# ---------------------------------------------------------------- optimizer

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-3):
    """Maximize a unimodal f on [lo, hi] until the bracket is shorter than tol.

    Returns (x_best, f_best, evaluations) where evaluations maps x -> f(x)
    for every point visited.
    """
    evals = {}

    def g(x):
        if x not in evals:
            evals[x] = f(x)
        return evals[x]

    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = g(c), g(d)
    while b - a >= tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = g(d)
    g(0.5 * (a + b))
    x_best = max(evals, key=evals.get)
    return x_best, evals[x_best], evals


def gradient_sign_changes(values: Sequence[float]) -> int:
    signs = [s for s in np.sign(np.diff(values)) if s != 0]
    return sum(1 for s0, s1 in zip(signs, signs[1:]) if s0 != s1)


@dataclass(frozen=True)
class OptimizeResult:
    va: float
    delta_i: float
    method: str  # "golden" or "grid"
    n_evaluations: int


def optimize_variance(protocol: str, detection: Detection | str, link: LinkParams,
                      det: DetectorParams, beta: float, path: Path | str = Path.CLOSED_FORM,
                      bounds=VA_BOUNDS, tol: float = 1e-3) -> OptimizeResult:
    """Best modulation variance on ``bounds`` for a single link.

    A coarse 0.05-spaced scan decides the strategy: a unimodal profile is
    refined by golden-section search around the coarse maximum, otherwise a
    full scan at spacing ``tol`` is used. The best of all evaluated points is
    returned, so the result never falls below any coarse grid value.
    """
    det = DetectorParams(Detection(detection), det.efficiency, det.electronic_noise)

    def rate(va):
        return secret_key_rate(make_scheme(protocol, va), link, det, beta, path).delta_i

    lo, hi = bounds
    n_coarse = int(round((hi - lo) / 0.05)) + 1
    coarse = [round(x, 12) for x in np.linspace(lo, hi, n_coarse)]
    evals = {x: rate(x) for x in coarse}
    profile = [evals[x] for x in coarse]

    if gradient_sign_changes(profile) <= 1:
        i = int(np.argmax(profile))
        a, b = coarse[max(i - 1, 0)], coarse[min(i + 1, n_coarse - 1)]
        _, _, more = golden_section_max(rate, a, b, tol)
        evals.update(more)
        method = "golden"
    else:
        n_fine = int(math.floor((hi - lo) / tol)) + 1
        for x in np.linspace(lo, lo + (n_fine - 1) * tol, n_fine):
            x = round(float(x), 12)
            if x not in evals:
                evals[x] = rate(x)
        method = "grid"
    best = max(evals, key=evals.get)
    return OptimizeResult(best, evals[best], method, len(evals))


# ---------------------------------------------------------------- sweeps

COLUMNS = (
    "protocol", "detection", "L_km", "epsilon", "V_A", "T", "chi_line", "chi_det", "chi_total",
    "I_AB", "chi_BE", "delta_I", "delta_I_clamped",
    "lambda_1", "lambda_2", "lambda_3", "lambda_4", "lambda_5", "path",
)


@dataclass(frozen=True)
class SweepRow:
    protocol: str
    detection: str
    length_km: float
    epsilon: float
    va: float
    transmittance: float
    chi_line: float
    chi_det: float
    chi_total: float
    i_ab: float
    chi_be: float
    delta_i: float
    delta_i_clamped: float
    lambdas: tuple[float, float, float, float, float]
    path: str

    def values(self) -> list:
        d = asdict(self)
        lambdas = d.pop("lambdas")
        path = d.pop("path")
        return [*d.values(), *lambdas, path]


def _spectra_gap(a: KeyRateReport, b: KeyRateReport) -> float:
    return max(abs(x - y) for x, y in zip(a.symplectic_spectrum, b.symplectic_spectrum))


def evaluate_point(config: SweepConfig, length_km: float, excess_noise: float) -> SweepRow:
    link = config.link(length_km, excess_noise)
    det = config.detector()
    rate_path = Path.CLOSED_FORM if config.path == "closed" else Path.MATRIX
    if config.va == OPTIMIZE:
        va = optimize_variance(config.protocol, config.detection, link, det, config.beta,
                               Path.CLOSED_FORM if config.path != "matrix" else Path.MATRIX).va
    else:
        va = config.va
    scheme = make_scheme(config.protocol, va)
    report = secret_key_rate(scheme, link, det, config.beta, rate_path)
    if config.path == "both":
        closed = secret_key_rate(scheme, link, det, config.beta, Path.CLOSED_FORM)
        gap = _spectra_gap(report, closed)
        if gap > PATH_TOL:
            raise PhysicalityError(
                f"closed-form and matrix spectra differ by {gap:.3e} at L={length_km}, eps={excess_noise}")

    b = report.budget
    return SweepRow(
        protocol=config.protocol,
        detection=config.detection.value,
        length_km=length_km,
        epsilon=excess_noise,
        va=va,
        transmittance=b.transmittance,
        chi_line=b.chi_line,
        chi_det=b.chi_det,
        chi_total=b.chi_total,
        i_ab=report.i_ab,
        chi_be=report.chi_be,
        delta_i=report.delta_i,
        delta_i_clamped=report.delta_i_clamped,
        lambdas=report.symplectic_spectrum,
        path=config.path,
    )


def run_sweep(config: SweepConfig, workers: int = 1) -> list[SweepRow]:
    """Evaluate every (excess noise, distance) point, ordered by grid index."""
    grid = [(eps, L) for eps in config.excess_noise for L in config.distances()]

    def task(point):
        eps, L = point
        return evaluate_point(config, L, eps)

    if workers <= 1:
        return [task(p) for p in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, grid))


@dataclass(frozen=True)
class ZeroCrossing:
    protocol: str
    detection: str
    epsilon: float
    distance_km: float | None
    status: str  # "crossed", "positive_to_end" or "never_positive"


def zero_crossings(rows: Iterable[SweepRow]) -> list[ZeroCrossing]:
    """Largest positive-rate distance per (protocol, detection, epsilon), linear in L."""
    groups: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        groups.setdefault((r.protocol, r.detection, r.epsilon), []).append(r)
    out = []
    for (protocol, detection, eps), group in groups.items():
        group = sorted(group, key=lambda r: r.length_km)
        positive = [i for i, r in enumerate(group) if r.delta_i > 0]
        if not positive:
            out.append(ZeroCrossing(protocol, detection, eps, None, "never_positive"))
            continue
        i = positive[-1]
        if i == len(group) - 1:
            out.append(ZeroCrossing(protocol, detection, eps, None, "positive_to_end"))
            continue
        r0, r1 = group[i], group[i + 1]
        frac = r0.delta_i / (r0.delta_i - r1.delta_i)
        dist = r0.length_km + frac * (r1.length_km - r0.length_km)
        out.append(ZeroCrossing(protocol, detection, eps, dist, "crossed"))
    return out


def sweep_correlation(va_grid: Iterable[float]) -> list[tuple[float, float, float, float]]:
    """(V_A, Z_4, Z_8, Z_G) for each modulation variance."""
    table = []
    for va in va_grid:
        if va < 0:
            raise ValueError(f"modulation variance must be >= 0, got {va}")
        alpha = math.sqrt(va / 2.0)
        table.append((va, correlation_Z(4, alpha), correlation_Z(8, alpha), gaussian_correlation(va)))
    return table


# ---------------------------------------------------------------- output

def format_float(x: float) -> str:
    return f"{x:.12g}"


def _format_cell(v) -> str:
    return format_float(v) if isinstance(v, float) else str(v)


def render_csv(rows: Sequence[SweepRow], config: SweepConfig) -> str:
    lines = [f"# pskqkd sweep, version {__version__}"]
    lines += [f"# {line}" for line in dump_config(config).splitlines()]
    lines.append(",".join(COLUMNS))
    lines += [",".join(_format_cell(v) for v in r.values()) for r in rows]
    for zc in zero_crossings(rows):
        dist = "" if zc.distance_km is None else format_float(zc.distance_km)
        lines.append(f"# zero_crossing protocol={zc.protocol} detection={zc.detection} "
                     f"epsilon={format_float(zc.epsilon)} L_km={dist} status={zc.status}")
    return "\n".join(lines) + "\n"


def emit_csv(rows: Sequence[SweepRow], path, config: SweepConfig) -> None:
    text = render_csv(rows, config)
    if str(path) == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_csv_rows(path) -> list[dict]:
    """Data rows of an emitted CSV as dicts of strings (comment lines skipped)."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))
