"""Experiment runners, point-process statistics, persistence and SVG output.

All randomness comes from the configured seed through the counter-based noise:
trial t reads NoiseSource(seed, dist).trial(t), so results do not depend on the
order in which trials run.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .errors import ConfigError, ConsistencyError, DomainError, SolverError, ToeplitzError
from .expansion import compute_Pk
from .field import FieldEvaluator, check_window, find_zeros, monomials
from .linalg import build_toeplitz, eigenvalues
from .noise import NoiseSource, sample_block
from .points import PointProcessSample
from .roots import region_arrays, solve_lambda_many
from .symbol import Symbol, distance_to_curve_many, resolve_symbol, sample_curve
from .tableaux import field_terms

MIN_TRIALS_SIGNIFICANCE = 30
MIN_LEVY_SAMPLES = 10_000
CSV_FIELDS = ("trial", "N", "gamma", "seed", "re", "im", "dist_to_curve", "wind_index_or_NA",
              "is_outlier")


@dataclass
class ExperimentConfig:
    symbol: str = "jordan"
    N: list = field(default_factory=lambda: [200])
    gamma: float = 0.75
    trials: int = 10
    seed: int = 0
    dist: str = "complex-gaussian"
    eps: float = 0.1
    wind: list = field(default_factory=list)
    L: int = 20
    windows: list = field(default_factory=list)  # (re0, re1, im0, im1)
    disks: list = field(default_factory=list)  # (re, im, radius)
    out: str = "out"
    eig_backend: str = "lapack"
    alpha: float = 0.05

    def __post_init__(self):
        if isinstance(self.N, (int, np.integer)):
            self.N = [int(self.N)]
        self.N = [int(n) for n in self.N]
        self.wind = [int(w) for w in (self.wind if isinstance(self.wind, list) else [self.wind])]
        self.windows = [tuple(float(v) for v in w) for w in self.windows]
        self.disks = [tuple(float(v) for v in d) for d in self.disks]
        self.validate()

    def validate(self):
        if not self.gamma > 0.5:
            raise ConfigError(f"gamma must exceed 1/2, got {self.gamma}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if not self.N or any(n < 1 for n in self.N):
            raise ConfigError("N must be a positive integer or list")
        if not 0 <= self.L <= 64:
            raise ConfigError("L must lie in [0, 64]")
        for w in self.windows:
            if len(w) != 4 or w[1] < w[0] or w[3] < w[2]:
                raise ConfigError(f"bad window {w}: expected re0 <= re1, im0 <= im1")
        for d in self.disks:
            if len(d) != 3 or d[2] < 0:
                raise ConfigError(f"bad disk {d}: expected re, im, radius >= 0")
        try:
            resolve_symbol(self.symbol)
            NoiseSource(0, self.dist)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def sym(self) -> Symbol:
        return resolve_symbol(self.symbol)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        out = asdict(self)
        out["windows"] = [list(w) for w in self.windows]
        out["disks"] = [list(d) for d in self.disks]
        return out


def output_root(cfg_out: str) -> Path:
    """Output directory; the TOL_OUT_DIR environment variable overrides it."""
    return Path(os.environ.get("TOL_OUT_DIR") or cfg_out)


def disk_window(disk) -> tuple:
    cx, cy, r = disk
    return (cx - r, cx + r, cy - r, cy + r)


def region_labels(s: Symbol, zs) -> np.ndarray:
    """Winding index d1 - d0 of each point (by root moduli)."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if zs.size == 0:
        return np.zeros(0, dtype=int)
    d0, _ = region_arrays(s, solve_lambda_many(s, zs))
    return s.d1 - d0.astype(int)


# ---------------------------------------------------------------------------
# Eigenvalue outliers


def perturbed_matrix(s: Symbol, N: int, gamma: float, src) -> np.ndarray:
    return build_toeplitz(s, N) + float(N) ** (-gamma) * sample_block(src, N)


def run_outlier_experiment(cfg: ExperimentConfig, N: int = None):
    """Eigenvalues of T_N(a) + N^-g E_N per trial.

    Returns (samples, rows, summary): one PointProcessSample of outliers
    (distance to the curve > eps) per trial, CSV rows for every eigenvalue, and
    counts. Trials whose eigensolve fails are listed in summary["failed"].
    """
    s = cfg.sym
    N = cfg.N[0] if N is None else N
    base = NoiseSource(cfg.seed, cfg.dist)
    T = build_toeplitz(s, N)
    samples, rows, failed = [], [], []
    for t in range(cfg.trials):
        src = base.trial(t)
        M = T + float(N) ** (-cfg.gamma) * sample_block(src, N)
        try:
            ev = eigenvalues(M, cfg.eig_backend)
        except (SolverError, np.linalg.LinAlgError) as exc:
            failed.append({"trial": t, "error": str(exc)})
            continue
        dist = distance_to_curve_many(s, ev)
        out = dist > cfg.eps
        labels = np.full(ev.size, -10 ** 6, dtype=int)
        labels[out] = region_labels(s, ev[out])
        for z, dz, w, o in zip(ev, dist, labels, out):
            rows.append({"trial": t, "N": N, "gamma": cfg.gamma, "seed": cfg.seed,
                         "re": float(z.real), "im": float(z.imag), "dist_to_curve": float(dz),
                         "wind_index_or_NA": int(w) if o else "NA", "is_outlier": int(o)})
        samples.append(PointProcessSample(ev[out], labels[out], np.ones(int(out.sum()), dtype=int),
                                          "eigen", {"trial": t, "N": N, "gamma": cfg.gamma,
                                                    "seed": cfg.seed}))
    summary = summarize_outliers(rows, cfg.trials)
    summary["failed"] = failed
    return samples, rows, summary


def summarize_outliers(rows, trials: int) -> dict:
    """Per-trial outlier counts and the number in the zero-winding region."""
    per = np.zeros(trials, dtype=int)
    outside = np.zeros(trials, dtype=int)
    for r in rows:
        if int(r["is_outlier"]):
            per[int(r["trial"])] += 1
            if str(r["wind_index_or_NA"]) == "0":
                outside[int(r["trial"])] += 1
    return {"trials": trials, "outliers_per_trial": per.tolist(),
            "outside_spectrum_per_trial": outside.tolist(),
            "clean_trials": int(np.sum(outside == 0)), "mean_outliers": float(per.mean())}


def count_in_disks(samples, disks) -> np.ndarray:
    """(trials, disks) counts with multiplicity."""
    out = np.zeros((len(samples), len(disks)), dtype=int)
    for i, smp in enumerate(samples):
        for j, (cx, cy, r) in enumerate(disks):
            inside = np.abs(smp.points - complex(cx, cy)) <= r
            out[i, j] = int(smp.multiplicity[inside].sum())
    return out


def count_in_windows(samples, windows) -> np.ndarray:
    return np.array([[smp.count_in(w) for w in windows] for smp in samples],
                    dtype=int).reshape(len(samples), len(windows))


# ---------------------------------------------------------------------------
# Field zeros


def run_field_zero_experiment(cfg: ExperimentConfig, wind: int = None):
    """Zeros of P_w^L in each window (disks are handled through their bounding
    squares) for `trials` seeds.

    Returns (samples, summary); each sample holds the zeros of one seed in
    all windows.
    """
    s = cfg.sym
    if wind is None:
        if not cfg.wind:
            raise ConfigError("field experiments need a wind index")
        wind = cfg.wind[0]
    rects = list(cfg.windows) + [disk_window(d) for d in cfg.disks]
    for r in rects:
        if r[1] > r[0] and r[3] > r[2]:
            try:
                check_window(s, wind, r, cfg.eps)
            except ToeplitzError as exc:
                raise ConfigError(f"window {r} failed region verification: {exc}") from exc
    terms = field_terms(s, wind, cfg.L)
    base = NoiseSource(cfg.seed, cfg.dist)
    samples = []
    for t in range(cfg.trials):
        fe = FieldEvaluator(s, wind, cfg.L, base.trial(t), terms=terms)
        pts, mult = [], []
        for r in rects:
            smp = find_zeros(fe, r, seed=derive_jitter_seed(cfg.seed, t))
            pts.extend(smp.points)
            mult.extend(smp.multiplicity)
        pts = np.array(pts, dtype=complex)
        samples.append(PointProcessSample(pts, np.full(pts.size, wind, dtype=int),
                                          np.array(mult, dtype=int), "field-zero",
                                          {"trial": t, "L": cfg.L, "wind": wind, "seed": cfg.seed}))
    counts = (count_in_windows(samples, cfg.windows) if cfg.windows
              else np.zeros((len(samples), 0), dtype=int))
    dcounts = count_in_disks(samples, cfg.disks)
    summary = {"trials": cfg.trials, "L": cfg.L, "wind": wind,
               "window_counts": counts.tolist(), "disk_counts": dcounts.tolist(),
               "mean_window_counts": counts.mean(axis=0).tolist() if counts.size else [],
               "mean_disk_counts": dcounts.mean(axis=0).tolist() if dcounts.size else []}
    return samples, summary


def derive_jitter_seed(seed: int, t: int) -> int:
    return (int(seed) * 1_000_003 + t) % (1 << 63)


# ---------------------------------------------------------------------------
# Comparison of point processes


def _nn_spacing(samples, window) -> float:
    gaps = []
    for smp in samples:
        z = smp.points[smp.in_window(window)] if window is not None else smp.points
        if z.size >= 2:
            d = np.abs(z[:, None] - z[None, :])
            np.fill_diagonal(d, np.inf)
            gaps.extend(d.min(axis=1))
    return float(np.mean(gaps)) if gaps else float("nan")


def compare_counts(a, b, alpha: float = 0.05) -> dict:
    """Two count samples: means, variances, rank test and a 3-SE mean check.

    The rank statistic is the standardized Mann-Whitney U (0 for identical
    samples). With fewer than 30 trials on either side no significance is
    computed and `agree` is None.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rep = {"n_a": int(a.size), "n_b": int(b.size),
           "mean_a": float(a.mean()) if a.size else float("nan"),
           "mean_b": float(b.mean()) if b.size else float("nan"),
           "var_a": float(a.var(ddof=1)) if a.size > 1 else float("nan"),
           "var_b": float(b.var(ddof=1)) if b.size > 1 else float("nan"),
           "hist_a": np.bincount(a.astype(int)).tolist() if a.size else [],
           "hist_b": np.bincount(b.astype(int)).tolist() if b.size else []}
    if min(a.size, b.size) < MIN_TRIALS_SIGNIFICANCE:
        rep.update(rank_statistic=None, p_value=None, mean_ok=None, agree=None,
                   note=f"fewer than {MIN_TRIALS_SIGNIFICANCE} trials: significance not computed")
        return rep
    n1, n2 = a.size, b.size
    if np.array_equal(np.sort(a), np.sort(b)):
        u, p = n1 * n2 / 2.0, 1.0
    else:
        res = stats.mannwhitneyu(a, b, alternative="two-sided")
        u, p = float(res.statistic), float(res.pvalue)
    sigma = math.sqrt(n1 * n2 * (n1 + n2 + 1) / 12.0)
    se = math.sqrt(rep["var_a"] / n1 + rep["var_b"] / n2)
    diff = abs(rep["mean_a"] - rep["mean_b"])
    mean_ok = diff <= 3 * se if se > 0 else diff == 0
    rep.update(rank_statistic=(u - n1 * n2 / 2.0) / sigma, p_value=p, combined_se=se,
               mean_ok=bool(mean_ok), agree=bool(mean_ok and p >= alpha))
    return rep


def compare_point_processes(samples_a, samples_b, windows=(), disks=(), alpha: float = 0.05) -> dict:
    """Per-window count comparison plus mean nearest-neighbour spacing."""
    report = {"windows": [], "disks": []}
    if windows:
        ca, cb = count_in_windows(samples_a, windows), count_in_windows(samples_b, windows)
        for j, w in enumerate(windows):
            rep = compare_counts(ca[:, j], cb[:, j], alpha)
            rep.update(window=list(w), nn_spacing_a=_nn_spacing(samples_a, w),
                       nn_spacing_b=_nn_spacing(samples_b, w))
            report["windows"].append(rep)
    if disks:
        ca, cb = count_in_disks(samples_a, disks), count_in_disks(samples_b, disks)
        for j, dsk in enumerate(disks):
            rep = compare_counts(ca[:, j], cb[:, j], alpha)
            rep.update(disk=list(dsk))
            report["disks"].append(rep)
    flags = [r["agree"] for r in report["windows"] + report["disks"]]
    report["agree"] = None if any(f is None for f in flags) else all(flags)
    return report


# ---------------------------------------------------------------------------
# Spectral radius of pure noise and Levy concentration


def spectral_radius_samples(N: int, trials: int, seed: int, dist: str = "complex-gaussian",
                            backend: str = "lapack") -> np.ndarray:
    base = NoiseSource(seed, dist)
    out = np.empty(trials)
    for t in range(trials):
        E = sample_block(base.trial(t), N) / math.sqrt(N)
        out[t] = np.max(np.abs(eigenvalues(E, backend)))
    return out


def run_spectral_radius(Ns, trials: int, seed: int, dist: str = "complex-gaussian",
                        backend: str = "lapack") -> list:
    """Quantiles (5, 25, 50, 75, 95 %) of the spectral radius of N^-1/2 E_N."""
    table = []
    for N in Ns:
        rho = spectral_radius_samples(N, trials, seed, dist, backend)
        q = np.percentile(rho, [5, 25, 50, 75, 95])
        table.append({"N": int(N), "trials": trials,
                      **{f"q{p}": float(v) for p, v in zip((5, 25, 50, 75, 95), q)}})
    return table


def estimate_levy_concentration(samples, eps_list, n_centers: int = 2000, grid: int = 41,
                                seed: int = 0) -> list:
    """Monte Carlo sup_w P(|X - w| <= eps) over candidate centres w.

    Centres are a subsample of the data plus a grid over its bounding box.
    """
    x = np.asarray(samples, dtype=complex).reshape(-1)
    if x.size < MIN_LEVY_SAMPLES:
        raise DomainError(f"need at least {MIN_LEVY_SAMPLES} samples, got {x.size}")
    for e in eps_list:
        if not 0 < e <= math.exp(-1):
            raise DomainError(f"eps {e} outside (0, 1/e]")
    pts = np.column_stack([x.real, x.imag])
    tree = cKDTree(pts)
    rng = np.random.default_rng(seed)
    centres = pts[rng.choice(x.size, size=min(n_centers, x.size), replace=False)]
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], grid), np.linspace(lo[1], hi[1], grid))
    centres = np.vstack([centres, np.column_stack([gx.ravel(), gy.ravel()])])
    table = []
    for e in eps_list:
        counts = tree.query_ball_point(centres, r=e, return_length=True)
        table.append({"eps": float(e), "levy": float(np.max(counts)) / x.size})
    return table


def field_samples(s: Symbol, wind: int, L: int, z: complex, seeds, dist: str = "complex-gaussian"):
    """Values of P_w^L(z) for many seeds.

    The field is linear in the noise minors, so coefficients of the distinct
    minors are computed once and only the minors vary with the seed.
    """
    C, XH, YH, SG = field_terms(s, wind, L)
    lams = solve_lambda_many(s, [z])[0]
    d0 = s.d1 - wind
    if int(np.sum(np.abs(lams) > 1)) != d0:
        raise DomainError(f"z={z} is not in the region of wind index {wind}")
    e = C.astype(np.int64)
    e[:, :d0] *= -1
    coef = SG * monomials(lams, e)[0]
    keys, inv = np.unique(np.hstack([XH, YH]), axis=0, return_inverse=True)
    A = np.zeros(keys.shape[0], dtype=complex)
    np.add.at(A, inv.reshape(-1), coef)
    k = abs(wind)
    rows, cols = keys[:, :k], keys[:, k:]
    out = np.empty(len(seeds), dtype=complex)
    for n, sd in enumerate(seeds):
        src = NoiseSource(sd, dist)
        out[n] = A @ np.linalg.det(src.entries(rows[:, :, None], cols[:, None, :]))
    return out


# ---------------------------------------------------------------------------
# Determinant identity check


def detcheck(s: Symbol, N: int, z: complex, gamma: float, src) -> dict:
    """Relative error of sum_k P_k(z) against det(T_N(a(z)) + N^-g E_N)."""
    T = build_toeplitz(s, N, z)
    E = sample_block(src, N)
    direct = complex(np.linalg.det(T + float(N) ** (-gamma) * E))
    parts = [compute_Pk(s, N, z, k, gamma, src).to_complex() for k in range(N + 1)]
    total = math.fsum(p.real for p in parts) + 1j * math.fsum(p.imag for p in parts)
    rel = abs(total - direct) / abs(direct) if direct != 0 else abs(total)
    return {"N": N, "z": [z.real, z.imag], "det": [direct.real, direct.imag],
            "sum_Pk": [total.real, total.imag], "rel_error": rel}


# ---------------------------------------------------------------------------
# Persistence


def save_csv(rows, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow(r)


def load_csv(path, s: Symbol = None, eps: float = None) -> list:
    """Read eigenvalue rows; with `s` given the region labels are recomputed
    and must match the stored ones."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["trial"] = int(r["trial"])
        r["N"] = int(r["N"])
        r["gamma"] = float(r["gamma"])
        r["seed"] = int(r["seed"])
        r["re"] = float(r["re"])
        r["im"] = float(r["im"])
        r["dist_to_curve"] = float(r["dist_to_curve"])
        r["is_outlier"] = int(r["is_outlier"])
        w = r["wind_index_or_NA"]
        r["wind_index_or_NA"] = w if w == "NA" else int(w)
    if s is not None:
        out = [r for r in rows if r["is_outlier"]]
        if out:
            labels = region_labels(s, [complex(r["re"], r["im"]) for r in out])
            for r, w in zip(out, labels):
                if r["wind_index_or_NA"] != int(w):
                    raise ConsistencyError(f"stored label {r['wind_index_or_NA']} != recomputed {w}")
    return rows


def save_json(obj, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def save_samples(samples, path) -> None:
    save_json([smp.to_json() for smp in samples], path)


def load_samples(path, s: Symbol = None) -> list:
    out = [PointProcessSample.from_json(o) for o in load_json(path)]
    if s is not None:
        for smp in out:
            if len(smp) and np.any(region_labels(s, smp.points) != smp.labels):
                raise ConsistencyError("stored region labels disagree with recomputed ones")
    return out


# ---------------------------------------------------------------------------
# SVG


def emit_plot(points, s: Symbol, legend: dict = None, size: int = 600, curve_points: int = 720) -> str:
    """SVG scatter of `points` with the symbol curve; equal-aspect axes.

    Output depends only on the inputs (fixed number formatting, no timestamps).
    """
    pts = np.asarray(points, dtype=complex).reshape(-1)
    curve = sample_curve(s, curve_points).points
    allz = np.concatenate([curve, pts])
    cx = 0.5 * (allz.real.max() + allz.real.min())
    cy = 0.5 * (allz.imag.max() + allz.imag.min())
    half = 0.55 * max(np.ptp(allz.real), np.ptp(allz.imag), 1e-9)
    scale = size / (2 * half)

    def xy(z):
        return (size / 2 + (z.real - cx) * scale, size / 2 - (z.imag - cy) * scale)

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>']
    ax0, ay0 = xy(complex(cx - half, 0.0))
    ax1, _ = xy(complex(cx + half, 0.0))
    bx0, by0 = xy(complex(0.0, cy - half))
    _, by1 = xy(complex(0.0, cy + half))
    lines.append(f'<line x1="{ax0:.3f}" y1="{ay0:.3f}" x2="{ax1:.3f}" y2="{ay0:.3f}" stroke="#bbb"/>')
    lines.append(f'<line x1="{bx0:.3f}" y1="{by0:.3f}" x2="{bx0:.3f}" y2="{by1:.3f}" stroke="#bbb"/>')
    path = " ".join(f"{'M' if i == 0 else 'L'}{x:.3f},{y:.3f}"
                    for i, (x, y) in enumerate(map(xy, curve)))
    lines.append(f'<path d="{path} Z" fill="none" stroke="#1f4e9a" stroke-width="1.2"/>')
    for z in pts:
        x, y = xy(z)
        lines.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="1.6" fill="#c0392b"/>')
    text = ", ".join(f"{k}={v}" for k, v in sorted((legend or {}).items()))
    text = text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    lines.append(f'<text x="10" y="20" font-family="monospace" font-size="12">{text}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
