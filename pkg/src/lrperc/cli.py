"""Command-line entry point: one subcommand per estimator or check.

Every run reads an optional INI file (an ``[experiment]`` section and an
optional ``[caps]`` section), applies ``--set key=value`` overrides, validates
all keys before any sampling, and writes under ``<out>/<subcommand>/``:

* the data files (CSV or JSON, each with a versioned header line),
* ``resolved.ini``, the validated experiment keys with defaults filled in,
* ``manifest.json``, written atomically when the run ends.

Worker count and output directory are execution settings: they appear in the
manifest but not in ``resolved.ini``, so data files are byte-identical across
worker counts. The default output directory is taken from ``LRPERC_OUT``.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__, core
from .kernel import Family, KernelSpec, kernel_table
from .output import atomic_write, json_bytes, sha256, write_csv, write_json, write_rows, ROW_COLUMNS
from .stats import EstimateCI

ENV_OUT = "LRPERC_OUT"
DEFAULT_OUT = "lrperc-out"


class ConfigError(ValueError):
    """Invalid or unknown configuration key."""


class GuardError(RuntimeError):
    """A resource cap would be exceeded."""


# ---------------------------------------------------------------------------
# value parsers
# ---------------------------------------------------------------------------

def _int(s) -> int:
    return int(str(s).strip())


def _pos_int(s) -> int:
    v = _int(s)
    if v < 1:
        raise ValueError("must be a positive integer")
    return v


def _u64(s) -> int:
    v = _int(s)
    if not 0 <= v < 1 << 64:
        raise ValueError("must be an unsigned 64-bit integer")
    return v


def _dim(s) -> int:
    v = _int(s)
    if v not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    return v


def _beta(s) -> float:
    v = float(s)
    if not (math.isfinite(v) and v >= 0):
        raise ValueError("beta must be finite and non-negative")
    return v


def _pos_float(s) -> float:
    v = float(s)
    if not (math.isfinite(v) and v > 0):
        raise ValueError("must be positive")
    return v


def _family(s) -> Family:
    key = str(s).strip().replace("_", "").replace("-", "").lower()
    for f in Family:
        if f.value.lower() == key or f.name.replace("_", "").lower() == key:
            return f
    raise ValueError(f"unknown kernel family {s!r}")


def _list(item):
    def parse(s):
        parts = [p for p in str(s).replace(";", ",").split(",") if p.strip()]
        if not parts:
            raise ValueError("empty list")
        return tuple(item(p) for p in parts)
    return parse


def _coords(s):
    if s is None or str(s).strip() == "":
        return None
    return tuple(_int(p) for p in str(s).replace(" ", ",").split(",") if p.strip())


def _bool(s) -> bool:
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _choice(*options):
    def parse(s):
        v = str(s).strip()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v
    return parse


def _criteria(s):
    out = set()
    for part in str(s).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-")
            out.update(range(int(a), int(b) + 1))
        else:
            out.add(int(part))
    if not out or not out <= set(range(1, 17)):
        raise ValueError("criteria must lie in 1..16")
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# schemas
# ---------------------------------------------------------------------------

_KERNEL = {"d": (_dim, 1), "family": (_family, Family.EXACT_CUBE), "beta": (_beta, 1.0)}

SCHEMAS = {
    "sample": {**_KERNEL, "n": (_pos_int, 32)},
    "distance": {**_KERNEL, "n": (_pos_int, 32), "u": (_coords, None), "v": (_coords, None),
                 "replicates": (_pos_int, 1000)},
    "lambda": {**_KERNEL, "n": (_list(_pos_int), (32,)), "replicates": (_pos_int, 1000)},
    "theta": {**_KERNEL, "n": (_list(_pos_int), (8, 16, 32, 64, 128)), "replicates": (_pos_int, 1000)},
    "submult": {**_KERNEL, "m": (_pos_int, 4), "n": (_pos_int, 4), "replicates": (_pos_int, 10000)},
    "theta-vs-beta": {"d": (_dim, 1), "family": (_family, Family.EXACT_CUBE),
                      "beta": (_list(_pos_float), (1.0, 2.0, 4.0, 8.0)),
                      "n": (_list(_pos_int), (8, 16, 32, 64, 128)), "replicates": (_pos_int, 1000)},
    "tail": {**_KERNEL, "n": (_pos_int, 64), "replicates": (_pos_int, 10000), "theta": (float, None),
             "fit_replicates": (_pos_int, 2000)},
    "quantiles": {**_KERNEL, "n": (_list(_pos_int), (16, 32, 64)), "replicates": (_pos_int, 10000),
                  "indirect": (_bool, False)},
    "diameter": {**_KERNEL, "n": (_list(_pos_int), (4, 8, 16, 32, 64)), "replicates": (_pos_int, 1000)},
    "compare-kernels": {"d": (_dim, 1), "beta": (_beta, 2.0), "family": (_family, Family.EXACT_CUBE),
                        "family_b": (_family, Family.TRUNCATED_POWER), "n": (_list(_pos_int), (64, 256)),
                        "replicates": (_pos_int, 2000), "kmax": (_pos_int, 16),
                        "with_diameter": (_bool, True)},
    "coupling-check": {"d": (_dim, 1), "beta": (_beta, 1.0), "n_fine": (_pos_int, 16),
                       "n_coarse": (_pos_int, 8), "clouds": (_pos_int, 1000)},
    "consets": {**_KERNEL, "n": (_pos_int, 9), "root": (_coords, None), "k_max": (_pos_int, 5),
                "replicates": (_pos_int, 1000)},
    "cutpoints": {"family": (_family, Family.EXACT_CUBE), "beta": (_beta, 1.0), "m": (_pos_int, 16),
                  "blocks": (_pos_int, 9), "block_scale": (_pos_int, 1), "replicates": (_pos_int, 10000)},
    "sphere": {**_KERNEL, "k": (_list(_pos_int), (2, 5, 10)), "replicates": (_pos_int, 10000),
               "radius": (_int, None)},
    "oracle": {**_KERNEL, "n": (_pos_int, 3), "statistic": (_choice("distance", "diameter"), "distance"),
               "u": (_coords, None), "v": (_coords, None)},
    "verify": {"scale": (_pos_float, 1.0), "criteria": (_criteria, tuple(range(1, 16)))},
}

COMMON = {"seed": (_u64, 1), "format": (_choice("csv", "json"), "csv")}
CAPS = {"diameter_exact": (_pos_int, 100_000), "enumeration": (_pos_int, 22), "memory": (_pos_int, 4 << 30)}


def _format_value(v) -> str:
    if isinstance(v, Family):
        return v.value
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


class ExperimentConfig:
    """Validated settings for one subcommand run."""

    def __init__(self, command: str, values: dict, caps: dict, workers: int, out: Path):
        self.command = command
        self.values = values
        self.caps = caps
        self.workers = workers
        self.out = out

    def __getitem__(self, key):
        return self.values[key]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def fmt(self) -> str:
        return self.values["format"]

    def kernel(self, beta=None, family=None) -> KernelSpec:
        return KernelSpec(family or self.values["family"], self.values["beta"] if beta is None else beta)

    def to_ini(self) -> str:
        lines = ["# lrperc resolved-config v1", "[experiment]", f"name = {self.command}"]
        lines += [f"{k} = {_format_value(v)}" for k, v in sorted(self.values.items())]
        lines += ["", "[caps]"]
        lines += [f"{k} = {_format_value(v)}" for k, v in sorted(self.caps.items())]
        return "\n".join(lines) + "\n"

    def snapshot(self) -> dict:
        return {"name": self.command,
                "experiment": {k: _format_value(v) for k, v in sorted(self.values.items())},
                "caps": dict(self.caps), "workers": self.workers, "out": str(self.out)}


def _parse_section(raw: dict, schema: dict, where: str) -> dict:
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    out = {}
    for key, (parse, default) in schema.items():
        if key in raw:
            try:
                out[key] = parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{where}.{key}: {exc}") from None
        else:
            out[key] = default
    return out


def resolve_config(command: str, path: str | None, overrides: list, seed, fmt, workers, out) -> ExperimentConfig:
    """Merge file, ``--set`` overrides and flags; validate every key."""
    raw_exp, raw_caps = {}, {}
    if path is not None:
        cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#", ";"))
        if not cp.read(path):
            raise ConfigError(f"cannot read config file {path}")
        extra = sorted(set(cp.sections()) - {"experiment", "caps"})
        if extra:
            raise ConfigError(f"unknown section(s): {', '.join(extra)}")
        if cp.has_section("experiment"):
            raw_exp = dict(cp["experiment"])
        if cp.has_section("caps"):
            raw_caps = dict(cp["caps"])
    name = raw_exp.pop("name", command)
    if name != command:
        raise ConfigError(f"config is for experiment {name!r}, not {command!r}")
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        if k.startswith("caps."):
            raw_caps[k[5:]] = v
        else:
            raw_exp[k] = v
    if seed is not None:
        raw_exp["seed"] = seed
    if fmt is not None:
        raw_exp["format"] = fmt
    values = _parse_section(raw_exp, {**COMMON, **SCHEMAS[command]}, "experiment")
    caps = _parse_section(raw_caps, CAPS, "caps")
    if workers is None:
        workers = 1
    if workers < 1:
        raise ConfigError("--workers must be positive")
    out_dir = Path(out or os.environ.get(ENV_OUT) or DEFAULT_OUT)
    return ExperimentConfig(command, values, caps, int(workers), out_dir)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _prov(cfg: ExperimentConfig, experiment: str, **kw) -> dict:
    row = {"experiment": experiment, "d": cfg.values.get("d", 1), "seed": cfg.seed}
    if "family" in cfg.values:
        row["family"] = cfg.values["family"].value
    if "beta" in cfg.values and not isinstance(cfg.values["beta"], tuple):
        row["beta"] = cfg.values["beta"]
    row.update(kw)
    if isinstance(row.get("family"), Family):
        row["family"] = row["family"].value
    return row


def _ci(cfg, experiment, n, statistic, ci: EstimateCI, **kw) -> dict:
    return _prov(cfg, experiment, n=n, statistic=statistic, mean=ci.mean, stderr=ci.stderr,
                 replicates=ci.replicates, **kw)


def _check_memory(cfg: ExperimentConfig, d: int, n: int) -> None:
    # CSR adjacency plus BFS work arrays: about (3^d + degree) int64 slots per vertex
    need = n**d * 8 * (3**d + 16)
    if need > cfg.caps["memory"]:
        raise GuardError(f"a box of side {n} in d={d} needs about {need} bytes, over the memory cap "
                         f"{cfg.caps['memory']}")


class Outputs:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.dir = cfg.out / cfg.command
        self.files: list = []

    def rows(self, stem: str, kind: str, rows, columns=ROW_COLUMNS) -> None:
        self.files.append(write_rows(self.dir / stem, kind, rows, self.cfg.fmt, columns))

    def table(self, stem: str, kind: str, columns, rows) -> None:
        if self.cfg.fmt == "csv":
            self.files.append(write_csv(self.dir / f"{stem}.csv", kind, columns, rows))
        else:
            self.files.append(write_json(self.dir / f"{stem}.json", kind,
                                         [dict(zip(columns, r)) for r in rows]))

    def document(self, stem: str, kind: str, payload) -> None:
        self.files.append(write_json(self.dir / f"{stem}.json", kind, payload))

    def raw(self, name: str, data: bytes) -> None:
        path = self.dir / name
        atomic_write(path, data)
        self.files.append(path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sample(cfg, out: Outputs) -> int:
    from .sampler import BoxSpec, sample_box
    from .rng import seed_derivation
    from .graph import LatticeGraph, degree_profile

    d, n = cfg["d"], cfg["n"]
    _check_memory(cfg, d, n)
    conf = sample_box(cfg.kernel(), BoxSpec(d, n), seed_derivation(cfg.seed, "cli/sample", 0),
                      max_vertices=max(1, cfg.caps["memory"] // (8 * (3**d + 16))))
    if cfg.fmt == "json":
        out.raw("configuration.json", (conf.to_json() + "\n").encode())
    else:
        out.raw("configuration.lrpc", conf.to_bytes())
    prof = degree_profile(LatticeGraph.from_configuration(conf))
    out.rows("summary", "sample", [
        _prov(cfg, "sample", n=n, statistic="long_edges", mean=len(conf.edges), replicates=1),
        _prov(cfg, "sample", n=n, statistic="mean_degree", mean=float(np.mean(prof.degrees)), replicates=1),
    ])
    return 0


def _box_point(d, n, p, default):
    p = default if p is None else p
    if len(p) != d:
        raise ConfigError(f"coordinates {p} do not have dimension {d}")
    return p


def cmd_distance(cfg, out: Outputs) -> int:
    from .estimators import pair_distances

    d, n = cfg["d"], cfg["n"]
    _check_memory(cfg, d, n)
    u = _box_point(d, n, cfg["u"], (0,) * d)
    v = _box_point(d, n, cfg["v"], (n - 1,) * d)
    x = pair_distances(cfg.kernel(), d, n, u, v, cfg["replicates"], cfg.seed, cfg.workers)
    ci = EstimateCI.from_samples(x, cfg.seed)
    vals, counts = np.unique(x, return_counts=True)
    out.rows("distance", "distance", [
        _ci(cfg, "distance", n, f"D({','.join(map(str, u))};{','.join(map(str, v))})", ci),
    ])
    out.table("distance_histogram", "distance-histogram", ("distance", "count"),
              [(int(a), int(b)) for a, b in zip(vals, counts)])
    return 0


LAMBDA_COLUMNS = ("experiment", "d", "family", "beta", "n", "statistic", "mean", "stderr", "lambda_hat",
                  "bracket_upper", "replicates", "seed", "note")


def _lambda_rows(cfg, ests, experiment="lambda", beta=None):
    rows = []
    for e in ests:
        c = e.corner_e1 if e.corner_e1.mean >= e.corner_ones.mean else e.corner_ones
        row = _prov(cfg, experiment, n=e.n, statistic="max corner mean distance", mean=c.mean,
                    stderr=c.stderr, lambda_hat=e.lambda_hat, bracket_upper=e.bracket_upper,
                    replicates=c.replicates)
        if beta is not None:
            row["beta"] = beta
        rows.append(row)
    return rows


def cmd_lambda(cfg, out: Outputs) -> int:
    from .estimators import lambda_series

    for n in cfg["n"]:
        _check_memory(cfg, cfg["d"], n)
    ests = lambda_series(cfg.kernel(), cfg["d"], cfg["n"], cfg["replicates"], cfg.seed, cfg.workers)
    out.rows("lambda", "lambda", _lambda_rows(cfg, ests), LAMBDA_COLUMNS)
    return 0


def _fit_rows(cfg, experiment, fit, beta=None):
    row = dict(statistic="theta_hat", mean=fit.theta_hat, stderr=fit.theta_stderr,
               note=f"method={fit.method}; flags={'|'.join(fit.flags) or 'none'}")
    extra = [dict(statistic="r_squared", mean=fit.r_squared), dict(statistic="intercept", mean=fit.intercept),
             dict(statistic="subadditive_inf", mean=fit.subadditive_inf)]
    rows = []
    for r in [row] + extra:
        rr = _prov(cfg, experiment, n=",".join(map(str, fit.n_grid)), **r)
        if beta is not None:
            rr["beta"] = beta
        rows.append(rr)
    return rows


def cmd_theta(cfg, out: Outputs) -> int:
    from .estimators import fit_theta_estimates, lambda_series

    for n in cfg["n"]:
        _check_memory(cfg, cfg["d"], n)
    ests = lambda_series(cfg.kernel(), cfg["d"], cfg["n"], cfg["replicates"], cfg.seed, cfg.workers)
    out.rows("lambda", "lambda", _lambda_rows(cfg, ests, "theta"), LAMBDA_COLUMNS)
    out.rows("theta", "theta", _fit_rows(cfg, "theta", fit_theta_estimates(ests)))
    return 0


def cmd_submult(cfg, out: Outputs) -> int:
    from .estimators import check_submultiplicativity

    m, n = cfg["m"], cfg["n"]
    _check_memory(cfg, cfg["d"], m * n)
    rep = check_submultiplicativity(cfg.kernel(), cfg["d"], m, n, cfg["replicates"], cfg.seed, cfg.workers)
    rows = _lambda_rows(cfg, [rep.lambda_mn, rep.lambda_m, rep.lambda_n], "submult")
    for row, which in zip(rows, ("lambda(mn)", "lambda(m)", "lambda(n)")):
        row["note"] = which
    rows.append(_prov(cfg, "submult", n=m * n, statistic="lambda(m)*lambda(n)", mean=rep.product))
    rows.append(_prov(cfg, "submult", n=m * n, statistic="z_score", mean=rep.z_score,
                      note="lambda(mn) - lambda(m) lambda(n) in standard errors"))
    out.rows("submult", "submult", rows, LAMBDA_COLUMNS)
    return 0


def cmd_theta_vs_beta(cfg, out: Outputs) -> int:
    from .estimators import separation_z, theta_vs_beta

    for n in cfg["n"]:
        _check_memory(cfg, cfg["d"], n)
    table = theta_vs_beta(cfg["family"], cfg["d"], cfg["beta"], cfg["n"], cfg["replicates"], cfg.seed,
                          cfg.workers)
    rows = []
    for r in table:
        note = "reference row, theta(0) = 1" if r.fit is None else ""
        rows.append(_prov(cfg, "theta-vs-beta", beta=r.beta, n=",".join(map(str, cfg["n"])),
                          statistic="theta_hat", mean=r.theta_hat, stderr=r.theta_stderr, note=note))
        if r.fit is not None:
            rows.append(_prov(cfg, "theta-vs-beta", beta=r.beta, n=",".join(map(str, cfg["n"])),
                              statistic="theta_log_beta", mean=r.theta_log_beta))
    body = [r for r in table if r.fit is not None]
    for (a, b), z in zip(zip(body, body[1:]), separation_z(body)):
        rows.append(_prov(cfg, "theta-vs-beta", beta=f"{a.beta!r}->{b.beta!r}", statistic="separation_z",
                          mean=z))
    out.rows("theta_vs_beta", "theta-vs-beta", rows)
    return 0


def cmd_tail(cfg, out: Outputs) -> int:
    from .estimators import exponential_moment, fit_theta_estimates, lambda_series, tail_profile

    d, n = cfg["d"], cfg["n"]
    _check_memory(cfg, d, n)
    kern = cfg.kernel()
    theta = cfg["theta"]
    rows = []
    if theta is None:
        grid = [2**j for j in range(2, int(math.log2(n)) + 1)]
        fit = fit_theta_estimates(lambda_series(kern, d, grid, cfg["fit_replicates"], cfg.seed, cfg.workers))
        theta = fit.theta_hat
        rows += _fit_rows(cfg, "tail", fit)
    prof = tail_profile(kern, d, n, cfg["replicates"], theta, cfg.seed, cfg.workers,
                        min_replicates=min(cfg["replicates"], 10_000))
    mom = exponential_moment(kern, d, n, cfg["replicates"], theta, cfg.seed, workers=cfg.workers)
    rows += [
        _prov(cfg, "tail", n=n, statistic="eta_hat", mean=prof.eta_hat, stderr=prof.eta_stderr,
              replicates=cfg["replicates"], note=f"fit status {prof.status}; reported, not asserted"),
        _prov(cfg, "tail", n=n, statistic="upper_threshold 1/(1-theta)", mean=prof.upper_threshold),
        _prov(cfg, "tail", n=n, statistic="divergence_threshold d/(1-theta)", mean=prof.divergence_threshold),
        _ci(cfg, "tail", n, "E[exp((D/n^theta)^0.4)]", mom),
    ]
    out.rows("tail", "tail", rows)
    out.table("survival", "tail-survival", ("n", "theta", "value", "survival"),
              [(n, theta, float(v), float(s)) for v, s in zip(prof.values, prof.survival)])
    return 0


def cmd_quantiles(cfg, out: Outputs) -> int:
    from .estimators import estimate_lambda, quantile_point_to_box

    rows = []
    for n in cfg["n"]:
        _check_memory(cfg, cfg["d"], 5 * n)
        lam = estimate_lambda(cfg.kernel(), cfg["d"], n, cfg["replicates"], cfg.seed, cfg.workers)
        q = quantile_point_to_box(cfg.kernel(), cfg["d"], n, cfg["replicates"], cfg.seed,
                                  lambda_hat=lam.lambda_hat, indirect=cfg["indirect"], workers=cfg.workers)
        lo, hi = q.band
        for stat, val in (("q01", q.q01), ("q99", q.q99), ("q01/lambda_hat", lo), ("q99/lambda_hat", hi)):
            rows.append(_prov(cfg, "quantiles", n=n, statistic=stat, mean=val, replicates=cfg["replicates"],
                              note=q.statistic))
        rows.append(_prov(cfg, "quantiles", n=n, statistic="lambda_hat", mean=lam.lambda_hat,
                          stderr=lam.stderr, replicates=cfg["replicates"]))
    out.rows("quantiles", "quantiles", rows)
    return 0


def cmd_diameter(cfg, out: Outputs) -> int:
    from .estimators import diameter_scaling

    d = cfg["d"]
    for n in cfg["n"]:
        _check_memory(cfg, d, n)
        if n**d > cfg.caps["diameter_exact"]:
            raise GuardError(f"exact diameter of {n**d} vertices exceeds the cap {cfg.caps['diameter_exact']}")
    res = diameter_scaling(cfg.kernel(), d, cfg["n"], cfg["replicates"], cfg.seed,
                           cfg.caps["diameter_exact"], cfg.workers)
    rows = [_ci(cfg, "diameter", n, "E[diameter]", ci, note="exact") for n, ci in zip(res.n_grid, res.diameters)]
    rows += _fit_rows(cfg, "diameter", res.fit)
    rows[len(res.n_grid)]["note"] += "; exponent of E[dia]+1"
    out.rows("diameter", "diameter", rows)
    return 0


def cmd_compare_kernels(cfg, out: Outputs) -> int:
    from .estimators import kernel_comparison
    from .kernel import kernel_gap

    d, beta = cfg["d"], cfg["beta"]
    a, b = cfg.kernel(), cfg.kernel(family=cfg["family_b"])
    pair = f"{a.family.value}/{b.family.value}"
    rows = []
    for n in cfg["n"]:
        _check_memory(cfg, d, n)
        cmp_ = kernel_comparison(a, b, d, n, cfg["replicates"], cfg.seed, cfg["with_diameter"], cfg.workers)
        names = ["corner"] + (["diameter"] if cfg["with_diameter"] else [])
        for which in names:
            q, qi = cmp_.q99(which)
            rows.append(_prov(cfg, "compare-kernels", family=pair, n=n, statistic=f"{which} ratio q99", mean=q,
                              replicates=cfg["replicates"]))
            rows.append(_prov(cfg, "compare-kernels", family=pair, n=n, statistic=f"{which} inverse ratio q99",
                              mean=qi, replicates=cfg["replicates"]))
        rows.append(_prov(cfg, "compare-kernels", family=pair, n=n, statistic="identical_fraction",
                          mean=cmp_.identical_fraction, replicates=cfg["replicates"]))
    if d == 1 and {a.family, b.family} == {Family.EXACT_CUBE, Family.TRUNCATED_POWER}:
        gaps = [kernel_gap((k,), beta) for k in range(2, cfg["kmax"] + 1)]
        rows.append(_prov(cfg, "compare-kernels", family=pair, statistic="scaled_gap_sup", mean=max(gaps),
                          note=f"k in [2, {cfg['kmax']}]"))
    out.rows("compare_kernels", "compare-kernels", rows)
    out.table("kernel_table", "kernel-table", ("d", "family", "beta", "displacement", "probability"),
              kernel_table([a, b], d, cfg["kmax"]))
    return 0


def cmd_coupling_check(cfg, out: Outputs) -> int:
    from .estimators import scaling_coupling_check

    chk = scaling_coupling_check(cfg["beta"], cfg["d"], cfg["n_fine"], cfg["n_coarse"], cfg["clouds"],
                                 cfg.seed, cfg.workers)
    fam = "PoissonCloud"
    n = f"{chk.n_fine}->{chk.n_coarse}"
    out.rows("coupling_check", "coupling-check", [
        _prov(cfg, "coupling-check", family=fam, n=n, statistic="pairs", mean=chk.pairs, replicates=chk.clouds),
        _prov(cfg, "coupling-check", family=fam, n=n, statistic="violations D'>3D", mean=chk.violations,
              replicates=chk.clouds),
        _prov(cfg, "coupling-check", family=fam, n=n, statistic="violations D'>2D+1",
              mean=chk.violations_2d_plus_1, replicates=chk.clouds, note="recorded only"),
        _prov(cfg, "coupling-check", family=fam, n=n, statistic="max(D'-2D)", mean=chk.max_excess_over_2d,
              replicates=chk.clouds),
    ])
    if not chk.passed:
        raise AssertionError(f"{chk.violations} pairs violate D' <= 3 D")
    return 0


def cmd_consets(cfg, out: Outputs) -> int:
    from .sampler import BoxSpec
    from .structure import MAX_SET_SIZE, connected_set_study

    d, n = cfg["d"], cfg["n"]
    _check_memory(cfg, d, n)
    if cfg["k_max"] > MAX_SET_SIZE:
        raise GuardError(f"k_max is capped at {MAX_SET_SIZE}")
    root = _box_point(d, n, cfg["root"], (n // 2,) * d)
    st = connected_set_study(cfg.kernel(), BoxSpec(d, n), root, cfg["k_max"], cfg["replicates"], cfg.seed,
                             cfg.workers)
    rows = []
    for k, ci, b, ev, eb in zip(st.k, st.mean_count, st.bound, st.event_freq, st.event_bound):
        rows.append(_ci(cfg, "consets", n, f"mean |CS_{k}|", ci, note=f"bound (4 mu)^k = {float(b)!r}"))
        rows.append(_ci(cfg, "consets", n, f"P(avg degree >= 20 mu) k={k}", ev,
                        note=f"bound exp(-4 k mu) = {float(eb)!r}"))
    rows.append(_prov(cfg, "consets", n=n, statistic="mu", mean=st.mu))
    out.rows("consets", "consets", rows)
    return 0


def cmd_cutpoints(cfg, out: Outputs) -> int:
    from .oracle import exact_cut_point_probability
    from .structure import (cut_point_count_bound, cut_point_frequencies, separation_frequencies,
                            separation_probability)

    kern, m, R = cfg.kernel(), cfg["m"], cfg["replicates"]
    ind = cut_point_frequencies(kern, m, R, cfg.seed, cfg.workers)
    rows = []
    exact_ok = kern.family is Family.EXACT_CUBE
    for w in range(1, m - 1):
        ci = EstimateCI.from_samples(ind[:, w], cfg.seed)
        note = f"exact {exact_cut_point_probability(kern.beta, m, w)!r}" if exact_ok else ""
        rows.append(_ci(cfg, "cutpoints", m, f"P(cut at {w})", ci, note=note))
    cc = cut_point_count_bound(kern.beta, m)
    rows.append(_ci(cfg, "cutpoints", m, "E[#cut points]", EstimateCI.from_samples(ind.sum(axis=1), cfg.seed),
                    note=f"exact {cc.exact!r}; bound {cc.bound!r} ({cc.branch})"))
    M, s = cfg["blocks"], cfg["block_scale"]
    sep = separation_frequencies(kern, M, s, R, cfg.seed, cfg.workers)
    for w in range(1, M - 1, 2):
        ci = EstimateCI.from_samples(sep[:, w], cfg.seed)
        note = f"exact {separation_probability(kern.beta, M, w)!r}" if exact_ok else ""
        rows.append(_ci(cfg, "cutpoints", M * s, f"P(separation at block {w}) M={M} scale={s}", ci,
                        note=f"{note}; lower bound {0.1 * M ** (-kern.beta)!r}".lstrip("; ")))
    out.rows("cutpoints", "cutpoints", rows)
    return 0


def cmd_sphere(cfg, out: Outputs) -> int:
    from .structure import sphere_connection_d1_exact, sphere_connection_probability

    d, kern = cfg["d"], cfg.kernel()
    rows = []
    for k in cfg["k"]:
        sc = sphere_connection_probability(kern, d, k, cfg["replicates"], cfg.seed, cfg["radius"], cfg.workers)
        note = f"window radius {sc.radius}; bound beta 50^d k^-d = {kern.beta * 50.0**d * k ** (-d)!r}"
        if sc.tail is not None:
            note += f"; exact tail {sc.tail!r} folded in; exact {sphere_connection_d1_exact(kern.beta, k)!r}"
        else:
            note += f"; tail in [0, {sc.tail_upper!r}]"
        rows.append(_prov(cfg, "sphere", n=k, statistic=f"P(0 ~ sup-norm >= {k})", mean=sc.estimate,
                          stderr=sc.stderr, replicates=cfg["replicates"], note=note))
    out.rows("sphere", "sphere", rows)
    return 0


def cmd_oracle(cfg, out: Outputs) -> int:
    from .oracle import exact_diameter_law, exact_expected_distance
    from .sampler import BoxSpec

    d, n = cfg["d"], cfg["n"]
    box, cap = BoxSpec(d, n), cfg.caps["enumeration"]
    if cfg["statistic"] == "diameter":
        law = exact_diameter_law(cfg.kernel(), box, cap=cap)
        label = "diameter"
    else:
        u = _box_point(d, n, cfg["u"], (0,) * d)
        v = _box_point(d, n, cfg["v"], (n - 1,) * d)
        law = exact_expected_distance(cfg.kernel(), box, u, v, cap=cap)
        label = f"D({','.join(map(str, u))};{','.join(map(str, v))})"
    payload = {"d": d, "n": n, "family": cfg["family"].value, "beta": cfg["beta"], "seed": cfg.seed,
               "statistic": label, "law": {str(k): p for k, p in law.support},
               "expectation": law.expectation, "second_moment": law.second_moment}
    if cfg.fmt == "json":
        out.document("oracle", "oracle", payload)
    else:
        rows = [_prov(cfg, "oracle", n=n, statistic=f"P({label}={k})", mean=p) for k, p in law.support]
        rows.append(_prov(cfg, "oracle", n=n, statistic=f"E[{label}]", mean=law.expectation))
        out.rows("oracle", "oracle", rows)
    return 0


def cmd_verify(cfg, out: Outputs) -> int:
    from .acceptance import TITLES, criterion_16, run_criterion

    results = []
    for c in cfg["criteria"]:
        if c == 16:
            res = criterion_16(cfg.seed, workers=max(cfg.workers, 8), scale=cfg["scale"],
                               criteria=[x for x in cfg["criteria"] if x != 16] or None)
        else:
            res = run_criterion(c, cfg.seed, cfg.workers, cfg["scale"])
        print(res.line(), flush=True)
        results.append(res)
        out.rows(f"criterion_{c:02d}", f"criterion-{c:02d}", res.rows)
    out.table("summary", "verify-summary", ("criterion", "title", "status", "summary"),
              [(r.number, TITLES[r.number], "pass" if r.passed else "fail", r.summary) for r in results])
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {', '.join(map(str, failed))}" if failed else ""), flush=True)
    return 1 if failed else 0


COMMANDS = {
    "sample": (cmd_sample, "draw one configuration and write it to a file"),
    "distance": (cmd_distance, "Monte Carlo graph distance between two box vertices"),
    "lambda": (cmd_lambda, "estimate Lambda(n) from the box corner distances"),
    "theta": (cmd_theta, "fit the distance exponent over a grid of box sizes"),
    "submult": (cmd_submult, "check Lambda(mn) <= Lambda(m) Lambda(n)"),
    "theta-vs-beta": (cmd_theta_vs_beta, "distance exponent across a grid of beta values"),
    "tail": (cmd_tail, "tail profile of the rescaled corner distance"),
    "quantiles": (cmd_quantiles, "1% and 99% quantiles of point-to-box distances"),
    "diameter": (cmd_diameter, "exact diameters and their growth exponent"),
    "compare-kernels": (cmd_compare_kernels, "coupled comparison of two kernel families"),
    "coupling-check": (cmd_coupling_check, "scale coupling inequality on shared Poisson clouds"),
    "consets": (cmd_consets, "connected set counts around a root vertex"),
    "cutpoints": (cmd_cutpoints, "cut-point and separation-point frequencies (d = 1)"),
    "sphere": (cmd_sphere, "probability of an edge from the origin beyond sup distance k"),
    "oracle": (cmd_oracle, "exact laws by exhaustive enumeration on tiny boxes"),
    "verify": (cmd_verify, "run the acceptance criteria"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lrperc", description="Long-range percolation experiments.")
    p.add_argument("--version", action="version", version=f"lrperc {__version__} ({core.BACKEND_NAME})")
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name, (_, helptext) in COMMANDS.items():
        s = sub.add_parser(name, help=helptext.replace("%", "%%"), description=helptext)
        s.add_argument("--config", help="INI file with [experiment] and optional [caps] sections")
        s.add_argument("--seed", type=str, help="master seed (unsigned 64-bit)")
        s.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
        s.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./{DEFAULT_OUT})")
        s.add_argument("--format", choices=("csv", "json"), help="data file format")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (caps.<key> for caps)")
    return p


def _error_record(command: str, exc: BaseException) -> dict:
    kind = {ConfigError: "config", GuardError: "guard", AssertionError: "assertion",
            MemoryError: "guard"}.get(type(exc), "error")
    return {"command": command, "kind": kind, "type": type(exc).__name__, "message": str(exc),
            "traceback": traceback.format_exception_only(type(exc), exc)[-1].strip()}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    started = time.time()
    t0 = time.perf_counter()
    try:
        cfg = resolve_config(command, args.config, args.set, args.seed, args.format, args.workers, args.out)
    except (ConfigError, OSError, configparser.Error) as exc:
        rec = _error_record(command, exc if isinstance(exc, ConfigError) else ConfigError(str(exc)))
        print(json.dumps({"error": rec}, sort_keys=True), file=sys.stderr)
        return 2
    out = Outputs(cfg)
    out.dir.mkdir(parents=True, exist_ok=True)
    (out.dir / "error.json").unlink(missing_ok=True)
    atomic_write(out.dir / "resolved.ini", cfg.to_ini().encode())
    status, code, error = "complete", 0, None
    try:
        code = COMMANDS[command][0](cfg, out)
        if code != 0:
            status = "failed"
    except Exception as exc:  # recorded, then reported through the exit status
        error = _error_record(command, exc)
        status, code = "error", 2
        atomic_write(out.dir / "error.json", json_bytes("error", error))
        print(json.dumps({"error": error}, sort_keys=True), file=sys.stderr)
    manifest = {
        "artifact_version": __version__,
        "backend": core.BACKEND_NAME,
        "config": cfg.snapshot(),
        "outputs": [{"path": str(Path(f).relative_to(out.dir)), "sha256": sha256(f)}
                    for f in [out.dir / "resolved.ini"] + out.files],
        "started_unix": started,
        "wall_clock_seconds": time.perf_counter() - t0,
        "status": status,
        "exit_code": code,
        "error": error,
    }
    atomic_write(out.dir / "manifest.json", json_bytes("manifest", manifest))
    return code


def console_main() -> None:
    sys.exit(main())


__all__ = ["main", "build_parser", "resolve_config", "ExperimentConfig", "ConfigError", "GuardError", "COMMANDS"]


if __name__ == "__main__":
    console_main()
