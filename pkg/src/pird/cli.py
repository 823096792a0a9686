"""Command-line front end.

Three verbs:

``pird fit``
    Fit a VAR model to a CSV time series (AIC order selection unless an
    explicit order is forced) and write ``model.json`` plus ``aic.csv``.

``pird decompose``
    Run the full decomposition plus the baseline PIDs on a fitted model,
    a CSV (fit inline), or a built-in scenario, writing ``atoms.csv``,
    ``coarse.csv`` and ``profiles.csv``.

``pird bench``
    Reproduce the benchmark sweeps: coupling sweeps with the matching
    baseline for ``sim1``/``sim2``, the band table for ``sim3``.

Exit codes: 0 success, 2 format error, 3 argument error, 4 numerical
error, 5 capability error.

A flat ``key = value`` config file can prefill any flag (``--config``);
explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines as bl
from .decomposition import (
    FULL_BAND,
    atomic_write_text,
    decompose,
    write_atoms_csv,
    write_coarse_csv,
    write_profiles_csv,
)
from .errors import (
    ArgumentError,
    CapabilityError,
    FormatError,
    NumericalError,
    PirdError,
)
from .spectral import (
    Band,
    FrequencyGrid,
    SpectralProfile,
    integrate_band,
    integrate_full,
    parse_bands,
    psd_from_var,
)
from .var import (
    Scenario,
    TimeSeriesMatrix,
    VarModel,
    build_scenario,
    fit_ols,
    is_stable,
    select_order_aic,
)

_EXIT_CODES = {
    FormatError: 2,
    ArgumentError: 3,
    NumericalError: 4,
    CapabilityError: 5,
}

_BENCH_BANDS = "B1:0.04-0.15,B2:0.15-0.4"


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as argument errors (exit 3)."""

    def error(self, message):
        raise ArgumentError(message)


@dataclass
class RunConfig:
    """Resolved options of one CLI invocation."""

    command: str
    input: str | None = None
    model: str | None = None
    scenario: str | None = None
    c: float | None = None
    target: str | None = None
    sources: str | None = None
    fs: float = 1.0
    order: int | None = None
    max_order: int = 10
    grid: int = 2049
    bands: str | None = None
    units: str = "nats"
    out: str = "pird_out"
    seed: int = 0
    sweep: str = "0:0.05:0.8"
    conditioned_te: bool = False
    diag_load: float = 0.0


_DEFAULTS = RunConfig(command="")


def _read_config_file(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read config {path}: {exc}") from exc
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_BOOL_KEYS = {"conditioned_te"}
_INT_KEYS = {"order", "max_order", "grid", "seed"}
_FLOAT_KEYS = {"c", "fs", "diag_load"}


def _coerce(key: str, value: str):
    try:
        if key in _BOOL_KEYS:
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        return value
    except ValueError as exc:
        raise FormatError(f"config key {key!r}: {exc}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="pird", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key = value config file; flags win")
        p.add_argument("--input", help="input CSV time series")
        p.add_argument("--fs", type=float, help="sampling frequency in Hz (default 1)")
        p.add_argument("--out", help="output directory (default pird_out)")
        p.add_argument("--units", choices=("nats", "bits"), help="output units")
        p.add_argument("--seed", type=int, help="seed recorded with the run")

    fit = sub.add_parser("fit", help="fit a VAR model to a CSV time series")
    add_common(fit)
    fit.add_argument("--order", type=int, help="force this order, skip AIC")
    fit.add_argument("--max-order", type=int, help="AIC search limit (default 10)")

    dec = sub.add_parser("decompose", help="decompose information rates")
    add_common(dec)
    dec.add_argument("--model", help="load a fitted model.json instead of fitting")
    dec.add_argument("--scenario", help="built-in system: sim1, sim2 or sim3")
    dec.add_argument("--c", type=float, help="coupling parameter for sim1/sim2")
    dec.add_argument("--order", type=int, help="force fit order for --input")
    dec.add_argument("--max-order", type=int, help="AIC search limit for --input")
    dec.add_argument("--target", help="target channel name (default: first)")
    dec.add_argument("--sources", help="comma list of source names (default: rest)")
    dec.add_argument("--grid", type=int, help="frequency grid points (default 2049)")
    dec.add_argument("--bands", help='bands, e.g. "LF:0.04-0.15,HF:0.15-0.4"')
    dec.add_argument(
        "--conditioned-te",
        action="store_true",
        default=None,
        help="condition marginal transfer entropies on the other sources",
    )
    dec.add_argument(
        "--diag-load", type=float, help="diagonal loading factor for the PSD"
    )

    bench = sub.add_parser("bench", help="reproduce the benchmark sweeps")
    add_common(bench)
    bench.add_argument("--scenario", help="sim1, sim2 or sim3")
    bench.add_argument("--sweep", help="coupling grid start:step:stop (default 0:0.05:0.8)")
    bench.add_argument("--grid", type=int, help="frequency grid points (default 2049)")
    bench.add_argument("--bands", help="bands for the sim3 table (default B1/B2)")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(command=args.command)
    file_values = _read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, raw in file_values.items():
        if not hasattr(config, key) or key == "command":
            raise FormatError(f"unknown config key {key!r}")
        setattr(config, key, _coerce(key, raw))
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        setattr(config, key, value)
    return config


def _load_series(config: RunConfig) -> TimeSeriesMatrix:
    if not config.input:
        raise ArgumentError("an input CSV is required (--input)")
    return TimeSeriesMatrix.load_csv(config.input, fs=config.fs)


def _fit_from_series(config: RunConfig, ts: TimeSeriesMatrix):
    if config.order is not None:
        return fit_ols(ts, config.order), None
    p_star, curve = select_order_aic(ts, config.max_order)
    return fit_ols(ts, p_star), curve


def _obtain_model(config: RunConfig) -> tuple[VarModel, list[float] | None]:
    given = [
        name
        for name, flag in (
            ("--model", config.model),
            ("--scenario", config.scenario),
            ("--input", config.input),
        )
        if flag
    ]
    if len(given) != 1:
        raise ArgumentError(
            f"exactly one of --model, --scenario or --input is required, got {given or 'none'}"
        )
    if config.model:
        try:
            text = Path(config.model).read_text(encoding="utf-8")
        except OSError as exc:
            raise FormatError(f"cannot read {config.model}: {exc}") from exc
        return VarModel.from_json(text), None
    if config.scenario:
        params = {} if config.c is None else {"c": config.c}
        return build_scenario(Scenario(config.scenario, params)), None
    return _fit_from_series(config, _load_series(config))


def _resolve_channels(model: VarModel, config: RunConfig) -> tuple[int, list[int]]:
    names = list(model.names)

    def lookup(name: str) -> int:
        if name not in names:
            raise ArgumentError(f"channel {name!r} not among {names}")
        return names.index(name)

    target = lookup(config.target) if config.target else 0
    if config.sources:
        sources = [lookup(n.strip()) for n in config.sources.split(",") if n.strip()]
    else:
        sources = [i for i in range(model.dim) if i != target]
    if not sources:
        raise ArgumentError("no source channels left")
    if target in sources:
        raise ArgumentError("target cannot be one of the sources")
    return target, sources


def _bands_for(config: RunConfig, fs: float, default: str | None = None) -> list[Band]:
    spec = config.bands if config.bands else default
    if not spec:
        return []
    bands = parse_bands(spec)
    for band in bands:
        if band.hi > fs / 2.0 + 1e-12:
            raise ArgumentError(
                f"band {band.label!r} exceeds the Nyquist frequency {fs / 2.0} Hz"
            )
    return bands


def _unit_scale(config: RunConfig) -> tuple[float, str]:
    if config.units == "bits":
        return float(np.log(2.0)), "bits"
    return 1.0, "nats"


def _outdir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def cmd_fit(config: RunConfig) -> int:
    ts = _load_series(config)
    model, curve = _fit_from_series(config, ts)
    if not is_stable(model):
        raise NumericalError(
            f"fitted model is unstable (companion spectral radius "
            f"{model.spectral_radius():.6f}); try a different order"
        )
    out = _outdir(config)
    atomic_write_text(out / "model.json", model.to_json() + "\n")
    if curve is not None:
        lines = ["p,aic"] + [f"{p},{_fmt(a)}" for p, a in enumerate(curve, start=1)]
        atomic_write_text(out / "aic.csv", "\n".join(lines) + "\n")
    margin = 1.0 - model.spectral_radius()
    print(f"selected order: {model.order}")
    print(f"stability margin: {_fmt(margin)}")
    print(f"wrote {out / 'model.json'}" + ("" if curve is None else f", {out / 'aic.csv'}"))
    return 0


def cmd_decompose(config: RunConfig) -> int:
    model, _ = _obtain_model(config)
    if config.fs != _DEFAULTS.fs and model.fs != config.fs:
        # an explicit --fs re-times a loaded model or scenario
        model = VarModel(
            coeffs=model.coeffs, sigma=model.sigma, fs=config.fs, names=model.names
        )
    target, sources = _resolve_channels(model, config)
    fs = model.fs
    bands = _bands_for(config, fs)
    grid = FrequencyGrid(fs=fs, n_points=config.grid)
    psd = psd_from_var(model, grid)
    if config.diag_load > 0.0:
        psd = psd.with_diagonal_loading(config.diag_load)
    result = decompose(psd, target, sources, bands)
    scale, unit = _unit_scale(config)

    extra = []
    if len(sources) >= 2:
        stat = bl.static_pid(model, target, sources)
        extra += bl.baseline_rows(stat, result.source_names, "staticPID", scale)
        tep = bl.te_pid(model, target, sources, conditioned=config.conditioned_te)
        extra += bl.baseline_rows(tep, result.source_names, "tePID", scale)
    out = _outdir(config)
    write_atoms_csv(result, out / "atoms.csv", scale, unit)
    write_coarse_csv(result, out / "coarse.csv", scale, unit, extra_rows=extra)
    write_profiles_csv(result, out / "profiles.csv", scale)
    print(
        f"target {model.names[target]}, sources "
        f"{', '.join(model.names[s] for s in sources)}; joint MIR = "
        f"{_fmt(result.joint_mir / scale)} {unit}"
    )
    print(f"wrote {out / 'atoms.csv'}, {out / 'coarse.csv'}, {out / 'profiles.csv'}")
    return 0


def _parse_sweep(spec: str) -> np.ndarray:
    try:
        start, step, stop = (float(v) for v in spec.split(":"))
    except ValueError:
        raise ArgumentError(f"cannot parse sweep {spec!r} (expected start:step:stop)") from None
    if step <= 0 or stop < start:
        raise ArgumentError(f"invalid sweep {spec!r}")
    return np.arange(start, stop + step / 2.0, step)


def _coupling_sweep(config: RunConfig, scenario: str) -> int:
    cs = _parse_sweep(config.sweep)
    grid = FrequencyGrid(fs=1.0, n_points=config.grid)
    scale, unit = _unit_scale(config)
    prefix = "staticPID" if scenario == "sim1" else "tePID"
    src_names = ("X1", "X2")
    header = ["c"]
    header += [f"pird_U_{n}" for n in src_names]
    header += ["pird_R", "pird_S", "pird_Delta", "pird_JointMIR"]
    header += [f"{prefix}_U_{n}" for n in src_names]
    header += [f"{prefix}_R", f"{prefix}_S", f"{prefix}_Delta", f"{prefix}_JointMIR"]
    lines = [",".join(header)]
    for c in cs:
        model = build_scenario(Scenario(scenario, {"c": float(c)}))
        result = decompose(psd_from_var(model, grid), 0)
        terms = result.coarse[FULL_BAND]
        if scenario == "sim1":
            base = bl.static_pid(model, 0)
            base_vals = [*base.unique, base.redundancy, base.synergy, base.delta, base.mi_joint]
        else:
            base = bl.te_pid(model, 0, conditioned=config.conditioned_te)
            base_vals = [*base.unique, base.redundancy, base.synergy, base.delta, base.te_joint]
        row = [f"{c:.12g}"]
        row += [_fmt(v / scale) for v in terms.unique]
        row += [_fmt(terms.redundancy / scale), _fmt(terms.synergy / scale)]
        row += [_fmt(terms.delta / scale), _fmt(terms.joint_mir / scale)]
        row += [_fmt(v / scale) for v in base_vals]
        lines.append(",".join(row))
    out = _outdir(config)
    path = out / f"bench_{scenario}.csv"
    atomic_write_text(path, "\n".join(lines) + "\n")
    print(f"swept c over {len(cs)} points ({unit}); wrote {path}")
    return 0


def _band_table(config: RunConfig) -> int:
    model = build_scenario(Scenario("sim3"))
    bands = _bands_for(config, model.fs, default=_BENCH_BANDS)
    grid = FrequencyGrid(fs=model.fs, n_points=config.grid)
    psd = psd_from_var(model, grid)
    result = decompose(psd, 0, bands=bands)
    scale, unit = _unit_scale(config)
    src = result.source_names
    header = (
        ["band"]
        + [f"I_{n}" for n in src]
        + ["JointMIR"]
        + [f"U_{n}" for n in src]
        + ["R", "S", "Delta"]
    )
    lines = [",".join(header)]
    for label in [FULL_BAND] + [b.label for b in bands]:
        terms = result.coarse[label]
        row = [label]
        for m in range(len(src)):
            profile = SpectralProfile(grid=grid, values=result.marginal_profiles[m])
            if label == FULL_BAND:
                val = integrate_full(profile)
            else:
                band = next(b for b in bands if b.label == label)
                val = integrate_band(profile, band)
            row.append(_fmt(val / scale))
        row.append(_fmt(terms.joint_mir / scale))
        row += [_fmt(u / scale) for u in terms.unique]
        row += [_fmt(terms.redundancy / scale), _fmt(terms.synergy / scale), _fmt(terms.delta / scale)]
        lines.append(",".join(row))
    out = _outdir(config)
    path = out / "bench_sim3.csv"
    atomic_write_text(path, "\n".join(lines) + "\n")
    print(f"band table in {unit}; wrote {path}")
    return 0


def cmd_bench(config: RunConfig) -> int:
    if config.scenario in ("sim1", "sim2"):
        return _coupling_sweep(config, config.scenario)
    if config.scenario == "sim3":
        return _band_table(config)
    raise ArgumentError(
        f"unknown scenario {config.scenario!r} (use sim1, sim2 or sim3)"
    )


def main(argv: list[str] | None = None) -> int:
    """Entry point returning the process exit code."""
    try:
        args = _build_parser().parse_args(argv)
        config = _resolve_config(args)
        if config.command == "fit":
            return cmd_fit(config)
        if config.command == "decompose":
            return cmd_decompose(config)
        return cmd_bench(config)
    except PirdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for cls, code in _EXIT_CODES.items():
            if isinstance(exc, cls):
                return code
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
