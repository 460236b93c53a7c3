"""Command-line front end: invariant checks, width sweeps, gate reports.

Three subcommands cover the daily loop:

  dfsgate verify              run the invariant battery, exit nonzero on failure
  dfsgate sweep   [--config]  calibrate and score the gate across pulse widths
  dfsgate simulate [--config] one calibrated gate, full diagnostics as JSON

Everything is driven by one optional JSON config (all fields default to
the linear-layout baseline) plus a few override flags.  Outputs carry a
version string, the master seed and a config echo so a run can be
reproduced from its own artifacts; nothing timestamped, identical
inputs give byte-identical files.  Times are dimensionless throughout
(units of the A-qubit bias rate).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, angular, basis, calibrate, engine, metrics, model, noise
from .engine import ECHO_ETA, EngineOptions, PulseShape
from .model import BiasConfig

__all__ = ["RunConfig", "main", "run_simulate", "run_sweep", "run_verify"]

VERSION_STRING = f"dfsgate-v{__version__}"
SWEEP_SCHEMA = "dfsgate-sweep-v1"

_MODES = ("j1", "weighted")
_ROLES = ("z", "t", "n")


# ---------------------------------------------------------------------------
# configuration


# the halving residual peaks near 5e-9 at the stiff end of the default
# grid; 5e-8 keeps an order of magnitude of headroom while still
# catching a step a few times too coarse (the residual grows as dt^2)
_DT_DEFAULTS = {
    "dt_rad": 0.005,
    "max_dt_rad": 0.05,
    "quant_levels": 4096,
    "halving_check": True,
    "halving_tol": 5e-8,
}

_NOISE_DEFAULTS = {
    "amplitude_N": 1e-4,
    "insensitivity_I": 1.0,
    "f_min_factor": 0.1,
    "f_max_factor": 1.0,
    "sample_interval": 0.5,
    "correlated": False,
}


def _default_grid() -> tuple:
    return tuple(float(s) for s in np.geomspace(10.0, 2000.0, 15))


def _merged(defaults: dict, given: dict, where: str) -> dict:
    unknown = set(given) - set(defaults)
    if unknown:
        raise ValueError(f"unknown {where} config keys: {sorted(unknown)}")
    out = dict(defaults)
    out.update(given)
    return out


@dataclass
class RunConfig:
    """Validated run parameters; every field has a baseline default."""

    bias: BiasConfig = field(default_factory=BiasConfig)
    cross_pair: tuple = ("z", "z")
    sweep_sigmas: tuple = field(default_factory=_default_grid)
    sigma_t: float = 1000.0
    mode: str = "weighted"
    window: float = 5.0
    trials: int = 20
    seed: int = 0
    noise: dict = field(default_factory=lambda: dict(_NOISE_DEFAULTS))
    dt: dict = field(default_factory=lambda: dict(_DT_DEFAULTS))
    out_dir: str = "runs"

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if len(self.cross_pair) != 2 or any(r not in _ROLES for r in self.cross_pair):
            raise ValueError(f"cross_pair must name two spin roles, got {self.cross_pair}")
        self.cross_pair = tuple(self.cross_pair)
        self.sweep_sigmas = tuple(float(s) for s in self.sweep_sigmas)
        if not self.sweep_sigmas or any(s <= 0 for s in self.sweep_sigmas):
            raise ValueError("sweep_sigmas must be positive and non-empty")
        if self.sigma_t <= 0:
            raise ValueError("sigma_t must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        self.noise = _merged(_NOISE_DEFAULTS, self.noise, "noise")
        self.dt = _merged(_DT_DEFAULTS, self.dt, "dt")
        # construct the guarded objects once so bad values fail here,
        # before any simulation starts
        self.noise_params()
        self.engine_options()

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        kwargs = {}
        if "bias" in doc:
            amps = _merged(BiasConfig().junction_amplitudes(), doc.pop("bias"), "bias")
            kwargs["bias"] = BiasConfig(
                *(amps[name] for name in ("zt_A", "tn_A", "zn_A", "zt_B", "tn_B", "zn_B"))
            )
        for key in (
            "cross_pair",
            "sweep_sigmas",
            "sigma_t",
            "mode",
            "window",
            "trials",
            "seed",
            "noise",
            "dt",
            "out_dir",
        ):
            if key in doc:
                kwargs[key] = doc.pop(key)
        if doc:
            raise ValueError(f"unknown config keys: {sorted(doc)}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "bias": self.bias.junction_amplitudes(),
            "cross_pair": list(self.cross_pair),
            "sweep_sigmas": list(self.sweep_sigmas),
            "sigma_t": self.sigma_t,
            "mode": self.mode,
            "window": self.window,
            "trials": self.trials,
            "seed": self.seed,
            "noise": dict(self.noise),
            "dt": dict(self.dt),
            "out_dir": self.out_dir,
        }

    def noise_params(self) -> noise.NoiseParams:
        return noise.NoiseParams(seed=self.seed, trials=self.trials, **self.noise)

    def engine_options(self) -> EngineOptions:
        return EngineOptions(
            dt_rad=self.dt["dt_rad"],
            max_dt_rad=self.dt["max_dt_rad"],
            quant_levels=self.dt["quant_levels"],
        )

    def metadata(self) -> dict:
        return {"version": VERSION_STRING, "seed": self.seed, "config": self.to_dict()}


# ---------------------------------------------------------------------------
# verify


def _halfint_range(lo: float, hi: float):
    k = int(round(2 * lo))
    while k <= int(round(2 * hi)):
        yield k / 2.0
        k += 1


def _check_6j_orthogonality() -> float:
    """Sum_x (2x+1)(2f+1) {a b x; c d f}{a b x; c d g} = delta_fg."""
    worst = 0.0
    for a, b, c, d in ((0.5, 0.5, 0.5, 0.5), (1.0, 0.5, 0.5, 1.0), (1.5, 1.0, 0.5, 1.0)):
        fs = [f for f in _halfint_range(0, 3) if angular.triangle_ok(a, d, f) and angular.triangle_ok(c, b, f)]
        xs = [x for x in _halfint_range(0, 3) if angular.triangle_ok(a, b, x) and angular.triangle_ok(c, d, x)]
        for f in fs:
            for g in fs:
                total = sum(
                    (2 * x + 1) * (2 * f + 1)
                    * angular.wigner_6j(a, b, x, c, d, f)
                    * angular.wigner_6j(a, b, x, c, d, g)
                    for x in xs
                )
                worst = max(worst, abs(total - (1.0 if f == g else 0.0)))
    return worst


def _check_cg_completeness() -> float:
    worst = 0.0
    for j1, j2 in ((0.5, 0.5), (1.0, 0.5), (1.5, 1.0)):
        js = [abs(j1 - j2) + k for k in range(int(round(j1 + j2 - abs(j1 - j2))) + 1)]
        for m1 in (-j1 + k for k in range(int(round(2 * j1)) + 1)):
            for m2 in (-j2 + k for k in range(int(round(2 * j2)) + 1)):
                total = sum(
                    angular.clebsch_gordan(j1, m1, j2, m2, j, m1 + m2) ** 2 for j in js
                )
                worst = max(worst, abs(total - 1.0))
    return worst


def _check_bias_levels() -> float:
    worst = 0.0
    for omega in (1.0, 1.7):
        eig = model.bias_eigensystem(omega, omega, 0.0)
        worst = max(
            worst,
            abs(eig.xi_plus - (-omega + omega / 2.0)),
            abs(eig.xi_minus - (-omega - omega / 2.0)),
        )
    return worst


def _check_structure_factors() -> float:
    eig = model.bias_eigensystem(1.0, 1.0, 0.0)
    expect = {
        "z": (0.0, math.sqrt(2.0 / 3.0)),
        "n": (0.0, math.sqrt(2.0 / 3.0)),
        "t": (math.sqrt(1.5), -1.0 / math.sqrt(6.0)),
    }
    worst = 0.0
    for role, (lp, lm) in expect.items():
        sf = model.structure_factors(eig, role)
        worst = max(worst, abs(sf.lam_plus - lp), abs(sf.lam_minus - lm))
    return worst


def _first_order_c11(j: int) -> float:
    cfg = BiasConfig()
    eig_a = model.bias_eigensystem(*cfg.qubit("A"))
    eig_b = model.bias_eigensystem(*cfg.qubit("B"))
    pred = model.first_order_phases(
        eig_a,
        eig_b,
        model.structure_factors(eig_a, "z"),
        model.structure_factors(eig_b, "z"),
        phi=1.0,
        duration=0.0,
        j=j,
    )
    return pred.c11


def _check_entangling_constants() -> float:
    return max(
        abs(_first_order_c11(1) - 1.0 / 36.0),
        abs(_first_order_c11(0) + 1.0 / 12.0),
    )


def _check_c11_ratio() -> float:
    return abs(_first_order_c11(0) / _first_order_c11(1) + 3.0)


def _check_wigner_eckart(perturb_rme: float) -> float:
    """Dressed cross-operator diagonal against the factorized prediction.

    The measured side comes from the full coupled operator; the
    prediction multiplies structure factors built from the reduced
    element table.  perturb_rme scales one table entry, a fault hook
    proving this check can actually fail.
    """
    cfg = BiasConfig()
    cross = model.cross_exchange("z", "z")
    worst = 0.0
    table = np.array(
        [[angular.reduced_spin_element("z", a, b) for b in (0, 1)] for a in (0, 1)]
    )
    table_pert = table.copy()
    table_pert[1, 1] *= 1.0 + perturb_rme
    for j in (0, 1):
        pref = (-1.0) ** (j + 1) / math.factorial(2 + j)
        eig_a = model.bias_eigensystem(*cfg.qubit("A"))
        eig_b = model.bias_eigensystem(*cfg.qubit("B"))
        lam_a = [float(v @ table_pert @ v) for v in eig_a.V]
        lam_b = [float(v @ table @ v) for v in eig_b.V]
        idx = basis.encoded_indices(j, 0)
        sub = cross[np.ix_(idx, idx)]
        w = np.kron(eig_a.V, eig_b.V)
        measured = np.real(np.diag(w @ sub @ w.T)).reshape(2, 2)
        predicted = pref * np.outer(lam_a, lam_b)
        worst = max(worst, np.abs(measured - predicted).max())
    return worst


def _check_operator_oracle() -> float:
    t = basis.build_transform()
    worst = 0.0
    for i, j in ((0, 1), (0, 3), (2, 5)):
        direct = basis.coupled_exchange(i, j)
        via_product = t @ basis.product_exchange(i, j) @ t.T
        worst = max(worst, np.abs(direct - via_product).max())
    return worst


def _check_dimensions() -> float:
    states = basis.enumerate_coupled_basis()
    counts = {}
    for s in states:
        counts[s.j] = counts.get(s.j, 0) + 1
    per_m_j1 = sum(1 for s in states if s.j == 1 and s.m == 0)
    m0 = sum(1 for s in states if s.m == 0)
    ok = (
        len(states) == 64
        and counts[basis.HalfInt(0)] == 5
        and per_m_j1 == 9
        and m0 == 20
    )
    return 0.0 if ok else 1.0


def _check_echo_form() -> float:
    pi_a = engine.echo_pulse_Pi("A")
    iy = np.array([[0.0, 1.0], [-1.0, 0.0]])
    target = np.exp(1j * ECHO_ETA) * np.kron(iy, np.eye(2))
    worst = 0.0
    for j in (0, 1):
        for m in range(-j, j + 1):
            idx = basis.encoded_indices(j, m)
            worst = max(worst, np.abs(pi_a[np.ix_(idx, idx)] - target).max())
    return worst


def run_verify(perturb_rme: float = 0.0, stream=None) -> int:
    """Invariant battery; prints one line per check, returns exit status."""
    stream = stream if stream is not None else sys.stdout
    checks = [
        ("6j orthogonality", _check_6j_orthogonality, 1e-12),
        ("CG completeness", _check_cg_completeness, 1e-12),
        ("bias levels xi = -W +/- W/2", _check_bias_levels, 1e-12),
        ("structure factors (z, n, t)", _check_structure_factors, 1e-12),
        ("c11 constants 1/36, -1/12", _check_entangling_constants, 1e-12),
        ("c11 sector ratio -3", _check_c11_ratio, 1e-12),
        ("Wigner-Eckart factorization", lambda: _check_wigner_eckart(perturb_rme), 1e-12),
        ("coupled-operator oracle", _check_operator_oracle, 1e-12),
        ("dimension bookkeeping", _check_dimensions, 0.5),
        ("echo encoded form", _check_echo_form, 1e-10),
    ]
    failed = 0
    print(f"{VERSION_STRING} invariant battery", file=stream)
    for name, fn, tol in checks:
        residual = fn()
        ok = residual <= tol
        failed += 0 if ok else 1
        print(
            f"{'PASS' if ok else 'FAIL'}  {name:34s} residual {residual:.3e}  (tol {tol:g})",
            file=stream,
        )
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=stream)
    return 0 if failed == 0 else 1


# ---------------------------------------------------------------------------
# sweep / simulate


# Stiffest width the preflight will actually evolve.  Per-segment error
# falls as 1/sigma_t, so a pass at the narrowest pulse bounds every wider
# one; above this width the check only gets slower (duration grows) and
# its raw norm picks up collective-phase drift the logical figures never
# see, so wider runs are checked here instead.
_PREFLIGHT_WIDTH_CAP = 50.0


def _dt_preflight(cfg: RunConfig, sigma_t: float, stream) -> None:
    """Halve the step at the stiffest pulse of the run; abort on drift."""
    if not cfg.dt["halving_check"]:
        return
    sigma_t = min(sigma_t, _PREFLIGHT_WIDTH_CAP)
    opts = cfg.engine_options()
    pulse = PulseShape(calibrate.first_order_seed(sigma_t, cfg.window, cfg.bias, cfg.cross_pair), sigma_t, cfg.window)
    sched = engine.composite_schedule(pulse, cfg.bias, cfg.cross_pair, options=opts)
    residual = engine.dt_halving_residual(sched, opts)
    tol = cfg.dt["halving_tol"]
    print(f"dt halving residual {residual:.3e} at sigma_t {sigma_t:g} (tol {tol:g})", file=stream)
    if residual > tol:
        raise RuntimeError(
            f"dt halving residual {residual:.3e} exceeds {tol:g}; shrink dt_rad"
        )


def _weighted(d0: float, d1: float) -> float:
    return (3.0 * d1 + d0) / 4.0


def _gate_point(cfg: RunConfig, sigma_t: float) -> dict:
    """Calibrate one width, then score it noiselessly and over noise trials."""
    opts = cfg.engine_options()
    cal = calibrate.optimize_amplitude(
        sigma_t,
        mode=cfg.mode,
        bias=cfg.bias,
        cross_pair=cfg.cross_pair,
        window=cfg.window,
        options=opts,
    )
    params = cfg.noise_params()
    if params.amplitude_N == 0.0:
        # zero noise degenerates the whole ensemble to the noiseless
        # gate; copy its figures instead of re-evolving
        n_trials = 1
        samples = {j: [cal.distance[j]] for j in (0, 1)}
    else:
        pulse = PulseShape(cal.amplitude, sigma_t, cfg.window)
        sched = engine.composite_schedule(pulse, cfg.bias, cfg.cross_pair, options=opts)
        n_trials = params.trials
        samples = {0: [], 1: []}
        for trial in range(n_trials):
            traces = noise.noise_traces(params, sched, trial)
            perturbed = noise.perturb_schedule(sched, traces, params)
            u = engine.composite_gate(schedule=perturbed, options=opts)
            for j in (0, 1):
                blk = metrics.logical_block(u, j, bias=cfg.bias)
                samples[j].append(metrics.trace_distance_D(blk))
    mean = {j: float(np.mean(samples[j])) for j in (0, 1)}
    std = {
        j: (float(np.std(samples[j], ddof=1)) if len(samples[j]) > 1 else 0.0)
        for j in (0, 1)
    }
    return {
        "sigma_t": sigma_t,
        "amplitude": cal.amplitude,
        "seed_amplitude": cal.seed_amplitude,
        "D0": cal.distance[0],
        "D1": cal.distance[1],
        "leak0": cal.leakage[0],
        "leak1": cal.leakage[1],
        "noisy_D0_mean": mean[0],
        "noisy_D0_std": std[0],
        "noisy_D1_mean": mean[1],
        "noisy_D1_std": std[1],
        "trials": n_trials,
        "status": "ok",
        "_samples": samples,
    }


_SWEEP_COLUMNS = (
    "sigma_t",
    "amplitude",
    "seed_amplitude",
    "D0",
    "D1",
    "leak0",
    "leak1",
    "noisy_D0_mean",
    "noisy_D0_std",
    "noisy_D1_mean",
    "noisy_D1_std",
    "trials",
    "status",
)

_COLUMN_DOC = (
    "sigma_t: Gaussian pulse width (dimensionless time); "
    "amplitude: calibrated cross amplitude; seed_amplitude: first-order seed; "
    "D0/D1: noiseless trace distance to the target per J sector; "
    "leak0/leak1: noiseless leakage per J sector; "
    "noisy_*: mean and sample std of D over noise trials; "
    "trials: realized trial count; status: ok or the recorded error"
)


def run_sweep(cfg: RunConfig, stream=None) -> list[dict]:
    """Calibrate and score every width in the grid; write CSV + JSON."""
    stream = stream if stream is not None else sys.stdout
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _dt_preflight(cfg, min(cfg.sweep_sigmas), stream)

    rows = []
    for k, sigma in enumerate(cfg.sweep_sigmas):
        try:
            row = _gate_point(cfg, sigma)
            row.pop("_samples")
        except Exception as exc:  # record and keep sweeping
            row = {name: None for name in _SWEEP_COLUMNS}
            row["sigma_t"] = sigma
            row["status"] = f"error: {type(exc).__name__}: {exc}"
        rows.append(row)
        print(
            f"[{k + 1}/{len(cfg.sweep_sigmas)}] sigma_t {sigma:9.3f}  {row['status']}",
            file=stream,
        )

    echo = json.dumps(cfg.metadata(), sort_keys=True)
    csv_path = out_dir / "sweep.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# schema: {SWEEP_SCHEMA}\n")
        fh.write(f"# metadata: {echo}\n")
        fh.write(f"# columns: {_COLUMN_DOC}\n")
        writer = csv.writer(fh)
        writer.writerow(_SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(
                ["" if row[c] is None else row[c] for c in _SWEEP_COLUMNS]
            )
    json_path = out_dir / "sweep.json"
    with open(json_path, "w") as fh:
        json.dump(
            {"metadata": cfg.metadata(), "schema": SWEEP_SCHEMA, "rows": rows},
            fh,
            sort_keys=True,
            indent=2,
        )
        fh.write("\n")
    print(f"wrote {csv_path} and {json_path}", file=stream)
    return rows


def _complex_table(mat: np.ndarray) -> dict:
    return {"real": np.real(mat).tolist(), "imag": np.imag(mat).tolist()}


def run_simulate(cfg: RunConfig, stream=None) -> dict:
    """One calibrated gate at cfg.sigma_t with full diagnostics."""
    stream = stream if stream is not None else sys.stdout
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _dt_preflight(cfg, cfg.sigma_t, stream)

    point = _gate_point(cfg, cfg.sigma_t)
    samples = point.pop("_samples")
    opts = cfg.engine_options()
    u = engine.composite_gate(
        pulse=PulseShape(point["amplitude"], cfg.sigma_t, cfg.window),
        bias=cfg.bias,
        cross_pair=cfg.cross_pair,
        options=opts,
    )
    blocks = {j: metrics.logical_block(u, j, bias=cfg.bias) for j in (0, 1)}
    report = metrics.GateReport(
        sigma_t=cfg.sigma_t,
        amplitude=point["amplitude"],
        mode=cfg.mode,
        window=cfg.window,
        leakage={j: point[f"leak{j}"] for j in (0, 1)},
        distance={j: point[f"D{j}"] for j in (0, 1)},
        noisy_mean={j: point[f"noisy_D{j}_mean"] for j in (0, 1)},
        noisy_std={j: point[f"noisy_D{j}_std"] for j in (0, 1)},
        trials=point["trials"],
    )
    doc = {
        "metadata": cfg.metadata(),
        "report": report.to_dict(),
        "seed_amplitude": point["seed_amplitude"],
        "logical_blocks": {str(j): _complex_table(blocks[j].block) for j in (0, 1)},
        "trial_distances": {str(j): samples[j] for j in (0, 1)},
    }
    path = out_dir / "report.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    d0, d1 = point["D0"], point["D1"]
    print(
        f"sigma_t {cfg.sigma_t:g}: amplitude {point['amplitude']:.6g}, "
        f"noiseless D = {d0:.3e} (J=0) / {d1:.3e} (J=1), "
        f"noisy mean D = {point['noisy_D0_mean']:.3e} / {point['noisy_D1_mean']:.3e} "
        f"over {point['trials']} trials",
        file=stream,
    )
    print(f"wrote {path}", file=stream)
    return doc


# ---------------------------------------------------------------------------
# argument parsing


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    if args.mode is not None:
        cfg.mode = args.mode
    if args.out is not None:
        cfg.out_dir = args.out
    # revalidate after overrides
    return RunConfig.from_dict(cfg.to_dict())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dfsgate",
        description="Composite adiabatic entangling gate: verification, sweeps, reports.",
    )
    parser.add_argument("--version", action="version", version=VERSION_STRING)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run config (all fields optional)")
    common.add_argument("--seed", type=int, help="master seed override")
    common.add_argument("--out", metavar="DIR", help="output directory override")
    common.add_argument("--trials", type=int, help="noise trial count override")
    common.add_argument("--mode", choices=_MODES, help="calibration mode override")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the invariant battery")
    sub.add_parser("sweep", parents=[common], help="calibrate across the width grid")
    sub.add_parser("simulate", parents=[common], help="single-width gate report")
    args = parser.parse_args(argv)

    if args.command == "verify":
        return run_verify()
    try:
        cfg = _load_config(args)
        if args.command == "sweep":
            rows = run_sweep(cfg)
            return 0 if all(r["status"] == "ok" for r in rows) else 1
        run_simulate(cfg)
        return 0
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
