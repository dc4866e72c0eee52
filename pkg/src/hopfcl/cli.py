"""Batch front end: config parsing, experiment dispatch, data emission.

Configs are key = value text files with JSON-parsed values; see the README
for the schema.  Every run writes its artifacts plus a manifest recording
the config hash, package and library versions, and a checksum per emitted
file.  Identical config and seed give byte-identical outputs.  Output is
data only (CSV and JSON); plotting is external.

Jobs of a sweep share nothing and may run in separate processes (bounded
worker count via --workers); aggregation is single threaded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

SUBCOMMANDS = ("spectrum", "simulate-rd", "simulate-amplitude", "residuals",
               "approximation", "attractivity", "energy", "global-existence",
               "coefficients")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EXPERIMENT = 3


class ConfigError(ValueError):
    pass


class ExperimentFailure(RuntimeError):
    pass


_DEFAULTS = dict(
    model="toy", omega0=1.0, eps="match", a=1.0, b_tilde=None,
    model_file=None, deltas=[0.2, 0.1, 0.05], delta=0.1, theta=2,
    t0=1.0, t1=0.5, r0=5.0, cycles=5, seed=1234, n_slow=96,
    dt_fast_target=0.02, dT=2e-3, t_end=10.0, dt=0.01, ic_scale=0.05,
    snapshots=False, alpha=1.0, beta=1.0, gamma0=0.0, gamma3=2.0 / 3.0,
    length=2 * np.pi, n_points=64, n_ics=10, e0_min=4.0, e0_max=25.0,
    spec_sweep_eps=[0.0, 0.05, 0.1], k_half=0.01, k_outer=1.5,
    T_samples=[0.1, 0.25, 0.4], n_checkpoints=20,
)


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        values = object.__getattribute__(self, "values")
        if name in values:
            return values[name]
        if name in _DEFAULTS:
            return _DEFAULTS[name]
        raise AttributeError(name)

    def eps_for(self, delta: float) -> float:
        eps = self.eps
        if eps == "match":
            return delta
        return float(eps)

    def validate(self) -> None:
        deltas = list(self.deltas)
        if not deltas:
            raise ConfigError("delta list must not be empty")
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise ConfigError("delta values must be strictly decreasing")
        if any(d <= 0 for d in deltas):
            raise ConfigError("delta values must be positive")
        if self.eps != "match":
            if float(self.eps) > min(deltas) + 1e-15:
                raise ConfigError(
                    "eps must satisfy 0 < eps <= min(delta) "
                    f"(eps={self.eps}, min delta={min(deltas)})")
            if float(self.eps) < 0:
                raise ConfigError("eps must be nonnegative")
        if self.model_file is not None \
                and not Path(self.model_file).exists():
            raise ConfigError(f"model file {self.model_file} does not exist")
        unknown = set(self.values) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def canonical_text(self) -> str:
        merged = dict(_DEFAULTS)
        merged.update(self.values)
        return json.dumps(merged, sort_keys=True, default=str)

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def parse_config(path) -> ExperimentConfig:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            try:
                values[key] = json.loads(raw)
            except json.JSONDecodeError:
                values[key] = raw
    cfg = ExperimentConfig(values=values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else _fmt(c)
                             for c in row])


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir: Path, cfg: ExperimentConfig, subcommand: str,
                   seed) -> None:
    files = {}
    for p in sorted(outdir.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            files[str(p.relative_to(outdir))] = _sha256_file(p)
    write_json(outdir / "manifest.json", {
        "subcommand": subcommand,
        "config_sha256": cfg.sha256(),
        "seed": seed,
        "versions": {"hopfcl": __version__, "numpy": np.__version__,
                     "python": sys.version.split()[0]},
        "files": files,
    })


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _build_model(cfg: ExperimentConfig, eps: float):
    from .models import brusselator_cl, load_model_file, toy_model
    if cfg.model == "toy":
        return toy_model(cfg.omega0, eps)
    if cfg.model == "brusselator":
        b_tilde = cfg.b_tilde
        if b_tilde is None:
            b_tilde = (1 + cfg.a ** 2) * (1 + eps ** 2)
        return brusselator_cl(cfg.a, b_tilde)
    if cfg.model_file is not None:
        return load_model_file(cfg.model_file)
    raise ConfigError(f"unknown model {cfg.model!r}")


def cmd_spectrum(cfg: ExperimentConfig, outdir: Path) -> bool:
    from .linear import (check_spec, dispersion_curves,
                         export_dispersion_csv, linearize)

    def data_for(eps):
        lin = linearize(_build_model(cfg, eps))
        h = 1e-3
        n_half = int(round(cfg.k_half / h))
        inner = h * np.arange(-n_half, n_half + 1)
        outer = np.linspace(cfg.k_half + 0.05, cfg.k_outer, 60)
        k = np.concatenate([-outer[::-1], inner, outer])
        return dispersion_curves(lin, k)

    eps0 = cfg.eps_for(min(cfg.deltas))
    data = data_for(eps0)
    sweep = [data_for(e) for e in cfg.spec_sweep_eps]
    report = check_spec(data, sweep)
    export_dispersion_csv(data, outdir / "dispersion.csv")
    write_json(outdir / "spec_report.json", report.to_dict())
    return True


def cmd_simulate_rd(cfg: ExperimentConfig, outdir: Path, seed) -> bool:
    from .approximation import band_noise_state, weighted_state_norm
    from .rdsolve import conserved_mass, default_grid_for_delta, integrate

    delta = cfg.delta
    eps = cfg.eps_for(delta)
    model = _build_model(cfg, eps)
    grid = default_grid_for_delta(delta)
    rng = np.random.default_rng(seed)
    state = band_noise_state(grid, rng, delta, cfg.ic_scale)
    obs = {
        "weighted_norm": lambda s: weighted_state_norm(s, delta),
        "mass": conserved_mass,
        "imag_residue": lambda s: s.imag_residue(),
    }
    rec = integrate(model, state, t_end=cfg.t_end, dt=cfg.dt,
                    observers=obs, observer_stride=10,
                    snapshot_stride=(max(1, int(round(cfg.t_end / cfg.dt)))
                                     if cfg.snapshots else None))
    rows = zip(rec.times, rec.observations["weighted_norm"],
               rec.observations["mass"], rec.observations["imag_residue"])
    write_csv(outdir / "trajectory.csv",
              ["t", "weighted_norm", "mass", "imag_residue"], rows)
    if cfg.snapshots and rec.snapshots:
        final = rec.snapshots[-1]
        np.savez(outdir / "snapshots.npz",
                 t=np.array([final.t]),
                 u=np.stack([f.physical().real for f in final.u]),
                 v=final.v.physical().real,
                 n_points=grid.n_points, length=grid.length)
    return True


def cmd_simulate_amplitude(cfg: ExperimentConfig, outdir: Path,
                           seed) -> bool:
    from .amplitude import (AmplitudeState, AmplitudeSystem, mean_value,
                            derive_coefficients_toy, integrate_amplitude,
                            normalize)
    from .energy import lyapunov_level0
    from .spectral import field_from_physical, lu_norm, make_grid

    n = normalize(derive_coefficients_toy(cfg.omega0))
    system = AmplitudeSystem.from_normalized(n)
    grid = make_grid(cfg.n_points, cfg.length)
    rng = np.random.default_rng(seed)
    band = max(2, grid.n_points // 10)
    ah = np.zeros(grid.n_points, dtype=complex)
    bh = np.zeros(grid.n_points, dtype=complex)
    for j in range(1, band + 1):
        ah[j] = rng.standard_normal() + 1j * rng.standard_normal()
        c = rng.standard_normal() + 1j * rng.standard_normal()
        bh[j], bh[-j] = c, np.conj(c)
    A0 = cfg.ic_scale * np.fft.ifft(ah) * grid.n_points
    B0 = cfg.ic_scale * np.fft.ifft(bh).real * grid.n_points
    state = AmplitudeState(A=field_from_physical(grid, A0),
                           B=field_from_physical(grid, B0), T=0.0)
    obs = {
        "norm_A": lambda s: lu_norm(s.A, 1.0),
        "norm_B": lambda s: lu_norm(s.B, 0.0),
        "mean_B": lambda s: mean_value(s.B),
        "E0": lambda s: lyapunov_level0(s.A, s.B, max(n.beta, 0.0)),
    }
    _, times, values = integrate_amplitude(system, state, cfg.t_end,
                                           cfg.dT, observers=obs,
                                           observer_stride=50)
    rows = zip(times, values["norm_A"], values["norm_B"], values["mean_B"],
               values["E0"])
    write_csv(outdir / "trajectory.csv",
              ["T", "norm_A", "norm_B", "mean_B", "E0"], rows)
    return True


def cmd_residuals(cfg: ExperimentConfig, outdir: Path) -> bool:
    from .approximation import residual_experiment
    rep = residual_experiment(cfg.omega0, cfg.theta, cfg.deltas,
                              T_samples=tuple(cfg.T_samples),
                              n_slow=cfg.n_slow)
    rows = [(d, rep.values["res_c"][i], rep.values["res_s"][i],
             rep.values["res_v"][i]) for i, d in enumerate(rep.deltas)]
    write_csv(outdir / "residuals.csv",
              ["delta", "res_c", "res_s", "res_v"], rows)
    write_json(outdir / "residual_report.json", rep.to_dict())
    return True


def cmd_approximation(cfg: ExperimentConfig, outdir: Path) -> bool:
    from .approximation import approximation_experiment
    rep = approximation_experiment(cfg.omega0, cfg.theta, cfg.deltas,
                                   T0=cfg.t0, n_slow=cfg.n_slow,
                                   n_checkpoints=cfg.n_checkpoints)
    rows = [(d, rep.values["error"][i]) for i, d in enumerate(rep.deltas)]
    write_csv(outdir / "approximation.csv", ["delta", "sup_error"], rows)
    write_json(outdir / "approximation_report.json", rep.to_dict())
    return bool(rep.passed)


def cmd_attractivity(cfg: ExperimentConfig, outdir: Path, seed) -> bool:
    from .approximation import attractivity_experiment
    rep = attractivity_experiment(cfg.omega0, cfg.deltas, T1=cfg.t1,
                                  seed=seed)
    rows = [(d, rep.values["us"][i], rep.values["esv"][i],
             rep.values["dx_e1u"][i], rep.values["manifold_distance"][i])
            for i, d in enumerate(rep.deltas)]
    write_csv(outdir / "attractivity.csv",
              ["delta", "us_ratio", "esv_ratio", "dx_e1u_ratio",
               "manifold_distance"], rows)
    write_json(outdir / "attractivity_report.json", rep.to_dict())
    return bool(rep.passed)


def cmd_energy(cfg: ExperimentConfig, outdir: Path, seed) -> bool:
    from .energy import absorbing_ball_experiment
    reports = absorbing_ball_experiment(
        alpha=cfg.alpha, beta=cfg.beta, gamma0=cfg.gamma0,
        gamma3=cfg.gamma3, L=cfg.length, n_points=cfg.n_points,
        n_ics=cfg.n_ics, E0_range=(cfg.e0_min, cfg.e0_max),
        T_end=cfg.t_end, seed=seed)
    rows = []
    for i, rep in enumerate(reports):
        for t, e0, e1, maj, de in zip(rep.times, rep.E0, rep.E1,
                                      rep.majorant, rep.dE0):
            rows.append((i, t, e0, e1, maj, de))
    write_csv(outdir / "energy.csv",
              ["ic_index", "T", "E0", "E1", "majorant", "dE0"],
              [(str(i), t, e0, e1, maj, de)
               for i, t, e0, e1, maj, de in rows])
    write_json(outdir / "energy_report.json",
               {"reports": [r.to_dict() for r in reports],
                "all_passed": all(r.passed for r in reports)})
    return all(r.passed for r in reports)


def cmd_global_existence(cfg: ExperimentConfig, outdir: Path, seed) -> bool:
    from .approximation import global_existence_experiment
    rep = global_existence_experiment(cfg.omega0, cfg.delta,
                                      cycles=cfg.cycles, T0=cfg.t0,
                                      T1=cfg.t1, R0=cfg.r0, seed=seed)
    write_csv(outdir / "cycles.csv", ["cycle", "norm_end"],
              [(str(i), v) for i, v in enumerate(rep.cycle_norms)])
    write_json(outdir / "global_report.json", rep.to_dict())
    return rep.passed


def cmd_coefficients(cfg: ExperimentConfig, outdir: Path) -> bool:
    from .amplitude import (coeff_condition, derive_coefficients_toy,
                            normalize, write_coefficients)
    c = derive_coefficients_toy(cfg.omega0)
    n = normalize(c)
    ok, margin = coeff_condition(n)
    write_coefficients(outdir / "coefficients.txt", c)
    write_json(outdir / "normalized.json", {
        "omega0": cfg.omega0,
        "a3": [c.a3.real, c.a3.imag],
        "alpha": n.alpha, "beta": n.beta, "gamma0": n.gamma0,
        "gamma3": n.gamma3, "scales": list(n.scales),
        "b1_zero": n.b1_zero, "coeff_condition": ok,
        "coeff_margin": margin,
    })
    return True


def run(cfg: ExperimentConfig, subcommand: str, outdir, seed=None) -> bool:
    """Dispatch one subcommand; returns True when its checks passed."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    seed = cfg.seed if seed is None else seed
    if subcommand == "spectrum":
        ok = cmd_spectrum(cfg, outdir)
    elif subcommand == "simulate-rd":
        ok = cmd_simulate_rd(cfg, outdir, seed)
    elif subcommand == "simulate-amplitude":
        ok = cmd_simulate_amplitude(cfg, outdir, seed)
    elif subcommand == "residuals":
        ok = cmd_residuals(cfg, outdir)
    elif subcommand == "approximation":
        ok = cmd_approximation(cfg, outdir)
    elif subcommand == "attractivity":
        ok = cmd_attractivity(cfg, outdir, seed)
    elif subcommand == "energy":
        ok = cmd_energy(cfg, outdir, seed)
    elif subcommand == "global-existence":
        ok = cmd_global_existence(cfg, outdir, seed)
    elif subcommand == "coefficients":
        ok = cmd_coefficients(cfg, outdir)
    else:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    write_manifest(outdir, cfg, subcommand, seed)
    return ok


def _sweep_job(args):
    values, subcommand, outdir, seed, parameter, value = args
    cfg = ExperimentConfig(values=dict(values))
    cfg.values[parameter] = value
    cfg.validate()
    ok = run(cfg, subcommand, outdir, seed)
    return value, ok, str(outdir)


def sweep(cfg: ExperimentConfig, subcommand: str, parameter: str,
          values, outdir, seed=None, workers: int = 1) -> dict:
    """Run the base experiment once per parameter value; aggregate."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    seed = cfg.seed if seed is None else seed
    jobs = [(cfg.values, subcommand, outdir / f"{parameter}_{i}", seed,
             parameter, v) for i, v in enumerate(values)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    aggregate = {
        "subcommand": subcommand, "parameter": parameter,
        "runs": [{"value": v, "passed": ok, "outdir": d}
                 for v, ok, d in results],
        "all_passed": all(ok for _, ok, _ in results),
    }
    write_json(outdir / "sweep_report.json", aggregate)
    return aggregate


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hopfcl",
        description="Simulation and verification suite for reaction-"
                    "diffusion systems with a conservation law near a "
                    "long-wave Hopf bifurcation")
    parser.add_argument("--subcommand", required=True, choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--sweep-parameter", default=None)
    parser.add_argument("--sweep-values", default=None,
                        help="JSON list of values for --sweep-parameter")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.sweep_parameter:
            values = json.loads(args.sweep_values)
            agg = sweep(cfg, args.subcommand, args.sweep_parameter, values,
                        args.out, seed=args.seed, workers=args.workers)
            ok = agg["all_passed"]
        else:
            ok = run(cfg, args.subcommand, args.out, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # experiment machinery failure
        print(f"experiment error: {exc}", file=sys.stderr)
        return EXIT_EXPERIMENT

    if not ok:
        print("experiment checks failed", file=sys.stderr)
        return EXIT_EXPERIMENT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
