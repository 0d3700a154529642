"""Command-line front end.

Subcommands:
  multiplicities  print the code-dimension table n(N) for a given rank
  basis           compute an orthonormal code basis and write it to disk
  simulate        evolve an encoded state against an unencoded reference
  robustness      sweep replica-position phases and track the fixed point

``simulate`` and ``robustness`` read a JSON config validated strictly
against the default template: unknown keys are a hard error (exit 2).
Physics budget violations exit 1; success exits 0.  All file output is
bitwise deterministic for a fixed config (no timestamps).
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, codes, dynamics, repn

ENCODED_DEVIATION_BUDGET = 1e-8

DEFAULT_CONFIG = {
    "name": "default",
    "replicas": 4,
    "rank": 1,
    "level_splittings": [1.0],
    "deviation_budget": ENCODED_DEVIATION_BUDGET,
    "bath": {"frequencies": [1.0, 1.3], "fock_truncation": 3},
    "coupling": {
        "absorption": 1.0,
        "counter_rotating": 1.0,
        "dephasing": 1.0,
        "tau": None,
        "random": False,
        "random_scale": 1.0,
        "enable_absorption": True,
        "enable_counter_rotating": True,
        "enable_dephasing": True,
    },
    "initial": {
        "encoded_state": "random-mixed",
        "register_state": None,
        "reference_state": "alternating",
        "bath_mixture": None,
    },
    "time": {"t_max": 20.0, "steps": 81},
    "phase_scales": [0.0, 1e-3, 1e-2, 1e-1],
    "seed": 7,
    "output_dir": "runs",
}


class ConfigError(Exception):
    """Malformed or unknown configuration content."""


def _merge_config(defaults: dict, overrides: dict, path: str = "") -> dict:
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {here} must be an object")
            merged[key] = _merge_config(defaults[key], value, here)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path: str) -> dict:
    with open(path) as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    return _merge_config(DEFAULT_CONFIG, user)


def _coupling_table(value, n_modes: int, rank: int, name: str) -> np.ndarray:
    if isinstance(value, (int, float)):
        return np.full((n_modes, rank), complex(value))
    arr = np.asarray(value, dtype=complex)
    if arr.shape != (n_modes, rank):
        raise ConfigError(
            f"coupling.{name} must be a scalar or a {n_modes} x {rank} table, "
            f"got shape {arr.shape}"
        )
    return arr


def _build_setup(config: dict, rng: np.random.Generator) -> dynamics.SimulationSetup:
    system = dynamics.SystemSpec(
        rank=int(config["rank"]),
        replicas=int(config["replicas"]),
        level_splittings=tuple(config["level_splittings"]),
    )
    bath = dynamics.BathSpec(
        frequencies=tuple(config["bath"]["frequencies"]),
        fock_truncation=int(config["bath"]["fock_truncation"]),
    )
    cc = config["coupling"]
    flags = {
        "enable_absorption": bool(cc["enable_absorption"]),
        "enable_counter_rotating": bool(cc["enable_counter_rotating"]),
        "enable_dephasing": bool(cc["enable_dephasing"]),
    }
    if cc["random"]:
        coupling = dynamics.random_coupling(
            rng, bath.n_modes, system.rank, scale=float(cc["random_scale"]), **flags
        )
        if cc["tau"] is not None:
            coupling = dynamics.CouplingSpec(
                absorption=coupling.absorption,
                counter_rotating=coupling.counter_rotating,
                dephasing=coupling.dephasing,
                tau=np.asarray(cc["tau"], dtype=complex),
                **flags,
            )
    else:
        tau = np.ones(system.rank) if cc["tau"] is None else np.asarray(cc["tau"])
        coupling = dynamics.CouplingSpec(
            absorption=_coupling_table(cc["absorption"], bath.n_modes, system.rank, "absorption"),
            counter_rotating=_coupling_table(
                cc["counter_rotating"], bath.n_modes, system.rank, "counter_rotating"
            ),
            dephasing=_coupling_table(cc["dephasing"], bath.n_modes, system.rank, "dephasing"),
            tau=tau,
            **flags,
        )
    return dynamics.SimulationSetup(system=system, bath=bath, coupling=coupling)


def _bath_density(config: dict, bath: dynamics.BathSpec) -> np.ndarray:
    mixture = config["initial"]["bath_mixture"]
    if mixture is None:
        return dynamics.fock_mixture(bath, [(1.0, [0] * bath.n_modes)])
    if not isinstance(mixture, list) or not mixture:
        raise ConfigError("initial.bath_mixture must be a non-empty list")
    terms = []
    for i, entry in enumerate(mixture):
        if not isinstance(entry, dict):
            raise ConfigError(f"initial.bath_mixture[{i}] must be an object")
        extra = set(entry) - {"weight", "occupations"}
        if extra:
            raise ConfigError(
                f"unknown config key: initial.bath_mixture[{i}].{sorted(extra)[0]}"
            )
        if "weight" not in entry or "occupations" not in entry:
            raise ConfigError(
                f"initial.bath_mixture[{i}] needs 'weight' and 'occupations'"
            )
        terms.append((float(entry["weight"]), [int(n) for n in entry["occupations"]]))
    return dynamics.fock_mixture(bath, terms)


def _amplitude_list(values, what: str) -> np.ndarray:
    amps = []
    for a in values:
        if isinstance(a, list):
            if len(a) != 2:
                raise ConfigError(f"{what} entries must be numbers or [re, im]")
            amps.append(complex(a[0], a[1]))
        else:
            amps.append(complex(a))
    amps = np.asarray(amps)
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ConfigError(f"{what} amplitudes are all zero")
    return amps / norm


def _encoded_density(
    config: dict, code: codes.CodeSubspace, rng: np.random.Generator
) -> np.ndarray:
    """Initial register state: an explicit register ket wins over encoded_state."""
    register = config["initial"]["register_state"]
    if register is not None:
        ket = _amplitude_list(register, "initial.register_state")
        if ket.shape != (code.physical_dim,):
            raise ConfigError(
                f"initial.register_state needs {code.physical_dim} amplitudes, "
                f"got {ket.shape[0]}"
            )
        return dynamics.ket_density(ket)
    choice = config["initial"]["encoded_state"]
    if choice == "random-mixed":
        return codes.random_code_density(code, rng)
    if choice == "random-pure":
        return dynamics.ket_density(codes.random_code_ket(code, rng))
    if isinstance(choice, list):
        amps = _amplitude_list(choice, "initial.encoded_state")
        if amps.shape != (code.dim,):
            raise ConfigError(
                f"initial.encoded_state needs {code.dim} logical amplitudes, "
                f"got {amps.shape[0]}"
            )
        return dynamics.ket_density(code.encode(amps))
    raise ConfigError(
        "initial.encoded_state must be 'random-mixed', 'random-pure' or an "
        "amplitude list"
    )


def _reference_density(config: dict, system: dynamics.SystemSpec) -> np.ndarray:
    choice = config["initial"]["reference_state"]
    if choice == "alternating":
        ket = dynamics.alternating_product_ket(system.replicas, system.local_dim)
    elif choice == "uniform":
        ket = dynamics.uniform_superposition_ket(system.replicas, system.local_dim)
    else:
        raise ConfigError(
            "initial.reference_state must be 'alternating' or 'uniform'"
        )
    return dynamics.ket_density(ket)


def _format_float(x: float) -> str:
    return "%.17g" % x


def _write_sweep_csv(path: str, points, comments) -> None:
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("phase_scale,max_infidelity,max_leakage\n")
        for p in points:
            fh.write(
                f"{_format_float(p.phase_scale)},{_format_float(p.max_infidelity)},"
                f"{_format_float(p.max_leakage)}\n"
            )


def _provenance(config: dict, what: str) -> list[str]:
    return [
        f"{what} (dfscodes {__version__})",
        f"seed={config['seed']}",
        "config " + json.dumps(config, sort_keys=True),
    ]


# ---------------------------------------------------------------------------
# subcommands


def cmd_multiplicities(args) -> int:
    if args.rank < 1:
        raise ConfigError(f"--rank must be >= 1, got {args.rank}")
    if args.max_n < 2:
        raise ConfigError(f"--max-n must be >= 2, got {args.max_n}")
    print("replicas,multiplicity,log2_multiplicity,per_replica,hilbert_fraction")
    for n in range(1, args.max_n + 1):
        count = repn.singlet_multiplicity(n, args.rank)
        if count > 0:
            eff = repn.encoding_efficiency(n, args.rank)
            cols = [
                _format_float(eff.log2_n),
                _format_float(eff.per_replica),
                _format_float(eff.hilbert_fraction),
            ]
        else:
            cols = ["nan", "nan", "nan"]
        print(f"{n},{count}," + ",".join(cols))
    return 0


def cmd_basis(args) -> int:
    code = codes.singlet_basis(args.n, args.rank)
    os.makedirs(args.out, exist_ok=True)
    stem = f"basis_n{args.n}_r{args.rank}"
    txt_path = os.path.join(args.out, stem + ".txt")
    npy_path = os.path.join(args.out, stem + ".npy")
    with open(txt_path, "w") as fh:
        fh.write(
            f"# code basis: replicas={args.n} rank={args.rank} "
            f"dim={code.dim} physical_dim={code.physical_dim}\n"
        )
        fh.write("# one vector per line: (basis_index, re, im) triples\n")
        for row in code.basis:
            parts = []
            for idx in np.nonzero(np.abs(row) > 1e-14)[0]:
                parts.append(
                    f"{idx} {_format_float(row[idx].real)} {_format_float(row[idx].imag)}"
                )
            fh.write("  ".join(parts) + "\n")
    np.save(npy_path, code.basis)
    print(
        f"wrote code basis (dim {code.dim}, physical {code.physical_dim}) "
        f"to {txt_path} and {npy_path}"
    )
    print(f"annihilation residual: {codes.annihilation_residual(code):.3e}")
    if (args.n, args.rank) == (4, 1):
        angles = codes.principal_angles(code.basis, codes.c4_reference_basis())
        print(
            "principal angles against the explicit 4-replica basis: "
            + " ".join(f"{a:.3e}" for a in angles)
        )
    return 0


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    out_dir = args.out if args.out is not None else config["output_dir"]
    rng = np.random.default_rng(int(config["seed"]))
    setup = _build_setup(config, rng)
    code = codes.singlet_basis(setup.system.replicas, setup.system.rank)
    rho_encoded = _encoded_density(config, code, rng)
    rho_reference = _reference_density(config, setup.system)
    rho_bath = _bath_density(config, setup.bath)
    times = dynamics.time_grid(
        float(config["time"]["t_max"]), int(config["time"]["steps"])
    )
    budget = float(config["deviation_budget"])

    traj_encoded = dynamics.run_trajectory(setup, rho_encoded, rho_bath, times, code=code)
    traj_reference = dynamics.run_trajectory(
        setup, rho_reference, rho_bath, times, code=code
    )

    os.makedirs(out_dir, exist_ok=True)
    enc_path = os.path.join(out_dir, "trajectory.csv")
    ref_path = os.path.join(out_dir, "reference.csv")
    traj_encoded.write_csv(enc_path, comments=_provenance(config, "encoded trajectory"))
    traj_reference.write_csv(
        ref_path, comments=_provenance(config, "unencoded reference trajectory")
    )

    max_deviation = float(traj_encoded.trace_distance.max())
    ref_min_fidelity = float(traj_reference.fidelity.min())
    passed = max_deviation <= budget
    summary = {
        "max_trace_distance": max_deviation,
        "deviation_budget": budget,
        "encoded_pass": passed,
        "reference_min_fidelity": ref_min_fidelity,
        "reference_max_trace_distance": float(traj_reference.trace_distance.max()),
        "code_dimension": code.dim,
    }
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(
        f"encoded: max trace distance {max_deviation:.3e} "
        f"(budget {budget:.0e}): {'PASS' if passed else 'FAIL'}"
    )
    print(
        f"reference: min fidelity {ref_min_fidelity:.6f}, "
        f"max trace distance {summary['reference_max_trace_distance']:.6f}"
    )
    print(f"wrote {enc_path}, {ref_path}, {summary_path}")
    return 0 if passed else 1


def cmd_robustness(args) -> int:
    config = load_config(args.config)
    out_dir = args.out if args.out is not None else config["output_dir"]
    scales = [float(s) for s in config["phase_scales"]]
    if not scales:
        raise ConfigError("phase_scales must be non-empty")
    if sorted(scales) != scales:
        raise ConfigError("phase_scales must be sorted ascending")
    rng = np.random.default_rng(int(config["seed"]))
    setup = _build_setup(config, rng)
    code = codes.singlet_basis(setup.system.replicas, setup.system.rank)
    # Pure encoded state: its infidelity is an exact sesquilinear form, so the
    # zero-phase row sits at integrator precision instead of at the mixed-state
    # fidelity floor.
    rho_encoded = dynamics.ket_density(codes.random_code_ket(code, rng))
    rho_reference = _reference_density(config, setup.system)
    rho_bath = _bath_density(config, setup.bath)
    times = dynamics.time_grid(
        float(config["time"]["t_max"]), int(config["time"]["steps"])
    )
    budget = float(config["deviation_budget"])

    def one_scale(rho, scale):
        return dynamics.symmetry_breaking_sweep(
            code, setup, [scale], rho, rho_bath, times
        )[0]

    if args.parallel > 1:
        with ThreadPoolExecutor(max_workers=args.parallel) as pool:
            encoded_points = list(pool.map(lambda s: one_scale(rho_encoded, s), scales))
            reference_points = list(
                pool.map(lambda s: one_scale(rho_reference, s), scales)
            )
    else:
        encoded_points = [one_scale(rho_encoded, s) for s in scales]
        reference_points = [one_scale(rho_reference, s) for s in scales]

    os.makedirs(out_dir, exist_ok=True)
    enc_path = os.path.join(out_dir, "robustness.csv")
    ref_path = os.path.join(out_dir, "robustness_reference.csv")
    _write_sweep_csv(
        enc_path, encoded_points, _provenance(config, "encoded phase sweep")
    )
    _write_sweep_csv(
        ref_path, reference_points, _provenance(config, "unencoded reference phase sweep")
    )

    for p in encoded_points:
        print(
            f"phase_scale {p.phase_scale:g}: max infidelity {p.max_infidelity:.3e}, "
            f"max leakage {p.max_leakage:.3e}"
        )
    passed = True
    if 0.0 in scales:
        zero = encoded_points[scales.index(0.0)]
        passed = zero.max_infidelity <= budget
        print(
            f"zero-phase budget ({budget:.0e}): {'PASS' if passed else 'FAIL'}"
        )
    print(f"wrote {enc_path}, {ref_path}")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfscodes",
        description="Construct collective-symmetry code subspaces and verify "
        "that encoded states are fixed points of the reduced dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_mult = sub.add_parser(
        "multiplicities", help="print the code-dimension table for a rank"
    )
    p_mult.add_argument("--rank", type=int, default=1, help="Chevalley rank r")
    p_mult.add_argument(
        "--max-n", type=int, required=True, help="largest replica count to tabulate"
    )
    p_mult.set_defaults(func=cmd_multiplicities)

    p_basis = sub.add_parser("basis", help="compute and store an orthonormal code basis")
    p_basis.add_argument("--n", type=int, required=True, help="replica count N")
    p_basis.add_argument("--rank", type=int, default=1, help="Chevalley rank r")
    p_basis.add_argument("--out", required=True, help="output directory")
    p_basis.set_defaults(func=cmd_basis)

    p_sim = sub.add_parser(
        "simulate", help="evolve an encoded state and an unencoded reference"
    )
    p_sim.add_argument("--config", required=True, help="JSON config file")
    p_sim.add_argument("--out", default=None, help="override config output_dir")
    p_sim.set_defaults(func=cmd_simulate)

    p_rob = sub.add_parser(
        "robustness", help="sweep replica-position coupling phases"
    )
    p_rob.add_argument("--config", required=True, help="JSON config file")
    p_rob.add_argument("--out", default=None, help="override config output_dir")
    p_rob.add_argument(
        "--parallel", type=int, default=1, help="worker threads for the sweep"
    )
    p_rob.set_defaults(func=cmd_robustness)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
