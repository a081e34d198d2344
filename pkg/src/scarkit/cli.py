"""The `scar` command line: search -> state construction -> dynamics pipelines.

Every run writes a report bundle into --out: a machine-readable summary.json
(config echo, config hash, code version, wall time), the delimited data
files, and the matching figures.  Re-running an identical config reproduces
the summary byte for byte apart from the wall-time field.

Exit codes: 0 success, 2 config error, 3 resource limit, 4 numerical failure.
"""
from __future__ import annotations

import hashlib
import json
import os
import sys
import time

import click
import numpy as np

from . import __version__
from .basis import Basis, BasisSizeError, enumerate_basis
from .dynamics import (
    DimCapError,
    entanglement_entropy,
    evolve,
    full_spectrum,
    make_occupation_observers,
    optimize_deformation,
    overlap_scatter,
    revival_metrics,
)
from .graph import (
    Bipartition,
    Graph,
    GraphFormatError,
    Partition3,
    format_graph,
    load_graph,
    two_color,
)
from .lattices import (
    LatticeSpec,
    UnsupportedBoundaryError,
    build_lattice,
    canonical_type2_partition,
    parse_lattice_token,
)
from .operators import ConvergenceError, build_pxp, build_su2
from .search import (
    SearchDiagnostics,
    candidate_to_dict,
    find_type1,
    search_type2,
    type2_to_dict,
    CliqueCover,
    TypeICandidate,
)
from .states import (
    DegenerateStateError,
    all_down,
    dimer_neel,
    fock_state,
    gs_theta,
    max_occupied,
    neel_state,
    y_gamma,
    z_beta,
)
from . import plotting

EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4


class ConfigError(click.ClickException):
    exit_code = EXIT_CONFIG


def _atomic_write(path: str, data: str) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _write_summary(outdir: str, config: dict, results: dict, t0: float) -> str:
    h = _config_hash(config)
    summary = {
        "version": __version__,
        "config": config,
        "config_hash": h,
        "results": results,
        "wall_time_s": round(time.time() - t0, 3),
    }
    _atomic_write(os.path.join(outdir, "summary.json"),
                  json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return h


def _write_csv(path: str, header, rows, config_hash: str) -> None:
    lines = [f"# config_hash={config_hash}", ",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else repr(float(v)) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _load_input_graph(lattice: str, graph_file: str):
    """Returns (graph, lattice_spec or None, config fragment)."""
    if (lattice is None) == (graph_file is None):
        raise ConfigError("exactly one of --lattice or --graph is required")
    if lattice is not None:
        try:
            spec = parse_lattice_token(lattice)
            return build_lattice(spec), spec, {"lattice": lattice}
        except UnsupportedBoundaryError as exc:
            raise ConfigError(str(exc))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad lattice token: {exc}")
    try:
        g = load_graph(graph_file)
    except FileNotFoundError:
        raise ConfigError(f"graph file not found: {graph_file}")
    except GraphFormatError as exc:
        raise ConfigError(f"malformed graph file: {exc}")
    return g, None, {"graph": os.path.abspath(graph_file)}


def _parse_partition(text: str, g: Graph, spec) -> Partition3:
    if text == "auto":
        if spec is None:
            raise ConfigError("--partition auto needs --lattice")
        try:
            return canonical_type2_partition(spec)
        except ValueError as exc:
            raise ConfigError(str(exc))
    try:
        sets = {}
        for chunk in text.split(";"):
            key, vals = chunk.split("=")
            sets[key.strip().upper()] = tuple(
                int(v) for v in vals.split(",") if v.strip() != ""
            )
        p = Partition3(sets.get("A", ()), sets.get("B", ()), sets.get("C", ()))
        p.validate(g)
        return p
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad --partition {text!r}: {exc}")


def _load_candidate(path: str, index: int, g: Graph):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        entry = doc["candidates"][index]
    except FileNotFoundError:
        raise ConfigError(f"candidate file not found: {path}")
    except (KeyError, IndexError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad candidate file {path}: {exc}")
    part = entry["partition"]
    partition = Partition3(tuple(part["A"]), tuple(part["B"]), tuple(part.get("C", ())))
    if entry.get("kind") == "type1":
        cover = CliqueCover.from_blocks(tuple(b) for b in entry["blocks"])
        flags = entry["block_flags"]
        # reconstruct coloring aligned with canonical block order
        order = {tuple(sorted(b)): f for b, f in zip(entry["blocks"], flags)}
        coloring = Bipartition(tuple(order[b] for b in cover.blocks))
        return TypeICandidate(cover, coloring, partition, bool(entry["uniform"]))
    return partition


def _resolve_state(name, basis, g, spec, partition, candidate, dtype):
    """Build the initial state from its CLI spec string."""
    token = name.split(":")
    kind = token[0]
    if kind == "all-down":
        return all_down(basis, dtype), partition
    if kind == "neel":
        coloring = two_color(g)
        if coloring is None:
            raise ConfigError("neel state needs a bipartite graph")
        flag = int(token[1]) if len(token) > 1 else 0
        if partition is None:
            partition = Partition3(coloring.side(0), coloring.side(1), ())
        return neel_state(basis, coloring, flag, dtype), partition
    if kind == "max-occupied":
        return fock_state(basis, max_occupied(basis), dtype), partition
    if kind == "fock":
        bits = token[1]
        config = sum(1 << j for j, ch in enumerate(bits) if ch == "1")
        try:
            return fock_state(basis, config, dtype), partition
        except KeyError:
            raise ConfigError(f"configuration {bits} violates the blockade")
    if kind == "dimer-neel":
        if not isinstance(candidate, TypeICandidate):
            raise ConfigError("dimer-neel needs --candidate pointing at a type1 entry")
        side = token[1] if len(token) > 1 else "B"
        state = dimer_neel(basis, candidate, f"{side}_excited", dtype)
        return state, candidate.partition if partition is None else partition
    need_partition = {"gs-y", "gs-z", "gs-theta", "y-gamma", "z-beta"}
    if kind in need_partition:
        if partition is None:
            raise ConfigError(f"state {kind} needs --partition or a type2 --candidate")
        if kind == "y-gamma":
            state, _ = y_gamma(g, basis, partition, float(token[1]), dtype)
            return state, partition
        if kind == "z-beta":
            return z_beta(g, basis, partition, float(token[1]), dtype), partition
        ops = build_su2(g, basis, partition)
        if kind == "gs-y":
            return gs_theta(ops, np.pi / 2, tol=1e-10).astype(dtype), partition
        if kind == "gs-z":
            return gs_theta(ops, 0.0, tol=1e-10).astype(dtype), partition
        theta = float(token[1])
        return gs_theta(ops, theta, tol=1e-10).astype(dtype), partition
    raise ConfigError(f"unknown state spec {name!r}")


def _maybe_threads():
    """SCAR_THREADS limits the BLAS pools (best effort)."""
    val = os.environ.get("SCAR_THREADS")
    if not val:
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(int(val))
    except Exception:
        os.environ.setdefault("OMP_NUM_THREADS", val)


@click.group()
@click.version_option(__version__)
def main():
    """Scar-candidate search and PXP dynamics on blockade graphs."""
    _maybe_threads()


@main.command("lattice")
@click.option("--lattice", required=True, help="name:NxM[:pbc|obc], e.g. hexagonal:4x4:pbc")
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True)
def lattice_cmd(lattice, out, figures):
    """Generate a named lattice and write its graph document."""
    t0 = time.time()
    g, spec, frag = _load_input_graph(lattice, None)
    os.makedirs(out, exist_ok=True)
    config = {"mode": "lattice", **frag, "figures": figures}
    h = _config_hash(config)
    _atomic_write(os.path.join(out, "graph.txt"), f"# config_hash={h}\n" + format_graph(g))
    results = {"vertices": g.vertex_count, "edges": g.edge_count}
    if figures:
        plotting.plot_graph(g, os.path.join(out, "lattice.png"), title=lattice)
    _write_summary(out, config, results, t0)
    click.echo(f"{lattice}: {g.vertex_count} vertices, {g.edge_count} edges -> {out}")


@main.group("search")
def search_group():
    """Candidate searches."""


@search_group.command("type1")
@click.option("--lattice", default=None)
@click.option("--graph", "graph_file", default=None, type=click.Path())
@click.option("--clique-sizes", default="2", show_default=True)
@click.option("--uniform/--mixed", default=True, show_default=True,
              help="one cover instance per clique size vs one mixed instance")
@click.option("--limit", default=None, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True)
def search_type1_cmd(lattice, graph_file, clique_sizes, uniform, limit, out, figures):
    """Exact clique covers with bipartite quotient."""
    t0 = time.time()
    g, spec, frag = _load_input_graph(lattice, graph_file)
    try:
        sizes = [int(s) for s in clique_sizes.split(",")]
    except ValueError:
        raise ConfigError(f"bad --clique-sizes {clique_sizes!r}")
    os.makedirs(out, exist_ok=True)
    config = {"mode": "search-type1", **frag, "clique_sizes": sizes,
              "uniform": uniform, "limit": limit, "figures": figures}
    diag = SearchDiagnostics()
    cands = find_type1(g, sizes, uniform_only=uniform, limit=limit, diagnostics=diag)
    h = _config_hash(config)
    doc = {"config_hash": h, "candidates": [candidate_to_dict(c) for c in cands]}
    _atomic_write(os.path.join(out, "candidates.json"), json.dumps(doc, indent=2) + "\n")
    if figures:
        plotting.plot_candidates(g, cands, os.path.join(out, "candidates.png"))
    results = {"covers_examined": diag.covers_examined, "candidates": len(cands)}
    _write_summary(out, config, results, t0)
    click.echo(f"type1: {diag.covers_examined} covers examined, {len(cands)} candidates")


@search_group.command("type2")
@click.option("--lattice", default=None)
@click.option("--graph", "graph_file", default=None, type=click.Path())
@click.option("--seed", required=True, type=int, help="mandatory: annealing is stochastic")
@click.option("--exhaustive-threshold", default=18, show_default=True, type=int)
@click.option("--anneal-steps", default=4000, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True)
def search_type2_cmd(lattice, graph_file, seed, exhaustive_threshold, anneal_steps, out, figures):
    """Three-set partitions built on maximum independent sets."""
    t0 = time.time()
    g, spec, frag = _load_input_graph(lattice, graph_file)
    os.makedirs(out, exist_ok=True)
    config = {"mode": "search-type2", **frag, "seed": seed,
              "exhaustive_threshold": exhaustive_threshold,
              "anneal_steps": anneal_steps, "figures": figures}
    diag = SearchDiagnostics()
    cands = search_type2(g, exhaustive_threshold=exhaustive_threshold,
                         anneal_steps=anneal_steps, seed=seed, diagnostics=diag)
    h = _config_hash(config)
    doc = {"config_hash": h, "candidates": [type2_to_dict(c) for c in cands]}
    _atomic_write(os.path.join(out, "candidates.json"), json.dumps(doc, indent=2) + "\n")
    if figures:
        plotting.plot_candidates(g, cands, os.path.join(out, "candidates.png"))
    results = {"maximum_sets_examined": diag.independent_sets_examined,
               "mis_truncated": diag.truncated, "candidates": len(cands)}
    _write_summary(out, config, results, t0)
    click.echo(f"type2: {len(cands)} passing candidates "
               f"({diag.independent_sets_examined} maximum independent sets)")


def _common_state_options(fn):
    fn = click.option("--candidate", "candidate_file", default=None, type=click.Path())(fn)
    fn = click.option("--index", default=0, show_default=True, type=int)(fn)
    fn = click.option("--partition", "partition_text", default=None,
                      help="'auto' or 'A=..;B=..;C=..' vertex lists")(fn)
    return fn


@main.command("quench")
@click.option("--lattice", default=None)
@click.option("--graph", "graph_file", default=None, type=click.Path())
@click.option("--state", required=True, help="all-down | neel | max-occupied | fock:BITS | "
              "dimer-neel[:A|B] | gs-y | gs-z | gs-theta:T | y-gamma:G | z-beta:B")
@_common_state_options
@click.option("--tmax", default=40.0, show_default=True, type=float)
@click.option("--dt", default=0.05, show_default=True, type=float)
@click.option("--krylov-dim", default=30, show_default=True, type=int)
@click.option("--tol", default=1e-9, show_default=True, type=float)
@click.option("--float32", is_flag=True, default=False,
              help="single-precision operator and state (large lattices)")
@click.option("--state-cap", default=1 << 27, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True)
def quench_cmd(lattice, graph_file, state, candidate_file, index, partition_text,
               tmax, dt, krylov_dim, tol, float32, state_cap, out, figures):
    """Evolve an initial state under PXP and record fidelity + occupations."""
    t0 = time.time()
    g, spec, frag = _load_input_graph(lattice, graph_file)
    os.makedirs(out, exist_ok=True)
    config = {"mode": "quench", **frag, "state": state, "candidate": candidate_file,
              "index": index, "partition": partition_text, "tmax": tmax, "dt": dt,
              "krylov_dim": krylov_dim, "tol": tol, "float32": float32,
              "figures": figures}
    basis = enumerate_basis(g, cap=state_cap)
    partition = None
    candidate = None
    if candidate_file is not None:
        loaded = _load_candidate(candidate_file, index, g)
        if isinstance(loaded, TypeICandidate):
            candidate = loaded
            partition = loaded.partition
        else:
            partition = loaded
    if partition_text is not None:
        partition = _parse_partition(partition_text, g, spec)
    dtype = np.complex64 if float32 else np.complex128
    psi0, partition = _resolve_state(state, basis, g, spec, partition, candidate, dtype)
    mat_dtype = np.float32 if float32 else np.float64
    H = build_pxp(g, basis, dtype=mat_dtype)
    times = np.arange(0.0, tmax + dt / 2, dt)
    observers = make_occupation_observers(basis, partition) if partition else {}
    traj = evolve(H, psi0, times, krylov_dim=krylov_dim, tol=tol,
                  store_states=False, observers=observers, basis=basis)
    h = _config_hash(config)
    f = traj.series["fidelity"]
    cols = [traj.times, f]
    header = ["t", "fidelity", "nA", "nB", "nC"]
    for key in ("nA", "nB", "nC"):
        cols.append(traj.series.get(key, [None] * len(f)))
    rows = list(zip(*cols))
    _write_csv(os.path.join(out, "series.csv"), header, rows, h)
    met = revival_metrics(traj.times, f, settle=1.0)
    results = {
        "dim": basis.dim,
        "norm_drift": traj.norm_drift,
        "revivals": met.revival_count,
        "first_revival_time": met.first_revival_time,
        "first_revival_fidelity": met.first_revival_fidelity,
        "period_estimate": met.period_estimate,
    }
    if figures:
        plotting.plot_fidelity(traj.times, {state: f}, os.path.join(out, "fidelity.png"))
        if "nA" in traj.series:
            plotting.plot_occupations(traj.times, traj.series["nA"], traj.series["nB"],
                                      traj.series.get("nC"), os.path.join(out, "occupations.png"))
    _write_summary(out, config, results, t0)
    click.echo(f"quench dim={basis.dim}: {met.revival_count} revivals, "
               f"first F={met.first_revival_fidelity}")


@main.command("spectrum")
@click.option("--lattice", default=None)
@click.option("--graph", "graph_file", default=None, type=click.Path())
@click.option("--state", default="all-down", show_default=True)
@_common_state_options
@click.option("--dim-cap", default=40000, show_default=True, type=int)
@click.option("--region", default=None, help="comma-separated vertex ids for the entropy cut")
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True)
def spectrum_cmd(lattice, graph_file, state, candidate_file, index, partition_text,
                 dim_cap, region, out, figures):
    """Dense spectrum with overlap scatter and entanglement entropy."""
    t0 = time.time()
    g, spec, frag = _load_input_graph(lattice, graph_file)
    os.makedirs(out, exist_ok=True)
    config = {"mode": "spectrum", **frag, "state": state, "candidate": candidate_file,
              "index": index, "partition": partition_text, "dim_cap": dim_cap,
              "region": region, "figures": figures}
    basis = enumerate_basis(g)
    partition = None
    candidate = None
    if candidate_file is not None:
        loaded = _load_candidate(candidate_file, index, g)
        if isinstance(loaded, TypeICandidate):
            candidate, partition = loaded, loaded.partition
        else:
            partition = loaded
    if partition_text is not None:
        partition = _parse_partition(partition_text, g, spec)
    psi, partition = _resolve_state(state, basis, g, spec, partition, candidate, np.complex128)
    H = build_pxp(g, basis)
    es = full_spectrum(H, dim_cap=dim_cap)
    energies, ov, top = overlap_scatter(es, psi)
    if region:
        cut = tuple(int(v) for v in region.split(","))
    else:
        cut = tuple(range(g.vertex_count // 2))
    ent = np.array([entanglement_entropy(basis, es.vectors[:, k], cut)
                    for k in range(es.dim)])
    h = _config_hash(config)
    _write_csv(os.path.join(out, "spectrum.csv"), ["E", "overlap2", "entropy"],
               list(zip(energies, ov, ent)), h)
    results = {"dim": basis.dim, "region": list(cut),
               "max_overlap": float(np.max(ov)),
               "overlap_sum": float(np.sum(ov))}
    if figures:
        plotting.plot_spectrum(energies, ov, ent, top,
                               os.path.join(out, "spectrum.png"), title=state)
    _write_summary(out, config, results, t0)
    click.echo(f"spectrum dim={es.dim}: overlap sum {np.sum(ov):.6f}")


@main.command("optimize")
@click.option("--lattice", default=None)
@click.option("--graph", "graph_file", default=None, type=click.Path())
@click.option("--family", type=click.Choice(["y-gamma", "z-beta"]), required=True)
@click.option("--lo", required=True, type=float)
@click.option("--hi", required=True, type=float)
@_common_state_options
@click.option("--horizon", default=8.0, show_default=True, type=float)
@click.option("--krylov-dim", default=20, show_default=True, type=int)
@click.option("--tol", default=1e-6, show_default=True, type=float)
@click.option("--float32", is_flag=True, default=False)
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True)
def optimize_cmd(lattice, graph_file, family, lo, hi, candidate_file, index,
                 partition_text, horizon, krylov_dim, tol, float32, out, figures):
    """Maximize first-revival fidelity over a deformation parameter."""
    t0 = time.time()
    g, spec, frag = _load_input_graph(lattice, graph_file)
    os.makedirs(out, exist_ok=True)
    config = {"mode": "optimize", **frag, "family": family, "lo": lo, "hi": hi,
              "candidate": candidate_file, "index": index, "partition": partition_text,
              "horizon": horizon, "krylov_dim": krylov_dim, "tol": tol,
              "float32": float32, "figures": figures}
    basis = enumerate_basis(g)
    partition = None
    if candidate_file is not None:
        loaded = _load_candidate(candidate_file, index, g)
        partition = loaded.partition if isinstance(loaded, TypeICandidate) else loaded
    if partition_text is not None:
        partition = _parse_partition(partition_text, g, spec)
    if partition is None:
        raise ConfigError("optimize needs --partition or --candidate")
    dtype = np.complex64 if float32 else np.complex128
    H = build_pxp(g, basis, dtype=np.float32 if float32 else np.float64)

    if family == "y-gamma":
        builder = lambda p: y_gamma(g, basis, partition, p, dtype)[0]
    else:
        builder = lambda p: z_beta(g, basis, partition, p, dtype)

    history = []
    best, fbest = optimize_deformation(builder, lo, hi, H, horizon,
                                       krylov_dim=krylov_dim, tol=tol, history=history)
    h = _config_hash(config)
    _write_csv(os.path.join(out, "optimize.csv"), ["param", "first_revival_fidelity"],
               history, h)
    results = {"dim": basis.dim, "param_best": best, "fidelity_best": fbest,
               "evaluations": len(history)}
    _write_summary(out, config, results, t0)
    if figures:
        params, vals = zip(*history)
        plotting.plot_objective_curve(params, vals, best,
                                      os.path.join(out, "optimize.png"), xlabel=family)
    click.echo(f"{family}: best {best:.4f} with first-revival fidelity {fbest:.4f}")


def run():
    """Console entry point with the documented exit codes."""
    try:
        main.main(standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(EXIT_CONFIG)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except (BasisSizeError, DimCapError) as exc:
        click.echo(f"resource error: {exc}", err=True)
        sys.exit(EXIT_RESOURCE)
    except (ConvergenceError, DegenerateStateError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    except (ValueError, KeyError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except click.Abort:
        sys.exit(EXIT_CONFIG)


if __name__ == "__main__":
    run()
