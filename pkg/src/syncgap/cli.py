"""Command-line driver: analyze / classify / simulate / oracle.

Reports are JSON with floats fixed at 12 significant digits so identical
inputs produce byte-identical output; trajectories go to CSV.  Exit codes:
0 success, 2 violated preconditions or malformed input, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import directed as dz
from . import dynamics as dyn
from . import undirected as uz
from .errors import (
    AmbiguousLocationError,
    GapInMasterError,
    GapNotSimpleError,
    NotConnectedError,
    NotDiagonalizableError,
    NotTwoComponentsError,
    SyncgapError,
)
from .graphs import condensation, cutset_blocks, laplacian, load_edge_list
from .spectra import directed_link_matrix, fd_gap_slope, full_spectrum, gap_slope, \
    spectral_gap, undirected_link_matrix


def _round_floats(obj):
    """Pin every float to 12 significant digits for stable JSON output."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _complex_dict(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _write_text(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit(report: dict, output: str | None) -> None:
    _write_text(json.dumps(_round_floats(report), indent=2) + "\n", output)


def _emit_csv(header: list[str], rows: list[list], output: str | None) -> None:
    def cell(v):
        return f"{v:.12g}" if isinstance(v, float) else str(v)

    lines = [",".join(header)] + [",".join(cell(v) for v in row) for row in rows]
    _write_text("\n".join(lines) + "\n", output)


def _echo_section(g) -> dict:
    return {"nodes": g.n, "edges": [[u + 1, v + 1, w] for u, v, w in g.edges]}


def _graph_section(g, rep) -> dict:
    return {
        "nodes": g.n,
        "arcs": g.m,
        "directed": g.directed,
        "strong_components": len(rep.components),
        "satisfies_a1": rep.satisfies_a1,
    }


def cmd_analyze(args) -> int:
    g = load_edge_list(args.graph)
    rep = condensation(g)
    warnings: list[str] = []
    if not rep.satisfies_a1:
        raise NotConnectedError(
            f"{len(rep.root_components)} root components: no spanning diverging tree")
    L = laplacian(g)
    info = spectral_gap(L, args.tol)
    if not info.is_simple:
        warnings.append("spectral gap is not simple")
    location = "whole" if len(rep.components) == 1 else None
    if len(rep.components) == 2:
        try:
            location = dz.gap_location(cutset_blocks(g), args.tol).location
        except (GapNotSimpleError, AmbiguousLocationError) as exc:
            warnings.append(f"{exc.__class__.__name__}: {exc}")
    spec = full_spectrum(L, args.tol)
    if args.format == "csv":
        rows = [[i + 1, float(z.real), float(z.imag), bool(s)]
                for i, (z, s) in enumerate(zip(spec.eigenvalues, spec.simple))]
        _emit_csv(["index", "re", "im", "simple"], rows, args.output)
        return 0
    report = {
        "command": "analyze",
        "seed": args.seed,
        "graph": _graph_section(g, rep),
        "spectrum": {
            "lambda2": _complex_dict(info.lambda2),
            "simple": info.is_simple,
            "location": location,
            "eigenvalues": [_complex_dict(z) for z in spec.eigenvalues],
        },
        "warnings": warnings,
        "echo": _echo_section(g),
    }
    _emit(report, args.output)
    return 0


def _classify_undirected(g, args) -> dict:
    part = uz.fiedler_partition(g, args.tol)
    links = uz.classify_all_links(g, args.tol)
    twins = uz.twin_node_pairs(g)
    return {
        "mode": "undirected",
        "partition": {
            "g1": sorted(i + 1 for i in part.g1),
            "g2": sorted(i + 1 for i in part.g2),
            "zero_fiedler_entries": [i + 1 for i in part.zero_entries],
        },
        "fiedler": [float(x) for x in part.fiedler],
        "cascades": {
            "from_g1": [sorted(i + 1 for i in s) for s in part.cascade1],
            "from_g2": [sorted(i + 1 for i in s) for s in part.cascade2],
        },
        "links": [
            {"from": c.k + 1, "to": c.l + 1, "slope": c.slopes.s_forward,
             "label": c.label}
            for c in links
        ],
        "twins": [
            {"pair": [k + 1, l + 1], "predicted_neutral": neutral}
            for k, l, neutral in twins
        ],
    }


def _classify_directed(g, args) -> dict:
    blocks = cutset_blocks(g)
    info = dz.gap_location(blocks, args.tol)
    n1 = len(blocks.master_nodes)
    n2 = len(blocks.slave_nodes)
    oracle = not args.no_oracle
    payload: dict = {
        "mode": "directed",
        "location": info.location,
        "lambda2": _complex_dict(info.lambda2),
        "master_nodes": [i + 1 for i in blocks.master_nodes],
        "slave_nodes": [i + 1 for i in blocks.slave_nodes],
    }

    def forward_entry(pair):
        i, j = pair  # slave row, master column
        delta = np.zeros((n2, n1))
        delta[i, j] = 1.0
        rep = dz.forward_slope(blocks, delta, with_oracle=oracle, tol=args.tol)
        return {"from": blocks.master_nodes[j] + 1, "to": blocks.slave_nodes[i] + 1,
                "slope": rep.slope, "fd_slope": rep.fd_slope,
                "classification": rep.classification}

    def backward_entry(pair):
        j, i = pair  # master row, slave column
        delta = np.zeros((n1, n2))
        delta[j, i] = 1.0
        rep = dz.backward_slope(blocks, delta, with_oracle=oracle, tol=args.tol)
        return {"from": blocks.slave_nodes[i] + 1, "to": blocks.master_nodes[j] + 1,
                "slope": rep.slope, "fd_slope": rep.fd_slope,
                "classification": rep.classification}

    fwd_pairs = [(i, j) for i in range(n2) for j in range(n1)]
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            payload["forward_arcs"] = list(pool.map(forward_entry, fwd_pairs))
    else:
        payload["forward_arcs"] = [forward_entry(p) for p in fwd_pairs]

    if info.location == "slave":
        bwd_pairs = [(j, i) for j in range(n1) for i in range(n2)]
        if args.threads > 1:
            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                payload["backward_arcs"] = list(pool.map(backward_entry, bwd_pairs))
        else:
            payload["backward_arcs"] = [backward_entry(p) for p in bwd_pairs]
        try:
            nodes = dz.single_link_improving_nodes(blocks, tol=args.tol)
            payload["improving_nodes"] = {
                "nodes": sorted(i + 1 for i in nodes.nodes),
                "delta_threshold": nodes.delta_threshold,
                "uniform_coefficients": nodes.zero_column_sums,
            }
        except NotDiagonalizableError as exc:
            payload["improving_nodes"] = None
            payload.setdefault("notes", []).append(str(exc))
        try:
            cert = dz.hindering_delta(blocks, with_oracle=oracle, tol=args.tol)
        except NotDiagonalizableError:
            cert = None
        if cert is None:
            payload["hindering"] = None
        else:
            arcs = [
                {"from": blocks.slave_nodes[i] + 1,
                 "to": blocks.master_nodes[j] + 1,
                 "weight": float(cert.delta[j, i])}
                for j in range(n1) for i in range(n2)
                if cert.delta[j, i] > 0
            ]
            payload["hindering"] = {
                "slope": cert.slope,
                "fd_slope": cert.fd_slope,
                "classification": cert.classification,
                "arcs": arcs,
            }
    else:
        payload["backward_arcs"] = None
        payload.setdefault("notes", []).append(
            "gap sits in the master block: backward analysis unsupported")
    return payload


def cmd_classify(args) -> int:
    g = load_edge_list(args.graph)
    rep = condensation(g)
    if g.directed and len(rep.components) == 1:
        raise NotTwoComponentsError(
            "graph is strongly connected; link classification inside a strongly "
            "connected digraph is unsupported")
    payload = _classify_undirected(g, args) if not g.directed else _classify_directed(g, args)
    if args.format == "csv":
        if payload["mode"] == "undirected":
            rows = [["intra", e["from"], e["to"], e["slope"], "", e["label"]]
                    for e in payload["links"]]
        else:
            rows = [["forward", e["from"], e["to"], e["slope"],
                     "" if e["fd_slope"] is None else e["fd_slope"],
                     e["classification"]]
                    for e in payload["forward_arcs"]]
            rows += [["backward", e["from"], e["to"], e["slope"],
                      "" if e["fd_slope"] is None else e["fd_slope"],
                      e["classification"]]
                     for e in payload.get("backward_arcs") or []]
        _emit_csv(["direction", "from", "to", "slope", "fd_slope", "label"],
                  rows, args.output)
        return 0
    report = {
        "command": "classify",
        "seed": args.seed,
        "graph": _graph_section(g, rep),
        "classification": payload,
        "echo": _echo_section(g),
    }
    _emit(report, args.output)
    return 0


def cmd_simulate(args) -> int:
    config = dyn.load_sim_config(args.config)
    if args.seed is not None:
        config = dyn.SimConfig(
            graph=config.graph, alpha=config.alpha, local_params=config.local_params,
            coupling_matrix=config.coupling_matrix, dt=config.dt, t_end=config.t_end,
            events=config.events, seed=args.seed, save_stride=config.save_stride,
            jitter=config.jitter)
    sync_point = dyn.synchronous_state(config.local_params, dt=config.dt)
    x0 = dyn.jittered_initial(config.graph.n, sync_point,
                              jitter=config.jitter, seed=config.seed)
    traj = dyn.integrate(config, x0)
    csv_path = args.output or "trajectory.csv"
    dyn.write_trajectory_csv(traj, csv_path)
    _errors, rate = dyn.sync_error_series(traj)
    verdict = {
        "command": "simulate",
        "synchronized": dyn.is_synchronized(traj),
        "final_sync_error": float(traj.sync_error[-1]),
        "decay_rate": rate,
        "events_applied": [
            {"t": t, "arc": [u + 1, v + 1], "weight": w}
            for t, (u, v, w) in traj.events_applied
        ],
        "samples": int(traj.times.size),
        "trajectory_csv": csv_path,
    }
    sys.stdout.write(json.dumps(_round_floats(verdict), indent=2) + "\n")
    return 0


def cmd_oracle(args) -> int:
    g = load_edge_list(args.graph)
    u, v = args.arc
    if not (1 <= u <= g.n and 1 <= v <= g.n) or u == v:
        raise ValueError(f"arc ({u}, {v}) is not a valid 1-based node pair")
    L = laplacian(g)
    if args.undirected:
        P = args.weight * undirected_link_matrix(g.n, u - 1, v - 1)
    else:
        P = args.weight * directed_link_matrix(g.n, u - 1, v - 1)
    analytic = gap_slope(L, P, args.tol)
    fd = fd_gap_slope(L, P, args.eps, args.tol)
    err = abs(analytic.real - fd)
    ok = bool(err <= 1e-3 * max(1.0, abs(analytic.real)))
    if args.format == "csv":
        _emit_csv(["from", "to", "weight", "analytic_re", "analytic_im", "fd",
                   "abs_error", "ok"],
                  [[u, v, args.weight, analytic.real, analytic.imag, fd, err, ok]],
                  args.output)
        return 0
    report = {
        "command": "oracle",
        "arc": [u, v],
        "weight": args.weight,
        "undirected": args.undirected,
        "eps": args.eps,
        "analytic": _complex_dict(analytic),
        "fd": fd,
        "abs_error": err,
        "ok": ok,
    }
    _emit(report, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="syncgap",
        description="Predict and test how link additions move the spectral gap "
                    "and the synchronizability of a diffusively coupled network.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=0,
                       help="seed echoed in reports and used for jitter")
        p.add_argument("--tol", type=float, default=None,
                       help="override the relative simplicity tolerance")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for per-arc tables")
        p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="report format (csv flattens the tabular payload)")

    p = sub.add_parser("analyze", help="connectivity, spectrum, and gap location")
    p.add_argument("graph", help="edge-list file")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", help="label every candidate link by its effect")
    p.add_argument("graph", help="edge-list file")
    p.add_argument("--no-oracle", action="store_true",
                   help="skip the finite-difference cross-checks")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="integrate the coupled system from a config")
    p.add_argument("config", help="flat key-value config file")
    p.add_argument("--output", help="trajectory CSV path (default trajectory.csv)")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="finite-difference cross-check for one arc")
    p.add_argument("graph", help="edge-list file")
    p.add_argument("--arc", nargs=2, type=int, metavar=("U", "V"), required=True,
                   help="1-based arc U -> V")
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--undirected", action="store_true",
                   help="perturb the symmetric link U -- V instead")
    p.add_argument("--eps", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SyncgapError as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
