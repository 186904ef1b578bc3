"""Spectral-gap toolkit for structural perturbations of coupled networks.

Predicts whether adding a directed or undirected link (or strengthening an
existing one) improves, hinders, or leaves invariant the synchronizability
of a diffusively coupled network, constructs certified improving and
hindering perturbations for master-slave digraphs, and validates every
prediction with a finite-difference oracle and a coupled-oscillator
simulator.
"""

from .directed import (
    ImprovingNodes,
    MasterEigenbasis,
    PerturbationReport,
    SlaveEig,
    backward_slope,
    forward_slope,
    gap_location,
    hindering_delta,
    improving_delta,
    master_eigenbasis,
    single_link_improving_nodes,
    slave_min_eig,
)
from .dynamics import (
    SimConfig,
    Trajectory,
    estimate_alpha_c,
    integrate,
    is_synchronized,
    jittered_initial,
    load_sim_config,
    rossler_field,
    sync_error_series,
    synchronous_state,
    write_trajectory_csv,
)
from .errors import SyncgapError
from .graphs import (
    CondensationReport,
    CutsetBlocks,
    LaplacianMatrix,
    WeightedDigraph,
    adjacency,
    assemble_blocks,
    build_graph,
    condensation,
    cutset_blocks,
    format_edge_list,
    laplacian,
    load_edge_list,
    parse_edge_list,
    save_edge_list,
)
from .spectra import (
    GapInfo,
    Spectrum,
    directed_link_matrix,
    eig_pair,
    fd_gap_slope,
    full_spectrum,
    gap_slope,
    spectral_gap,
    undirected_link_matrix,
)
from .undirected import (
    FiedlerPartition,
    LinkClassification,
    LinkSlopes,
    classify_all_links,
    fiedler_partition,
    link_slopes,
    twin_node_pairs,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
