"""Per-patch class assignment: independent maximum likelihood, or joint MAP
under a 4-connected Potts prior minimized by alpha-expansion graph cuts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .gmm import class_log_likelihood_batch
from .imageops import PatchMatrix, write_pgm
from .maxflow import FlowNetwork, max_flow_min_cut
from .modelio import ClassLibrary

__all__ = [
    "LabelField",
    "UnaryCosts",
    "ml_classify",
    "potts_energy",
    "alpha_expansion",
    "unary_costs",
    "classify_patches",
    "write_label_field",
]


@dataclass
class LabelField:
    """Per-patch-location class assignment on the (grid_rows, grid_cols) grid."""

    labels: np.ndarray  # int array, shape (grid_rows, grid_cols)

    @property
    def grid_rows(self) -> int:
        return self.labels.shape[0]

    @property
    def grid_cols(self) -> int:
        return self.labels.shape[1]

    def flat(self) -> np.ndarray:
        return self.labels.ravel()


@dataclass
class UnaryCosts:
    """costs[i, c] = -log p(patch_i | class c), patches in row-major grid order."""

    grid_rows: int
    grid_cols: int
    costs: np.ndarray  # (N, C)

    @property
    def n_sites(self) -> int:
        return self.grid_rows * self.grid_cols

    @property
    def n_classes(self) -> int:
        return self.costs.shape[1]

    def __post_init__(self):
        if self.costs.shape[0] != self.grid_rows * self.grid_cols:
            raise ArgumentError("unary cost rows do not match the patch grid")
        if not np.all(np.isfinite(self.costs)):
            raise ArgumentError("unary costs must be finite")


def unary_costs(patches: PatchMatrix, library: ClassLibrary, sigma_eff: float) -> UnaryCosts:
    """Negative class log-likelihoods of every patch under every class model."""
    if library.patch_size != patches.patch_size:
        raise ArgumentError(
            f"library patch size {library.patch_size} != patches {patches.patch_size}")
    cols = [-class_log_likelihood_batch(patches, model, sigma_eff)
            for model in library.models]
    return UnaryCosts(grid_rows=patches.grid_rows, grid_cols=patches.grid_cols,
                      costs=np.column_stack(cols))


def ml_classify(unary: UnaryCosts) -> LabelField:
    """Independent per-patch argmin of the unary costs; ties go to the lowest index."""
    labels = np.argmin(unary.costs, axis=1).reshape(unary.grid_rows, unary.grid_cols)
    return LabelField(labels=labels)


def _pairwise_disagreements(labels: np.ndarray) -> int:
    h = np.count_nonzero(labels[:, :-1] != labels[:, 1:])
    v = np.count_nonzero(labels[:-1, :] != labels[1:, :])
    return h + v


def potts_energy(labels: LabelField, unary: UnaryCosts, beta: float) -> float:
    """Unary sum plus beta times the number of disagreeing 4-neighbor pairs."""
    lab = labels.labels
    if lab.shape != (unary.grid_rows, unary.grid_cols):
        raise ArgumentError("label field shape does not match unary costs")
    data = unary.costs[np.arange(unary.n_sites), lab.ravel()].sum()
    return float(data + beta * _pairwise_disagreements(lab))


def _expansion_move(labels: np.ndarray, unary: UnaryCosts, beta: float, alpha: int):
    """One alpha-expansion move; returns the candidate label field.

    Binary variable per site: source side keeps the current label, sink side
    switches to alpha. Submodular pairwise terms are reduced to one directed
    arc per neighbor pair plus terminal-arc adjustments.
    """
    gr, gc = labels.shape
    n = gr * gc
    lab = labels.ravel()
    keep_cost = unary.costs[np.arange(n), lab]       # theta_i(0)
    switch_cost = unary.costs[:, alpha].copy()       # theta_i(1)

    ids = np.arange(n).reshape(gr, gc)
    pair_i = np.concatenate([ids[:, :-1].ravel(), ids[:-1, :].ravel()])
    pair_j = np.concatenate([ids[:, 1:].ravel(), ids[1:, :].ravel()])
    li, lj = lab[pair_i], lab[pair_j]
    # theta_ij(0,0)=A, (0,1)=B, (1,0)=C, (1,1)=0 for the Potts metric
    A = beta * (li != lj)
    B = beta * (li != alpha)
    C = beta * (lj != alpha)
    # theta_ij = A + x_i (C - A) + x_j (0 - C) + [x_i=0][x_j=1] (B + C - A)
    np.add.at(switch_cost, pair_i, C - A)
    np.add.at(switch_cost, pair_j, -C)
    edge_cap = B + C - A  # >= 0 for any metric

    shift = np.minimum(keep_cost, switch_cost)
    source, sink = n, n + 1
    net = FlowNetwork(n + 2, source, sink)
    site_ids = np.arange(n)
    net.add_arcs(site_ids, np.full(n, sink), keep_cost - shift)     # pay keep on source side
    net.add_arcs(np.full(n, source), site_ids, switch_cost - shift)  # pay switch on sink side
    pos = edge_cap > 0
    net.add_arcs(pair_i[pos], pair_j[pos], edge_cap[pos])

    _, side = max_flow_min_cut(net)
    candidate = np.where(side[:n], lab, alpha).reshape(gr, gc)
    return candidate


def alpha_expansion(unary: UnaryCosts, beta: float, init: LabelField | None = None,
                    max_cycles: int = 10, energy_trace: list | None = None) -> LabelField:
    """Minimize the Potts energy by cycling expansion moves over all labels.

    A move is accepted only if it strictly decreases the energy; terminates
    after a full cycle with no accepted move or after max_cycles. When given,
    energy_trace receives the initial energy followed by the energy after
    every accepted move.
    """
    if beta < 0:
        raise ArgumentError(f"beta must be nonnegative, got {beta}")
    current = ml_classify(unary) if init is None else init
    labels = current.labels.copy()
    energy = potts_energy(LabelField(labels), unary, beta)
    if energy_trace is not None:
        energy_trace.append(energy)
    for _ in range(max_cycles):
        improved = False
        for alpha in range(unary.n_classes):
            candidate = _expansion_move(labels, unary, beta, alpha)
            cand_energy = potts_energy(LabelField(candidate), unary, beta)
            if cand_energy < energy:
                labels, energy = candidate, cand_energy
                improved = True
                if energy_trace is not None:
                    energy_trace.append(energy)
        if not improved:
            break
    return LabelField(labels=labels)


def classify_patches(patches: PatchMatrix, library: ClassLibrary, sigma_eff: float,
                     mode: str = "ml", beta: float = 2.0,
                     prev: LabelField | None = None) -> LabelField:
    """Assign a class to every patch location.

    mode "none" labels everything with the generic class; "ml" is independent
    maximum likelihood; "alpha" is the Potts-MRF labeling, warm-started from
    prev when given.
    """
    if mode == "none":
        labels = np.full((patches.grid_rows, patches.grid_cols),
                         library.generic_index, dtype=np.int64)
        return LabelField(labels=labels)
    unary = unary_costs(patches, library, sigma_eff)
    if mode == "ml":
        return ml_classify(unary)
    if mode == "alpha":
        init = prev if prev is not None else ml_classify(unary)
        return alpha_expansion(unary, beta, init=init)
    raise ArgumentError(f"unknown classification mode {mode!r}")


def write_label_field(pgm_path, legend_path, field: LabelField, class_names) -> None:
    """Export a label field as a gray-scaled PGM plus a text legend."""
    c = len(class_names)
    scale = 255.0 / max(c - 1, 1)
    write_pgm(pgm_path, field.labels.astype(np.float64) * scale)
    with open(legend_path, "w") as f:
        for idx, name in enumerate(class_names):
            f.write(f"{idx} {int(round(idx * scale))} {name}\n")
