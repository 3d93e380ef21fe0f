"""Weighted witness complex Wit_w(L, W).

A witness w witnesses the j-simplex formed by its j+1 nearest landmarks in
weighted distance |w - p|^2 - w(p)^2. When the weighted distance at the cut
is tied, every completion of the strict prefix by the tied landmarks is
witnessed, so the result does not depend on sort tie-breaking.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from configs import settings
from src.core.errors import InputError
from src.geometry.dmatrix import DistanceMatrix
from src.reconstruction.netsel import Net
from src.topology.scomplex import SimplicialComplex
from src.utils.log_utils import get_logger, progress

logger = get_logger("witness")


@dataclass
class WitnessOrder:
    witness: int
    landmarks: tuple        # ranks, ascending weighted distance then rank
    distances: tuple        # weighted distances along the prefix


def _weighted_rows(dm: DistanceMatrix, net: Net, w2, witnesses) -> np.ndarray:
    return dm.submatrix(witnesses, net.landmark_ids) - np.asarray(w2, dtype=float)[None, :]


def witness_order(dm: DistanceMatrix, net: Net, w2, w: int, depth: int) -> WitnessOrder:
    if depth < 1:
        raise InputError("witness", f"depth must be >= 1, got {depth}")
    row = _weighted_rows(dm, net, w2, [w])[0]
    order = np.lexsort((np.arange(len(row)), row))[:depth]
    return WitnessOrder(int(w), tuple(int(r) for r in order), tuple(float(row[r]) for r in order))


def _tied_simplices(row: np.ndarray, order: np.ndarray, j: int) -> list:
    """All (j+1)-sets made of the strict prefix below the cut value plus tied landmarks."""
    cut = row[order[j]]
    strict = tuple(int(r) for r in np.flatnonzero(row < cut))
    tied = [int(r) for r in np.flatnonzero(row == cut)]
    need = j + 1 - len(strict)
    return [tuple(sorted(strict + extra)) for extra in combinations(tied, need)]


def _witness_block(rows: np.ndarray, depth: int) -> list:
    """Per-dimension sets of simplices witnessed by one block of weighted-distance rows."""
    found = [set() for _ in range(depth)]
    n_l = rows.shape[1]
    depth_eff = min(depth, n_l)
    order = np.argsort(rows, axis=1, kind="stable")
    ranked = np.take_along_axis(rows, order, axis=1)
    # a tie at the cut after position j is ranked[j] == ranked[j + 1]
    limit = min(depth_eff, n_l - 1)
    ties = ranked[:, :limit] == ranked[:, 1:limit + 1]
    for i in range(rows.shape[0]):
        for j in range(depth_eff):
            if j < limit and ties[i, j]:
                found[j].update(_tied_simplices(rows[i], order[i], j))
            else:
                found[j].add(tuple(sorted(int(r) for r in order[i, :j + 1])))
    return found


def witnessed_simplices(dm: DistanceMatrix, net: Net, w2, depth: int, threads: int = 1,
                        block_size: int = settings.WITNESS_BLOCK_SIZE) -> list:
    """W_j for j = 0..depth-1, before closure."""
    witnesses = np.asarray(net.witness_ids if net.witness_ids is not None else [], dtype=np.int64)
    blocks = [witnesses[i:i + block_size] for i in range(0, len(witnesses), block_size)]

    def run(block):
        return _witness_block(_weighted_rows(dm, net, w2, block), depth)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(run, blocks))
    else:
        parts = [run(b) for b in progress(blocks, "witnesses", total=len(blocks))]

    merged = [set() for _ in range(depth)]
    for part in parts:
        for j, group in enumerate(part):
            merged[j] |= group
    return merged


def build_witness_complex(dm: DistanceMatrix, net: Net, w2, m: int, depth: int | None = None,
                          threads: int = 1) -> SimplicialComplex:
    depth = depth or m + 2
    witnessed = witnessed_simplices(dm, net, w2, depth, threads)

    kept = [set(witnessed[0])] if witnessed else []
    for j in range(1, depth):
        below = kept[j - 1]
        kept.append({s for s in witnessed[j] if all(f in below for f in combinations(s, j))})
        if not kept[j]:
            break

    over = sum(len(kept[j]) for j in range(m + 1, len(kept)))
    flags = {"over_dimension": over}
    complex_ = SimplicialComplex((s for group in kept for s in group), flags)
    if over:
        logger.warning(f"🟡 {over} witnessed simplices of dimension > {m} survived closure")
    logger.info(f"✅ Witness complex built: counts {complex_.counts()} from {len(net.witness_ids)} witnesses")
    return complex_


def check_membership(complex_: SimplicialComplex, simplex) -> bool:
    try:
        return tuple(int(v) for v in simplex) in complex_
    except (TypeError, ValueError):
        return False
