"""Minimum-weight perfect matching decoding over DEM-derived graphs.

The matching graph has one node per detector plus a virtual boundary node;
mechanisms with one detector become boundary edges, two-detector mechanisms
become ordinary edges (weight ln((1-p)/p), probabilities clamped away from
0 and 1/2), and larger mechanisms are decomposed into existing edges whose
symptoms XOR to the mechanism's, preferring components from the same
channel outcome (a Y fault splits into its X and Z parts).

Decoding runs per shot: flagged detectors are paired by exact blossom
matching on a local graph assembled from truncated Dijkstra searches
(each flagged node keeps its ``k_neighbours`` nearest flagged partners
plus its boundary path).  With ``k_neighbours`` at least the number of
flagged nodes the decode is exact minimum-weight perfect matching; the
truncated default is the standard speed/accuracy compromise and is what
the optimality tests exercise against the brute-force oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from ._blossom import max_weight_matching_dense
from .dem import DetectorErrorModel, ErrorMechanism
from .frames import SyndromeBatch

P_CLAMP_LO = 1e-12
P_CLAMP_HI = 0.5 - 1e-12


class DecompositionError(ValueError):
    def __init__(self, mechanisms: Sequence[ErrorMechanism]):
        self.mechanisms = list(mechanisms)
        super().__init__(
            f"{len(self.mechanisms)} mechanisms cannot be decomposed into "
            f"graphlike edges; first: {self.mechanisms[0].detectors}"
        )


class Infeasible(ValueError):
    pass


def edge_weight(p: float) -> float:
    p = min(max(p, P_CLAMP_LO), P_CLAMP_HI)
    return math.log((1.0 - p) / p)


def _xor_prob(p1: float, p2: float) -> float:
    return p1 + p2 - 2.0 * p1 * p2


@dataclass
class MatchingGraph:
    n_detectors: int
    n_observables: int
    # per edge: endpoints (boundary = n_detectors), weight, obs mask, sources
    edges_u: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    edges_v: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    edges_w: np.ndarray = field(default_factory=lambda: np.zeros(0, np.float64))
    edges_obs: np.ndarray = field(default_factory=lambda: np.zeros(0, np.uint64))
    sources: List[Tuple[int, ...]] = field(default_factory=list)
    # CSR adjacency including the boundary node
    adj_start: np.ndarray = field(default_factory=lambda: np.zeros(1, np.int64))
    adj_edge: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    @property
    def boundary(self) -> int:
        return self.n_detectors

    def finalize(self) -> None:
        n = self.n_detectors + 1
        deg = np.zeros(n + 1, dtype=np.int64)
        for u, v in zip(self.edges_u, self.edges_v):
            deg[u + 1] += 1
            deg[v + 1] += 1
        self.adj_start = np.cumsum(deg)
        fill = self.adj_start[:-1].copy()
        self.adj_edge = np.empty(int(self.adj_start[-1]), dtype=np.int64)
        for k, (u, v) in enumerate(zip(self.edges_u, self.edges_v)):
            self.adj_edge[fill[u]] = k
            fill[u] += 1
            self.adj_edge[fill[v]] = k
            fill[v] += 1


def build_graph(dem: DetectorErrorModel) -> MatchingGraph:
    """Matching graph with hyperedges decomposed into existing edges."""
    boundary = dem.n_detectors
    edge_map: Dict[Tuple[int, int], Tuple[float, int, List[int]]] = {}

    def add(u: int, v: int, p: float, obs_mask: int, mech_ids: List[int]) -> None:
        if u > v:
            u, v = v, u
        key = (u, v)
        if key in edge_map:
            p0, m0, ids = edge_map[key]
            if m0 == obs_mask:
                edge_map[key] = (_xor_prob(p0, p), m0, ids + mech_ids)
            elif edge_weight(p) < edge_weight(p0):
                # keep the lighter of conflicting parallel edges
                edge_map[key] = (p, obs_mask, mech_ids)
        else:
            edge_map[key] = (p, obs_mask, mech_ids)

    graphlike: List[Tuple[int, ErrorMechanism]] = []
    hyper: List[Tuple[int, ErrorMechanism]] = []
    for i, m in enumerate(dem.mechanisms):
        (graphlike if len(m.detectors) <= 2 else hyper).append((i, m))

    symptom_index: Dict[Tuple[FrozenSet[int], int], int] = {}
    for i, m in graphlike:
        mask = _obs_mask(m.observables)
        if len(m.detectors) == 1:
            add(m.detectors[0], boundary, m.probability, mask, [i])
        else:
            add(m.detectors[0], m.detectors[1], m.probability, mask, [i])
        symptom_index[(frozenset(m.detectors), mask)] = i

    failed: List[ErrorMechanism] = []
    for i, m in hyper:
        parts = _decompose(m, dem, symptom_index)
        if parts is None:
            failed.append(m)
            continue
        for dets, mask in parts:
            if len(dets) == 1:
                add(next(iter(dets)), boundary, m.probability, mask, [i])
            else:
                a, b = sorted(dets)
                add(a, b, m.probability, mask, [i])
    if failed:
        raise DecompositionError(failed)

    g = MatchingGraph(dem.n_detectors, dem.n_observables)
    keys = sorted(edge_map)
    g.edges_u = np.asarray([k[0] for k in keys], dtype=np.int64)
    g.edges_v = np.asarray([k[1] for k in keys], dtype=np.int64)
    g.edges_w = np.asarray([edge_weight(edge_map[k][0]) for k in keys], dtype=np.float64)
    g.edges_obs = np.asarray([edge_map[k][1] for k in keys], dtype=np.uint64)
    g.sources = [tuple(edge_map[k][2]) for k in keys]
    g.finalize()
    return g


def _obs_mask(observables: Sequence[int]) -> int:
    mask = 0
    for o in observables:
        if o >= 64:
            raise ValueError("at most 64 observables supported")
        mask |= 1 << o
    return mask


def _decompose(m: ErrorMechanism, dem: DetectorErrorModel, symptom_index) -> Optional[
    List[Tuple[FrozenSet[int], int]]
]:
    """Split a >2-detector mechanism into two graphlike symptoms.

    Prefers the same-channel X/Z component symptoms of the fault (a Y
    outcome decomposes into the X and Z outcomes of the same channel
    location); falls back to any pair of existing graphlike symptoms whose
    union XORs to the mechanism's symptom and observables.
    """
    target = frozenset(m.detectors)
    tmask = _obs_mask(m.observables)
    # same-channel preference: look for sibling mechanisms sharing provenance
    sibling_keys: List[Tuple[FrozenSet[int], int]] = []
    for f in m.provenance:
        for (dets, mask), idx in symptom_index.items():
            mm = dem.mechanisms[idx]
            if any(
                g.instruction == f.instruction and g.qubits == f.qubits
                for g in mm.provenance
            ):
                sibling_keys.append((dets, mask))
    candidates = sibling_keys + list(symptom_index.keys())
    for dets, mask in candidates:
        if not dets <= target:
            continue
        other = target - dets
        omask = tmask ^ mask
        if (frozenset(other), omask) in symptom_index:
            return [(dets, mask), (frozenset(other), omask)]
    return None


# -- brute-force oracle ----------------------------------------------------------

def brute_force(
    dem: DetectorErrorModel, syndrome: Sequence[int]
) -> Tuple[float, List[int]]:
    """Exact minimum-weight fault set whose symptom equals the syndrome.

    Depth-first search with branch-and-bound over mechanism subsets;
    mechanisms are limited to 30.  Returns (total weight, mechanism ids),
    ties broken by lexicographic mechanism ids.
    """
    ms = dem.mechanisms
    if len(ms) > 30:
        raise ValueError("brute force limited to 30 mechanisms")
    weights = [edge_weight(m.probability) for m in ms]
    det_masks = []
    for m in ms:
        mask = 0
        for d in m.detectors:
            mask |= 1 << d
        det_masks.append(mask)
    target = 0
    for d in syndrome:
        target |= 1 << d
    # suffix coverage masks for pruning
    n = len(ms)
    suffix_cover = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_cover[i] = suffix_cover[i + 1] | det_masks[i]

    best: List[Optional[Tuple[float, List[int]]]] = [None]

    def dfs(i: int, residual: int, weight: float, chosen: List[int]) -> None:
        if best[0] is not None and weight >= best[0][0] - 1e-12:
            if not (weight <= best[0][0] + 1e-12 and residual == 0 and chosen < best[0][1]):
                if weight > best[0][0] + 1e-12:
                    return
        if residual == 0:
            cand = (weight, list(chosen))
            if (
                best[0] is None
                or cand[0] < best[0][0] - 1e-12
                or (abs(cand[0] - best[0][0]) <= 1e-12 and cand[1] < best[0][1])
            ):
                best[0] = cand
            return
        if i == n or (residual & suffix_cover[i]) != residual:
            return
        # skip mechanisms that cannot touch the residual? still may be needed
        dfs(i + 1, residual, weight, chosen)
        chosen.append(i)
        dfs(i + 1, residual ^ det_masks[i], weight + weights[i], chosen)
        chosen.pop()

    dfs(0, target, 0.0, [])
    if best[0] is None:
        raise Infeasible("no mechanism subset reproduces the syndrome")
    return best[0]


def brute_force_observables(dem: DetectorErrorModel, syndrome: Sequence[int]) -> int:
    """Observable mask of the brute-force minimum-weight fault set."""
    _, chosen = brute_force(dem, syndrome)
    mask = 0
    for i in chosen:
        mask ^= _obs_mask(dem.mechanisms[i].observables)
    return mask


# -- batch decoding ----------------------------------------------------------------

@njit(cache=True)
def _decode_kernel(
    det_bits, n_det, adj_start, adj_edge, e_u, e_v, e_w, e_obs,
    k_neighbours, predictions, weights_out,
):
    shots = det_bits.shape[0]
    n_nodes = n_det + 1
    boundary = n_det
    INF = np.inf

    dist = np.full(n_nodes, INF, dtype=np.float64)
    par = np.zeros(n_nodes, dtype=np.uint64)
    stamp = np.full(n_nodes, -1, dtype=np.int64)
    flag_id = np.full(n_nodes, -1, dtype=np.int64)
    heap_d = np.empty(4 * adj_edge.shape[0] + 16, dtype=np.float64)
    heap_v = np.empty(4 * adj_edge.shape[0] + 16, dtype=np.int64)

    for s in range(shots):
        # collect flagged detectors
        nf = 0
        for d in range(n_det):
            if det_bits[s, d >> 3] & (1 << (d & 7)):
                nf += 1
        if nf == 0:
            predictions[s] = 0
            weights_out[s] = 0.0
            continue
        flags = np.empty(nf, dtype=np.int64)
        nf = 0
        for d in range(n_det):
            if det_bits[s, d >> 3] & (1 << (d & 7)):
                flags[nf] = d
                flag_id[d] = nf
                nf += 1
        kq = k_neighbours if k_neighbours < nf else nf
        # local dijkstra per flagged node
        nbr_t = np.full((nf, kq), -1, dtype=np.int64)       # target flag ids
        nbr_d = np.full((nf, kq), INF, dtype=np.float64)
        nbr_p = np.zeros((nf, kq), dtype=np.uint64)
        bd_d = np.full(nf, INF, dtype=np.float64)           # boundary dist
        bd_p = np.zeros(nf, dtype=np.uint64)
        for fi in range(nf):
            src = flags[fi]
            hlen = 0
            heap_d[0] = 0.0
            heap_v[0] = src
            hlen = 1
            dist[src] = 0.0
            par[src] = np.uint64(0)
            stamp[src] = s * nf + fi
            found = 0
            bfound = False
            while hlen > 0:
                # pop min
                bd = heap_d[0]
                bv = heap_v[0]
                hlen -= 1
                heap_d[0] = heap_d[hlen]
                heap_v[0] = heap_v[hlen]
                pos = 0
                while True:
                    c1 = 2 * pos + 1
                    c2 = 2 * pos + 2
                    sm = pos
                    if c1 < hlen and (heap_d[c1] < heap_d[sm] or (heap_d[c1] == heap_d[sm] and heap_v[c1] < heap_v[sm])):
                        sm = c1
                    if c2 < hlen and (heap_d[c2] < heap_d[sm] or (heap_d[c2] == heap_d[sm] and heap_v[c2] < heap_v[sm])):
                        sm = c2
                    if sm == pos:
                        break
                    heap_d[pos], heap_d[sm] = heap_d[sm], heap_d[pos]
                    heap_v[pos], heap_v[sm] = heap_v[sm], heap_v[pos]
                    pos = sm
                if stamp[bv] == s * nf + fi and bd > dist[bv] + 1e-15:
                    continue
                # settle bv
                if bv == boundary:
                    if not bfound:
                        bd_d[fi] = bd
                        bd_p[fi] = par[bv]
                        bfound = True
                        found += 1
                elif bv != src and flag_id[bv] >= 0 and stamp[bv] == s * nf + fi:
                    done = False
                    for kk in range(kq):
                        if nbr_t[fi, kk] == flag_id[bv]:
                            done = True
                            break
                        if nbr_t[fi, kk] == -1:
                            nbr_t[fi, kk] = flag_id[bv]
                            nbr_d[fi, kk] = bd
                            nbr_p[fi, kk] = par[bv]
                            found += 1
                            done = True
                            break
                    if not done:
                        found += 1   # list full
                if found >= kq + 1:
                    break
                for ai in range(adj_start[bv], adj_start[bv + 1]):
                    k = adj_edge[ai]
                    u = e_u[k]
                    v2 = e_v[k]
                    other = v2 if u == bv else u
                    nd = bd + e_w[k]
                    cur_stamp = s * nf + fi
                    if stamp[other] != cur_stamp or nd < dist[other] - 1e-15:
                        stamp[other] = cur_stamp
                        dist[other] = nd
                        par[other] = par[bv] ^ e_obs[k]
                        heap_d[hlen] = nd
                        heap_v[hlen] = other
                        hlen += 1
                        # sift up
                        pos = hlen - 1
                        while pos > 0:
                            parent = (pos - 1) // 2
                            if heap_d[parent] > heap_d[pos] or (heap_d[parent] == heap_d[pos] and heap_v[parent] > heap_v[pos]):
                                heap_d[parent], heap_d[pos] = heap_d[pos], heap_d[parent]
                                heap_v[parent], heap_v[pos] = heap_v[pos], heap_v[parent]
                                pos = parent
                            else:
                                break
        # assemble local matching problem: nodes 0..nf-1 real, nf..2nf-1 boundary copies
        nn = 2 * nf
        wmat = np.zeros((nn, nn), dtype=np.float64)
        has = np.zeros((nn, nn), dtype=np.bool_)
        pmat = np.zeros((nn, nn), dtype=np.uint64)
        wmax = 0.0
        for fi in range(nf):
            for kk in range(kq):
                tj = nbr_t[fi, kk]
                if tj < 0:
                    break
                d = nbr_d[fi, kk]
                if d > wmax:
                    wmax = d
                if (not has[fi, tj]) or d < wmat[fi, tj] - 1e-15:
                    wmat[fi, tj] = d
                    wmat[tj, fi] = d
                    pmat[fi, tj] = nbr_p[fi, kk]
                    pmat[tj, fi] = nbr_p[fi, kk]
                    has[fi, tj] = True
                    has[tj, fi] = True
            if bd_d[fi] < INF:
                if bd_d[fi] > wmax:
                    wmax = bd_d[fi]
                bi = nf + fi
                wmat[fi, bi] = bd_d[fi]
                wmat[bi, fi] = bd_d[fi]
                pmat[fi, bi] = bd_p[fi]
                pmat[bi, fi] = bd_p[fi]
                has[fi, bi] = True
                has[bi, fi] = True
        # boundary copies pair freely at zero weight
        for i in range(nf, nn):
            for j in range(i + 1, nn):
                has[i, j] = True
                has[j, i] = True
                wmat[i, j] = 0.0
                wmat[j, i] = 0.0
        # transform to max-weight: w' = C - w
        C = wmax + 1.0
        wprime = np.zeros((nn, nn), dtype=np.float64)
        for i in range(nn):
            for j in range(nn):
                if has[i, j]:
                    wprime[i, j] = C - wmat[i, j]
        mate = max_weight_matching_dense(nn, wprime, has)
        pred = np.uint64(0)
        total_w = 0.0
        ok = True
        for i in range(nn):
            j = mate[i]
            if j < 0:
                if i < nf:
                    ok = False
                continue
            if i < j:
                pred ^= pmat[i, j]
                total_w += wmat[i, j]
        predictions[s] = pred
        weights_out[s] = total_w if ok else -1.0
        for fi in range(nf):
            flag_id[flags[fi]] = -1


def decode_batch(
    graph: MatchingGraph,
    batch: SyndromeBatch,
    k_neighbours: int = 24,
    return_weights: bool = False,
):
    """Predicted observable flips per shot (bool array shots x n_obs)."""
    if batch.n_detectors != graph.n_detectors:
        raise ValueError("batch detector count does not match graph")
    shots = batch.shots
    predictions = np.zeros(shots, dtype=np.uint64)
    weights = np.zeros(shots, dtype=np.float64)
    _decode_kernel(
        batch.det_bits, graph.n_detectors,
        graph.adj_start, graph.adj_edge,
        graph.edges_u, graph.edges_v, graph.edges_w, graph.edges_obs,
        k_neighbours, predictions, weights,
    )
    if (weights < 0).any():
        raise Infeasible("a flagged detector had no path to pair or boundary")
    n_obs = max(1, graph.n_observables)
    out = np.zeros((shots, graph.n_observables), dtype=bool)
    for o in range(graph.n_observables):
        out[:, o] = (predictions >> np.uint64(o)).astype(np.uint64) & np.uint64(1) == 1
    if return_weights:
        return out, weights
    return out


def failures(
    graph: MatchingGraph, batch: SyndromeBatch, k_neighbours: int = 24
) -> int:
    """Count shots whose predicted observable flips differ from the actual."""
    pred = decode_batch(graph, batch, k_neighbours)
    actual = batch.observable_array()
    if actual.shape[1] != pred.shape[1]:
        actual = actual[:, : pred.shape[1]]
    return int((pred != actual).any(axis=1).sum())
