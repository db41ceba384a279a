"""Array-based maximum-weight matching (blossom algorithm) for numba.

Faithful port of the Galil primal-dual algorithm in van Rantwijk's
formulation (the implementation networkx ships) onto flat arrays, always
in maximum-cardinality mode, which is what the minimum-weight perfect
matching reduction needs.  Vertices are 0..n-1, blossom slots n..2n-1,
-1 plays the role of None/NoNode.  Input is a dense weight matrix plus an
adjacency mask; output is mate[v] (partner vertex or -1).

Differential-tested against networkx.max_weight_matching on randomized
graphs in tests/test_matching.py.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _augment_blossom(b, v, n, blossomparent, blossombase, childs, nchilds,
                     ed_v, ed_w, mate):
    """Recursive matching augmentation through blossom b down to vertex v."""
    # Bubble up from v to an immediate sub-blossom of b.
    t = v
    while blossomparent[t] != b:
        t = blossomparent[t]
    if t >= n:
        _augment_blossom(t, v, n, blossomparent, blossombase, childs, nchilds,
                         ed_v, ed_w, mate)
    nch = nchilds[b]
    i = -1
    for ci in range(nch):
        if childs[b, ci] == t:
            i = ci
            break
    j = i
    if i & 1:
        j -= nch
        jstep = 1
    else:
        jstep = -1
    while j != 0:
        j += jstep
        jj = j % nch
        tt = childs[b, jj]
        if jstep == 1:
            w = ed_v[b, jj]
            x = ed_w[b, jj]
        else:
            x = ed_v[b, (j - 1) % nch]
            w = ed_w[b, (j - 1) % nch]
        if tt >= n:
            _augment_blossom(tt, w, n, blossomparent, blossombase, childs,
                             nchilds, ed_v, ed_w, mate)
        j += jstep
        jj = j % nch
        tt = childs[b, jj]
        if tt >= n:
            _augment_blossom(tt, x, n, blossomparent, blossombase, childs,
                             nchilds, ed_v, ed_w, mate)
        mate[w] = x
        mate[x] = w
    # rotate childs/edges so the new base (containing v) is first
    if i > 0:
        tmp_c = np.empty(nch, dtype=np.int64)
        tmp_v = np.empty(nch, dtype=np.int64)
        tmp_w = np.empty(nch, dtype=np.int64)
        for ci in range(nch):
            src = (ci + i) % nch
            tmp_c[ci] = childs[b, src]
            tmp_v[ci] = ed_v[b, src]
            tmp_w[ci] = ed_w[b, src]
        for ci in range(nch):
            childs[b, ci] = tmp_c[ci]
            ed_v[b, ci] = tmp_v[ci]
            ed_w[b, ci] = tmp_w[ci]
    blossombase[b] = blossombase[childs[b, 0]]


@njit(cache=True)
def max_weight_matching_dense(n, wmat, has_edge):
    """mate[v] = partner vertex or -1; maximum-cardinality max-weight."""
    mate = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return mate
    B = 2 * n

    maxweight = 0.0
    any_edge = False
    for i in range(n):
        for j in range(i + 1, n):
            if has_edge[i, j]:
                any_edge = True
                if wmat[i, j] > maxweight:
                    maxweight = wmat[i, j]
    if not any_edge:
        return mate

    label = np.zeros(B, dtype=np.int64)
    le_v = np.full(B, -1, dtype=np.int64)       # labeledge first vertex
    le_w = np.full(B, -1, dtype=np.int64)       # labeledge second vertex
    le_none = np.ones(B, dtype=np.bool_)        # labeledge is None
    inblossom = np.arange(n, dtype=np.int64)
    blossomparent = np.full(B, -1, dtype=np.int64)
    blossombase = np.full(B, -1, dtype=np.int64)
    for v in range(n):
        blossombase[v] = v
    be_v = np.full(B, -1, dtype=np.int64)       # bestedge
    be_w = np.full(B, -1, dtype=np.int64)
    dualvar = np.full(n, maxweight, dtype=np.float64)
    blossomdual = np.zeros(B, dtype=np.float64)
    active = np.zeros(B, dtype=np.bool_)        # allocated blossom slots
    allow = np.zeros((n, n), dtype=np.bool_)

    maxc = n + 2
    childs = np.full((B, maxc), -1, dtype=np.int64)
    nchilds = np.zeros(B, dtype=np.int64)
    ed_v = np.full((B, maxc), -1, dtype=np.int64)
    ed_w = np.full((B, maxc), -1, dtype=np.int64)
    mbe_v = np.full((B, n + 1), -1, dtype=np.int64)   # mybestedges
    mbe_w = np.full((B, n + 1), -1, dtype=np.int64)
    mbe_n = np.full(B, -1, dtype=np.int64)            # -1 = None

    unused = np.empty(n, dtype=np.int64)
    for i in range(n):
        unused[i] = B - 1 - i
    ubox = np.empty(1, dtype=np.int64)
    ubox[0] = n

    qcap = n * (n + 4) + 16
    queue = np.empty(qcap, dtype=np.int64)
    qbox = np.zeros(1, dtype=np.int64)

    leaves = np.empty(n, dtype=np.int64)
    lstack = np.empty(B, dtype=np.int64)

    def blossom_leaves(b):
        cnt = 0
        sp = 0
        lstack[sp] = b
        sp += 1
        while sp > 0:
            sp -= 1
            t = lstack[sp]
            if t < n:
                leaves[cnt] = t
                cnt += 1
            else:
                for ci in range(nchilds[t]):
                    lstack[sp] = childs[t, ci]
                    sp += 1
        return cnt

    def slack(v, w):
        return dualvar[v] + dualvar[w] - 2.0 * wmat[v, w]

    def assign_label(w0, t0, v0):
        w, t, v = w0, t0, v0
        while True:
            b = inblossom[w]
            label[w] = t
            label[b] = t
            if v >= 0:
                le_v[w] = v
                le_w[w] = w
                le_none[w] = False
                le_v[b] = v
                le_w[b] = w
                le_none[b] = False
            else:
                le_none[w] = True
                le_none[b] = True
            be_v[w] = -1
            be_v[b] = -1
            if t == 1:
                if b >= n:
                    cnt = blossom_leaves(b)
                    for ii in range(cnt):
                        queue[qbox[0]] = leaves[ii]
                        qbox[0] += 1
                else:
                    queue[qbox[0]] = b
                    qbox[0] += 1
                return
            # t == 2: label the base's mate with S through the base
            base = blossombase[b]
            w, t, v = mate[base], 1, base

    def scan_blossom(v0, w0):
        path = np.empty(B, dtype=np.int64)
        plen = 0
        base = -1
        v, w = v0, w0
        while v != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = blossombase[b]
                break
            path[plen] = b
            plen += 1
            label[b] = 5
            if le_none[b]:
                v = -1
            else:
                v = le_v[b]
                b = inblossom[v]
                v = le_v[b]
            if w != -1:
                vv = v
                v = w
                w = vv
        for ii in range(plen):
            label[path[ii]] = 1
        return base

    def add_blossom(base, v0, w0):
        v, w = v0, w0
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        b = unused[ubox[0] - 1]
        ubox[0] -= 1
        active[b] = True
        blossombase[b] = base
        blossomparent[b] = -1
        blossomparent[bb] = b
        # gather path/edges from the v side
        tc_v = np.empty(maxc, dtype=np.int64)
        te_v1 = np.empty(maxc, dtype=np.int64)
        te_v2 = np.empty(maxc, dtype=np.int64)
        cv = 0
        while bv != bb:
            blossomparent[bv] = b
            tc_v[cv] = bv
            te_v1[cv] = le_v[bv]
            te_v2[cv] = le_w[bv]
            cv += 1
            v = le_v[bv]
            bv = inblossom[v]
        # childs = [bb] + reversed(v-side) ; edges = reversed(v-side edges) + [(v0,w0)]
        cl = 0
        childs[b, cl] = bb
        cl += 1
        for ii in range(cv - 1, -1, -1):
            childs[b, cl] = tc_v[ii]
            cl += 1
        # edges: reversed v-side labeledges, then the triggering edge
        el = 0
        for ii in range(cv - 1, -1, -1):
            ed_v[b, el] = te_v1[ii]
            ed_w[b, el] = te_v2[ii]
            el += 1
        ed_v[b, el] = v0
        ed_w[b, el] = w0
        el += 1
        # w side
        while bw != bb:
            blossomparent[bw] = b
            childs[b, cl] = bw
            cl += 1
            ed_v[b, el] = le_w[bw]
            ed_w[b, el] = le_v[bw]
            el += 1
            w = le_v[bw]
            bw = inblossom[w]
        nchilds[b] = cl
        label[b] = 1
        le_v[b] = le_v[bb]
        le_w[b] = le_w[bb]
        le_none[b] = le_none[bb]
        blossomdual[b] = 0.0
        cnt = blossom_leaves(b)
        for ii in range(cnt):
            vv = leaves[ii]
            if label[inblossom[vv]] == 2:
                queue[qbox[0]] = vv
                qbox[0] += 1
            inblossom[vv] = b
        # compute mybestedges for b
        bet_v = np.full(B, -1, dtype=np.int64)
        bet_w = np.full(B, -1, dtype=np.int64)
        order = np.empty(B, dtype=np.int64)
        n_order = 0
        for ci in range(cl):
            bvv = childs[b, ci]
            if bvv >= n and mbe_n[bvv] >= 0:
                # walk the sub-blossom's saved least-slack list
                for jj in range(mbe_n[bvv]):
                    i2 = mbe_v[bvv, jj]
                    j2 = mbe_w[bvv, jj]
                    if inblossom[j2] == b:
                        i2, j2 = j2, i2
                    bj = inblossom[j2]
                    if bj != b and label[bj] == 1:
                        if bet_v[bj] == -1:
                            order[n_order] = bj
                            n_order += 1
                            bet_v[bj] = i2
                            bet_w[bj] = j2
                        elif slack(i2, j2) < slack(bet_v[bj], bet_w[bj]):
                            bet_v[bj] = i2
                            bet_w[bj] = j2
                mbe_n[bvv] = -1
            else:
                cnt2 = blossom_leaves(bvv) if bvv >= n else 1
                if bvv < n:
                    leaves[0] = bvv
                    cnt2 = 1
                for jj in range(cnt2):
                    i2 = leaves[jj]
                    for j2 in range(n):
                        if j2 == i2 or not has_edge[i2, j2]:
                            continue
                        bj = inblossom[j2]
                        if bj != b and label[bj] == 1:
                            if bet_v[bj] == -1:
                                order[n_order] = bj
                                n_order += 1
                                bet_v[bj] = i2
                                bet_w[bj] = j2
                            elif slack(i2, j2) < slack(bet_v[bj], bet_w[bj]):
                                bet_v[bj] = i2
                                bet_w[bj] = j2
            be_v[bvv] = -1
        mbe_n[b] = n_order
        for jj in range(n_order):
            mbe_v[b, jj] = bet_v[order[jj]]
            mbe_w[b, jj] = bet_w[order[jj]]
        # select bestedge[b]
        be_v[b] = -1
        be_w[b] = -1
        best = np.inf
        for jj in range(n_order):
            ks = slack(mbe_v[b, jj], mbe_w[b, jj])
            if be_v[b] == -1 or ks < best:
                best = ks
                be_v[b] = mbe_v[b, jj]
                be_w[b] = mbe_w[b, jj]

    def expand_blossom(b0, endstage):
        todo = np.empty(B, dtype=np.int64)
        tn = 0
        todo[tn] = b0
        tn += 1
        while tn > 0:
            tn -= 1
            b = todo[tn]
            nch = nchilds[b]
            for ci in range(nch):
                s = childs[b, ci]
                blossomparent[s] = -1
                if s < n:
                    inblossom[s] = s
                elif endstage and blossomdual[s] == 0.0:
                    todo[tn] = s
                    tn += 1
                else:
                    cnt = blossom_leaves(s)
                    for jj in range(cnt):
                        inblossom[leaves[jj]] = s
            if (not endstage) and label[b] == 2:
                entrychild = inblossom[le_w[b]]
                j = -1
                for ci in range(nch):
                    if childs[b, ci] == entrychild:
                        j = ci
                        break
                if j & 1:
                    j -= nch
                    jstep = 1
                else:
                    jstep = -1
                v = le_v[b]
                w = le_w[b]
                while j != 0:
                    if jstep == 1:
                        p = ed_v[b, j % nch]
                        q = ed_w[b, j % nch]
                    else:
                        q = ed_v[b, (j - 1) % nch]
                        p = ed_w[b, (j - 1) % nch]
                    label[w] = 0
                    label[q] = 0
                    assign_label(w, 2, v)
                    allow[p, q] = True
                    allow[q, p] = True
                    j += jstep
                    if jstep == 1:
                        v = ed_v[b, j % nch]
                        w = ed_w[b, j % nch]
                    else:
                        w = ed_v[b, (j - 1) % nch]
                        v = ed_w[b, (j - 1) % nch]
                    allow[v, w] = True
                    allow[w, v] = True
                    j += jstep
                bw2 = childs[b, j % nch]
                label[w] = 2
                label[bw2] = 2
                le_v[w] = v
                le_w[w] = w
                le_none[w] = False
                le_v[bw2] = v
                le_w[bw2] = w
                le_none[bw2] = False
                be_v[bw2] = -1
                j += jstep
                while childs[b, j % nch] != entrychild:
                    bv2 = childs[b, j % nch]
                    if label[bv2] == 1:
                        j += jstep
                        continue
                    vfound = -1
                    if bv2 >= n:
                        cnt = blossom_leaves(bv2)
                        for kk in range(cnt):
                            if label[leaves[kk]] != 0:
                                vfound = leaves[kk]
                                break
                    else:
                        vfound = bv2 if label[bv2] != 0 else -1
                    if vfound != -1 and label[vfound] != 0:
                        label[vfound] = 0
                        label[mate[blossombase[bv2]]] = 0
                        assign_label(vfound, 2, le_v[vfound])
                    j += jstep
            label[b] = 0
            le_none[b] = True
            be_v[b] = -1
            nchilds[b] = 0
            blossombase[b] = -1
            blossomdual[b] = 0.0
            mbe_n[b] = -1
            active[b] = False
            unused[ubox[0]] = b
            ubox[0] += 1

    def augment_matching(v0, w0):
        for side in range(2):
            if side == 0:
                s = v0
                j = w0
            else:
                s = w0
                j = v0
            while True:
                bs = inblossom[s]
                if bs >= n:
                    _augment_blossom(bs, s, n, blossomparent, blossombase,
                                     childs, nchilds, ed_v, ed_w, mate)
                mate[s] = j
                if le_none[bs]:
                    break
                t = le_v[bs]
                bt = inblossom[t]
                s2 = le_v[bt]
                j2 = le_w[bt]
                if bt >= n:
                    _augment_blossom(bt, j2, n, blossomparent, blossombase,
                                     childs, nchilds, ed_v, ed_w, mate)
                mate[j2] = s2
                s = s2
                j = j2

    # main loop: at most n stages
    for _stage in range(n):
        for i in range(B):
            label[i] = 0
            le_none[i] = True
            be_v[i] = -1
        for b in range(n, B):
            if active[b]:
                mbe_n[b] = -1
        for i in range(n):
            for j in range(n):
                allow[i, j] = False
        qbox[0] = 0
        for v in range(n):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                assign_label(v, 1, -1)
        augmented = False
        while True:
            while qbox[0] > 0 and not augmented:
                qbox[0] -= 1
                v = queue[qbox[0]]
                for w in range(n):
                    if w == v or not has_edge[v, w]:
                        continue
                    bv = inblossom[v]
                    bw = inblossom[w]
                    if bv == bw:
                        continue
                    kslack = 0.0
                    if not allow[v, w]:
                        kslack = slack(v, w)
                        if kslack <= 1e-12:
                            allow[v, w] = True
                            allow[w, v] = True
                    if allow[v, w]:
                        if label[bw] == 0:
                            assign_label(w, 2, v)
                        elif label[bw] == 1:
                            base = scan_blossom(v, w)
                            if base >= 0:
                                add_blossom(base, v, w)
                            else:
                                augment_matching(v, w)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            le_v[w] = v
                            le_w[w] = w
                            le_none[w] = False
                    elif label[bw] == 1:
                        if be_v[bv] == -1 or kslack < slack(be_v[bv], be_w[bv]):
                            be_v[bv] = v
                            be_w[bv] = w
                    elif label[w] == 0:
                        if be_v[w] == -1 or kslack < slack(be_v[w], be_w[w]):
                            be_v[w] = v
                            be_w[w] = w
            if augmented:
                break
            deltatype = -1
            delta = 0.0
            de_v = -1
            de_w = -1
            deltablossom = -1
            for v in range(n):
                if label[inblossom[v]] == 0 and be_v[v] != -1:
                    d = slack(be_v[v], be_w[v])
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 2
                        de_v = be_v[v]
                        de_w = be_w[v]
            for b in range(B):
                par_ok = blossomparent[b] == -1
                exists = b < n or active[b]
                if exists and par_ok and label[b] == 1 and be_v[b] != -1:
                    d = slack(be_v[b], be_w[b]) / 2.0
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 3
                        de_v = be_v[b]
                        de_w = be_w[b]
            for b in range(n, B):
                if (
                    active[b]
                    and blossomparent[b] == -1
                    and label[b] == 2
                    and (deltatype == -1 or blossomdual[b] < delta)
                ):
                    delta = blossomdual[b]
                    deltatype = 4
                    deltablossom = b
            if deltatype == -1:
                # max-cardinality optimum: final dual adjustment and stop
                deltatype = 1
                mind = dualvar[0]
                for v in range(n):
                    if dualvar[v] < mind:
                        mind = dualvar[v]
                delta = mind if mind > 0.0 else 0.0
            for v in range(n):
                lb = label[inblossom[v]]
                if lb == 1:
                    dualvar[v] -= delta
                elif lb == 2:
                    dualvar[v] += delta
            for b in range(n, B):
                if active[b] and blossomparent[b] == -1:
                    if label[b] == 1:
                        blossomdual[b] += delta
                    elif label[b] == 2:
                        blossomdual[b] -= delta
            if deltatype == 1:
                break
            elif deltatype == 2:
                allow[de_v, de_w] = True
                allow[de_w, de_v] = True
                queue[qbox[0]] = de_v
                qbox[0] += 1
            elif deltatype == 3:
                allow[de_v, de_w] = True
                allow[de_w, de_v] = True
                queue[qbox[0]] = de_v
                qbox[0] += 1
            else:
                expand_blossom(deltablossom, False)
        if not augmented:
            break
        for b in range(n, B):
            if (
                active[b]
                and blossomparent[b] == -1
                and label[b] == 1
                and blossomdual[b] == 0.0
            ):
                expand_blossom(b, True)
    return mate
