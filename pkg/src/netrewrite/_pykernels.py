"""Pure-Python reference kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature and
bit-identical output; :mod:`netrewrite.kernels` picks one at import time.

Port tables are flat integer lists.  For node ``u`` the out-ports live at
``out_off[u] .. out_off[u+1]`` and each entry is a pair stored in
``out_nbr``/``out_aux``: ``out_nbr >= 0`` is the linked node index and
``out_aux`` its in-port number; ``out_nbr == -1`` marks an unbound port whose
frontier code is ``out_aux``.  In-ports are laid out the same way.
"""

from __future__ import annotations

BACKEND = "python"


def traversal_code(labels, out_off, out_nbr, out_aux, in_off, in_nbr, in_aux, root):
    """Breadth-first code of the component containing ``root``.

    Returns ``(code, order)``.  Neighbours are numbered the first time a port
    scan reaches them, so two rooted components have equal codes iff they are
    isomorphic with roots matched.
    """
    pos = {root: 0}
    order = [root]
    code = []
    i = 0
    while i < len(order):
        u = order[i]
        lo, hi = out_off[u], out_off[u + 1]
        ilo, ihi = in_off[u], in_off[u + 1]
        code.append(labels[u])
        code.append(ihi - ilo)
        code.append(hi - lo)
        for k in range(lo, hi):
            v = out_nbr[k]
            if v < 0:
                code.append(-1)
            else:
                if v not in pos:
                    pos[v] = len(order)
                    order.append(v)
                code.append(pos[v])
            code.append(out_aux[k])
        for k in range(ilo, ihi):
            v = in_nbr[k]
            if v < 0:
                code.append(-1)
            else:
                if v not in pos:
                    pos[v] = len(order)
                    order.append(v)
                code.append(pos[v])
            code.append(in_aux[k])
        i += 1
    return code, order


def canonical_components(labels, out_off, out_nbr, out_aux, in_off, in_nbr, in_aux):
    """Minimal traversal code and node order for each connected component.

    The result is sorted by code; equal codes keep the order of their
    smallest node index.  Ties between roots go to the lowest index.
    """
    n = len(labels)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        _, members = traversal_code(
            labels, out_off, out_nbr, out_aux, in_off, in_nbr, in_aux, start
        )
        for m in members:
            seen[m] = True
        best_code = None
        best_order = None
        for root in sorted(members):
            code, order = traversal_code(
                labels, out_off, out_nbr, out_aux, in_off, in_nbr, in_aux, root
            )
            if best_code is None or code < best_code:
                best_code, best_order = code, order
        comps.append((best_code, best_order))
    comps.sort(key=lambda c: c[0])
    return comps


def connected_subsets(adjacency, cap):
    """All nonempty vertex sets inducing a connected subgraph, as bitmasks.

    ``adjacency[v]`` is the neighbour bitmask of ``v``.  Each set is produced
    once (ESU enumeration keyed on the minimum vertex).  Returns ``None`` when
    more than ``cap`` sets exist.
    """
    n = len(adjacency)
    out = []

    def extend(sub, nbhd, ext, low_mask):
        out.append(sub)
        if len(out) > cap:
            return False
        while ext:
            w = ext & -ext
            ext ^= w
            widx = w.bit_length() - 1
            fresh = adjacency[widx] & ~(sub | nbhd) & ~low_mask
            if not extend(sub | w, nbhd | adjacency[widx], ext | fresh, low_mask):
                return False
        return True

    for v in range(n):
        low_mask = (1 << (v + 1)) - 1
        if not extend(1 << v, adjacency[v], adjacency[v] & ~low_mask, low_mask):
            return None
    return out
