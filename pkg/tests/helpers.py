"""Random model generators shared by the property tests."""

from pathlib import Path

import numpy as np

from tonti.complex import build_complex, find_meshes
from tonti.elements import Constant, Element, Transducer
from tonti.io import load
from tonti.model import build_model

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name):
    return load(FIXTURES / name)


def random_graph(rng, n_nodes, n_extra, components=1):
    """Connected components of random trees plus extra random branches.

    Returns node ids, branch triples and the first node of every component.
    """
    nodes = [f"n{i}" for i in range(n_nodes)]
    cuts = sorted(rng.choice(np.arange(1, n_nodes), size=components - 1, replace=False)) if components > 1 else []
    groups = np.split(np.arange(n_nodes), cuts)
    branches = []
    for g in groups:
        for k in range(1, len(g)):
            a, b = int(g[k]), int(g[rng.integers(0, k)])
            if rng.random() < 0.5:
                a, b = b, a
            branches.append((f"b{len(branches)}", nodes[a], nodes[b]))
    for _ in range(n_extra):
        g = groups[rng.integers(0, len(groups))]
        if len(g) < 2:
            continue
        a, b = rng.choice(g, size=2, replace=False)
        branches.append((f"b{len(branches)}", nodes[int(a)], nodes[int(b)]))
    order = rng.permutation(len(branches))
    branches = [branches[i] for i in order]
    refs = [nodes[int(g[0])] for g in groups]
    return nodes, branches, refs


def random_resistive_model(rng, n_nodes=None, sources=True):
    n = int(n_nodes or rng.integers(2, 21))
    nodes, branches, refs = random_graph(rng, n, int(rng.integers(0, n + 1)))
    cx = build_complex(nodes, branches)
    cx = cx.with_meshes(find_meshes(cx))
    els = []
    for bid, _, _ in branches:
        els.append(Element(bid, "resistor", float(rng.uniform(0.5, 10.0))))
        if sources and rng.random() < 0.4:
            els.append(Element(bid, "effort_source", Constant(float(rng.uniform(-5, 5)))))
        if sources and rng.random() < 0.4:
            els.append(Element(bid, "flow_source", Constant(float(rng.uniform(-2, 2)))))
    return build_model(cx, els, (), refs)


def random_rlc_model(rng, n_nodes=None, components=1):
    """Transducer-free RLC network; every branch holds one passive element."""
    n = int(n_nodes or rng.integers(2, 8))
    components = min(components, n // 2) or 1
    nodes, branches, refs = random_graph(rng, n, int(rng.integers(0, n)), components)
    cx = build_complex(nodes, branches)
    cx = cx.with_meshes(find_meshes(cx))
    kinds = ("resistor", "inductor", "capacitor")
    els = [
        Element(bid, kinds[int(rng.integers(0, 3))], float(rng.uniform(0.5, 2.0)))
        for bid, _, _ in branches
    ]
    return build_model(cx, els, (), refs)


def random_transducer_model(rng, n_transformers, n_gyrators=0):
    """Several RLC islands chained by transformers and gyrators.

    Each transducer gets two fresh branches: one in an island of its own
    left side and one in the island on its right.  Returns the model.
    """
    n_islands = n_transformers + n_gyrators + 1
    nodes, branches, els, refs, trs = [], [], [], [], []
    islands = []
    for k in range(n_islands):
        size = int(rng.integers(2, 5))
        ids = [f"i{k}n{j}" for j in range(size)]
        nodes += ids
        refs.append(ids[0])
        islands.append(ids)
        for j in range(1, size):
            tail, head = ids[j], ids[int(rng.integers(0, j))]
            bid = f"i{k}b{j}"
            branches.append((bid, tail, head))
            kind = ("resistor", "inductor", "capacitor")[int(rng.integers(0, 3))]
            els.append(Element(bid, kind, float(rng.uniform(0.5, 2.0))))
        bid = f"i{k}s"
        a, b = rng.choice(size, 2, replace=False)
        branches.append((bid, ids[int(a)], ids[int(b)]))
        els.append(Element(bid, "resistor", float(rng.uniform(0.5, 2.0))))
        els.append(Element(bid, "effort_source", Constant(float(rng.uniform(-1, 1)))))
    kinds = ["transformer"] * n_transformers + ["gyrator"] * n_gyrators
    for k, kind in enumerate(kinds):
        left_isl, right_isl = islands[k], islands[k + 1]
        bl, br = f"t{k}L", f"t{k}R"
        a, b = rng.choice(len(left_isl), 2, replace=False)
        c, d = rng.choice(len(right_isl), 2, replace=False)
        branches.append((bl, left_isl[int(a)], left_isl[int(b)]))
        branches.append((br, right_isl[int(c)], right_isl[int(d)]))
        modulus = float(rng.choice([-1, 1]) * rng.uniform(0.5, 3.0))
        trs.append(Transducer(kind, bl, br, modulus))
    cx = build_complex(nodes, branches)
    cx = cx.with_meshes(find_meshes(cx))
    return build_model(cx, els, trs, refs)
