"""Seeded random graph builders shared by property and scale tests."""

from __future__ import annotations

import random
from decimal import Decimal

from kgengine.model import (
    Binding,
    BoundedCalcModel,
    CompletenessGraph,
    ConditionNode,
    FieldDecl,
    FieldRole,
    KnowledgeGraph,
    OutcomeNode,
)
from kgengine.values import Value, ValueKind

NUMERIC_GISTS = ("ADD", "SUBTRACT", "NONNEG_SUBTRACT", "MULTIPLY", "MIN", "MAX")


def random_money(rng: random.Random, cents_max: int = 100_000_000) -> Value:
    return Value.money(Decimal(rng.randrange(0, cents_max + 1)) / 100)


def random_calc_graph(
    rng: random.Random,
    n_inputs: int = 6,
    n_models: int = 10,
    with_defaults: bool = False,
    graph_id: str = "gen",
) -> KnowledgeGraph:
    """An acyclic calc graph: each model consumes earlier fields only."""
    fields: list[FieldDecl] = []
    available: list[str] = []
    for i in range(n_inputs):
        default = random_money(rng, 1_000_00) if with_defaults and rng.random() < 0.3 else None
        fields.append(FieldDecl(f"i{i:03d}", ValueKind.MONEY, FieldRole.INPUT, default))
        available.append(f"i{i:03d}")

    models: list[BoundedCalcModel] = []
    for j in range(n_models):
        out = f"o{j:03d}"
        fields.append(FieldDecl(out, ValueKind.MONEY, FieldRole.COMPUTED))
        gist = rng.choice(NUMERIC_GISTS)
        if gist in ("SUBTRACT", "NONNEG_SUBTRACT"):
            n_in = 2
        else:
            n_in = rng.randint(1, min(4, len(available)))
            n_in = max(n_in, 1)
        refs = [rng.choice(available) for _ in range(n_in)]
        roles = ("minuend", "subtrahend") if gist in ("SUBTRACT", "NONNEG_SUBTRACT") else None
        bindings = []
        for k, ref in enumerate(refs):
            role = roles[k] if roles else None
            if rng.random() < 0.1:
                bindings.append(Binding(role, const=random_money(rng, 10_000)))
            else:
                bindings.append(Binding(role, ref=ref))
        models.append(BoundedCalcModel(f"m{j:03d}", gist, tuple(bindings), out))
        available.append(out)
    return KnowledgeGraph(graph_id, fields, models)


def layered_scale_graph(n_models: int = 10_000, n_inputs: int = 500) -> KnowledgeGraph:
    """Deterministic form-shaped graph for the performance smoke test.

    Mirrors how compliance graphs actually connect: independent clusters
    (one per form) of chained local math over a handful of inputs, plus a
    running chain of cross-cluster totals. One input's dependency cone is
    its cluster's downstream slice plus the totals suffix, not the world.
    Values stay bounded: sums draw on raw inputs, chains go through MIN
    and floored subtraction.
    """
    rng = random.Random(20_000 + n_models)
    n_clusters = 100
    per_cluster = (n_models - n_clusters) // n_clusters
    fields = [FieldDecl(f"i{i:04d}", ValueKind.MONEY, FieldRole.INPUT) for i in range(n_inputs)]
    inputs_per_cluster = max(1, n_inputs // n_clusters)
    models: list[BoundedCalcModel] = []
    cluster_heads: list[str] = []
    for c in range(n_clusters):
        base = c * inputs_per_cluster
        local_inputs = [f"i{(base + k) % n_inputs:04d}" for k in range(inputs_per_cluster)]
        local: list[str] = list(local_inputs)
        out = ""
        for j in range(per_cluster):
            out = f"o{c:02d}_{j:04d}"
            fields.append(FieldDecl(out, ValueKind.MONEY, FieldRole.COMPUTED))
            if j % 3 == 0 or len(local) < 2:
                refs = [rng.choice(local_inputs) for _ in range(2)]
                gist, bindings = "ADD", tuple(Binding(None, ref=r) for r in refs)
            elif j % 3 == 1:
                refs = rng.sample(local, k=2)
                gist, bindings = "MIN", tuple(Binding(None, ref=r) for r in refs)
            else:
                refs = rng.sample(local, k=2)
                gist = "NONNEG_SUBTRACT"
                bindings = (Binding("minuend", ref=refs[0]), Binding("subtrahend", ref=refs[1]))
            models.append(BoundedCalcModel(f"m{c:02d}_{j:04d}", gist, bindings, out))
            local.append(out)
        cluster_heads.append(out)
    prev = cluster_heads[0]
    for c in range(n_clusters):
        out = f"t{c:03d}"
        fields.append(FieldDecl(out, ValueKind.MONEY, FieldRole.COMPUTED))
        models.append(BoundedCalcModel(
            f"zt{c:03d}", "ADD",
            (Binding(None, ref=prev), Binding(None, ref=cluster_heads[c])), out,
        ))
        prev = out
    return KnowledgeGraph("scale", fields, models)


def random_completeness_graph(
    rng: random.Random,
    var_pool: list[tuple[str, ValueKind]],
    n_conditions: int = 3,
    graph_id: str = "cg",
) -> CompletenessGraph:
    """A random rooted condition DAG with edges only to later nodes."""
    n_conditions = max(1, min(n_conditions, len(var_pool) if var_pool else 1))
    decisions = ("Eligible", "Ineligible", "Review")
    outcome_nodes = [OutcomeNode(f"d{k}", decisions[k]) for k in range(rng.randint(2, 3))]
    chosen = rng.sample(var_pool, k=n_conditions)
    cond_nodes: list[ConditionNode] = []
    ids = [f"c{idx}" for idx in range(n_conditions)]
    for idx, (var, kind) in enumerate(chosen):
        targets = ids[idx + 1:] + [o.id for o in outcome_nodes]

        def pick() -> str:
            # Bias toward marching forward so every variable tends to matter.
            pool = targets if idx + 1 < n_conditions else [o.id for o in outcome_nodes]
            return rng.choice(pool)

        if kind is ValueKind.MONEY:
            value = random_money(rng, 1_000_00)
            op = rng.choice(("lt", "le", "gt", "ge", "eq", "ne"))
        elif kind is ValueKind.NUMBER:
            value = Value.number(rng.randrange(0, 100))
            op = rng.choice(("lt", "le", "gt", "ge"))
        elif kind is ValueKind.BOOLEAN:
            value = Value.boolean(True)
            op = rng.choice(("eq", "ne"))
        else:
            raise AssertionError("text vars need an enum pool")
        true_edge, false_edge = pick(), pick()
        if true_edge == false_edge:
            false_edge = rng.choice([o.id for o in outcome_nodes])
        cond_nodes.append(ConditionNode(ids[idx], var, op, value, true_edge, false_edge))
    return CompletenessGraph(graph_id, ids[0], tuple(cond_nodes) + tuple(outcome_nodes))
