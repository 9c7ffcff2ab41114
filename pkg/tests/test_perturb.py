"""Properties of the graph perturbation operators.

The operators promise exact selection counts (round-half-up), determinism
under a fixed stream, and that placeholder self-loops are never touched.
"""

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from kgprobe import (
    add_self_loop_placeholders,
    build_graph,
    delete_entities,
    delete_facts,
    delete_relations,
    distort,
    remove_relation_type,
    round_half_up,
    to_interaction_kg,
    to_self_kg,
)
from kgprobe.perturb import (
    INTERACT_RELATION,
    INTERACT_TRANS_RELATION,
    PerturbSpec,
    apply_spec,
)
from kgprobe.rng import RngStream


# ---------------------------------------------------------------- strategies

@st.composite
def graphs(draw, min_facts=0, max_facts=60):
    n_ent = draw(st.integers(2, 25))
    n_rel = draw(st.integers(1, 6))
    n_facts = draw(st.integers(min_facts, max_facts))
    facts = np.empty((n_facts, 3), dtype=np.int64)
    for i in range(n_facts):
        facts[i] = (
            draw(st.integers(0, n_ent - 1)),
            draw(st.integers(0, n_rel - 1)),
            draw(st.integers(0, n_ent - 1)),
        )
    return build_graph(facts, n_ent, n_rel)


ratios = st.floats(0.0, 1.0, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)

RATIO_OPS = [distort, delete_facts, delete_entities, delete_relations]


# ------------------------------------------------------------- round_half_up

def test_round_half_up_midpoints():
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(2.5) == 3  # bankers' rounding would give 2
    assert round_half_up(2.4999) == 2
    assert round_half_up(0.0) == 0


@given(st.integers(0, 10**6))
def test_round_half_up_integers_fixed(n):
    assert round_half_up(float(n)) == n
    assert round_half_up(n + 0.5) == n + 1
    assert round_half_up(n + 0.499999) == n


# ------------------------------------------------------------ ratio operators

@given(graphs(), seeds)
@settings(max_examples=60, deadline=None)
def test_ratio_zero_is_identity(kg, seed):
    for op in RATIO_OPS:
        out = op(kg, 0.0, RngStream(seed, "t"))
        assert np.array_equal(out.facts, kg.facts)
        assert out.entity_count == kg.entity_count
        assert out.relation_count == kg.relation_count


@given(graphs(), ratios, seeds)
@settings(max_examples=80, deadline=None)
def test_operators_deterministic(kg, ratio, seed):
    for op in RATIO_OPS:
        a = op(kg, ratio, RngStream(seed, "t"))
        b = op(kg, ratio, RngStream(seed, "t"))
        assert np.array_equal(a.facts, b.facts)


@given(graphs(), ratios, seeds)
@settings(max_examples=80, deadline=None)
def test_delete_facts_exact_count_and_order(kg, ratio, seed):
    out = delete_facts(kg, ratio, RngStream(seed, "t"))
    assert out.n_facts == kg.n_facts - round_half_up(ratio * kg.n_facts)
    # survivors keep their relative order: out.facts is a subsequence
    it = iter(map(tuple, kg.facts))
    assert all(any(row == cand for cand in it) for row in map(tuple, out.facts))
    # vocabulary untouched
    assert out.entity_count == kg.entity_count
    assert out.relation_count == kg.relation_count


@given(graphs(), ratios, seeds)
@settings(max_examples=80, deadline=None)
def test_distort_replaces_exact_row_count(kg, ratio, seed):
    out = distort(kg, ratio, RngStream(seed, "t"))
    assert out.n_facts == kg.n_facts  # never changes the fact count
    changed = (out.facts != kg.facts).any(axis=1).sum()
    # redraws may coincide with the original values, so <= not ==
    assert changed <= round_half_up(ratio * kg.n_facts)
    assert out.facts[:, 0].max(initial=-1) < kg.entity_count
    assert out.facts[:, 1].max(initial=-1) < kg.relation_count
    assert out.facts[:, 2].max(initial=-1) < kg.entity_count


@given(graphs(min_facts=1), ratios, seeds)
@settings(max_examples=80, deadline=None)
def test_delete_entities_consistency(kg, ratio, seed):
    out = delete_entities(kg, ratio, RngStream(seed, "t"))
    assert out.entity_count == kg.entity_count  # ids stay valid
    kept = set(map(tuple, out.facts))
    surviving_entities = {e for f in kept for e in (f[0], f[2])}
    # every dropped fact touched an entity that no kept fact mentions
    for f in map(tuple, kg.facts):
        if f not in kept:
            assert f[0] not in surviving_entities or f[2] not in surviving_entities


@given(graphs(min_facts=1), seeds)
@settings(max_examples=40, deadline=None)
def test_delete_entities_protected_all_is_identity(kg, seed):
    out = delete_entities(
        kg, 1.0, RngStream(seed, "t"), protected=set(range(kg.entity_count))
    )
    assert np.array_equal(out.facts, kg.facts)


@given(graphs(), ratios, seeds)
@settings(max_examples=80, deadline=None)
def test_delete_relations_all_or_nothing(kg, ratio, seed):
    out = delete_relations(kg, ratio, RngStream(seed, "t"))
    assert out.relation_count == kg.relation_count
    before = np.bincount(kg.facts[:, 1], minlength=kg.relation_count)
    after = np.bincount(out.facts[:, 1], minlength=kg.relation_count)
    for r in range(kg.relation_count):
        assert after[r] in (0, before[r])
    # number of deleted relation types is exact over the full vocabulary
    n_deleted_with_facts = int(((after == 0) & (before > 0)).sum())
    assert n_deleted_with_facts <= round_half_up(ratio * kg.relation_count)


@given(graphs(min_facts=1))
@settings(max_examples=60, deadline=None)
def test_remove_relation_type_exact(kg):
    r = int(kg.facts[0, 1])
    out = remove_relation_type(kg, r)
    assert not (out.facts[:, 1] == r).any()
    expect = kg.facts[kg.facts[:, 1] != r]
    assert np.array_equal(out.facts, expect)
    assert out.relation_count == kg.relation_count


def test_remove_relation_type_bad_id(tiny_kg):
    with pytest.raises(ValueError):
        remove_relation_type(tiny_kg, 99)


# ---------------------------------------------------------------- placeholders

@given(graphs(), ratios, seeds)
@settings(max_examples=60, deadline=None)
def test_placeholder_facts_survive_every_operator(kg, ratio, seed):
    protected = set(range(0, kg.entity_count, 2))
    marked = add_self_loop_placeholders(kg, protected)
    ph = marked.placeholder_relation
    ph_facts = {tuple(f) for f in marked.facts[marked.placeholder_mask()]}
    assert len(ph_facts) == len(protected)
    for op in RATIO_OPS:
        out = op(marked, ratio, RngStream(seed, "t"))
        kept = set(map(tuple, out.facts[out.facts[:, 1] == ph]))
        assert kept == ph_facts
        # distort must never draw the placeholder relation as a replacement
        assert (out.facts[:, 1] == ph).sum() == len(ph_facts)


def test_add_self_loop_placeholders_idempotent(tiny_kg):
    a = add_self_loop_placeholders(tiny_kg, {0, 2})
    b = add_self_loop_placeholders(a, {0, 2})
    assert np.array_equal(a.facts, b.facts)
    assert a.relation_count == tiny_kg.relation_count + 1
    assert b.relation_count == a.relation_count
    assert a.placeholder_relation == tiny_kg.relation_count
    loops = a.facts[a.placeholder_mask()]
    assert {tuple(f) for f in loops} == {(0, a.placeholder_relation, 0), (2, a.placeholder_relation, 2)}


def test_placeholders_extend_protection(tiny_kg):
    a = add_self_loop_placeholders(tiny_kg, {0})
    b = add_self_loop_placeholders(a, {2})
    assert b.protected_entities == frozenset({0, 2})
    assert b.placeholder_mask().sum() == 2


# ------------------------------------------------------- replacement graphs

def test_to_interaction_kg_shape(tiny_ds):
    users, items = tiny_ds.users, tiny_ds.items
    links = {**tiny_ds.links, 4: 5}  # link the one loose item too
    kg = to_interaction_kg(users, items, links, tiny_ds.n_users, 6)
    # one forward + one reverse fact per train interaction
    assert kg.n_facts == 2 * len(users)
    assert kg.relation_count == 2
    assert kg.relation_tokens == ["interact", "interact_trans"]
    assert kg.entity_count == 6 + tiny_ds.n_users
    fwd = kg.facts[::2]
    rev = kg.facts[1::2]
    assert (fwd[:, 1] == INTERACT_RELATION).all()
    assert (rev[:, 1] == INTERACT_TRANS_RELATION).all()
    # reverse facts mirror the forward ones
    assert np.array_equal(fwd[:, 0], rev[:, 2])
    assert np.array_equal(fwd[:, 2], rev[:, 0])
    # user nodes sit after the original entity range
    assert fwd[:, 0].min() >= 6


def test_to_interaction_kg_missing_link_raises(tiny_ds):
    users = np.array([0], dtype=np.int64)
    items = np.array([4], dtype=np.int64)  # item 4 has no link
    with pytest.raises(ValueError, match="link"):
        to_interaction_kg(users, items, tiny_ds.links, tiny_ds.n_users, 6)


def test_to_self_kg(tiny_ds):
    kg = to_self_kg(tiny_ds.links, 6)
    assert kg.n_facts == len(tiny_ds.links)
    assert kg.relation_count == 1
    assert (kg.facts[:, 0] == kg.facts[:, 2]).all()
    assert kg.facts[:, 0].tolist() == sorted(tiny_ds.links[i] for i in sorted(tiny_ds.links))


# ------------------------------------------------------------------ PerturbSpec

def test_spec_round_trip():
    spec = PerturbSpec("distort", ratio=0.25)
    assert PerturbSpec.from_dict(spec.to_dict()) == spec
    spec2 = PerturbSpec("remove_relation", target_relation=3)
    assert PerturbSpec.from_dict(spec2.to_dict()) == spec2


def test_spec_validation():
    with pytest.raises(ValueError):
        PerturbSpec("distort", ratio=1.5)
    with pytest.raises(ValueError):
        PerturbSpec("distort")  # ratio missing
    with pytest.raises(ValueError):
        PerturbSpec("remove_relation")  # target missing
    with pytest.raises(ValueError):
        PerturbSpec("nonsense", ratio=0.5)


def test_apply_spec_dispatch(tiny_ds, tiny_kg):
    out = apply_spec(tiny_kg, PerturbSpec("delete_facts", ratio=0.5), RngStream(3, "t"))
    assert out.n_facts == 3
    out = apply_spec(
        tiny_kg,
        PerturbSpec("interaction_kg"),
        RngStream(3, "t"),
        train_users=tiny_ds.users,
        train_items=tiny_ds.items,
        links={**tiny_ds.links, 4: 5},
        n_users=tiny_ds.n_users,
    )
    assert out.relation_count == 2
