"""Model tests: analytic gradients vs central finite differences, trainer
determinism, and checkpoint round-trips."""

import numpy as np
import pytest

from kgprobe import (
    ModelConfig,
    TrainingDivergedError,
    evaluate,
    load_model,
    save_model,
    train_bpr_mf,
    train_cfkg_lite,
    train_kgcn_lite,
)
from kgprobe.models import bpr, common, propagation, translation
from kgprobe.models.propagation import NeighborSample
from kgprobe.rng import RngStream


# ------------------------------------------------------------ gradient checks

def dense_grads(tables, scatter):
    out = {k: np.zeros_like(v) for k, v in tables.items()}
    for name, rows, g in scatter:
        np.add.at(out[name], rows, g)
    return out


def check_gradients(loss_fn, tables, eps=1e-5, rel_tol=1e-4):
    """Compare analytic gradients against central differences, coordinate by
    coordinate over every table entry."""
    _, scatter = loss_fn(tables)
    analytic = dense_grads(tables, scatter)
    worst = 0.0
    for name, table in tables.items():
        for idx in np.ndindex(table.shape):
            orig = table[idx]
            table[idx] = orig + eps
            lp = loss_fn(tables)[0]
            table[idx] = orig - eps
            lm = loss_fn(tables)[0]
            table[idx] = orig
            fd = (lp - lm) / (2 * eps)
            an = analytic[name][idx]
            err = abs(fd - an) / max(abs(fd), abs(an), 1e-6)
            worst = max(worst, err)
            assert err < rel_tol, f"{name}{idx}: analytic {an:.8f} vs fd {fd:.8f}"
    return worst


def rand_tables(gen, spec):
    return {name: gen.normal(0, 0.4, size=shape) for name, shape in spec.items()}


def test_bpr_gradients_single_example():
    gen = np.random.default_rng(123)
    tables = rand_tables(gen, {"user_emb": (3, 8), "item_emb": (5, 8)})
    cfg = ModelConfig(embedding_dim=8, l2_weight=1e-3)
    users = np.array([1])
    pos = np.array([2])
    neg = np.array([4])
    check_gradients(lambda t: bpr.batch_loss_grads(t, users, pos, neg, cfg), tables)


def test_bpr_gradients_duplicate_rows():
    # same item on both sides of the pair: gradients must still match FD
    gen = np.random.default_rng(7)
    tables = rand_tables(gen, {"user_emb": (2, 8), "item_emb": (3, 8)})
    cfg = ModelConfig(embedding_dim=8, l2_weight=1e-3)
    check_gradients(
        lambda t: bpr.batch_loss_grads(t, np.array([0]), np.array([1]), np.array([1]), cfg),
        tables,
    )


def test_translation_gradients_single_example():
    gen = np.random.default_rng(43)
    tables = rand_tables(gen, {"entity_emb": (6, 8), "rel_emb": (3, 8)})
    cfg = ModelConfig(embedding_dim=8, margin=1.0, l2_weight=1e-3)
    heads, rels, tails, negs = (np.array([x]) for x in (0, 1, 3, 5))
    check_gradients(
        lambda t: translation.batch_loss_grads(t, heads, rels, tails, negs, cfg), tables
    )


def test_translation_gradients_self_loop():
    gen = np.random.default_rng(44)
    tables = rand_tables(gen, {"entity_emb": (4, 8), "rel_emb": (2, 8)})
    cfg = ModelConfig(embedding_dim=8, margin=1.0, l2_weight=0.0)
    heads, rels, tails, negs = (np.array([x]) for x in (2, 0, 2, 1))
    check_gradients(
        lambda t: translation.batch_loss_grads(t, heads, rels, tails, negs, cfg), tables
    )


def test_propagation_gradients_single_example():
    gen = np.random.default_rng(11)
    tables = rand_tables(
        gen, {"user_emb": (2, 8), "entity_emb": (6, 8), "rel_emb": (3, 8)}
    )
    cfg = ModelConfig(embedding_dim=8, neighbor_sample_size=3, l2_weight=1e-3)
    users = np.array([1])
    pos = NeighborSample(
        ents=np.array([2]),
        rels=np.array([[0, 1, 2]]),
        tails=np.array([[3, 1, 4]]),
        has=np.array([True]),
    )
    neg = NeighborSample(
        ents=np.array([5]),
        rels=np.array([[1, 1, 0]]),
        tails=np.array([[0, 2, 2]]),
        has=np.array([True]),
    )
    check_gradients(
        lambda t: propagation.batch_loss_grads(t, users, pos, neg, cfg), tables
    )


def test_propagation_gradients_isolated_entity():
    # no outgoing edges on the negative side: neighbor mix is zeroed out
    gen = np.random.default_rng(12)
    tables = rand_tables(
        gen, {"user_emb": (2, 8), "entity_emb": (5, 8), "rel_emb": (2, 8)}
    )
    cfg = ModelConfig(embedding_dim=8, neighbor_sample_size=2, l2_weight=0.0)
    users = np.array([0])
    pos = NeighborSample(
        ents=np.array([1]), rels=np.array([[0, 1]]), tails=np.array([[2, 3]]),
        has=np.array([True]),
    )
    neg = NeighborSample(
        ents=np.array([4]), rels=np.array([[0, 0]]), tails=np.array([[0, 0]]),
        has=np.array([False]),
    )
    check_gradients(
        lambda t: propagation.batch_loss_grads(t, users, pos, neg, cfg), tables
    )


# --------------------------------------------------------------- training loop

def test_run_training_raises_on_divergence():
    tables = {"user_emb": np.zeros((2, 4))}
    with pytest.raises(TrainingDivergedError) as exc:
        common.run_training(
            tables,
            ModelConfig(max_epochs=5, learning_rate=0.5),
            RngStream(0, "t"),
            train_epoch=lambda t, s: float("inf"),
            make_eval_model=lambda t: None,
            valid_candidates=None,
        )
    assert exc.value.epoch == 0


def test_early_stopping_contract(planted_split):
    cfg = ModelConfig(embedding_dim=8, learning_rate=0.1, max_epochs=40, patience=3)
    model = train_bpr_mf(planted_split, cfg, RngStream(21, "t/bpr"))
    log = model.training_log
    assert 1 <= len(log) <= 40
    if len(log) < 40:  # stopped early: exactly `patience` epochs past the best
        best_idx = int(np.argmax([s.valid_mrr for s in log]))
        assert len(log) - 1 - best_idx == 3


def test_trainers_deterministic(planted_split, planted, quick_config):
    _, kg = planted
    for train, needs_kg in (
        (train_bpr_mf, False),
        (train_cfkg_lite, True),
        (train_kgcn_lite, True),
    ):
        args = (planted_split, kg) if needs_kg else (planted_split,)
        a = train(*args, quick_config, RngStream(5, "t/det"))
        b = train(*args, quick_config, RngStream(5, "t/det"))
        for name in ("user_emb", "item_emb", "entity_emb", "rel_emb"):
            ta, tb = getattr(a, name), getattr(b, name)
            assert (ta is None) == (tb is None)
            if ta is not None:
                assert np.array_equal(ta, tb), f"{a.kind}.{name} differs"
        c = train(*args, quick_config, RngStream(6, "t/det"))
        table = "user_emb" if a.user_emb is not None else "entity_emb"
        assert not np.array_equal(getattr(a, table), getattr(c, table))


def test_checkpoint_round_trip(tmp_path, planted_split, planted, quick_config, planted_cands):
    _, kg = planted
    for train, needs_kg in (
        (train_bpr_mf, False),
        (train_cfkg_lite, True),
        (train_kgcn_lite, True),
    ):
        args = (planted_split, kg) if needs_kg else (planted_split,)
        model = train(*args, quick_config, RngStream(9, "t/ckpt"))
        path = str(tmp_path / f"{model.kind}.kgpm")
        save_model(model, path)
        back = load_model(path)
        assert back.kind == model.kind
        assert back.config == model.config
        for name in ("user_emb", "item_emb", "entity_emb", "rel_emb"):
            ta, tb = getattr(model, name), getattr(back, name)
            if ta is not None:
                assert np.array_equal(ta, tb)
        # bit-exact tables means bit-exact rankings
        before = evaluate(model, planted_cands)
        after = evaluate(back, planted_cands)
        for x, y in zip(before, after):
            assert np.array_equal(x.ranked_items, y.ranked_items)


def test_load_model_rejects_other_files(tmp_path):
    p = tmp_path / "junk.kgpm"
    p.write_bytes(b"definitely not a checkpoint")
    with pytest.raises(ValueError, match="checkpoint"):
        load_model(str(p))


def test_draw_negatives_avoids_positives():
    gen = np.random.default_rng(0)
    users = np.zeros(200, dtype=np.int64)
    pos_sets = {0: {1, 2, 3}}  # rejection rounds dodge a moderate positive set
    neg = bpr.draw_negatives(gen, users, 10, pos_sets)
    assert not (np.isin(neg, [1, 2, 3])).any()


def test_evaluate_shapes(planted_split, planted, quick_config, planted_cands):
    model = train_bpr_mf(planted_split, quick_config, RngStream(2, "t/e"))
    results = evaluate(model, planted_cands)
    assert len(results) == len(planted_cands.rows)
    for row, res in zip(planted_cands.rows, results):
        assert res.user == row.user
        assert sorted(res.ranked_items.tolist()) == sorted(row.items.tolist())
        assert res.positives == frozenset(row.items[row.is_positive].tolist())
