import numpy as np
import pytest

from recipelab import fieldcodec as fc
from recipelab import model as M
from recipelab.fieldcodec import FieldKind

TINY = M.ModelConfig(vocab_size=64, n_layers=2, n_heads=2, embed_dim=16,
                     context_len=48, dtype="float64")


@pytest.fixture(scope="module")
def tiny_params():
    return M.init_params(TINY, seed=1)


@pytest.fixture(scope="module")
def tiny_batch():
    rng = np.random.default_rng(0)
    batch = rng.integers(0, 60, size=(2, 16))
    batch[0, 12:] = 63
    return batch


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            M.ModelConfig(vocab_size=10, embed_dim=10, n_heads=3)
        with pytest.raises(ValueError):
            M.ModelConfig(vocab_size=0)
        with pytest.raises(ValueError):
            M.ModelConfig(vocab_size=10, dtype="float16")


class TestForward:
    def test_causality(self, tiny_params):
        a = M.forward(tiny_params, TINY, [1, 2, 3, 4, 5])
        b = M.forward(tiny_params, TINY, [1, 2, 3, 9, 8])
        assert np.array_equal(a[:3], b[:3])

    def test_zero_params_uniform_logits(self):
        zero = {k: np.zeros_like(v) for k, v in M.init_params(TINY, 0).items()}
        logits = M.forward(zero, TINY, [3, 1, 4])
        assert np.allclose(logits, logits[0, 0])

    def test_sequence_too_long(self, tiny_params):
        with pytest.raises(M.SequenceTooLong):
            M.forward(tiny_params, TINY, list(range(TINY.context_len + 1)))

    def test_batch_matches_single(self, tiny_params):
        seq = [5, 2, 8, 1]
        single = M.forward(tiny_params, TINY, seq)
        batched = M.forward(tiny_params, TINY, np.array([seq, seq]))
        assert np.allclose(single, batched[0])
        assert np.allclose(batched[0], batched[1])


class TestLossAndGrads:
    def test_grad_shapes(self, tiny_params, tiny_batch):
        loss, grads = M.loss_and_grads(tiny_params, TINY, tiny_batch, pad_id=63)
        assert loss > 0
        assert set(grads) == set(tiny_params)
        for key in grads:
            assert grads[key].shape == tiny_params[key].shape
            assert np.all(np.isfinite(grads[key]))

    def test_all_pad_batch(self, tiny_params):
        batch = np.full((2, 8), 63)
        with pytest.warns(UserWarning):
            loss, grads = M.loss_and_grads(tiny_params, TINY, batch, pad_id=63)
        assert loss == 0.0
        assert all(np.all(g == 0) for g in grads.values())

    def test_duplicated_batch_same_loss(self, tiny_params, tiny_batch):
        loss1, _ = M.loss_and_grads(tiny_params, TINY, tiny_batch, pad_id=63)
        doubled = np.concatenate([tiny_batch, tiny_batch], axis=0)
        loss2, _ = M.loss_and_grads(tiny_params, TINY, doubled, pad_id=63)
        assert loss1 == pytest.approx(loss2, rel=1e-12)

    def test_pad_targets_do_not_affect_loss(self, tiny_params):
        # changing tokens after the pad boundary cannot change the loss
        batch_a = np.array([[1, 2, 3, 63, 63, 63]])
        batch_b = np.array([[1, 2, 3, 63, 63, 63]])
        loss_a, _ = M.loss_and_grads(tiny_params, TINY, batch_a, pad_id=63)
        trimmed = M._trim_pad_suffix(batch_b, 63)
        loss_b, _ = M.loss_and_grads(tiny_params, TINY, trimmed, pad_id=63)
        assert loss_a == pytest.approx(loss_b, rel=1e-12)

    def test_gradients_match_finite_differences(self, tiny_params, tiny_batch):
        params = {k: v.copy() for k, v in tiny_params.items()}
        _, grads = M.loss_and_grads(params, TINY, tiny_batch, pad_id=63)
        rng = np.random.default_rng(42)
        eps = 1e-5
        for key in ["wte", "wpe", "h0.attn.wq", "h0.mlp.w1", "h1.ln1.g", "ln_f.b",
                    "h1.attn.wo", "h0.mlp.b2"]:
            flat = params[key].reshape(-1)
            for idx in rng.choice(flat.size, size=4, replace=False):
                orig = flat[idx]
                flat[idx] = orig + eps
                plus, _ = M.loss_and_grads(params, TINY, tiny_batch, pad_id=63)
                flat[idx] = orig - eps
                minus, _ = M.loss_and_grads(params, TINY, tiny_batch, pad_id=63)
                flat[idx] = orig
                fd = (plus - minus) / (2 * eps)
                analytic = grads[key].reshape(-1)[idx]
                assert abs(analytic - fd) <= 1e-9 + 1e-4 * abs(fd), (key, idx)


class TestPerplexity:
    def test_uniform_logits_give_vocab_size(self):
        zero = {k: np.zeros_like(v) for k, v in M.init_params(TINY, 0).items()}
        rows = np.random.default_rng(1).integers(0, 60, size=(4, 12))
        assert M.perplexity(zero, TINY, rows, pad_id=63) == pytest.approx(64.0, rel=1e-9)

    def test_fresh_model_close_to_vocab_size(self, tiny_params):
        rows = np.random.default_rng(2).integers(0, 60, size=(4, 12))
        ppl = M.perplexity(tiny_params, TINY, rows, pad_id=63)
        assert 1.0 <= ppl <= 64 * 1.2

    def test_perfect_model_ppl_one(self):
        # rig the embedding so position t predicts the constant token 7
        config = M.ModelConfig(vocab_size=16, n_layers=1, n_heads=1, embed_dim=8,
                               context_len=8, dtype="float64")
        params = M.init_params(config, seed=0)
        for key, value in params.items():
            params[key] = np.zeros_like(value)
        params["ln_f.b"] = np.ones(config.embed_dim)
        params["wte"][7] = 100.0
        rows = np.full((2, 6), 7)
        assert M.perplexity(params, config, rows, pad_id=15) == pytest.approx(1.0, abs=1e-9)


class TestAdamTraining:
    def _mini_setup(self):
        texts = ["mix the flour and water. bake it well."] * 4 + \
                ["stir the soup slowly. serve it hot."] * 4
        vocab = fc.train_bpe(texts, 32)

        class Rec:
            def __init__(self, i):
                self.title = f"dish {i}"
                self.ingredients = [type("L", (), {"name_phrase": "flour"})(),
                                    type("L", (), {"name_phrase": "water"})()]
                self.steps = ["Mix the flour and water.", "Bake it well."]

        records = [Rec(i) for i in range(6)]
        config = M.ModelConfig(vocab_size=vocab.vocab_size, n_layers=1, n_heads=2,
                               embed_dim=16, context_len=96, dtype="float64")
        return vocab, records, config

    def test_zero_steps_returns_init(self):
        vocab, records, config = self._mini_setup()
        tc = M.TrainConfig(steps=0, seed=5, max_len=96)
        params, trace = M.train(config, vocab, records[:4], records[4:], tc)
        assert len(trace) == 1
        expected = M.init_params(config, seed=5)
        assert all(np.array_equal(params[k], expected[k]) for k in params)

    def test_seed_determinism_and_checkpoint(self, tmp_path):
        vocab, records, config = self._mini_setup()
        tc = M.TrainConfig(steps=8, seed=5, eval_every=4, max_len=96, lr=1e-3)
        p1 = tmp_path / "a.npz"
        p2 = tmp_path / "b.npz"
        M.train(config, vocab, records[:4], records[4:], tc, checkpoint_path=p1)
        M.train(config, vocab, records[:4], records[4:], tc, checkpoint_path=p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_vocab_mismatch_on_load(self, tmp_path):
        vocab, records, config = self._mini_setup()
        tc = M.TrainConfig(steps=2, seed=5, max_len=96)
        path = tmp_path / "c.npz"
        M.train(config, vocab, records[:4], records[4:], tc, checkpoint_path=path)
        M.load_checkpoint(path, expected_vocab_hash=vocab.content_hash())  # fine
        with pytest.raises(M.VocabMismatch):
            M.load_checkpoint(path, expected_vocab_hash="0" * 64)

    def test_loss_decreases(self):
        vocab, records, config = self._mini_setup()
        tc = M.TrainConfig(steps=30, seed=5, eval_every=30, max_len=96,
                           lr=3e-3, warmup_steps=1, batch_size=4)
        _, trace = M.train(config, vocab, records[:4], records[4:], tc)
        assert trace[-1][1] < trace[0][1]


class TestSampling:
    def test_k1_greedy_and_seed_independent(self, tiny_params):
        outs = {tuple(M.sample_topk(tiny_params, TINY, [1, 2, 3],
                                    M.SamplingConfig(k=1, max_new_tokens=8, seed=s),
                                    stop_id=63).ids)
                for s in range(10)}
        assert len(outs) == 1

    def test_topk_membership(self, tiny_params):
        result = M.sample_topk(tiny_params, TINY, [4, 4, 2],
                               M.SamplingConfig(k=5, max_new_tokens=12, seed=3),
                               stop_id=63, instrument=True)
        assert result.topk_trace is not None
        for emitted, top in zip(result.ids, result.topk_trace):
            assert len(top) == 5
            assert emitted in top

    def test_budget_and_stop(self, tiny_params):
        result = M.sample_topk(tiny_params, TINY, [1], M.SamplingConfig(k=3, max_new_tokens=5, seed=0),
                               stop_id=-1)
        assert len(result.ids) == 5 and not result.stopped

    def test_sequence_too_long(self, tiny_params):
        with pytest.raises(M.SequenceTooLong):
            M.sample_topk(tiny_params, TINY, list(range(40)),
                          M.SamplingConfig(k=1, max_new_tokens=20, seed=0), stop_id=0)

    def test_default_k_is_3(self):
        assert M.SamplingConfig().k == 3

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            M.SamplingConfig(k=0)


@pytest.fixture(scope="module")
def setup():
    texts = ["the cat sat on the mat. the dog ran."] * 3
    vocab = fc.train_bpe(texts, 16)
    config = M.ModelConfig(vocab_size=vocab.vocab_size, n_layers=1, n_heads=2,
                           embed_dim=16, context_len=256, dtype="float64")
    params = M.init_params(config, seed=2)
    return params, config, vocab


class TestGenerateField:
    def test_output_clean_and_flagged(self, setup):
        params, config, vocab = setup
        context = {FieldKind.TITLE: "Cat Mat", FieldKind.INGREDIENTS: "cat\nmat"}
        result = M.generate_field(params, config, vocab, context, FieldKind.INSTRUCTIONS,
                                  M.SamplingConfig(k=4, max_new_tokens=24, seed=9))
        for surface in vocab.special_to_id:
            if surface != "$":  # a literal dollar sign may legitimately appear
                assert surface not in result.text
        assert result.truncated == (not result.stopped)

    def test_deterministic(self, setup):
        params, config, vocab = setup
        context = {FieldKind.TITLE: "Cat Mat", FieldKind.INGREDIENTS: "cat"}
        a = M.generate_field(params, config, vocab, context, FieldKind.INSTRUCTIONS,
                             M.SamplingConfig(k=4, max_new_tokens=16, seed=5))
        b = M.generate_field(params, config, vocab, context, FieldKind.INSTRUCTIONS,
                             M.SamplingConfig(k=4, max_new_tokens=16, seed=5))
        assert a.text == b.text and a.ids == b.ids
