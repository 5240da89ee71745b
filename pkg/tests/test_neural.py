import numpy as np
import pytest

from telldraw.cliparts import DrawerAction, Flip, Piece, Scene, Size
from telldraw.features import canvas_vector
from telldraw.neural.model import (
    ActionLogits,
    DrawerConfig,
    PARAM_BLOCKS,
    SLOT,
    TrainingExample,
    batch_loss,
    drawer_forward,
    drawer_loss_and_grad,
    greedy_decode,
    init_params,
)
from telldraw.neural.train import (
    TrainConfig,
    build_vocabulary,
    examples_from_transcripts,
    load_checkpoint,
    save_checkpoint,
    train_drawer,
)
from telldraw.neural.vocab import Vocabulary

from .conftest import random_piece, random_scene


@pytest.fixture(scope="module")
def vocab():
    return Vocabulary(["<pad>", "<unk>", "sun", "left", "top", "tree", "big",
                       "girl", "boy", "middle", "small"])


def tiny_config():
    return DrawerConfig(embedding_size=5, hidden_size=7)


def make_examples(vocab, rng, n=3):
    examples = []
    for _ in range(n):
        canvas = random_scene(rng, max_pieces=3)
        absent = sorted(set(range(58)) - canvas.ids())
        added = tuple(
            random_piece(rng, t) for t in rng.sample(absent, rng.randint(0, 2))
        )
        tokens = [rng.choice(vocab.tokens[2:]) for _ in range(rng.randint(1, 6))]
        examples.append(TrainingExample.build(vocab, tokens, canvas, added))
    return examples


class TestVocabulary:
    def test_build_respects_min_freq(self):
        vocab = Vocabulary.build([["a", "b"], ["a", "c"], ["a", "b"]], min_freq=2)
        assert "a" in vocab.index and "b" in vocab.index
        assert "c" not in vocab.index

    def test_unknown_maps_to_unk(self, vocab):
        ids = vocab.encode(["sun", "nonsense"])
        assert ids.tolist() == [vocab.index["sun"], vocab.unk_id]

    def test_empty_message_becomes_unk(self, vocab):
        assert vocab.encode([]).tolist() == [vocab.unk_id]

    def test_round_trip(self, vocab):
        assert Vocabulary.from_json(vocab.to_json()).tokens == vocab.tokens


class TestEncoder:
    def test_deterministic(self, vocab, rng):
        from telldraw.neural.model import encode_messages

        params = init_params(len(vocab), tiny_config(), seed=3)
        ids = [vocab.encode(["sun", "top", "left"])]
        a, _ = encode_messages(ids, params)
        b, _ = encode_messages(ids, params)
        assert np.array_equal(a, b)

    def test_output_width_is_twice_hidden(self, vocab):
        from telldraw.neural.model import encode_messages

        params = init_params(len(vocab), tiny_config(), seed=3)
        v, _ = encode_messages([vocab.encode(["sun"])], params)
        assert v.shape == (1, 14)

    def test_token_order_matters(self, vocab):
        from telldraw.neural.model import encode_messages

        params = init_params(len(vocab), tiny_config(), seed=3)
        fwd, _ = encode_messages([vocab.encode(["sun", "top", "left"])], params)
        rev, _ = encode_messages([vocab.encode(["left", "top", "sun"])], params)
        assert not np.allclose(fwd, rev)

    def test_batching_matches_single(self, vocab, rng):
        # padded batch encoding must equal one-at-a-time encoding
        from telldraw.neural.model import encode_messages

        params = init_params(len(vocab), tiny_config(), seed=5)
        seqs = [
            vocab.encode(["sun"]),
            vocab.encode(["big", "tree", "middle", "left", "top"]),
            vocab.encode(["girl", "small"]),
        ]
        batched, _ = encode_messages(seqs, params)
        for i, seq in enumerate(seqs):
            single, _ = encode_messages([seq], params)
            np.testing.assert_allclose(batched[i], single[0], atol=1e-12)


class TestForward:
    def test_zero_weight_params_give_bias(self, vocab):
        params = init_params(len(vocab), tiny_config(), seed=0)
        for name, arr in params.blocks().items():
            arr[:] = 0.0
        params.b_out[:] = np.arange(58 * SLOT) * 0.001
        vec = canvas_vector(Scene())[None, :]
        logits, _ = drawer_forward(vec, [vocab.encode(["sun"])], params)
        np.testing.assert_allclose(logits[0], params.b_out)

    def test_presence_probability_is_sigmoid(self, vocab):
        params = init_params(len(vocab), tiny_config(), seed=0)
        vec = canvas_vector(Scene())[None, :]
        logits, _ = drawer_forward(vec, [vocab.encode(["sun"])], params)
        al = ActionLogits(vector=logits[0])
        q = al.slot(4)[0]
        assert al.presence_probability(4) == pytest.approx(1 / (1 + np.exp(-q)))

    def test_group_probabilities_normalize(self, vocab):
        params = init_params(len(vocab), tiny_config(), seed=1)
        vec = canvas_vector(Scene())[None, :]
        logits, _ = drawer_forward(vec, [vocab.encode(["tree"])], params)
        al = ActionLogits(vector=logits[0])
        assert al.group_probabilities(3, 3, 6).sum() == pytest.approx(1.0)

    def test_wrong_canvas_width_rejected(self, vocab):
        params = init_params(len(vocab), tiny_config(), seed=0)
        with pytest.raises(ValueError):
            drawer_forward(np.zeros((1, 100)), [vocab.encode(["sun"])], params)


class TestGreedyDecode:
    def make_logits(self, raised=(), canvas=Scene(), xy=(0.3, 0.4)):
        vec = np.zeros(58 * SLOT)
        mat = vec.reshape(58, SLOT)
        mat[:, 0] = -4.0  # presence probability ~0.018 everywhere
        for t in raised:
            mat[t, 0] = 4.0
            mat[t, 18] = xy[0]
            mat[t, 19] = xy[1]
        return ActionLogits(vector=vec)

    def test_all_below_half_empty_action(self):
        action = greedy_decode(self.make_logits(), Scene())
        assert action.is_empty

    def test_one_raised_type_added(self):
        action = greedy_decode(self.make_logits(raised=[7]), Scene())
        assert [p.type_id for p in action.adds] == [7]
        assert (action.adds[0].x, action.adds[0].y) == (0.3, 0.4)

    def test_exactly_half_not_added(self):
        logits = self.make_logits()
        logits.vector.reshape(58, SLOT)[9, 0] = 0.0  # sigmoid(0) == 0.5
        action = greedy_decode(logits, Scene())
        assert action.is_empty

    def test_present_type_never_readded(self, rng):
        piece = random_piece(rng, 7)
        action = greedy_decode(self.make_logits(raised=[7]), Scene([piece]))
        assert action.is_empty

    def test_human_gets_pose_and_expression(self):
        action = greedy_decode(self.make_logits(raised=[0]), Scene())
        assert action.adds[0].pose is not None
        assert action.adds[0].expression is not None

    def test_decoded_action_always_applies(self, rng, vocab):
        from telldraw.cliparts import apply_action

        params = init_params(len(vocab), tiny_config(), seed=2)
        for _ in range(20):
            canvas = random_scene(rng, max_pieces=4)
            tokens = [rng.choice(vocab.tokens[2:]) for _ in range(rng.randint(1, 5))]
            logits, _ = drawer_forward(
                canvas_vector(canvas)[None, :], [vocab.encode(tokens)], params
            )
            action = greedy_decode(ActionLogits(vector=logits[0]), canvas)
            apply_action(canvas, action)  # must never raise


class TestLoss:
    def test_perfect_logits_approach_zero(self, vocab, rng):
        piece = Piece(type_id=5, flip=Flip.FACE_LEFT, size=Size.NORMAL, x=0.3, y=0.6)
        ex = TrainingExample.build(vocab, ["sun"], Scene(), (piece,))
        vec = np.zeros((1, 58 * SLOT))
        mat = vec.reshape(1, 58, SLOT)
        mat[0, :, 0] = -40.0
        mat[0, 5, 0] = 40.0
        mat[0, 5, 1] = 40.0   # flip left
        mat[0, 5, 4] = 40.0   # size normal
        mat[0, 5, 18] = 0.3
        mat[0, 5, 19] = 0.6
        loss, _ = drawer_loss_and_grad(vec, [ex], DrawerConfig())
        assert loss < 1e-9

    def test_position_error_is_weighted_squared_distance(self, vocab):
        piece = Piece(type_id=5, flip=Flip.FACE_LEFT, size=Size.NORMAL, x=0.3, y=0.6)
        ex = TrainingExample.build(vocab, ["sun"], Scene(), (piece,))
        config = DrawerConfig(position_weight=2.5)
        vec = np.zeros((1, 58 * SLOT))
        mat = vec.reshape(1, 58, SLOT)
        mat[0, :, 0] = -40.0
        mat[0, 5, 0] = 40.0
        mat[0, 5, 1] = 40.0
        mat[0, 5, 4] = 40.0
        mat[0, 5, 18] = 0.3 + 0.2   # x off by delta
        mat[0, 5, 19] = 0.6
        loss, _ = drawer_loss_and_grad(vec, [ex], config)
        assert loss == pytest.approx(2.5 * 0.2**2, abs=1e-9)

    def test_hand_computed_small_example(self, vocab):
        # one added piece, all logits zero: presence BCE is 58*log(2); the
        # flip and size groups each contribute log(2) and log(3); position
        # error is x^2 + y^2
        piece = Piece(type_id=2, flip=Flip.FACE_RIGHT, size=Size.LARGE, x=0.5, y=0.25)
        ex = TrainingExample.build(vocab, ["sun"], Scene(), (piece,))
        loss, _ = drawer_loss_and_grad(np.zeros((1, 58 * SLOT)), [ex], DrawerConfig())
        expect = 58 * np.log(2) + np.log(2) + np.log(3) + 0.5**2 + 0.25**2
        assert loss == pytest.approx(expect, abs=1e-9)

    def test_absent_slots_only_contribute_presence(self, vocab, rng):
        piece = Piece(type_id=5, flip=Flip.FACE_LEFT, size=Size.NORMAL, x=0.3, y=0.6)
        ex = TrainingExample.build(vocab, ["sun"], Scene(), (piece,))
        base = np.zeros((1, 58 * SLOT))
        loss_a, _ = drawer_loss_and_grad(base.copy(), [ex], DrawerConfig())
        perturbed = base.copy()
        mat = perturbed.reshape(1, 58, SLOT)
        for t in range(58):
            if t != 5:
                mat[0, t, 1:] = rng.uniform(-3, 3)  # everything but presence
        loss_b, _ = drawer_loss_and_grad(perturbed, [ex], DrawerConfig())
        assert loss_a == pytest.approx(loss_b, abs=1e-12)


def relative_error(a, b):
    denom = max(1e-8, abs(a) + abs(b))
    return abs(a - b) / denom


class TestGradientCheck:
    """Analytic gradients vs central finite differences, every block."""

    def test_all_parameter_blocks(self, vocab, rng):
        config = tiny_config()
        params = init_params(len(vocab), config, seed=11)
        examples = make_examples(vocab, rng, n=3)
        loss_config = DrawerConfig(
            embedding_size=config.embedding_size,
            hidden_size=config.hidden_size,
            presence_weight=1.0,
            attribute_weight=1.0,
            position_weight=1.0,
        )
        loss0, grads = batch_loss(examples, params, loss_config)
        eps = 1e-5
        # central differences carry cancellation noise ~ macheps * |loss| / eps;
        # gradients near that floor cannot meet a relative bound numerically
        noise_floor = 20 * np.finfo(float).eps * abs(loss0) / eps
        check_rng = np.random.default_rng(0)
        for name in PARAM_BLOCKS:
            arr = params.blocks()[name]
            grad = grads.blocks()[name]
            flat = arr.reshape(-1)
            n_checks = min(12, flat.size)
            picks = check_rng.choice(flat.size, size=n_checks, replace=False)
            for k in picks:
                original = flat[k]
                flat[k] = original + eps
                up, _ = batch_loss(examples, params, loss_config)
                flat[k] = original - eps
                down, _ = batch_loss(examples, params, loss_config)
                flat[k] = original
                numeric = (up - down) / (2 * eps)
                analytic = grad.reshape(-1)[k]
                if abs(analytic - numeric) <= noise_floor:
                    continue
                assert relative_error(analytic, numeric) < 1e-4, (
                    f"{name}[{k}]: analytic {analytic} vs numeric {numeric}"
                )


class TestTraining:
    def small_corpus_transcripts(self, n=30, seed=5):
        import tempfile

        from telldraw.importer import import_official
        from telldraw.simulate import write_release

        with tempfile.TemporaryDirectory() as d:
            write_release(d, n_dialogs=n, seed=seed, anomaly_rate=0.0)
            return import_official(d).transcripts

    def test_wrong_partition_refused(self):
        with pytest.raises(ValueError, match="drawer_train"):
            train_drawer([], "teller_train")

    def test_loss_decreases_over_first_epochs(self):
        transcripts = self.small_corpus_transcripts()
        config = TrainConfig(
            epochs=3, batch_size=16, seed=1,
            model=DrawerConfig(embedding_size=16, hidden_size=24),
        )
        _, _, _, logs = train_drawer(transcripts, "drawer_train", config)
        losses = [log.mean_loss for log in logs]
        assert losses[1] < losses[0]
        assert losses[2] < losses[1]

    def test_fixed_seed_bit_identical(self):
        transcripts = self.small_corpus_transcripts(n=8)
        config = TrainConfig(
            epochs=1, batch_size=8, seed=7,
            model=DrawerConfig(embedding_size=8, hidden_size=10),
        )
        params_a, _, _, _ = train_drawer(transcripts, "drawer_train", config)
        params_b, _, _, _ = train_drawer(transcripts, "drawer_train", config)
        for name in PARAM_BLOCKS:
            assert np.array_equal(params_a.blocks()[name], params_b.blocks()[name])

    def test_checkpoint_round_trip(self, tmp_path):
        transcripts = self.small_corpus_transcripts(n=8)
        config = TrainConfig(
            epochs=1, batch_size=8, seed=7,
            model=DrawerConfig(embedding_size=8, hidden_size=10),
        )
        params, vocab, manifest, _ = train_drawer(
            transcripts, "drawer_train", config, data_fingerprint="abc123"
        )
        path = save_checkpoint(tmp_path / "ckpt.npz", params, vocab, config, manifest)
        params2, vocab2, config2, manifest2 = load_checkpoint(path)
        assert manifest2 == manifest
        assert vocab2.tokens == vocab.tokens
        assert config2 == config
        for name in PARAM_BLOCKS:
            assert np.array_equal(params.blocks()[name], params2.blocks()[name])

    def test_examples_skip_removal_rounds_as_targets(self):
        transcripts = self.small_corpus_transcripts(n=20, seed=12)
        vocab = build_vocabulary(transcripts)
        examples = examples_from_transcripts(transcripts, vocab)
        removal_rounds = [
            (t, r) for t in transcripts for r in t.rounds if r.removed
        ]
        assert removal_rounds, "generator should produce some fix-up rounds"
        n_rounds = sum(len(t.rounds) for t in transcripts)
        assert len(examples) == n_rounds
        with_adds = [ex for ex in examples if ex.added]
        assert 0 < len(with_adds) < n_rounds
