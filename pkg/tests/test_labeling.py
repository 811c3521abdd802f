"""Bigram construction, classifier training, and the gradient oracle."""

import json

import numpy as np
import pytest

from domainscale.corpus import Corpus, DomainScheme
from domainscale.embeddings import EmbeddingStore
from domainscale.errors import TrainingError, ValidationError
from domainscale.labeling import (
    BigramInstance,
    ClassifierModel,
    TrainConfig,
    accuracy,
    feature_matrix,
    logreg_loss_and_grad,
    make_bigrams,
    per_label_accuracy,
    split_validation,
    train_logreg,
    train_majority,
    write_predictions,
)
from domainscale.synthetic import make_blobs

from conftest import sentence


@pytest.fixture
def two_manifesto_corpus():
    rows = [
        sentence("a-0", party="a", position=0, code="401"),
        sentence("a-1", party="a", position=1, code="504"),
        sentence("a-2", party="a", position=2),
        sentence("b-0", party="b", position=0, code="000"),
        sentence("b-1", party="b", position=1, code="404"),
    ]
    return Corpus(rows)


@pytest.fixture
def scheme():
    return DomainScheme({"economy": {"401", "404"}, "welfare": {"504"}}, {"000"})


class TestMakeBigrams:
    def test_keys_and_boundaries(self, two_manifesto_corpus, scheme):
        instances = make_bigrams(two_manifesto_corpus, scheme)
        assert [i.key for i in instances] == [
            "<BOS>|a-0",
            "a-0|a-1",
            "a-1|a-2",
            "<BOS>|b-0",
            "b-0|b-1",
        ]

    def test_one_instance_per_sentence(self, two_manifesto_corpus, scheme):
        instances = make_bigrams(two_manifesto_corpus, scheme)
        assert len(instances) == len(two_manifesto_corpus)
        assert len({i.sentence_id for i in instances}) == len(instances)

    def test_labels_follow_scheme(self, two_manifesto_corpus, scheme):
        labels = {i.sentence_id: i.label for i in make_bigrams(two_manifesto_corpus, scheme)}
        assert labels == {
            "a-0": "economy",
            "a-1": "welfare",
            "a-2": None,
            "b-0": "other",
            "b-1": "economy",
        }

    def test_no_scheme_means_no_labels(self, two_manifesto_corpus):
        assert all(i.label is None for i in make_bigrams(two_manifesto_corpus))

    def test_separate_elections_are_separate_manifestos(self):
        rows = [
            sentence("x-0", party="x", date="2017-09", position=0, code="401"),
            sentence("x-1", party="x", date="2021-09", position=0, code="401"),
        ]
        instances = make_bigrams(Corpus(rows))
        assert [i.key for i in instances] == ["<BOS>|x-0", "<BOS>|x-1"]


class TestSplit:
    def chunk(self, party, n):
        return [
            BigramInstance(
                key=f"k-{party}-{i}",
                sentence_id=f"{party}-{i}",
                party=party,
                election_date="2021-09",
                position=i,
                label="economy",
            )
            for i in range(n)
        ]

    def test_tail_held_out_per_manifesto(self):
        instances = self.chunk("a", 10) + self.chunk("b", 5)
        train, val = split_validation(instances, holdout=0.1)
        assert [i.sentence_id for i in val] == ["a-9", "b-4"]
        assert len(train) == 13

    def test_boundary_is_floor_of_train_fraction(self):
        train, val = split_validation(self.chunk("a", 7), holdout=0.2)
        # floor(7 * 0.8) = 5 train, 2 validation
        assert len(train) == 5
        assert [i.position for i in val] == [5, 6]

    def test_bad_fraction_rejected(self):
        with pytest.raises(ValidationError):
            split_validation([], holdout=1.0)


class TestGradientOracle:
    def test_matches_central_differences(self, rng):
        n, dim, k = 12, 5, 3
        x = rng.normal(size=(n, dim))
        y = np.zeros((n, k))
        y[np.arange(n), rng.integers(0, k, size=n)] = 1.0
        w = rng.normal(size=(k, dim)) * 0.5
        b = rng.normal(size=k) * 0.5
        l2 = 1e-3
        _, grad_w, grad_b = logreg_loss_and_grad(w, b, x, y, l2)

        eps = 1e-6

        def loss_at(wm, bm):
            return logreg_loss_and_grad(wm, bm, x, y, l2)[0]

        for idx in np.ndindex(w.shape):
            wp, wm = w.copy(), w.copy()
            wp[idx] += eps
            wm[idx] -= eps
            fd = (loss_at(wp, b) - loss_at(wm, b)) / (2 * eps)
            denom = max(abs(fd), abs(grad_w[idx]), 1e-8)
            assert abs(fd - grad_w[idx]) / denom <= 1e-4
        for i in range(k):
            bp, bm = b.copy(), b.copy()
            bp[i] += eps
            bm[i] -= eps
            fd = (loss_at(w, bp) - loss_at(w, bm)) / (2 * eps)
            denom = max(abs(fd), abs(grad_b[i]), 1e-8)
            assert abs(fd - grad_b[i]) / denom <= 1e-4

    def test_loss_includes_l2_on_weights_only(self):
        x = np.zeros((2, 3))
        y = np.array([[1.0, 0.0], [0.0, 1.0]])
        w = np.ones((2, 3))
        b = np.full(2, 100.0)  # bias must not appear in the penalty
        loss_w, _, _ = logreg_loss_and_grad(w, b, x, y, 1.0)
        loss_0, _, _ = logreg_loss_and_grad(w, b, x, y, 0.0)
        assert loss_w - loss_0 == pytest.approx(0.5 * 6.0)


class TestTraining:
    def test_blobs_reach_high_accuracy(self):
        x_train, y_train, x_test, y_test = make_blobs()
        model = train_logreg(x_train, y_train)
        assert accuracy(model.predict(x_test), y_test) >= 0.95

    def test_loss_never_increases_across_epochs(self, rng):
        x = rng.normal(size=(30, 4))
        labels = ["a" if v > 0 else "b" for v in x[:, 0]]
        losses = []
        for epochs in (1, 5, 25, 125):
            model = train_logreg(x, labels, TrainConfig(epochs=epochs))
            losses.append(model.metadata["final_loss"])
        assert losses == sorted(losses, reverse=True)

    def test_oversized_learning_rate_halves_with_warning(self, rng):
        x = rng.normal(size=(20, 3))
        labels = ["a" if v > 0 else "b" for v in x[:, 0]]
        with pytest.warns(RuntimeWarning, match="halving"):
            train_logreg(x, labels, TrainConfig(epochs=50, learning_rate=1e6))

    def test_training_is_deterministic(self, rng):
        x = rng.normal(size=(40, 6))
        labels = ["a" if v > 0 else "b" for v in x[:, 0]]
        m1 = train_logreg(x, labels)
        m2 = train_logreg(x, labels)
        assert m1.weights.tobytes() == m2.weights.tobytes()
        assert m1.bias.tobytes() == m2.bias.tobytes()

    def test_empty_training_set_rejected(self):
        with pytest.raises(TrainingError):
            train_logreg(np.empty((0, 3)), [])

    def test_unknown_label_rejected(self):
        with pytest.raises(ValidationError):
            train_logreg(np.zeros((1, 2)), ["zz"], classes=("a", "b"))


class TestMajority:
    def test_predicts_modal_class_everywhere(self, rng):
        labels = ["b"] * 5 + ["a"] * 3
        model = train_majority(labels, dim=4)
        x = rng.normal(size=(10, 4))
        assert model.predict(x) == ["b"] * 10

    def test_accuracy_equals_modal_frequency_exactly(self):
        gold = ["a"] * 3 + ["b"] * 7
        model = train_majority(gold, dim=2)
        predicted = model.predict(np.zeros((10, 2)))
        assert accuracy(predicted, gold) == 7 / 10

    def test_tie_breaks_alphabetically(self):
        model = train_majority(["b", "a"], dim=2)
        assert model.metadata["majority_class"] == "a"


class TestModelRoundTrip:
    def test_save_load_bit_exact(self, tmp_path, rng):
        x = rng.normal(size=(30, 4))
        labels = ["a" if v > 0 else "b" for v in x[:, 0]]
        model = train_logreg(x, labels, TrainConfig(epochs=20))
        path = tmp_path / "model.json"
        model.save(path)
        again = ClassifierModel.load(path)
        assert again.classes == model.classes
        assert again.weights.tobytes() == model.weights.tobytes()
        assert again.bias.tobytes() == model.bias.tobytes()

    def test_file_shape_is_flat(self, tmp_path):
        model = train_majority(["a", "b", "b"], dim=3)
        path = tmp_path / "model.json"
        model.save(path)
        obj = json.loads(path.read_text(encoding="utf-8"))
        assert obj["n_classes"] == 2
        assert obj["dim"] == 3
        assert len(obj["weights"]) == 6  # row-major flattened
        assert len(obj["bias"]) == 2

    def test_prediction_tie_takes_first_class(self):
        model = ClassifierModel(
            classes=("aa", "bb"), weights=np.zeros((2, 2)), bias=np.zeros(2)
        )
        assert model.predict(np.ones((1, 2))) == ["aa"]


class TestScores:
    def test_per_label_accuracy(self):
        gold = ["a", "a", "b", "b", "b"]
        predicted = ["a", "b", "b", "b", "a"]
        assert per_label_accuracy(predicted, gold) == {"a": 0.5, "b": 2 / 3}

    def test_accuracy_empty_rejected(self):
        with pytest.raises(ValidationError):
            accuracy([], [])


class TestFeatureMatrix:
    def test_bigram_and_sentence_sources(self, two_manifesto_corpus, scheme):
        instances = make_bigrams(two_manifesto_corpus, scheme)[:2]
        keyed = {i.key: [1.0, float(n)] for n, i in enumerate(instances)}
        keyed.update({i.sentence_id: [2.0, float(n)] for n, i in enumerate(instances)})
        store = EmbeddingStore(tuple(keyed), np.array([keyed[k] for k in keyed]))
        big = feature_matrix(instances, store, "bigram")
        sent = feature_matrix(instances, store, "sentence")
        assert big[0][0] == 1.0
        assert sent[0][0] == 2.0

    def test_unknown_source_rejected(self, two_manifesto_corpus, scheme):
        with pytest.raises(ValidationError):
            feature_matrix([], EmbeddingStore((), np.empty((0, 1))), "chars")


class TestPredictionsFile:
    def test_jsonl_layout(self, tmp_path, two_manifesto_corpus, scheme):
        instances = make_bigrams(two_manifesto_corpus, scheme)
        labels = ["economy"] * len(instances)
        path = tmp_path / "pred.jsonl"
        write_predictions(path, instances, labels)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == len(instances)
        first = json.loads(lines[0])
        assert first == {"id": "a-0", "predicted_domain": "economy"}
