import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from renewal_intrusion import (
    EventSequence,
    GenSpec,
    IntervalModel,
    MarkModel,
    ScorerConfig,
    auc,
    evaluate_dataset,
    gen_dataset,
    jaccard,
    roc_curve,
)
from renewal_intrusion.evalkit import entry_labels, score_dataset, score_entry
from renewal_intrusion.exceptions import EstimationError, EvaluationError, ParameterError

G88 = IntervalModel.gamma(8.0, 8.0)

labelled_scores = st.integers(2, 40).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n),
    st.lists(st.booleans(), min_size=n, max_size=n).filter(lambda y: 0 < sum(y) < len(y)),
))


class TestAuc:
    def test_examples(self):
        assert auc([0.9, 0.1], [True, False]) == 1.0
        assert auc([0.5] * 4, [1, 0, 1, 0]) == 0.5
        assert auc([0.8, 0.6, 0.4, 0.2], [1, 0, 1, 0]) == 0.75

    def test_single_class(self):
        with pytest.raises(EvaluationError):
            auc([0.1, 0.2], [1, 1])

    def test_length_mismatch(self):
        with pytest.raises(EvaluationError):
            auc([0.1, 0.2], [1])

    @given(labelled_scores)
    def test_invariant_under_increasing_maps(self, case):
        # integer-valued scores, so the transform cannot merge distinct values
        s, y = np.round(np.array(case[0]) * 4), np.array(case[1])
        assert auc(s, y) == pytest.approx(auc(np.exp(s) * 3 + 1, y), abs=1e-12)

    @given(labelled_scores)
    def test_label_flip_complements(self, case):
        s, y = np.array(case[0]), np.array(case[1])
        assert auc(s, y) + auc(s, ~y) == pytest.approx(1.0, abs=1e-12)

    @given(labelled_scores)
    def test_matches_pair_counting(self, case):
        s, y = np.array(case[0]), np.array(case[1])
        pos, neg = s[y], s[~y]
        diff = pos[:, None] - neg[None, :]
        expected = ((diff > 0).sum() + 0.5 * (diff == 0).sum()) / diff.size
        assert auc(s, y) == pytest.approx(expected, abs=1e-12)

    @given(labelled_scores)
    def test_agrees_with_sklearn(self, case):
        from sklearn.metrics import roc_auc_score
        s, y = np.array(case[0]), np.array(case[1])
        assert auc(s, y) == pytest.approx(roc_auc_score(y, s), abs=1e-12)


class TestRoc:
    @given(labelled_scores)
    def test_monotone_from_origin_to_corner(self, case):
        s, y = case
        points = roc_curve(s, y)
        thresholds, fpr, tpr = map(np.array, zip(*points))
        assert (fpr[0], tpr[0]) == (0.0, 0.0)
        assert (fpr[-1], tpr[-1]) == (1.0, 1.0)
        assert np.all(np.diff(thresholds) < 0)
        assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)

    @given(labelled_scores)
    def test_trapezoid_area_is_the_auc(self, case):
        s, y = case
        _, fpr, tpr = map(np.array, zip(*roc_curve(s, y)))
        area = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
        assert area == pytest.approx(auc(s, y), abs=1e-12)


class TestJaccard:
    @pytest.mark.parametrize("a,b,expected", [
        ({1, 2, 3}, {2, 3, 4}, 0.5), (set(), set(), 1.0), ({1}, set(), 0.0),
    ])
    def test_examples(self, a, b, expected):
        assert jaccard(a, b) == expected

    @given(st.sets(st.integers(0, 9)), st.sets(st.integers(0, 9)))
    def test_symmetric_and_one_only_on_equality(self, a, b):
        assert jaccard(a, b) == jaccard(b, a)
        assert (jaccard(a, b) == 1.0) == (a == b)
        assert 0.0 <= jaccard(a, b) <= 1.0


class TestScorerConfig:
    def test_known_parameters_are_required(self):
        with pytest.raises(ParameterError):
            ScorerConfig(0.1)
        with pytest.raises(ParameterError):
            ScorerConfig(0.1, mode="combined", interval_model=G88)

    def test_mode_is_checked(self):
        with pytest.raises(ParameterError):
            ScorerConfig(0.1, mode="both", em=True)

    def test_prior_is_checked(self):
        with pytest.raises(ParameterError):
            ScorerConfig(1.0, em=True)

    def test_marks_mode_scores_without_an_interval_model(self):
        seq = EventSequence(0, 4, [1.0, 2.0, 3.0], marks=[1.0, 5.0, 1.0])
        r = score_entry(seq, ScorerConfig(0.1, mode="marks", mark_model=MarkModel(0, 0.4)))
        assert r.event_marginals.argmax() == 1


def test_marks_mode_ignores_interval_lengths():
    marks = MarkModel(0.0, 0.4)
    cfg = ScorerConfig(0.1, mode="marks", interval_model=G88, mark_model=marks)
    a = EventSequence(0, 10, [1.0, 2.0, 3.0, 9.0], marks=[1.0, 2.5, 0.8, 1.1])
    b = EventSequence(0, 10, [4.0, 4.1, 4.2, 4.3], marks=[1.0, 2.5, 0.8, 1.1])
    ra, rb = score_entry(a, cfg), score_entry(b, cfg)
    assert ra.intrusion_probability == pytest.approx(rb.intrusion_probability, abs=1e-12)
    np.testing.assert_allclose(ra.event_marginals, rb.event_marginals, atol=1e-12)


@pytest.fixture(scope="module")
def shape8():
    return gen_dataset(GenSpec(G88, 0.3, seed=21), 200)


def test_report_fields(shape8):
    report = evaluate_dataset(shape8, ScorerConfig(0.3, interval_model=G88))
    assert report.n_entries == 200
    for name in ("entry_auc", "event_auc", "mean_jaccard", "mean_jaccard_positive",
                 "mean_posterior_positive", "mean_posterior_negative"):
        assert 0.0 <= getattr(report, name) <= 1.0
    assert report.entry_auc >= 0.8
    d = report.to_dict(with_roc=True)
    assert d["mode"] == "intervals" and d["p_epsilon"] == 0.3
    assert d["roc_entry"][0] == (float("inf"), 0.0, 0.0)


def test_prior_changes_the_ranking(shape8):
    low = evaluate_dataset(shape8, ScorerConfig(0.005, interval_model=G88))
    high = evaluate_dataset(shape8, ScorerConfig(0.5, interval_model=G88))
    assert low.entry_auc != high.entry_auc


def test_perfect_ranking_scores_one(shape8):
    results = score_dataset(shape8, ScorerConfig(0.3, interval_model=G88))
    labels = entry_labels(shape8)
    fixed = []
    for r, positive in zip(results, labels):
        object.__setattr__(r, "intrusion_probability", 0.9 if positive else 0.1)
        fixed.append(r)
    assert evaluate_dataset(shape8, None, results=fixed).entry_auc == 1.0


def test_jaccard_means(shape8):
    report = evaluate_dataset(shape8, ScorerConfig(0.3, interval_model=G88))
    results = score_dataset(shape8, ScorerConfig(0.3, interval_model=G88))
    per_entry = [jaccard(r.map.intrusion_indices, s.intrusion_indices) for r, s in zip(results, shape8)]
    positive = [j for j, s in zip(per_entry, shape8) if s.is_positive]
    assert report.mean_jaccard == pytest.approx(np.mean(per_entry))
    assert report.mean_jaccard_positive == pytest.approx(np.mean(positive))


def test_unlabeled_data_cannot_be_evaluated():
    data = [EventSequence(0, 3, [1.0, 2.0])] * 2
    with pytest.raises(EvaluationError):
        evaluate_dataset(data, ScorerConfig(0.1, interval_model=G88))


def test_single_class_data_cannot_be_evaluated():
    data = [EventSequence(0, 3, [1.0, 2.0], labels=[0, 0])] * 2
    with pytest.raises(EvaluationError):
        evaluate_dataset(data, ScorerConfig(0.1, interval_model=G88))


def test_errors_name_the_entry():
    data = [EventSequence(0, 3, [1.0, 2.0, 2.5], entry_id="ok"),
            EventSequence(0, 3, [1.0, 2.0], entry_id="short")]
    with pytest.raises(EstimationError, match="entry 1 \\('short'\\)|entry 1 \\(short\\)"):
        score_dataset(data, ScorerConfig(0.1, em=True))
