import itertools
import math

import numpy as np
import pandas as pd
import pytest
from scipy import stats as sps

from app.errors import (
    ConstantSample,
    DataError,
    EmptySample,
    InsufficientGroups,
    MalformedRow,
    SampleTooSmall,
    ZeroWithinVariance,
)
from app.stats import (
    Branch,
    PairwiseMatrix,
    Sample,
    anova_oneway,
    branch_pipeline,
    compact_letter_display,
    dunn_bonferroni,
    dunn_raw,
    kruskal_wallis,
    letters_consistent,
    mann_whitney_u,
    read_stat_reports,
    run_long_format,
    shapiro_wilk,
    share_letter,
    split_letters,
    studentized_range_sf,
    tukey_hsd,
    write_letters_csv,
    write_stat_reports,
)

ALPHA = 0.05


def samples_of(*groups, prefix="g"):
    return [Sample(f"{prefix}{i}", tuple(float(v) for v in g)) for i, g in enumerate(groups)]


def evenly_spaced(mean, spread=1.0, n=7):
    return [mean + spread * (i - (n - 1) / 2) / (n - 1) * 3 for i in range(n)]


# --- Types ---


def test_sample_requires_values():
    with pytest.raises(EmptySample):
        Sample("x", ())
    with pytest.raises(DataError):
        Sample("x", (1.0, math.inf))


def test_sample_sd_single_value_is_zero():
    assert Sample("x", (0.88,)).sd == 0.0


def test_pairwise_matrix_validates():
    with pytest.raises(DataError):
        PairwiseMatrix("m", ("a", "b"), np.array([[1.0, 0.2], [0.3, 1.0]]), (0.0, 1.0))
    with pytest.raises(DataError):
        PairwiseMatrix("m", ("a", "b"), np.array([[0.5, 0.2], [0.2, 1.0]]), (0.0, 1.0))


# --- Shapiro-Wilk ---


def test_shapiro_preconditions():
    with pytest.raises(SampleTooSmall):
        shapiro_wilk([1.0, 2.0])
    with pytest.raises(ConstantSample):
        shapiro_wilk([3.0] * 10)


@pytest.mark.parametrize("n", [3, 4, 5, 7, 11, 12, 30, 200])
def test_shapiro_matches_reference(n):
    rng = np.random.default_rng(n)
    for _ in range(50 if n < 200 else 5):
        x = rng.normal(size=n) if n % 2 else rng.exponential(size=n)
        ours = shapiro_wilk(x)
        ref = sps.shapiro(x)
        assert ours.statistic == pytest.approx(ref.statistic, abs=1e-6)
        assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-3)
        assert 0 < ours.statistic <= 1


def test_shapiro_null_calibration():
    rng = np.random.default_rng(11)
    rejections = sum(shapiro_wilk(rng.normal(size=50)).p_value < ALPHA for _ in range(1000))
    assert 0.03 <= rejections / 1000 <= 0.07


# --- Mann-Whitney U ---


def test_mwu_identical_samples():
    res = mann_whitney_u([1, 2, 3, 4], [1, 2, 3, 4])
    assert res.statistic == 8
    assert res.p_value == pytest.approx(1.0)


def test_mwu_fully_separated_exact():
    res = mann_whitney_u([1, 2, 3], [10, 11, 12])
    assert res.statistic == 0
    assert res.p_value == pytest.approx(0.1)


def test_mwu_rejects_empty():
    with pytest.raises(EmptySample):
        mann_whitney_u([], [1.0])


def test_mwu_matches_reference():
    rng = np.random.default_rng(3)
    for trial in range(50):
        n1, n2 = rng.integers(3, 20, size=2)
        a = rng.normal(0, 1, n1)
        b = rng.normal(0.5, 1, n2)
        ours = mann_whitney_u(a, b)
        method = "exact" if min(n1, n2) < 8 else "asymptotic"
        ref = sps.mannwhitneyu(a, b, alternative="two-sided", method=method, use_continuity=True)
        assert ours.statistic == pytest.approx(ref.statistic, abs=1e-9), trial
        assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-3), trial


def test_mwu_exact_with_ties_enumerates_assignments():
    a, b = [1, 2, 2, 3], [2, 3, 3, 4, 5]
    pooled = np.array(a + b, dtype=float)
    ranks = sps.rankdata(pooled)
    observed = ranks[: len(a)].sum()
    center = len(a) * (len(pooled) + 1) / 2
    sums = [ranks[list(c)].sum() for c in itertools.combinations(range(len(pooled)), len(a))]
    low = np.mean([s <= observed + 1e-9 for s in sums])
    high = np.mean([s >= observed - 1e-9 for s in sums])
    expected = min(1.0, 2 * min(low, high))
    assert observed < center
    assert mann_whitney_u(a, b).p_value == pytest.approx(expected)


def test_mwu_null_calibration():
    rng = np.random.default_rng(12)
    rejections = sum(mann_whitney_u(rng.normal(size=10), rng.normal(size=10)).p_value < ALPHA for _ in range(1000))
    assert 0.03 <= rejections / 1000 <= 0.07


# --- ANOVA ---


def test_anova_identical_groups():
    res = anova_oneway(samples_of([1, 2, 3], [1, 2, 3], [1, 2, 3]))
    assert res.statistic == pytest.approx(0.0)
    assert res.p_value == pytest.approx(1.0)


def test_anova_two_groups_is_squared_t(rng):
    a, b = rng.normal(0, 1, 8), rng.normal(1, 1, 11)
    t = sps.ttest_ind(a, b).statistic
    assert anova_oneway(samples_of(a, b)).statistic == pytest.approx(t * t, abs=1e-9)


def test_anova_matches_reference():
    rng = np.random.default_rng(4)
    for _ in range(50):
        groups = [rng.normal(rng.uniform(0, 1), 1, rng.integers(2, 12)) for _ in range(rng.integers(2, 6))]
        ours = anova_oneway(samples_of(*groups))
        ref = sps.f_oneway(*groups)
        assert ours.statistic == pytest.approx(ref.statistic, rel=1e-6)
        assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-6)


def test_anova_errors():
    with pytest.raises(InsufficientGroups):
        anova_oneway(samples_of([1, 2, 3]))
    with pytest.raises(ZeroWithinVariance):
        anova_oneway(samples_of([1, 1], [2, 2]))
    with pytest.raises(SampleTooSmall):
        anova_oneway(samples_of([1], [2, 3]))


def test_anova_null_calibration():
    rng = np.random.default_rng(13)
    trials = [anova_oneway(samples_of(*rng.normal(size=(3, 10)))).p_value < ALPHA for _ in range(1000)]
    assert 0.03 <= np.mean(trials) <= 0.07


# --- Kruskal-Wallis ---


def test_kruskal_identical_groups():
    res = kruskal_wallis(samples_of([1, 2, 3], [1, 2, 3]))
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p_value == pytest.approx(1.0)


def test_kruskal_all_tied():
    res = kruskal_wallis(samples_of([5, 5], [5, 5, 5]))
    assert (res.statistic, res.p_value) == (0.0, 1.0)


def test_kruskal_two_groups_near_mann_whitney(rng):
    a, b = rng.normal(0, 1, 20), rng.normal(0.6, 1, 20)
    kw = kruskal_wallis(samples_of(a, b)).p_value
    mw = mann_whitney_u(a, b).p_value
    assert kw == pytest.approx(mw, abs=0.02)


def test_kruskal_matches_reference():
    rng = np.random.default_rng(5)
    for _ in range(50):
        groups = [np.round(rng.normal(0, 1, rng.integers(2, 10)), 1) for _ in range(rng.integers(2, 6))]
        ours = kruskal_wallis(samples_of(*groups))
        ref = sps.kruskal(*groups)
        assert ours.statistic == pytest.approx(ref.statistic, abs=1e-6)
        assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-6)


def test_kruskal_requires_three_values():
    with pytest.raises(SampleTooSmall):
        kruskal_wallis(samples_of([1], [2]))


def test_kruskal_null_calibration():
    rng = np.random.default_rng(14)
    trials = [kruskal_wallis(samples_of(*rng.normal(size=(3, 10)))).p_value < ALPHA for _ in range(1000)]
    assert 0.03 <= np.mean(trials) <= 0.07


# --- Tukey HSD ---


@pytest.mark.parametrize("q, k, df", [(1.0, 2, 10), (3.5, 3, 12), (4.2, 5, 30), (2.0, 10, 4), (6.0, 4, 200)])
def test_studentized_range_matches_reference(q, k, df):
    assert studentized_range_sf(q, k, df) == pytest.approx(sps.studentized_range.sf(q, k, df), abs=1e-5)


def test_tukey_identical_groups():
    m = tukey_hsd(samples_of([1, 2, 3], [1, 2, 3], [1, 2, 3]))
    assert np.allclose(m.p_adjusted, 1.0)


def test_tukey_two_groups_equals_t_test(rng):
    a, b = rng.normal(0, 1, 9), rng.normal(0.8, 1, 12)
    m = tukey_hsd(samples_of(a, b))
    assert m.p("g0", "g1") == pytest.approx(sps.ttest_ind(a, b).pvalue, abs=1e-4)


def test_tukey_textbook_dataset():
    groups = [
        [24.5, 23.5, 26.4, 27.1, 29.9],
        [28.4, 34.2, 29.5, 32.2, 30.1],
        [26.1, 28.3, 24.3, 26.2, 27.8],
    ]
    ours = tukey_hsd(samples_of(*groups)).p_adjusted
    ref = sps.tukey_hsd(*groups).pvalue
    np.testing.assert_allclose(ours, ref, atol=1e-3)


def test_tukey_unequal_sizes_match_reference():
    rng = np.random.default_rng(6)
    for _ in range(10):
        groups = [rng.normal(rng.uniform(0, 2), 1, rng.integers(3, 9)) for _ in range(4)]
        ours = tukey_hsd(samples_of(*groups)).p_adjusted
        np.testing.assert_allclose(ours, sps.tukey_hsd(*groups).pvalue, atol=1e-3)


# --- Dunn ---


def oracle_dunn(groups):
    pooled = np.concatenate(groups)
    n = len(pooled)
    ranks = sps.rankdata(pooled)
    _, ties = np.unique(pooled, return_counts=True)
    correction = np.sum(ties**3 - ties) / (12 * (n - 1))
    starts = np.cumsum([0] + [len(g) for g in groups])
    means = [ranks[starts[i] : starts[i + 1]].mean() for i in range(len(groups))]
    k = len(groups)
    out = np.ones((k, k))
    for i, j in itertools.combinations(range(k), 2):
        se = math.sqrt((n * (n + 1) / 12 - correction) * (1 / len(groups[i]) + 1 / len(groups[j])))
        z = abs(means[i] - means[j]) / se
        out[i, j] = out[j, i] = min(1.0, 2 * (1 - sps.norm.cdf(z)) * k * (k - 1) / 2)
    return out


def test_dunn_identical_groups_capped_at_one():
    m = dunn_bonferroni(samples_of([1, 2, 3], [1, 2, 3], [1, 2, 3]))
    assert np.all(m.p_adjusted == 1.0)


def test_dunn_adjusted_never_below_raw(rng):
    samples = samples_of(*rng.normal(size=(4, 6)) + np.arange(4)[:, None])
    assert np.all(dunn_bonferroni(samples).p_adjusted >= dunn_raw(samples) - 1e-15)


def test_dunn_matches_oracle():
    rng = np.random.default_rng(8)
    for _ in range(50):
        groups = [np.round(rng.normal(rng.uniform(0, 1), 1, rng.integers(3, 10)), 1) for _ in range(3)]
        np.testing.assert_allclose(dunn_bonferroni(samples_of(*groups)).p_adjusted, oracle_dunn(groups), atol=1e-3)


# --- Compact letter display ---


def matrix_from_significance(sig: np.ndarray, means) -> PairwiseMatrix:
    p = np.where(sig, 0.001, 0.5)
    p = np.triu(p, 1)
    p = p + p.T
    np.fill_diagonal(p, 1.0)
    labels = tuple(f"c{i}" for i in range(len(means)))
    return PairwiseMatrix("test", labels, p, tuple(means))


def test_no_significant_pairs_all_a():
    m = matrix_from_significance(np.zeros((4, 4), dtype=bool), [4, 3, 2, 1])
    assert set(compact_letter_display(m).values()) == {"A"}


def test_all_pairs_significant():
    m = matrix_from_significance(np.ones((3, 3), dtype=bool), [3, 2, 1])
    assert compact_letter_display(m) == {"c0": "A", "c1": "B", "c2": "C"}


def test_two_block_pattern():
    block = np.array([0] * 4 + [1] * 6)
    sig = block[:, None] != block[None, :]
    means = [0.88, 0.885, 0.879, 0.883, 0.86, 0.855, 0.858, 0.85, 0.857, 0.852]
    letters = compact_letter_display(matrix_from_significance(sig, means))
    assert [letters[f"c{i}"] for i in range(10)] == list("AAAABBBBBB")


def test_overlapping_groups_get_two_letters():
    sig = np.zeros((3, 3), dtype=bool)
    sig[0, 2] = sig[2, 0] = True
    letters = compact_letter_display(matrix_from_significance(sig, [3, 2, 1]))
    assert letters == {"c0": "A", "c1": "AB", "c2": "B"}


def test_letter_soundness_on_random_matrices():
    rng = np.random.default_rng(9)
    for _ in range(500):
        k = int(rng.integers(2, 11))
        sig = np.triu(rng.random((k, k)) < rng.uniform(0.1, 0.9), 1)
        sig = sig | sig.T
        m = matrix_from_significance(sig, rng.normal(size=k))
        letters = compact_letter_display(m)
        assert letters_consistent(m, letters)
        for i, j in itertools.combinations(range(k), 2):
            assert share_letter(letters[f"c{i}"], letters[f"c{j}"]) == (not sig[i, j])


def test_letter_names_past_the_alphabet_are_unambiguous():
    assert split_letters("AB1c") == ("A", "B1", "c")
    assert split_letters("A12z") == ("A12", "z")
    assert not share_letter("A1", "A")
    assert share_letter("B1", "AB1")


def test_fifty_six_distinct_groups_get_their_own_letters():
    k = 56
    m = matrix_from_significance(~np.eye(k, dtype=bool), list(range(k, 0, -1)))
    letters = compact_letter_display(m)
    assert letters["c0"] == "A"
    assert letters["c52"] == "A1"
    assert letters["c55"] == "D1"
    assert letters_consistent(m, letters)


def test_letters_follow_labels_under_permutation():
    rng = np.random.default_rng(10)
    k = 6
    sig = np.triu(rng.random((k, k)) < 0.5, 1)
    sig = sig | sig.T
    means = rng.normal(size=k)
    base = compact_letter_display(matrix_from_significance(sig, means))

    perm = rng.permutation(k)
    p = np.where(sig, 0.001, 0.5)[np.ix_(perm, perm)]
    np.fill_diagonal(p, 1.0)
    permuted = PairwiseMatrix("test", tuple(f"c{i}" for i in perm), p, tuple(means[perm]))
    assert compact_letter_display(permuted) == base


def test_best_group_gets_first_letter():
    sig = np.ones((3, 3), dtype=bool)
    letters = compact_letter_display(matrix_from_significance(sig, [1, 3, 2]))
    assert letters == {"c1": "A", "c2": "B", "c0": "C"}


# --- Branch pipeline ---


def test_all_normal_takes_parametric_branch():
    samples = samples_of(evenly_spaced(0), evenly_spaced(5), evenly_spaced(10))
    report = branch_pipeline(samples)
    assert report.branch is Branch.PARAMETRIC
    assert [s.test for s in report.trail] == ["shapiro_wilk"] * 3 + ["anova_oneway", "tukey_hsd"]
    assert report.letters == {"g0": "C", "g1": "B", "g2": "A"}


def test_constant_group_takes_nonparametric_branch():
    samples = [
        Sample("Real data only", (0.876,) * 10),
        Sample("Syn10 Real90", tuple(0.883 + 0.007 * d for d in np.linspace(-1.5, 1.5, 10))),
        Sample("Syn50 Real50", tuple(0.80 + 0.01 * d for d in np.linspace(-1.5, 1.5, 10))),
    ]
    report = branch_pipeline(samples)
    assert report.branch is Branch.NONPARAMETRIC
    assert report.trail[0].outcome == "constant"
    assert report.trail[3].test == "kruskal_wallis"
    assert report.pairwise_method == "dunn_bonferroni"
    assert letters_consistent(dunn_bonferroni(samples), report.letters)


def test_non_significant_omnibus_gives_all_a():
    samples = samples_of(evenly_spaced(0), evenly_spaced(0.01), evenly_spaced(0.02))
    report = branch_pipeline(samples)
    assert report.trail[-1].test == "anova_oneway"
    assert report.trail[-1].p_value > 0.9
    assert not report.omnibus_significant
    assert set(report.letters.values()) == {"A"}
    assert report.pairwise == {}


def long_frame(rng) -> pd.DataFrame:
    rows = []
    for model in ("yolov8s", "yolov9s"):
        for combo, mean in (("Real data only", 0.876), ("Syn10 Real90", 0.883), ("Syn90 Real10", 0.70)):
            for rep in range(10):
                for metric in ("mAP50", "F1"):
                    rows.append((model, combo, rep, metric, mean + rng.normal(0, 0.005)))
    return pd.DataFrame(rows, columns=["model", "dataset_combination", "replicate", "metric", "value"])


def test_run_long_format_covers_every_model_metric(rng):
    reports = run_long_format(long_frame(rng))
    assert [(r.model, r.metric) for r in reports] == [
        ("yolov8s", "mAP50"),
        ("yolov8s", "F1"),
        ("yolov9s", "mAP50"),
        ("yolov9s", "F1"),
    ]
    for r in reports:
        assert [g.label for g in r.groups] == ["Real data only", "Syn10 Real90", "Syn90 Real10"]
        assert not share_letter(r.letters["Syn90 Real10"], r.letters["Real data only"])
        assert r.undefined_groups == []
        assert r.dropped_replicates == 0


def test_undefined_values_are_counted_per_group(rng):
    frame = long_frame(rng)
    combo = frame.dataset_combination
    f1 = (frame.model == "yolov8s") & (frame.metric == "F1")
    undefined = (combo == "Syn90 Real10") | ((combo == "Syn10 Real90") & frame.replicate.isin([3, 4]))
    reports = {(r.model, r.metric): r for r in run_long_format(frame[~(f1 & undefined)])}
    report = reports[("yolov8s", "F1")]
    assert report.expected_replicates == 10
    assert report.undefined_groups == ["Syn90 Real10"]
    assert {g.label: (g.n, g.dropped) for g in report.groups} == {"Real data only": (10, 0), "Syn10 Real90": (8, 2)}
    assert report.dropped_replicates == 12
    assert reports[("yolov8s", "mAP50")].dropped_replicates == 0


def test_run_long_format_rejects_bad_rows(rng):
    frame = long_frame(rng)
    with pytest.raises(MalformedRow):
        run_long_format(frame.drop(columns=["replicate"]))
    bad = frame.astype({"value": object})
    bad.loc[5, "value"] = "n/a"
    with pytest.raises(MalformedRow) as exc:
        run_long_format(bad)
    assert exc.value.row_no == 7
    with pytest.raises(MalformedRow):
        run_long_format(pd.concat([frame, frame.iloc[[0]]]))


def test_single_combination_is_skipped(rng):
    frame = long_frame(rng)
    assert run_long_format(frame[frame.dataset_combination == "Real data only"]) == []


def test_report_files_are_stable(tmp_path, rng):
    reports = run_long_format(long_frame(rng))
    write_stat_reports(reports, tmp_path / "a" / "stats.json")
    write_stat_reports(read_stat_reports(tmp_path / "a" / "stats.json"), tmp_path / "b" / "stats.json")
    assert (tmp_path / "a" / "stats.json").read_bytes() == (tmp_path / "b" / "stats.json").read_bytes()

    write_letters_csv(reports, tmp_path / "letters.csv")
    letters = pd.read_csv(tmp_path / "letters.csv")
    assert list(letters.columns) == [
        "model",
        "metric",
        "dataset_combination",
        "n",
        "dropped",
        "mean",
        "sd",
        "letters",
    ]
    assert len(letters) == 12
