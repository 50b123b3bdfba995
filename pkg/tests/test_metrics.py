import numpy as np
import pytest
from oracles import (
    definitional_nmi,
    edit_distance_dp,
    exhaustive_cpwer,
    exhaustive_text_der,
    grid_der,
    grid_jer,
    pair_counting_ari,
)

from diarcp.core import SpeakerLabeling, TimeSegment
from diarcp.errors import InvalidInputError, UndefinedMetricError
from diarcp.metrics import (
    DiarizationHypothesis,
    WordRecord,
    _edit_distance,
    ari,
    cpwer,
    der,
    jer,
    map_speakers,
    nmi,
    text_der,
)


def seg(a, b, label):
    return TimeSegment(a, b, label)


def hyp(*segments):
    return DiarizationHypothesis(tuple(segments))


def random_diarization(rng, speakers, t_max=60.0, n_segments=(3, 7)):
    """Random multi-speaker diarization with all times on the 1 ms lattice."""
    segments = []
    for speaker in speakers:
        for _ in range(int(rng.integers(*n_segments))):
            start = round(float(rng.uniform(0, t_max - 2)), 3)
            duration = round(float(rng.uniform(0.5, 6.0)), 3)
            segments.append(seg(start, round(start + duration, 3), speaker))
    return hyp(*segments)


def perturbed_hypothesis(rng, reference, jitter=0.6):
    """Reference with jittered boundaries, renamed speakers, drops and spurious segments."""
    renames = {s: f"hyp_{i}" for i, s in enumerate(reference.speakers)}
    segments = []
    for s in reference.segments:
        if rng.random() < 0.15:
            continue  # dropped -> missed speech
        start = round(max(0.0, s.t_start + float(rng.uniform(-jitter, jitter))), 3)
        end = round(s.t_end + float(rng.uniform(-jitter, jitter)), 3)
        if end <= start + 0.01:
            continue
        label = renames[s.label]
        if rng.random() < 0.1:  # confusion
            label = f"hyp_{int(rng.integers(0, len(renames)))}"
        segments.append(seg(start, end, label))
    for _ in range(int(rng.integers(0, 3))):  # false alarms
        start = round(float(rng.uniform(0, 55)), 3)
        segments.append(seg(start, round(start + float(rng.uniform(0.3, 2.0)), 3), "hyp_fa"))
    if not segments:
        segments.append(seg(0.0, 1.0, "hyp_0"))
    return hyp(*segments)


class TestMapSpeakers:
    def test_identity(self):
        d = hyp(seg(0, 5, "a"), seg(5, 9, "b"))
        assert map_speakers(d, d) == {"a": "a", "b": "b"}

    def test_permuted_labels(self):
        ref = hyp(seg(0, 5, "a"), seg(5, 9, "b"))
        h = hyp(seg(0, 5, "x"), seg(5, 9, "y"))
        assert map_speakers(ref, h) == {"x": "a", "y": "b"}

    def test_three_speaker_case_matches_exhaustive(self):
        from oracles import activity_grid, best_mapping_exhaustive

        ref = hyp(seg(0, 4, "a"), seg(4, 7, "b"), seg(7, 12, "c"))
        h = hyp(seg(0, 3, "x"), seg(3, 8, "y"), seg(8, 12, "z"))
        ref_grid, _ = activity_grid(ref.segments, 12.0)
        hyp_grid, _ = activity_grid(h.segments, 12.0)
        assert map_speakers(ref, h) == best_mapping_exhaustive(ref_grid, hyp_grid)

    def test_zero_overlap_left_unmapped(self):
        ref = hyp(seg(0, 1, "a"))
        h = hyp(seg(5, 6, "x"))
        assert map_speakers(ref, h) == {}


class TestDer:
    def test_perfect_match(self):
        d = hyp(seg(0, 5, "a"), seg(5, 9, "b"))
        assert der(d, d, collar=0.0).der == pytest.approx(0.0)

    def test_empty_hypothesis_is_all_missed(self):
        ref = hyp(seg(0, 10, "a"))
        breakdown = der(ref, hyp(), collar=0.0)
        assert breakdown.ms == pytest.approx(100.0)
        assert breakdown.der == pytest.approx(100.0)
        assert breakdown.fa == 0.0 and breakdown.spke == 0.0

    def test_hand_case_speaker_error(self):
        ref = hyp(seg(0, 10, "a"))
        h = hyp(seg(0, 8, "x"), seg(8, 10, "y"))
        breakdown = der(ref, h, collar=0.0)
        assert breakdown.spke == pytest.approx(20.0)
        assert breakdown.der == pytest.approx(20.0)

    def test_components_sum_exactly(self):
        rng = np.random.default_rng(2)
        ref = random_diarization(rng, ["a", "b"])
        h = perturbed_hypothesis(rng, ref)
        breakdown = der(ref, h)
        assert breakdown.der == breakdown.ms + breakdown.fa + breakdown.spke

    def test_collar_forgives_boundary_jitter(self):
        ref = hyp(seg(0, 5, "a"), seg(5, 10, "b"))
        h = hyp(seg(0, 5.2, "a"), seg(5.2, 10, "b"))
        assert der(ref, h, collar=0.25).der == pytest.approx(0.0)
        assert der(ref, h, collar=0.0).der > 0.0

    def test_zero_reference_rejected(self):
        with pytest.raises(UndefinedMetricError):
            der(hyp(), hyp(seg(0, 1, "x")))

    def test_invariant_under_hyp_renaming(self):
        rng = np.random.default_rng(3)
        ref = random_diarization(rng, ["a", "b", "c"])
        h = perturbed_hypothesis(rng, ref)
        renamed = hyp(*(seg(s.t_start, s.t_end, s.label + "_renamed") for s in h.segments))
        assert der(ref, h).der == pytest.approx(der(ref, renamed).der, abs=1e-9)

    @pytest.mark.parametrize("trial", range(25))
    def test_matches_grid_oracle(self, trial):
        rng = np.random.default_rng(1000 + trial)
        n_speakers = int(rng.integers(2, 5))
        speakers = [f"spk{i}" for i in range(n_speakers)]
        ref = random_diarization(rng, speakers)
        h = perturbed_hypothesis(rng, ref)
        collar = float(rng.choice([0.0, 0.25]))
        got = der(ref, h, collar=collar)
        expected_der, expected_ms, expected_fa, expected_spke = grid_der(
            ref.segments, h.segments, collar
        )
        assert got.der == pytest.approx(expected_der, abs=0.01)
        assert got.ms == pytest.approx(expected_ms, abs=0.01)
        assert got.fa == pytest.approx(expected_fa, abs=0.01)
        assert got.spke == pytest.approx(expected_spke, abs=0.01)


class TestJer:
    def test_perfect_match(self):
        d = hyp(seg(0, 5, "a"), seg(5, 9, "b"))
        assert jer(d, d) == pytest.approx(0.0)

    def test_empty_hypothesis(self):
        assert jer(hyp(seg(0, 10, "a")), hyp()) == pytest.approx(100.0)

    def test_unmapped_reference_speaker_scores_100(self):
        ref = hyp(seg(0, 5, "a"), seg(5, 10, "b"))
        h = hyp(seg(0, 5, "x"))
        # b unmapped -> 100%; a perfectly matched -> 0%.
        assert jer(ref, h) == pytest.approx(50.0)

    def test_two_speaker_hand_case_matches_grid(self):
        ref = hyp(seg(0, 6, "a"), seg(6, 10, "b"))
        h = hyp(seg(0, 5, "x"), seg(5, 10, "y"))
        assert jer(ref, h) == pytest.approx(grid_jer(ref.segments, h.segments), abs=0.01)

    @pytest.mark.parametrize("trial", range(25))
    def test_matches_grid_oracle(self, trial):
        rng = np.random.default_rng(2000 + trial)
        n_speakers = int(rng.integers(2, 5))
        speakers = [f"spk{i}" for i in range(n_speakers)]
        ref = random_diarization(rng, speakers)
        h = perturbed_hypothesis(rng, ref)
        assert jer(ref, h) == pytest.approx(grid_jer(ref.segments, h.segments), abs=0.01)

    def test_invariant_under_hyp_renaming(self):
        rng = np.random.default_rng(21)
        ref = random_diarization(rng, ["a", "b"])
        h = perturbed_hypothesis(rng, ref)
        renamed = hyp(*(seg(s.t_start, s.t_end, "zz_" + s.label) for s in h.segments))
        assert jer(ref, h) == pytest.approx(jer(ref, renamed), abs=1e-9)


def labeling(values):
    return SpeakerLabeling(np.array(values))


class TestNmi:
    def test_identical_partitions(self):
        assert nmi(labeling([0, 0, 1, 1]), labeling([0, 0, 1, 1])) == pytest.approx(1.0)

    def test_identical_up_to_renaming(self):
        assert nmi(labeling([0, 0, 1, 1]), labeling([5, 5, 2, 2])) == pytest.approx(1.0)

    def test_constant_vs_structured(self):
        assert nmi(labeling([0, 1, 0, 1]), labeling([3, 3, 3, 3])) == pytest.approx(0.0)

    def test_both_single_cluster(self):
        assert nmi(labeling([2, 2, 2]), labeling([0, 0, 0])) == 1.0

    def test_matches_definitional_oracle(self):
        got = nmi(labeling([0, 0, 1, 1]), labeling([0, 1, 1, 1]))
        assert got == pytest.approx(definitional_nmi([0, 0, 1, 1], [0, 1, 1, 1]), abs=1e-9)

    def test_matches_oracle_on_random_labelings(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 30))
            a = rng.integers(0, 4, size=n)
            b = rng.integers(0, 4, size=n)
            assert nmi(labeling(a), labeling(b)) == pytest.approx(
                definitional_nmi(a.tolist(), b.tolist()), abs=1e-9
            )

    def test_symmetric(self):
        rng = np.random.default_rng(8)
        a = labeling(rng.integers(0, 3, size=20))
        b = labeling(rng.integers(0, 3, size=20))
        assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            nmi(labeling([0, 1]), labeling([0, 1, 2]))


class TestAri:
    def test_identical(self):
        assert ari(labeling([0, 0, 1, 1]), labeling([0, 0, 1, 1])) == pytest.approx(1.0)

    def test_relabeling_invariance(self):
        assert ari(labeling([0, 0, 1, 1]), labeling([7, 7, 3, 3])) == pytest.approx(1.0)

    def test_crossed_pairs_match_oracle(self):
        got = ari(labeling([0, 0, 1, 1]), labeling([0, 1, 0, 1]))
        assert got == pytest.approx(pair_counting_ari([0, 0, 1, 1], [0, 1, 0, 1]), abs=1e-12)

    def test_matches_oracle_on_random_labelings(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            n = int(rng.integers(2, 25))
            a = rng.integers(0, 4, size=n)
            b = rng.integers(0, 4, size=n)
            assert ari(labeling(a), labeling(b)) == pytest.approx(
                pair_counting_ari(a.tolist(), b.tolist()), abs=1e-9
            )

    def test_symmetric(self):
        rng = np.random.default_rng(10)
        a = labeling(rng.integers(0, 3, size=15))
        b = labeling(rng.integers(0, 3, size=15))
        assert ari(a, b) == pytest.approx(ari(b, a), abs=1e-12)


def words_for(speaker, tokens, t0, dt=0.4):
    return [
        WordRecord(token, round(t0 + i * dt, 3), round(t0 + (i + 1) * dt, 3), speaker)
        for i, token in enumerate(tokens)
    ]


class TestTextDer:
    def test_matching_segmentation(self):
        words = words_for("a", ["one", "two", "three"], 0.0) + words_for(
            "b", ["four", "five"], 2.0
        )
        h = hyp(seg(0, 1.2, "x"), seg(2.0, 3.0, "y"))
        assert text_der(words, h) == pytest.approx(0.0)

    def test_single_hyp_speaker_over_even_split(self):
        words = words_for("a", ["w"] * 3, 0.0) + words_for("b", ["w"] * 3, 3.0)
        h = hyp(seg(0, 6, "x"))
        assert text_der(words, h) == pytest.approx(50.0)

    def test_six_word_hand_case_matches_exhaustive(self):
        words = (
            words_for("a", ["u", "v"], 0.0)
            + words_for("b", ["w", "x"], 1.0)
            + words_for("c", ["y", "z"], 2.0)
        )
        h = hyp(seg(0, 1.0, "p"), seg(1.0, 1.4, "q"), seg(1.4, 3.0, "r"))
        from diarcp.metrics import _attribute_words, _speaker_intervals

        attributed = _attribute_words(words, _speaker_intervals(h))
        expected = exhaustive_text_der([w.speaker for w in words], attributed)
        assert text_der(words, h) == pytest.approx(expected, abs=1e-9)

    def test_unattributed_words_count_wrong(self):
        words = words_for("a", ["one", "two"], 0.0) + words_for("b", ["far"], 50.0)
        h = hyp(seg(0, 0.8, "x"))
        assert text_der(words, h) == pytest.approx(100.0 / 3.0)

    def test_empty_words_rejected(self):
        with pytest.raises(UndefinedMetricError):
            text_der([], hyp(seg(0, 1, "x")))

    def test_invariant_under_hyp_renaming(self):
        words = words_for("a", ["u", "v", "w"], 0.0) + words_for("b", ["x", "y"], 2.0)
        h = hyp(seg(0, 1.0, "p"), seg(1.0, 3.0, "q"))
        renamed = hyp(seg(0, 1.0, "zz_p"), seg(1.0, 3.0, "zz_q"))
        assert text_der(words, h) == pytest.approx(text_der(words, renamed), abs=1e-9)

    @pytest.mark.parametrize("trial", range(10))
    def test_matches_exhaustive_on_random_cases(self, trial):
        rng = np.random.default_rng(3000 + trial)
        speakers = [f"s{i}" for i in range(int(rng.integers(2, 4)))]
        words = []
        t = 0.0
        for _ in range(int(rng.integers(4, 12))):
            speaker = speakers[int(rng.integers(len(speakers)))]
            words.append(WordRecord("tok", round(t, 3), round(t + 0.3, 3), speaker))
            t += float(rng.uniform(0.3, 0.8))
        ref = hyp(*(seg(w.t_start, w.t_end, w.speaker) for w in words))
        h = perturbed_hypothesis(rng, ref)
        from diarcp.metrics import _attribute_words, _speaker_intervals

        attributed = _attribute_words(words, _speaker_intervals(h))
        expected = exhaustive_text_der([w.speaker for w in words], attributed)
        assert text_der(words, h) == pytest.approx(expected, abs=1e-9)


class TestEditDistance:
    def test_basic_cases(self):
        assert _edit_distance([], []) == 0
        assert _edit_distance(["a"], []) == 1
        assert _edit_distance(["a", "b"], ["a", "c"]) == 1
        assert _edit_distance(["a", "b", "c"], ["b", "c", "d"]) == 2

    def test_matches_full_dp_oracle(self):
        rng = np.random.default_rng(12)
        vocabulary = ["a", "b", "c", "d"]
        for _ in range(100):
            x = [vocabulary[i] for i in rng.integers(0, 4, size=rng.integers(0, 10))]
            y = [vocabulary[i] for i in rng.integers(0, 4, size=rng.integers(0, 10))]
            assert _edit_distance(x, y) == edit_distance_dp(x, y)


class TestCpwer:
    def test_identical(self):
        ref = words_for("a", ["hello", "world"], 0.0) + words_for("b", ["good", "bye"], 2.0)
        assert cpwer(ref, ref) == pytest.approx(0.0)

    def test_renamed_speakers(self):
        ref = words_for("a", ["hello", "world"], 0.0) + words_for("b", ["good", "bye"], 2.0)
        renamed = [WordRecord(w.word, w.t_start, w.t_end, w.speaker + "_x") for w in ref]
        assert cpwer(ref, renamed) == pytest.approx(0.0)

    def test_case_and_punctuation_folded(self):
        ref = words_for("a", ["Hello,", "World!"], 0.0)
        h = words_for("z", ["hello", "world"], 0.0)
        assert cpwer(ref, h) == pytest.approx(0.0)

    def test_one_substitution_in_eight_words(self):
        ref = words_for("a", ["w1", "w2", "w3", "w4"], 0.0) + words_for(
            "b", ["v1", "v2", "v3", "v4"], 4.0
        )
        h = words_for("x", ["w1", "w2", "BAD", "w4"], 0.0) + words_for(
            "y", ["v1", "v2", "v3", "v4"], 4.0
        )
        expected = exhaustive_cpwer(
            [["w1", "w2", "w3", "w4"], ["v1", "v2", "v3", "v4"]],
            [["w1", "w2", "bad", "w4"], ["v1", "v2", "v3", "v4"]],
        )
        assert cpwer(ref, h) == pytest.approx(expected)
        assert cpwer(ref, h) == pytest.approx(100.0 / 8.0)

    def test_speaker_count_mismatch(self):
        ref = words_for("a", ["x", "y"], 0.0)
        h = words_for("p", ["x", "y"], 0.0) + words_for("q", ["extra"], 3.0)
        # Extra hypothesis speaker costs one insertion.
        assert cpwer(ref, h) == pytest.approx(50.0)

    def test_empty_reference_rejected(self):
        with pytest.raises(UndefinedMetricError):
            cpwer([], words_for("a", ["x"], 0.0))

    @pytest.mark.parametrize("trial", range(15))
    def test_assignment_equals_exhaustive_permutation(self, trial):
        rng = np.random.default_rng(4000 + trial)
        vocabulary = ["aa", "bb", "cc", "dd", "ee"]
        n_ref = int(rng.integers(1, 6))
        n_hyp = int(rng.integers(1, 6))

        def transcripts(count):
            out = []
            for _ in range(count):
                length = int(rng.integers(1, 7))
                out.append([vocabulary[i] for i in rng.integers(0, 5, size=length)])
            return out

        refs = transcripts(n_ref)
        hyps = transcripts(n_hyp)
        ref_words = []
        hyp_words = []
        for idx, tokens in enumerate(refs):
            ref_words += words_for(f"r{idx}", tokens, 10.0 * idx)
        for idx, tokens in enumerate(hyps):
            hyp_words += words_for(f"h{idx}", tokens, 10.0 * idx)
        assert cpwer(ref_words, hyp_words) == pytest.approx(exhaustive_cpwer(refs, hyps))

    def test_invariant_under_hyp_renaming(self):
        rng = np.random.default_rng(14)
        ref = words_for("a", ["k", "l", "m"], 0.0) + words_for("b", ["n", "o"], 3.0)
        h = words_for("x", ["k", "l"], 0.0) + words_for("y", ["n", "o", "p"], 3.0)
        renamed = [WordRecord(w.word, w.t_start, w.t_end, "zz_" + w.speaker) for w in h]
        assert cpwer(ref, h) == pytest.approx(cpwer(ref, renamed))
