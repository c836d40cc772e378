import numpy as np
import pytest

from omissis_forge.align import OMISSIS, tokenize_words
from omissis_forge.errors import InfeasibleSpec
from omissis_forge.keys import extract_keys
from omissis_forge.lsh import exact_jaccard, shingle
from omissis_forge.synth import SynthSpec, generate


class TestGenerate:
    def test_no_spans_means_identical_twin(self):
        pairs = generate(SynthSpec(doc_count=5, spans_per_doc=(0, 0), seed=1))
        for p in pairs:
            assert p.clear.text == p.obf.text
            assert all(t == 0 for t in p.gold.tags)

    def test_single_span_tag_shape(self):
        pairs = generate(
            SynthSpec(doc_count=10, spans_per_doc=(1, 1), span_length=(3, 3), seed=2)
        )
        for p in pairs:
            tags = [int(t) for t in p.gold.tags]
            assert tags.count(1) == 1 and tags.count(2) == 2
            start = tags.index(1)
            assert tags[start : start + 3] == [1, 2, 2]

    def test_deterministic_per_seed(self):
        a = generate(SynthSpec(doc_count=8, seed=42))
        b = generate(SynthSpec(doc_count=8, seed=42))
        assert [(p.clear.text, p.obf.text) for p in a] == [
            (p.clear.text, p.obf.text) for p in b
        ]
        assert [(p.clear.text) for p in generate(SynthSpec(doc_count=8, seed=43))] != [
            p.clear.text for p in a
        ]

    def test_sentinels_unique_within_document(self):
        for p in generate(SynthSpec(doc_count=20, seed=3)):
            tokens = tokenize_words(p.clear.text)
            redacted = [tokens[i] for i, t in enumerate(p.gold.tags) if t != 0]
            assert len(redacted) == len(set(redacted))
            for sentinel in redacted:
                assert tokens.count(sentinel) == 1
                assert sentinel not in tokenize_words(p.obf.text)

    def test_placeholder_count_equals_span_count(self):
        for p in generate(SynthSpec(doc_count=20, seed=4)):
            spans = sum(1 for t in p.gold.tags if t == 1)
            assert tokenize_words(p.obf.text).count(OMISSIS) == spans

    def test_keys_planted_and_unique(self):
        pairs = generate(SynthSpec(doc_count=30, seed=5))
        keys = set()
        for p in pairs:
            clear_keys = extract_keys(p.clear.text)
            obf_keys = extract_keys(p.obf.text)
            assert clear_keys and obf_keys
            assert clear_keys[0] == obf_keys[0]
            assert clear_keys[0].raw == p.key
            keys.add(p.key)
        assert len(keys) == 30

    def test_ids_disjoint_between_sides(self):
        pairs = generate(SynthSpec(doc_count=10, seed=6))
        clear_ids = {p.clear.id for p in pairs}
        obf_ids = {p.obf.id for p in pairs}
        assert not clear_ids & obf_ids

    def test_infeasible_spec_rejected(self):
        with pytest.raises(InfeasibleSpec):
            generate(
                SynthSpec(
                    doc_count=3,
                    tokens_per_doc=(20, 20),
                    spans_per_doc=(10, 10),
                    span_length=(5, 5),
                    seed=0,
                )
            )

    def test_noise_never_touches_placeholder_neighborhood(self):
        spec = SynthSpec(
            doc_count=15,
            tokens_per_doc=(200, 400),
            spans_per_doc=(1, 5),
            noise="delete",
            noise_rate=0.05,
            seed=7,
            window=10,
        )
        for p in generate(spec):
            obf = tokenize_words(p.obf.text)
            spans = sum(1 for t in p.gold.tags if t == 1)
            assert obf.count(OMISSIS) == spans

    def test_light_redaction_keeps_twins_similar(self):
        # density <= 5% on 300+ token documents must keep shingle overlap high
        spec = SynthSpec(
            doc_count=20,
            tokens_per_doc=(300, 700),
            spans_per_doc=(1, 3),
            span_length=(1, 3),
            seed=8,
        )
        for p in generate(spec):
            clear = tokenize_words(p.clear.text)
            redacted = sum(1 for t in p.gold.tags if t != 0)
            assert redacted / len(clear) <= 0.05
            j = exact_jaccard(shingle(clear, 3), shingle(tokenize_words(p.obf.text), 3))
            assert j >= 0.9
