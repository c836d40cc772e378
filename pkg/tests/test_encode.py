import numpy as np
import pytest

from omissis_forge.encode import (
    IGNORE_LABEL,
    EncodedChunk,
    SubwordVocab,
    align_labels,
    chunk,
    encode_document,
    finalize_chunk,
    subword_tokenize,
    vocab_for_words,
)
from omissis_forge.errors import (
    EmptyVocab,
    IndexOutOfRange,
    InputError,
    InvariantViolation,
    OverlongChunk,
    ShapeMismatch,
)


@pytest.fixture
def toy_vocab():
    return SubwordVocab(
        token_to_id={"[PAD]": 0, "[UNK]": 1, "ricor": 5, "##so": 6, "atto": 7, "de": 8, "##l": 9},
        lowercase=True,
    )


class TestVocab:
    def test_pad_must_be_zero(self):
        with pytest.raises(InputError):
            SubwordVocab(token_to_id={"[PAD]": 1, "[UNK]": 0})

    def test_needs_unknown_token(self):
        with pytest.raises(InputError):
            SubwordVocab(token_to_id={"[PAD]": 0, "x": 1})

    def test_empty(self):
        with pytest.raises(EmptyVocab):
            SubwordVocab(token_to_id={})

    def test_file_round_trip(self, tmp_path, toy_vocab):
        # ids are line numbers, so save then load must be exact
        dense = vocab_for_words(["atto", "ricorso", "sezione"])
        dense.save(tmp_path / "vocab.txt")
        loaded = SubwordVocab.load(tmp_path / "vocab.txt")
        assert loaded.token_to_id == dense.token_to_id

    def test_duplicate_lines_rejected(self, tmp_path):
        (tmp_path / "v.txt").write_text("[PAD]\n[UNK]\n[UNK]\n")
        with pytest.raises(InputError):
            SubwordVocab.load(tmp_path / "v.txt")


class TestSubwordTokenize:
    def test_greedy_longest_match(self, toy_vocab):
        ids, word_ids = subword_tokenize(["ricorso"], toy_vocab)
        assert ids == [5, 6]
        assert word_ids == [0, 0]

    def test_whole_word_hit(self, toy_vocab):
        ids, word_ids = subword_tokenize(["atto"], toy_vocab)
        assert ids == [7]
        assert word_ids == [0]

    def test_unmatchable_word_is_unknown(self, toy_vocab):
        ids, word_ids = subword_tokenize(["zqx"], toy_vocab)
        assert ids == [toy_vocab.unk_id]
        assert word_ids == [0]

    def test_partial_match_falls_back_to_unknown(self, toy_vocab):
        # "dexx": "de" matches but "xx" has no continuation piece
        ids, _ = subword_tokenize(["dexx"], toy_vocab)
        assert ids == [toy_vocab.unk_id]

    def test_lowercasing(self, toy_vocab):
        assert subword_tokenize(["ATTO"], toy_vocab)[0] == [7]

    def test_word_ids_nondecreasing_and_cover_prefix(self, toy_vocab):
        ids, word_ids = subword_tokenize(["atto", "ricorso", "del"], toy_vocab)
        assert word_ids == sorted(word_ids)
        assert sorted(set(word_ids)) == [0, 1, 2]


class TestAlignLabels:
    def test_all_subwords_inherit_word_label(self):
        assert align_labels([0, 0, 1], [1, 0]) == [1, 1, 0]

    def test_null_word_id_gets_ignore(self):
        assert align_labels([None], [1]) == [IGNORE_LABEL]

    def test_empty(self):
        assert align_labels([], []) == []

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            align_labels([2], [1, 0])


class TestChunk:
    def test_ceiling_partition(self):
        ids = list(range(1037))
        parts = chunk(ids, [0] * 1037, l_max=512)
        assert [len(p[0]) for p in parts] == [512, 512, 13]

    def test_exact_fit_single_chunk(self):
        parts = chunk(list(range(512)), [0] * 512)
        assert len(parts) == 1 and len(parts[0][0]) == 512

    def test_empty_input(self):
        assert chunk([], []) == []

    def test_concatenation_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(0, 1600))
            ids = [int(x) for x in rng.integers(1, 1000, size=n)]
            labels = [int(x) for x in rng.integers(0, 3, size=n)]
            parts = chunk(ids, labels, l_max=512)
            assert sum((p[0] for p in parts), []) == ids
            assert sum((p[1] for p in parts), []) == labels

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatch):
            chunk([1, 2], [0])


class TestFinalizeChunk:
    def test_short_chunk_padding(self):
        out = finalize_chunk(list(range(1, 14)), [0] * 13, doc_id=0, chunk_index=0)
        assert len(out.input_ids) == 512
        assert out.input_ids[13:] == [0] * 499
        assert out.attention_mask == [1] * 13 + [0] * 499
        assert out.labels[13:] == [IGNORE_LABEL] * 499
        assert out.token_type_ids == [0] * 512

    def test_full_chunk_no_padding(self):
        out = finalize_chunk(list(range(1, 513)), [0] * 512, doc_id=0, chunk_index=0)
        assert out.attention_mask == [1] * 512

    def test_overlong_rejected(self):
        with pytest.raises(OverlongChunk):
            finalize_chunk(list(range(1, 515)), [0] * 514, doc_id=0, chunk_index=0)

    def test_mask_counts_real_tokens(self):
        out = finalize_chunk([3, 4, 5], [0, 1, 2], doc_id=1, chunk_index=0)
        assert sum(out.attention_mask) == 3
        live_labels = sum(1 for l in out.labels if l != IGNORE_LABEL)
        assert live_labels <= sum(out.attention_mask)

    def test_invariants_enforced_on_construction(self):
        with pytest.raises(InvariantViolation):
            EncodedChunk(
                input_ids=[1, 0],
                attention_mask=[1, 1],
                token_type_ids=[0, 0],
                labels=[0, IGNORE_LABEL],
                doc_id=0,
                chunk_index=0,
            )


class TestEncodeDocument:
    def test_round_trip_through_chunks(self, toy_vocab):
        tokens = ["atto", "ricorso", "del"] * 300
        tags = ([0, 1, 2] * 300)
        chunks = encode_document(tokens, tags, toy_vocab, doc_id=9)
        ids, _ = subword_tokenize(tokens, toy_vocab)
        labels = align_labels(subword_tokenize(tokens, toy_vocab)[1], tags)
        got_ids: list[int] = []
        got_labels: list[int] = []
        for c in chunks:
            n = c.content_length()
            got_ids.extend(c.input_ids[:n])
            got_labels.extend(c.labels[:n])
        assert got_ids == ids
        assert got_labels == labels
        assert [c.chunk_index for c in chunks] == list(range(len(chunks)))

    def test_reserve_special_wraps_chunks(self):
        vocab = vocab_for_words(["alfa", "beta"])
        chunks = encode_document(["alfa", "beta"], [0, 1], vocab, doc_id=0,
                                 l_max=8, reserve_special=True)
        (c,) = chunks
        assert c.input_ids[0] == vocab.get("[CLS]")
        assert c.input_ids[3] == vocab.get("[SEP]")
        assert c.labels[0] == IGNORE_LABEL and c.labels[3] == IGNORE_LABEL

    def test_k_formula(self, toy_vocab):
        tokens = ["atto"] * 1037
        chunks = encode_document(tokens, [0] * 1037, toy_vocab, doc_id=0)
        assert len(chunks) == -(-1037 // 512) == 3
