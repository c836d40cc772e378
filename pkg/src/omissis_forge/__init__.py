"""Corpus machinery for de-identification training data.

Pairs clear and redacted documents with MinHash LSH plus decision-number
keys, re-aligns their token streams to recover redaction labels, converts
the labels to B/I/O tags, and encodes fixed-length chunks with class
weights and token-level evaluation.
"""

from .align import OMISSIS, AlignConfig, LabeledSequence, align, tokenize_words
from .bio import BioDoc, BioTag, LabelStats, label_stats, to_bio
from .encode import EncodedChunk, SubwordVocab, align_labels, chunk, encode_document, finalize_chunk, subword_tokenize
from .evaluate import ClassWeights, TokenMetrics, balanced_weights, token_metrics, weighted_ce_loss
from .keys import DecisionKey, MatchPair, NoMatch, extract_keys, resolve
from .lsh import MinHashSignature, build_index, exact_jaccard, jaccard_estimate, minhash, query_candidates, shingle, tune_bands
from .records import CorpusStore, DocRecord, Variant, clean_encoding, ingest, normalize_whitespace
from .synth import SynthPair, SynthSpec, generate

__version__ = "0.1.0"
