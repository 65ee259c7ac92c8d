"""proxlink.topics
~~~~~~~~~~~~~~~~~~

Topic modeling of title+abstract text and the cognitive-distance feature.

The pipeline is: tokenize (lowercase, strip punctuation, Porter-style
stemming, stopword removal), fit a collapsed-Gibbs LDA, pick the topic
count by NPMI coherence, average each author's per-publication topic
vectors into a knowledge vector over the feature window, and measure
cognitive distance between two authors as one minus the Pearson
correlation of their knowledge vectors.
"""
from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from ._base import ParamsMixin, check_fitted
from ._rng import stable_seed
from .corpus import PublicationRecord

_TOKEN_RE = re.compile(r"[a-z]+")

_stopwords_cache: Optional[frozenset] = None


def default_stopwords() -> frozenset:
    global _stopwords_cache
    if _stopwords_cache is None:
        text = resources.files("proxlink.data").joinpath("stopwords_en.txt").read_text()
        _stopwords_cache = frozenset(w.strip() for w in text.splitlines() if w.strip())
    return _stopwords_cache


# ---------------------------------------------------------------------------
# Porter stemmer
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _is_cons(word: str, i: int) -> bool:
    c = word[i]
    if c in _VOWELS:
        return False
    if c == "y":
        return True if i == 0 else not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Count of vowel-consonant sequences [C](VC)^m[V]."""
    m = 0
    prev_cons = None
    for i in range(len(stem)):
        cons = _is_cons(stem, i)
        if prev_cons is False and cons:
            m += 1
        prev_cons = cons
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(word: str) -> bool:
    return (len(word) >= 2 and word[-1] == word[-2]
            and _is_cons(word, len(word) - 1))


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    if not (_is_cons(word, len(word) - 3)
            and not _is_cons(word, len(word) - 2)
            and _is_cons(word, len(word) - 1)):
        return False
    return word[-1] not in "wxy"


_STEP2 = (("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
          ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
          ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
          ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
          ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"))

_STEP3 = (("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
          ("ical", "ic"), ("ful", ""), ("ness", ""))

_STEP4 = ("al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
          "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize")


def porter_stem(word: str) -> str:
    """Classic Porter suffix-stripping; input must be lowercase alphabetic."""
    if len(word) <= 2:
        return word
    w = word

    # step 1a
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-2]
    elif w.endswith("ss"):
        pass
    elif w.endswith("s"):
        w = w[:-1]

    # step 1b
    if w.endswith("eed"):
        if _measure(w[:-3]) > 0:
            w = w[:-1]
    else:
        fired = False
        if w.endswith("ed") and _has_vowel(w[:-2]):
            w = w[:-2]
            fired = True
        elif w.endswith("ing") and _has_vowel(w[:-3]):
            w = w[:-3]
            fired = True
        if fired:
            if w.endswith(("at", "bl", "iz")):
                w += "e"
            elif _ends_double_cons(w) and w[-1] not in "lsz":
                w = w[:-1]
            elif _measure(w) == 1 and _ends_cvc(w):
                w += "e"

    # step 1c
    if w.endswith("y") and _has_vowel(w[:-1]):
        w = w[:-1] + "i"

    # step 2
    for suffix, repl in _STEP2:
        if w.endswith(suffix):
            stem = w[: -len(suffix)]
            if _measure(stem) > 0:
                w = stem + repl
            break

    # step 3
    for suffix, repl in _STEP3:
        if w.endswith(suffix):
            stem = w[: -len(suffix)]
            if _measure(stem) > 0:
                w = stem + repl
            break

    # step 4
    for suffix in _STEP4:
        if w.endswith(suffix):
            stem = w[: -len(suffix)]
            if _measure(stem) > 1:
                if suffix == "ion" and not stem.endswith(("s", "t")):
                    break
                w = stem
            break

    # step 5a
    if w.endswith("e"):
        stem = w[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            w = stem

    # step 5b
    if _measure(w) > 1 and _ends_double_cons(w) and w.endswith("l"):
        w = w[:-1]

    return w


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TokenizedDoc:
    pub_id: str
    tokens: tuple[str, ...]

    @property
    def is_empty(self) -> bool:
        return len(self.tokens) == 0


def tokenize(pub: PublicationRecord, stoplist: Optional[frozenset] = None,
             stemmer=porter_stem) -> TokenizedDoc:
    """Title+abstract to normalized terms.

    Lowercases, keeps alphabetic runs only, drops stopwords (before and
    after stemming), stems. An all-stopword text yields an empty doc,
    which downstream fitting skips and flags.
    """
    stoplist = default_stopwords() if stoplist is None else stoplist
    text = (pub.title + " " + pub.abstract).lower()
    tokens = []
    for raw in _TOKEN_RE.findall(text):
        if raw in stoplist:
            continue
        stem = stemmer(raw) if stemmer else raw
        if stem and stem not in stoplist:
            tokens.append(stem)
    return TokenizedDoc(pub_id=pub.pub_id, tokens=tuple(tokens))


def tokenize_corpus(records: Iterable[PublicationRecord],
                    stoplist: Optional[frozenset] = None,
                    stemmer=porter_stem) -> list[TokenizedDoc]:
    return [tokenize(r, stoplist, stemmer) for r in records]


# ---------------------------------------------------------------------------
# Collapsed Gibbs LDA
# ---------------------------------------------------------------------------

class GibbsLda(ParamsMixin):
    """LDA fitted by collapsed Gibbs sampling, point estimate from the
    final sweep's counts with prior smoothing.

    Parameters
    ----------
    n_topics : K, at least 2.
    alpha : symmetric document-topic prior; None means 50/K.
    beta : symmetric topic-term prior.
    iterations : Gibbs sweeps over the corpus.
    seed : RNG seed; fits are bit-reproducible for a fixed seed and
        input ordering.

    Fitted state: ``vocab_`` (term -> column), ``topic_term_`` (K x V,
    rows summing to 1), ``doc_topic_`` (pub_id -> length-K simplex
    vector, non-empty docs only), ``skipped_`` (pub_ids of empty docs).
    """

    def __init__(self, n_topics: int = 9, alpha: Optional[float] = None,
                 beta: float = 0.01, iterations: int = 1000, seed: int = 0):
        self.n_topics = n_topics
        self.alpha = alpha
        self.beta = beta
        self.iterations = iterations
        self.seed = seed
        self.topic_term_ = None

    @property
    def alpha_(self) -> float:
        return self.alpha if self.alpha is not None else 50.0 / self.n_topics

    def fit(self, docs: Sequence[TokenizedDoc]) -> "GibbsLda":
        K = self.n_topics
        if K < 2:
            raise ValueError("n_topics must be >= 2")
        used = [d for d in docs if not d.is_empty]
        self.skipped_ = tuple(d.pub_id for d in docs if d.is_empty)
        if not used:
            raise ValueError("all documents are empty after tokenization")
        if len(used) < K:
            raise ValueError(f"need at least K={K} non-empty documents, got {len(used)}")

        vocab = sorted({t for d in used for t in d.tokens})
        if len(vocab) < K:
            raise ValueError(f"vocabulary size {len(vocab)} smaller than K={K}")
        self.vocab_ = {t: i for i, t in enumerate(vocab)}
        V = len(vocab)
        alpha = self.alpha_
        beta = self.beta

        # flattened token stream
        doc_of: list[int] = []
        word_of: list[int] = []
        for d_idx, doc in enumerate(used):
            for t in doc.tokens:
                doc_of.append(d_idx)
                word_of.append(self.vocab_[t])
        n_tokens = len(word_of)

        rng = random.Random(self.seed)
        z = [rng.randrange(K) for _ in range(n_tokens)]

        nwt = [[0] * K for _ in range(V)]
        ndt = [[0] * K for _ in range(len(used))]
        nt = [0] * K
        for pos in range(n_tokens):
            k = z[pos]
            nwt[word_of[pos]][k] += 1
            ndt[doc_of[pos]][k] += 1
            nt[k] += 1

        v_beta = V * beta
        rand = rng.random
        for _ in range(self.iterations):
            for pos in range(n_tokens):
                w = word_of[pos]
                d = doc_of[pos]
                k = z[pos]
                row_w = nwt[w]
                row_d = ndt[d]
                row_w[k] -= 1
                row_d[k] -= 1
                nt[k] -= 1

                total = 0.0
                weights = [0.0] * K
                for kk in range(K):
                    p = (row_w[kk] + beta) / (nt[kk] + v_beta) * (row_d[kk] + alpha)
                    total += p
                    weights[kk] = total
                u = rand() * total
                k_new = 0
                while weights[k_new] < u:
                    k_new += 1

                z[pos] = k_new
                row_w[k_new] += 1
                row_d[k_new] += 1
                nt[k_new] += 1

        nwt_arr = np.array(nwt, dtype=float).T  # K x V
        topic_term = nwt_arr + beta
        topic_term /= topic_term.sum(axis=1, keepdims=True)
        self.topic_term_ = topic_term

        k_alpha = K * alpha
        self.doc_topic_ = {}
        for d_idx, doc in enumerate(used):
            theta = (np.array(ndt[d_idx], dtype=float) + alpha) / (len(doc.tokens) + k_alpha)
            self.doc_topic_[doc.pub_id] = theta / theta.sum()
        return self

    def transform(self, docs: Sequence[TokenizedDoc], n_iter: int = 50) -> dict[str, np.ndarray]:
        """Deterministic fold-in for unseen docs; unknown terms are skipped."""
        check_fitted(self, "topic_term_")
        out = {}
        for doc in docs:
            ids = [self.vocab_[t] for t in doc.tokens if t in self.vocab_]
            if not ids:
                continue
            term_probs = self.topic_term_[:, ids]  # K x n
            theta = np.full(self.n_topics, 1.0 / self.n_topics)
            for _ in range(n_iter):
                resp = term_probs * theta[:, None]
                resp /= resp.sum(axis=0, keepdims=True)
                theta = (resp.sum(axis=1) + self.alpha_)
                theta /= theta.sum()
            out[doc.pub_id] = theta
        return out

    def top_words(self, top_m: int = 10) -> list[list[str]]:
        check_fitted(self, "topic_term_")
        terms = sorted(self.vocab_, key=self.vocab_.get)
        out = []
        for k in range(self.n_topics):
            order = np.argsort(-self.topic_term_[k])[:top_m]
            out.append([terms[i] for i in order])
        return out

    def to_json(self) -> dict:
        check_fitted(self, "topic_term_")
        return {
            "K": self.n_topics,
            "alpha": self.alpha_,
            "beta": self.beta,
            "iterations": self.iterations,
            "seed": self.seed,
            "vocab": sorted(self.vocab_, key=self.vocab_.get),
            "topic_term": [[float(v) for v in row] for row in self.topic_term_],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "GibbsLda":
        model = cls(n_topics=payload["K"], alpha=payload["alpha"], beta=payload["beta"],
                    iterations=payload["iterations"], seed=payload["seed"])
        model.vocab_ = {t: i for i, t in enumerate(payload["vocab"])}
        model.topic_term_ = np.array(payload["topic_term"], dtype=float)
        model.doc_topic_ = {}
        model.skipped_ = ()
        return model


def fit_lda(docs: Sequence[TokenizedDoc], n_topics: int,
            alpha: Optional[float] = None, beta: float = 0.01,
            iterations: int = 1000, seed: int = 0
            ) -> tuple[GibbsLda, dict[str, np.ndarray]]:
    """Fit and return (model, per-publication topic vectors)."""
    model = GibbsLda(n_topics=n_topics, alpha=alpha, beta=beta,
                     iterations=iterations, seed=seed).fit(docs)
    return model, dict(model.doc_topic_)


# ---------------------------------------------------------------------------
# Coherence and K selection
# ---------------------------------------------------------------------------

def _window_counts(docs: Sequence[TokenizedDoc], words: set[str], window: int
                   ) -> tuple[dict, dict, int]:
    """Occurrence and joint window counts for the given words."""
    occur: dict[str, int] = {w: 0 for w in words}
    joint: dict[tuple[str, str], int] = {}
    n_windows = 0
    for doc in docs:
        toks = doc.tokens
        if not toks:
            continue
        n_positions = max(1, len(toks) - window + 1)
        for start in range(n_positions):
            present = sorted({t for t in toks[start:start + window] if t in words})
            n_windows += 1
            for i, wi in enumerate(present):
                occur[wi] += 1
                for wj in present[i + 1:]:
                    joint[(wi, wj)] = joint.get((wi, wj), 0) + 1
    return occur, joint, n_windows


def npmi(p_joint: float, p_i: float, p_j: float) -> float:
    """Normalized pointwise mutual information in [-1, 1].

    Zero joint probability pins the score at -1; joint probability 1
    (words co-occurring in every window) pins it at +1, the limit of
    perfect association.
    """
    if p_joint <= 0.0:
        return -1.0
    if p_joint >= 1.0:
        return 1.0
    return math.log(p_joint / (p_i * p_j)) / -math.log(p_joint)


def coherence(model: GibbsLda, docs: Sequence[TokenizedDoc],
              top_m: int = 10, window: int = 10) -> tuple[list[float], float]:
    """Mean NPMI over top-word pairs per topic; returns (per-topic, mean)."""
    check_fitted(model, "topic_term_")
    if top_m > len(model.vocab_):
        raise ValueError(f"top_m={top_m} exceeds vocabulary size {len(model.vocab_)}")
    tops = model.top_words(top_m)
    needed = {w for topic in tops for w in topic}
    occur, joint, n_windows = _window_counts(docs, needed, window)
    if n_windows == 0:
        raise ValueError("no text windows available for coherence")

    per_topic = []
    for topic_words in tops:
        scores = []
        for i, wi in enumerate(topic_words):
            for wj in topic_words[i + 1:]:
                a, b = (wi, wj) if wi < wj else (wj, wi)
                p_joint = joint.get((a, b), 0) / n_windows
                p_i = occur[wi] / n_windows
                p_j = occur[wj] / n_windows
                if p_i == 0.0 or p_j == 0.0:
                    scores.append(-1.0)
                else:
                    scores.append(npmi(p_joint, p_i, p_j))
        per_topic.append(sum(scores) / len(scores) if scores else 0.0)
    return per_topic, sum(per_topic) / len(per_topic)


def select_k(docs: Sequence[TokenizedDoc], k_grid: Sequence[int], seed: int = 0,
             alpha: Optional[float] = None, beta: float = 0.01,
             iterations: int = 1000, top_m: int = 10, window: int = 10
             ) -> tuple[int, dict[int, float]]:
    """Fit one model per K; best mean coherence wins, ties to the smallest K."""
    if not k_grid:
        raise ValueError("k_grid is empty")
    scores: dict[int, float] = {}
    for k in k_grid:
        model = GibbsLda(n_topics=k, alpha=alpha, beta=beta, iterations=iterations,
                         seed=stable_seed(seed, "select_k", k)).fit(docs)
        effective_top = min(top_m, len(model.vocab_))
        _, mean_score = coherence(model, docs, top_m=effective_top, window=window)
        scores[k] = mean_score
    best = min(sorted(scores), key=lambda k: (-scores[k], k))
    return best, scores


# ---------------------------------------------------------------------------
# Knowledge vectors and cognitive distance
# ---------------------------------------------------------------------------

def knowledge_vector(author_key: str, pub_ids: Iterable[str],
                     topic_vectors: Mapping[str, np.ndarray]) -> np.ndarray:
    """Mean of the author's window topic vectors (pubs without one are skipped)."""
    vecs = [topic_vectors[p] for p in pub_ids if p in topic_vectors]
    if not vecs:
        raise ValueError(
            f"author {author_key!r} has no publications with topic vectors in the window"
        )
    return np.mean(np.stack(vecs), axis=0)


def has_zero_variance(vec: np.ndarray, tol: float = 1e-12) -> bool:
    vec = np.asarray(vec, dtype=float)
    return bool(np.ptp(vec) <= tol)


def cognitive_distance(s_i: np.ndarray, s_j: np.ndarray) -> float:
    """1 - Pearson correlation, in [0, 2].

    A constant vector has undefined correlation; such pairs score the
    neutral 1.0 (callers flag them via :func:`has_zero_variance`).
    """
    s_i = np.asarray(s_i, dtype=float)
    s_j = np.asarray(s_j, dtype=float)
    if s_i.shape != s_j.shape:
        raise ValueError(f"dimension mismatch: {s_i.shape} vs {s_j.shape}")
    if has_zero_variance(s_i) or has_zero_variance(s_j):
        return 1.0
    if np.array_equal(s_i, s_j):
        # correlation of a non-constant vector with itself is exactly 1
        return 0.0
    di = s_i - s_i.mean()
    dj = s_j - s_j.mean()
    corr = float(di @ dj / math.sqrt((di @ di) * (dj @ dj)))
    return min(2.0, max(0.0, 1.0 - corr))
