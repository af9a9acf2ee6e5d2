"""Page-label correction by majority vote over nearest text neighbors.

Pages are compared through term-weight vectors built from their post
texts; the default similarity is TF-IDF cosine, replaceable through the
``similarity`` hook of :func:`correct_labels`.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Callable

import numpy as np

from ..errors import EngageError
from ..ingest import EventStore, preprocess_text

DEFAULT_NEIGHBORS = 5

SimilarityFn = Callable[[EventStore], tuple[list[str], np.ndarray]]


def page_tokens(
    store: EventStore, page_id: str, stopwords: frozenset[str] | None = None
) -> list[str]:
    """Preprocessed tokens of all post texts of one page, concatenated."""
    out: list[str] = []
    for text in store.post_texts_of(page_id):
        out.extend(preprocess_text(text, stopwords))
    return out


def tfidf_vectors(
    store: EventStore, stopwords: frozenset[str] | None = None
) -> tuple[list[str], np.ndarray]:
    """Unit-length term-weight vectors for every page with usable text.

    Weight = term count * ln(N / document frequency), with N the number
    of pages having at least one token.  Pages without tokens are
    omitted, as are pages whose vector comes out all-zero (every term
    present on all N pages); document frequencies are not recomputed
    after that second omission.
    """
    docs: dict[str, Counter[str]] = {}
    for pid in store.page_ids:
        tokens = page_tokens(store, pid, stopwords)
        if tokens:
            docs[pid] = Counter(tokens)
    if not docs:
        return [], np.zeros((0, 0))
    n_docs = len(docs)
    df: Counter[str] = Counter()
    for counts in docs.values():
        df.update(counts.keys())
    vocab = sorted(df)
    column = {term: j for j, term in enumerate(vocab)}
    idf = np.array([math.log(n_docs / df[term]) for term in vocab])
    ids = sorted(docs)
    matrix = np.zeros((len(ids), len(vocab)))
    for i, pid in enumerate(ids):
        for term, count in docs[pid].items():
            matrix[i, column[term]] = count
    matrix *= idf
    norms = np.linalg.norm(matrix, axis=1)
    usable = norms > 0.0
    matrix = matrix[usable] / norms[usable, None]
    ids = [pid for pid, keep in zip(ids, usable) if keep]
    return ids, matrix


def cosine_similarity_matrix(vectors: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarity of row vectors; rows must be nonzero."""
    vectors = np.asarray(vectors, np.float64)
    if vectors.ndim != 2:
        raise EngageError("expected a 2-D matrix of row vectors")
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0.0):
        raise EngageError("cosine similarity undefined for zero vectors")
    unit = vectors / norms[:, None]
    return unit @ unit.T


def text_similarity(
    store: EventStore, stopwords: frozenset[str] | None = None
) -> tuple[list[str], np.ndarray]:
    """Default page similarity: cosine over TF-IDF post-text vectors."""
    ids, vectors = tfidf_vectors(store, stopwords)
    if not ids:
        return [], np.zeros((0, 0))
    return ids, cosine_similarity_matrix(vectors)


def correct_labels(
    store: EventStore,
    k: int = DEFAULT_NEIGHBORS,
    stopwords: frozenset[str] | None = None,
    similarity: SimilarityFn | None = None,
) -> dict[str, str]:
    """Relabel each page with the majority label of its k nearest neighbors.

    A single pass: every neighborhood votes with the labels the pages
    carried on input, so corrections never cascade.  Vote ties keep the
    page's own label.  Pages the similarity step cannot place (no usable
    text) keep their label and never vote.  Neighbor ranking breaks
    similarity ties by page id order.
    """
    if k < 1:
        raise EngageError("neighbor count must be at least 1")
    labels = {pid: store.pages[pid].label for pid in store.page_ids}
    if similarity is None:
        ids, sim = text_similarity(store, stopwords)
    else:
        ids, sim = similarity(store)
    n = len(ids)
    if n < 2:
        return labels
    if sim.shape != (n, n):
        raise EngageError("similarity matrix shape does not match page count")
    if k >= n:
        raise EngageError(
            f"neighbor count {k} requires more than {k} pages with text, have {n}"
        )
    original = [labels[pid] for pid in ids]
    corrected = dict(labels)
    positions = np.arange(n)
    for i in range(n):
        row = sim[i].copy()
        row[i] = -np.inf
        order = np.lexsort((positions, -row))
        votes = Counter(original[j] for j in order[:k])
        top = max(votes.values())
        winners = [label for label, count in votes.items() if count == top]
        if len(winners) == 1:
            corrected[ids[i]] = winners[0]
    return corrected
