"""Discrete discussion-strategy catalogs built from an utterance corpus.

Utterances arrive as pre-embedded records (id, role, iteration, text,
embedding vector) in a line-delimited file; no embedding model runs here.
Per role, the embeddings are clustered with seeded k-means++ Lloyd
iteration into k centroids, k growing by one per pipeline iteration, and
each cluster keeps its nearest utterances as display exemplars. A seeded
Gaussian-blob corpus generator stands in for real data in tests and demos.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .werewolf import ROLE_NAMES

DEFAULT_EMBEDDING_DIM = 1536
DEFAULT_EXEMPLARS = 5


class CorpusError(Exception):
    pass


class ParseError(CorpusError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number


class DimensionMismatch(CorpusError):
    pass


class EmptyCorpus(CorpusError):
    pass


class TooFewPoints(CorpusError):
    pass


class InsufficientData(CorpusError):
    def __init__(self, role: int, needed: int, available: int):
        super().__init__(
            f"{ROLE_NAMES[role]} corpus has {available} distinct embeddings, needs {needed}")
        self.role = role


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    role: int
    iteration: int
    text: str
    embedding: tuple[float, ...]
    source_infoset: str | None = None


@dataclass(frozen=True)
class ClusterSchedule:
    """Initial cluster count per role; every iteration adds one cluster."""

    k_initial: tuple[int, int, int, int] = (3, 2, 2, 2)

    def __post_init__(self):
        if any(k < 1 for k in self.k_initial):
            raise ValueError("initial cluster counts must be >= 1")

    def k_for(self, role: int, iteration: int) -> int:
        return self.k_initial[role] + iteration - 1


def uniform_schedule(k: int) -> ClusterSchedule:
    return ClusterSchedule((k, k, k, k))


@dataclass
class LatentCatalog:
    role: int
    iteration: int
    k: int
    centroids: np.ndarray
    exemplars: list[list[dict]]  # per cluster: [{"id", "text"}, ...]

    def exemplar_texts(self, cluster: int) -> list[str]:
        return [e["text"] for e in self.exemplars[cluster]]


def parse_record(obj: dict, line_number: int) -> UtteranceRecord:
    try:
        role = obj["role"]
        if isinstance(role, str):
            role = ROLE_NAMES.index(role)
        record = UtteranceRecord(
            id=str(obj["id"]),
            role=int(role),
            iteration=int(obj.get("iteration", 1)),
            text=obj["text"],
            embedding=tuple(float(x) for x in obj["embedding"]),
            source_infoset=obj.get("infoset"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(line_number, f"bad record: {exc}") from exc
    if not record.text:
        raise ParseError(line_number, "text must be nonempty")
    if record.iteration < 1:
        raise ParseError(line_number, "iteration must be >= 1")
    if not all(np.isfinite(record.embedding)):
        raise ParseError(line_number, "embedding must be finite")
    return record


def ingest_corpus(path) -> list[UtteranceRecord]:
    """Load and validate a line-delimited utterance corpus."""
    records: list[UtteranceRecord] = []
    dim: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_number, f"invalid JSON: {exc}") from exc
            record = parse_record(obj, line_number)
            if dim is None:
                dim = len(record.embedding)
            elif len(record.embedding) != dim:
                raise DimensionMismatch(
                    f"line {line_number}: embedding dimension {len(record.embedding)} "
                    f"!= corpus dimension {dim}")
            records.append(record)
    if not records:
        raise EmptyCorpus(f"no records in {path}")
    return records


def write_corpus(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            obj = {
                "id": r.id,
                "role": ROLE_NAMES[r.role],
                "iteration": r.iteration,
                "text": r.text,
                "embedding": list(r.embedding),
            }
            if r.source_infoset is not None:
                obj["infoset"] = r.source_infoset
            fh.write(json.dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# k-means


def _plus_plus_init(vectors: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(vectors)
    centroids = np.empty((k, vectors.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = vectors[first]
    d2 = np.sum((vectors - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            choice = int(rng.integers(n))
        else:
            choice = int(rng.choice(n, p=d2 / total))
        centroids[j] = vectors[choice]
        d2 = np.minimum(d2, np.sum((vectors - centroids[j]) ** 2, axis=1))
    return centroids


def kmeans(
    vectors, k: int, seed: int, max_rounds: int = 300,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Seeded k-means++ plus Lloyd sweeps; returns (centroids, assignments, inertia).

    Deterministic for a fixed seed; ends when assignments stop changing or
    after ``max_rounds``. Empty clusters are reseeded at the point farthest
    from its currently assigned centroid, keeping k fixed.
    """
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2:
        raise TooFewPoints("expected a 2-D array of vectors")
    distinct = len(np.unique(vectors, axis=0))
    if k < 1 or k > distinct:
        raise TooFewPoints(f"k={k} needs at least k distinct points, have {distinct}")
    rng = np.random.default_rng(seed)
    centroids = _plus_plus_init(vectors, k, rng)
    assignments = np.full(len(vectors), -1)
    for _ in range(max_rounds):
        d2 = np.sum((vectors[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_assignments = np.argmin(d2, axis=1)  # ties break to the lowest index
        for j in range(k):
            members = new_assignments == j
            if np.any(members):
                centroids[j] = vectors[members].mean(axis=0)
            else:
                worst = int(np.argmax(d2[np.arange(len(vectors)), new_assignments]))
                centroids[j] = vectors[worst]
                new_assignments[worst] = j
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
    d2 = np.sum((vectors - centroids[assignments]) ** 2, axis=1)
    return centroids, assignments, float(d2.sum())


def assign(embedding, catalog: LatentCatalog) -> int:
    """Nearest-centroid index for an embedding; ties go to the lowest index."""
    embedding = np.asarray(embedding, dtype=float)
    if embedding.shape != (catalog.centroids.shape[1],):
        raise DimensionMismatch(
            f"embedding dimension {embedding.shape} does not match "
            f"centroid dimension {catalog.centroids.shape[1]}")
    d2 = np.sum((catalog.centroids - embedding) ** 2, axis=1)
    return int(np.argmin(d2))


def build_catalogs(
    records,
    schedule: ClusterSchedule,
    iteration: int,
    seed: int,
    exemplars_per_cluster: int = DEFAULT_EXEMPLARS,
    roles: tuple[int, ...] | None = None,
) -> dict[int, LatentCatalog]:
    """Cluster each role's embeddings (all iterations <= current pooled).

    ``roles`` limits which roles need a catalog; by default every role that
    appears in the records gets one.
    """
    by_role: dict[int, list[UtteranceRecord]] = {}
    for r in records:
        if r.iteration <= iteration:
            by_role.setdefault(r.role, []).append(r)
    wanted = roles if roles is not None else tuple(sorted(by_role))
    catalogs: dict[int, LatentCatalog] = {}
    for role in wanted:
        pool = by_role.get(role, [])
        k = schedule.k_for(role, iteration)
        vectors = np.array([r.embedding for r in pool]) if pool else np.empty((0, 0))
        distinct = len(np.unique(vectors, axis=0)) if pool else 0
        if distinct < k:
            raise InsufficientData(role, k, distinct)
        centroids, assignments, _ = kmeans(vectors, k, seed=seed + role)
        exemplars: list[list[dict]] = []
        for j in range(k):
            members = [i for i in range(len(pool)) if assignments[i] == j]
            d2 = [float(np.sum((vectors[i] - centroids[j]) ** 2)) for i in members]
            ranked = [m for _, m in sorted(zip(d2, members))]
            exemplars.append([
                {"id": pool[i].id, "text": pool[i].text}
                for i in ranked[:exemplars_per_cluster]
            ])
        catalogs[role] = LatentCatalog(role, iteration, k, centroids, exemplars)
    return catalogs


def save_catalogs(path, catalogs: dict[int, LatentCatalog]) -> None:
    payload = {
        "format": "latent-catalog/1",
        "catalogs": [
            {
                "role": ROLE_NAMES[c.role],
                "iteration": c.iteration,
                "k": c.k,
                "centroids": [list(map(float, row)) for row in c.centroids],
                "exemplars": c.exemplars,
            }
            for _, c in sorted(catalogs.items())
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_catalogs(path) -> dict[int, LatentCatalog]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "latent-catalog/1":
        raise CorpusError(f"unsupported catalog format in {path}")
    catalogs = {}
    for entry in payload["catalogs"]:
        role = ROLE_NAMES.index(entry["role"])
        catalogs[role] = LatentCatalog(
            role=role,
            iteration=entry["iteration"],
            k=entry["k"],
            centroids=np.array(entry["centroids"]),
            exemplars=entry["exemplars"],
        )
    return catalogs


def latent_counts_from(catalogs: dict[int, LatentCatalog],
                       default: int = 1) -> tuple[int, int, int, int]:
    return tuple(catalogs[r].k if r in catalogs else default for r in range(4))


# ---------------------------------------------------------------------------
# synthetic corpus


def synthetic_corpus(
    roles,
    iteration: int,
    per_role: int = 40,
    blobs_per_role: int = 4,
    dim: int = 16,
    seed: int = 0,
    spread: float = 0.05,
) -> list[UtteranceRecord]:
    """Seeded Gaussian-blob utterances standing in for an embedded corpus."""
    rng = np.random.default_rng(seed)
    records = []
    for role in roles:
        centers = rng.normal(size=(blobs_per_role, dim))
        for i in range(per_role):
            blob = int(rng.integers(blobs_per_role))
            vec = centers[blob] + spread * rng.normal(size=dim)
            records.append(UtteranceRecord(
                id=f"{ROLE_NAMES[role]}-it{iteration}-{i}",
                role=role,
                iteration=iteration,
                text=f"{ROLE_NAMES[role]} talking point {blob}.{i} (iteration {iteration})",
                embedding=tuple(vec),
            ))
    return records
