"""On-disk embedding bundle format and alignment with annotated datasets.

A bundle directory holds one embedding matrix plus the metadata needed to
join it back to a dataset:

* ``meta.json``     -- ``{"model_id", "masked", "layer_policy", "dim", "count"}``
* ``manifest.txt``  -- ``count`` lines, line i is the instance id of row i
* ``vectors.f32le`` -- ``count * dim * 4`` bytes, row-major IEEE-754 binary32,
  little-endian

Bundles never store annotations; the join key is the instance id, so several
bundles (plain/masked, different models) can share one dataset file.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .annotations import Dataset

META_FILENAME = "meta.json"
MANIFEST_FILENAME = "manifest.txt"
VECTORS_FILENAME = "vectors.f32le"

#: The only supported layer policy for extracted embeddings.
LAYER_POLICY = "avg-last-4"


class BundleError(ValueError):
    """Raised for malformed bundle directories or invalid bundle contents."""


class AlignmentError(ValueError):
    """Raised when bundle ids and dataset ids are not in bijection."""


@dataclass(frozen=True)
class VariantTag:
    """Identifies the embedding source: model checkpoint and whether the
    target word was replaced by the mask token before extraction."""

    model_id: str
    masked: bool
    layer_policy: str = LAYER_POLICY

    def slug(self) -> str:
        """Filesystem-safe name for this variant, used in output file names."""
        base = re.sub(r"[^0-9A-Za-z._-]+", "-", self.model_id).strip("-") or "model"
        return base + ("_masked" if self.masked else "")


@dataclass(frozen=True)
class EmbeddingBundle:
    """A set of fixed-dimension float32 vectors keyed by instance id."""

    variant: VariantTag
    ids: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix)
        if mat.ndim != 2:
            raise BundleError(f"matrix must be 2-dimensional, got shape {mat.shape}")
        if mat.shape[1] < 1:
            raise BundleError("embedding dimension must be positive")
        if mat.dtype != np.float32:
            mat = mat.astype(np.float32)
        object.__setattr__(self, "matrix", mat)
        if len(self.ids) != mat.shape[0]:
            raise BundleError(
                f"manifest has {len(self.ids)} ids but matrix has {mat.shape[0]} rows"
            )
        seen: set[str] = set()
        for iid in self.ids:
            if iid in seen:
                raise BundleError(f"duplicate instance id {iid!r} in bundle")
            seen.add(iid)
        bad = np.nonzero(~np.isfinite(mat).all(axis=1))[0]
        if bad.size:
            raise BundleError(f"non-finite value in row {int(bad[0])} (id {self.ids[bad[0]]!r})")
        zero = np.nonzero(~mat.any(axis=1))[0]
        if zero.size:
            raise BundleError(
                f"all-zero vector in row {int(zero[0])} (id {self.ids[zero[0]]!r}); "
                "zero vectors make cosine similarity undefined"
            )

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return len(self.ids)


def write_bundle(bundle: EmbeddingBundle, directory: Union[str, Path]) -> None:
    """Write a bundle directory. Byte output is deterministic for a given
    bundle, so write/load round-trips are bit-exact."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    meta = {
        "model_id": bundle.variant.model_id,
        "masked": bundle.variant.masked,
        "layer_policy": bundle.variant.layer_policy,
        "dim": bundle.dim,
        "count": len(bundle),
    }
    (path / META_FILENAME).write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    (path / MANIFEST_FILENAME).write_text(
        "".join(i + "\n" for i in bundle.ids), encoding="utf-8"
    )
    (path / VECTORS_FILENAME).write_bytes(
        np.ascontiguousarray(bundle.matrix, dtype="<f4").tobytes()
    )


def load_bundle(directory: Union[str, Path]) -> EmbeddingBundle:
    """Load and validate a bundle directory written by :func:`write_bundle`."""
    path = Path(directory)
    for name in (META_FILENAME, MANIFEST_FILENAME, VECTORS_FILENAME):
        if not (path / name).is_file():
            raise BundleError(f"missing bundle file {name!r} in {path}")

    try:
        meta = json.loads((path / META_FILENAME).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BundleError(f"invalid JSON in {META_FILENAME}: {exc}") from None
    for key in ("model_id", "masked", "layer_policy", "dim", "count"):
        if key not in meta:
            raise BundleError(f"{META_FILENAME} is missing key {key!r}")
    if meta["layer_policy"] != LAYER_POLICY:
        raise BundleError(
            f"unsupported layer_policy {meta['layer_policy']!r} (expected {LAYER_POLICY!r})"
        )
    dim = meta["dim"]
    count = meta["count"]
    if not isinstance(dim, int) or dim < 1:
        raise BundleError(f"dim must be a positive integer, got {dim!r}")
    if not isinstance(count, int) or count < 0:
        raise BundleError(f"count must be a non-negative integer, got {count!r}")
    if not isinstance(meta["masked"], bool):
        raise BundleError(f"masked must be a boolean, got {meta['masked']!r}")
    if not isinstance(meta["model_id"], str) or not meta["model_id"]:
        raise BundleError(f"model_id must be a non-empty string, got {meta['model_id']!r}")

    manifest = (path / MANIFEST_FILENAME).read_text(encoding="utf-8")
    ids = manifest.splitlines()
    if len(ids) != count:
        raise BundleError(
            f"{MANIFEST_FILENAME} has {len(ids)} lines but {META_FILENAME} says count={count}"
        )

    blob = (path / VECTORS_FILENAME).read_bytes()
    expected = count * dim * 4
    if len(blob) != expected:
        raise BundleError(
            f"{VECTORS_FILENAME} has {len(blob)} bytes, expected {expected} "
            f"(count={count} * dim={dim} * 4)"
        )
    matrix = np.frombuffer(blob, dtype="<f4").reshape(count, dim).astype(np.float32)

    variant = VariantTag(
        model_id=meta["model_id"],
        masked=meta["masked"],
        layer_policy=str(meta["layer_policy"]),
    )
    return EmbeddingBundle(variant=variant, ids=tuple(ids), matrix=matrix)


@dataclass(frozen=True)
class AlignedCorpus:
    """A dataset joined to a bundle with a bijective id mapping."""

    dataset: Dataset
    bundle: EmbeddingBundle
    row_of: dict[str, int] = field(compare=False)

    @property
    def ids(self) -> tuple[str, ...]:
        """Instance ids in bundle (row) order."""
        return self.bundle.ids

    def __len__(self) -> int:
        return len(self.bundle)


def align(bundle: EmbeddingBundle, dataset: Dataset) -> AlignedCorpus:
    """Join a bundle to a dataset; every id must appear on both sides.

    On mismatch the error lists the complete diff: dataset ids without a
    vector and bundle ids without a record.
    """
    dataset_ids = set(dataset.ids)
    bundle_ids = set(bundle.ids)
    missing = sorted(dataset_ids - bundle_ids)
    extra = sorted(bundle_ids - dataset_ids)
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"{len(missing)} dataset id(s) missing from bundle: {missing}")
        if extra:
            parts.append(f"{len(extra)} bundle id(s) missing from dataset: {extra}")
        raise AlignmentError("; ".join(parts))
    return AlignedCorpus(
        dataset=dataset,
        bundle=bundle,
        row_of={iid: row for row, iid in enumerate(bundle.ids)},
    )
