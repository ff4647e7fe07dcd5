"""Writer for the embedding bundle format.

A bundle is a directory with three files:

- meta.json      model_id, masked, layer_policy, dim, count
- manifest.txt   one instance id per line (LF), row order of the blob
- vectors.f32le  row-major little-endian float32, count * dim * 4 bytes

Publication is atomic at the directory level: everything is written into a
temporary sibling directory which is then renamed into place, so a crash can
leave stale temp directories but never a partial bundle.
"""

import json
import os
import shutil
import uuid
from pathlib import Path
from typing import Sequence, Union

import numpy as np

LAYER_POLICY = "avg-last-4"


class BundleWriteError(ValueError):
    pass


def publish_bundle(
    directory: Union[str, Path],
    model_id: str,
    masked: bool,
    ids: Sequence[str],
    matrix: np.ndarray,
    skipped: Sequence[tuple[str, str]] = (),
) -> Path:
    """Write a complete bundle, replacing any existing one at the path.

    ``skipped`` pairs (instance id, reason) are recorded in an additional
    skipped.txt when non-empty.
    """
    target = Path(directory)
    if not model_id:
        raise BundleWriteError("model_id must be non-empty")
    if matrix.ndim != 2:
        raise BundleWriteError(f"matrix must be 2-D, got {matrix.ndim}-D")
    if len(ids) != matrix.shape[0]:
        raise BundleWriteError(
            f"{len(ids)} ids for {matrix.shape[0]} matrix rows"
        )
    if len(set(ids)) != len(ids):
        raise BundleWriteError("duplicate ids in manifest")
    if not np.isfinite(matrix).all():
        raise BundleWriteError("matrix contains non-finite values")

    count, dim = matrix.shape
    meta = {
        "model_id": model_id,
        "masked": bool(masked),
        "layer_policy": LAYER_POLICY,
        "dim": int(dim),
        "count": int(count),
    }

    staging = target.parent / f".{target.name}.tmp-{uuid.uuid4().hex[:8]}"
    staging.mkdir(parents=True)
    try:
        (staging / "meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (staging / "manifest.txt").write_text(
            "".join(f"{i}\n" for i in ids), encoding="utf-8"
        )
        (staging / "vectors.f32le").write_bytes(
            np.ascontiguousarray(matrix, dtype="<f4").tobytes()
        )
        if skipped:
            (staging / "skipped.txt").write_text(
                "".join(f"{i}\t{reason}\n" for i, reason in skipped),
                encoding="utf-8",
            )
        # commit: the rename is the point of no return
        if target.exists():
            retired = target.parent / f".{target.name}.old-{uuid.uuid4().hex[:8]}"
            os.rename(target, retired)
            os.rename(staging, target)
            shutil.rmtree(retired)
        else:
            os.rename(staging, target)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return target
