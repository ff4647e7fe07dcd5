"""Embedding extraction from transformer checkpoints.

Each instance yields one vector: the mean over the last four hidden layers
of the mean over the target word's subtokens (plain variant), or of the
single mask token substituted for the target span (masked variant).
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import torch

from .bundle_io import publish_bundle
from .records import TargetRecord, read_records


class ExtractError(ValueError):
    pass


@dataclass(frozen=True)
class ExtractionJob:
    model_id: str
    masked: bool
    dataset: Union[str, Path]
    out_dir: Union[str, Path]
    device: str = "cpu"
    batch_size: int = 8
    max_length: Optional[int] = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ExtractError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_length is not None and self.max_length < 3:
            # a real token needs to fit between CLS and SEP
            raise ExtractError(f"max_length must be >= 3, got {self.max_length}")


@dataclass(frozen=True)
class SkippedInstance:
    instance_id: str
    reason: str  # "alignment" or "too_long"


@dataclass(frozen=True)
class ExtractionResult:
    bundle_dir: Path
    model_id: str
    masked: bool
    count: int
    dim: int
    skipped: tuple[SkippedInstance, ...]


def load_model_and_tokenizer(model_id: str, device: str):
    """Checkpoint loading seam; swapped out by tests."""
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_id)
    model = AutoModel.from_pretrained(model_id)
    model.to(device)
    model.eval()
    return model, tokenizer


def _length_limit(job: ExtractionJob, model) -> Optional[int]:
    limits = []
    if job.max_length is not None:
        limits.append(job.max_length)
    positions = getattr(model.config, "max_position_embeddings", None)
    if isinstance(positions, int) and 0 < positions < 10**9:
        limits.append(positions)
    return min(limits) if limits else None


def _encode_plain(record: TargetRecord, tokenizer) -> tuple[list[int], list[int], Optional[str]]:
    enc = tokenizer(record.sentence, return_offsets_mapping=True, add_special_tokens=True)
    start, end = record.span
    positions = [
        i
        for i, (a, b) in enumerate(enc["offset_mapping"])
        if a < b and a < end and b > start
    ]
    if not positions:
        return enc["input_ids"], [], "alignment"
    return enc["input_ids"], positions, None


def _encode_masked(
    record: TargetRecord, tokenizer, mask_token: str, mask_token_id: int
) -> tuple[list[int], list[int], Optional[str]]:
    start, end = record.span
    text = record.sentence[:start] + mask_token + record.sentence[end:]
    enc = tokenizer(text, add_special_tokens=True)
    positions = [i for i, tid in enumerate(enc["input_ids"]) if tid == mask_token_id]
    if len(positions) != 1:
        return enc["input_ids"], [], "alignment"
    return enc["input_ids"], positions, None


def extract(job: ExtractionJob) -> ExtractionResult:
    """Run one extraction job and publish the bundle.

    Instances whose span maps to no model token, or whose encoded sentence
    exceeds the length limit, are skipped and reported; everything else
    fails the run.
    """
    records = read_records(job.dataset)
    model, tokenizer = load_model_and_tokenizer(job.model_id, job.device)
    if getattr(model.config, "num_hidden_layers", 0) < 4:
        raise ExtractError(
            "layer policy avg-last-4 needs a model with at least 4 hidden layers"
        )
    if job.masked:
        if tokenizer.mask_token_id is None or tokenizer.mask_token is None:
            raise ExtractError(f"tokenizer for {job.model_id!r} has no mask token")
        mask_token, mask_token_id = tokenizer.mask_token, tokenizer.mask_token_id

    limit = _length_limit(job, model)
    kept: list[tuple[TargetRecord, list[int], list[int]]] = []
    skipped: list[SkippedInstance] = []
    for record in records:
        if job.masked:
            ids, positions, reason = _encode_masked(
                record, tokenizer, mask_token, mask_token_id
            )
        else:
            ids, positions, reason = _encode_plain(record, tokenizer)
        if reason is None and limit is not None and len(ids) > limit:
            reason = "too_long"
        if reason is not None:
            skipped.append(SkippedInstance(record.instance_id, reason))
            continue
        kept.append((record, ids, positions))

    if not kept:
        raise ExtractError("every record was skipped; refusing to write an empty bundle")

    pad_id = tokenizer.pad_token_id if tokenizer.pad_token_id is not None else 0
    vectors: list[np.ndarray] = []
    was_deterministic = torch.are_deterministic_algorithms_enabled()
    torch.use_deterministic_algorithms(True)
    try:
        with torch.no_grad():
            for offset in range(0, len(kept), job.batch_size):
                batch = kept[offset : offset + job.batch_size]
                width = max(len(ids) for _, ids, _ in batch)
                input_ids = torch.full((len(batch), width), pad_id, dtype=torch.long)
                attention = torch.zeros((len(batch), width), dtype=torch.long)
                for row, (_, ids, _) in enumerate(batch):
                    input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
                    attention[row, : len(ids)] = 1
                out = model(
                    input_ids=input_ids.to(job.device),
                    attention_mask=attention.to(job.device),
                    output_hidden_states=True,
                )
                # (4, batch, seq, hidden): the last four transformer layers
                layers = torch.stack(out.hidden_states[-4:])
                for row, (_, _, positions) in enumerate(batch):
                    pooled = layers[:, row, positions, :].mean(dim=1).mean(dim=0)
                    vectors.append(pooled.cpu().to(torch.float32).numpy())
    finally:
        torch.use_deterministic_algorithms(was_deterministic)

    matrix = np.stack(vectors)
    ids = [record.instance_id for record, _, _ in kept]
    bundle_dir = publish_bundle(
        job.out_dir,
        model_id=job.model_id,
        masked=job.masked,
        ids=ids,
        matrix=matrix,
        skipped=[(s.instance_id, s.reason) for s in skipped],
    )
    return ExtractionResult(
        bundle_dir=bundle_dir,
        model_id=job.model_id,
        masked=job.masked,
        count=matrix.shape[0],
        dim=matrix.shape[1],
        skipped=tuple(skipped),
    )
