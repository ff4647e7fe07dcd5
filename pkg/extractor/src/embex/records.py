"""Minimal reader for annotation JSONL files.

Only the fields the extractor needs are read (id, sentence, span); anything
else on a line is ignored so richer annotation files pass through unchanged.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union


class RecordError(ValueError):
    pass


@dataclass(frozen=True)
class TargetRecord:
    instance_id: str
    sentence: str
    span: tuple[int, int]


def read_records(source: Union[str, Path]) -> list[TargetRecord]:
    """Parse one record per non-blank line; errors carry the line number."""
    records: list[TargetRecord] = []
    seen: set[str] = set()
    with open(Path(source), "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"line {lineno}: invalid JSON: {exc}") from None
            if not isinstance(raw, dict):
                raise RecordError(f"line {lineno}: expected an object")
            for key in ("id", "sentence", "span"):
                if key not in raw:
                    raise RecordError(f"line {lineno}: missing key {key!r}")
            instance_id = raw["id"]
            sentence = raw["sentence"]
            span = raw["span"]
            if not isinstance(instance_id, str) or not instance_id:
                raise RecordError(f"line {lineno}: id must be a non-empty string")
            if not isinstance(sentence, str) or not sentence:
                raise RecordError(f"line {lineno}: sentence must be a non-empty string")
            if (
                not isinstance(span, (list, tuple))
                or len(span) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in span)
            ):
                raise RecordError(f"line {lineno}: span must be two integers")
            start, end = span
            if not 0 <= start < end <= len(sentence):
                raise RecordError(
                    f"line {lineno}: span [{start}, {end}) out of bounds for sentence"
                )
            if instance_id in seen:
                raise RecordError(f"line {lineno}: duplicate id {instance_id!r}")
            seen.add(instance_id)
            records.append(
                TargetRecord(instance_id=instance_id, sentence=sentence, span=(start, end))
            )
    if not records:
        raise RecordError("no records found")
    return records
