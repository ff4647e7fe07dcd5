import json

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizerFast

HIDDEN_SIZE = 32

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "a", "salad", "storm", "was", "is", "hit", "great",
    "del", "##ici", "##ous", ".", "coast", "city", "meal",
    "fresh", "came", "after", "noon", "long", "report", "read",
    "calm", "mood", "house", "near", "lake", "every", "spring",
]

# (id, sentence, target word); targets appear verbatim so spans are index-able
SMOKE_SENTENCES = [
    ("s00", "The salad was fresh.", "salad"),
    ("s01", "A storm hit the coast.", "storm"),
    ("s02", "The meal was great.", "meal"),
    ("s03", "The city was calm after noon.", "city"),
    ("s04", "The report was long.", "report"),
    ("s05", "The salad was delicious.", "delicious"),
    ("s06", "The lake near the house was calm.", "lake"),
    ("s07", "A calm mood came after the storm.", "mood"),
    ("s08", "The coast was calm every spring.", "coast"),
    ("s09", "The storm came after noon.", "storm"),
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A 4-layer BERT with random weights and a 34-word vocabulary, saved to
    disk so extraction loads it like any other checkpoint."""
    root = tmp_path_factory.mktemp("tinybert")
    vocab_dir = root / "vocab"
    vocab_dir.mkdir()
    (vocab_dir / "vocab.txt").write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast.from_pretrained(vocab_dir)

    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=HIDDEN_SIZE,
        num_hidden_layers=4,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    model = BertModel(config)
    model.eval()
    target = root / "model"
    model.save_pretrained(target)
    tokenizer.save_pretrained(target)
    return str(target)


def write_dataset(path, rows=SMOKE_SENTENCES):
    lines = []
    for instance_id, sentence, word in rows:
        start = sentence.index(word)
        lines.append(json.dumps({
            "id": instance_id,
            "sentence": sentence,
            "span": [start, start + len(word)],
            # extra keys from richer annotation files must be tolerated
            "lemma": word,
            "lexical_type": "food",
            "label": "matching",
        }))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def smoke_dataset(tmp_path_factory):
    return write_dataset(tmp_path_factory.mktemp("data") / "smoke.jsonl")
