"""Hand-built tiny checkpoints so every test runs offline."""

import json
import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_VERBOSITY", "error")

import pytest
import torch
from starlette.testclient import TestClient
from transformers import BertConfig, BertForMaskedLM, GPT2Config, GPT2LMHeadModel
from transformers.utils import logging as hf_logging

from fillmask_service import ServiceConfig, create_app

hf_logging.disable_progress_bar()

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
WORDS = [
    "munich", "is", "a", "city", "man", "country", "berlin", "visit",
    "i", "will", "next", "week", "number", "date", ".", "foo", "##bar",
]


def write_tokenizer(path):
    (path / "vocab.txt").write_text("\n".join(SPECIALS + WORDS) + "\n", encoding="utf-8")
    (path / "tokenizer_config.json").write_text(
        json.dumps({"tokenizer_class": "BertTokenizer", "do_lower_case": False}),
        encoding="utf-8",
    )


@pytest.fixture(scope="session")
def masked_checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("masked-lm")
    write_tokenizer(path)
    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(SPECIALS) + len(WORDS),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=37,
        max_position_embeddings=64,
    )
    BertForMaskedLM(config).save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def causal_checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("causal-lm")
    write_tokenizer(path)
    torch.manual_seed(1)
    config = GPT2Config(
        vocab_size=len(SPECIALS) + len(WORDS),
        n_embd=32,
        n_layer=1,
        n_head=2,
        n_positions=64,
        bos_token_id=None,
        eos_token_id=None,
    )
    GPT2LMHeadModel(config).save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def masked_client(masked_checkpoint):
    app = create_app(ServiceConfig(model=masked_checkpoint, max_top_k=64))
    with TestClient(app) as client:
        yield client


@pytest.fixture(scope="session")
def causal_client(causal_checkpoint):
    app = create_app(ServiceConfig(model=causal_checkpoint, max_top_k=64))
    with TestClient(app) as client:
        yield client
