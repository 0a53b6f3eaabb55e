import os

import pytest

os.environ.setdefault("TRANSFORMERS_VERBOSITY", "error")
os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")

VOCAB = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "the", "boy", "works"]


def _write_vocab(directory) -> str:
    path = os.path.join(directory, "vocab.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(VOCAB) + "\n")
    return path


@pytest.fixture(scope="session")
def tiny_nli_dir(tmp_path_factory):
    """A miniature randomly initialized NLI checkpoint on disk.

    Exercises the real load/tokenize/score path without any network or
    pretrained weights; the scores are meaningless but deterministic.
    """
    transformers = pytest.importorskip("transformers")
    directory = str(tmp_path_factory.mktemp("tiny-nli"))
    vocab_path = _write_vocab(directory)
    config = transformers.BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=16,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=32,
        num_labels=3,
        id2label={0: "contradiction", 1: "neutral", 2: "entailment"},
        label2id={"contradiction": 0, "neutral": 1, "entailment": 2},
    )
    transformers.BertForSequenceClassification(config).save_pretrained(directory)
    transformers.BertTokenizer(vocab_path).save_pretrained(directory)
    return directory


@pytest.fixture(scope="session")
def tiny_relevance_dir(tmp_path_factory):
    """A miniature seq2seq checkpoint for the relevance scoring path."""
    transformers = pytest.importorskip("transformers")
    directory = str(tmp_path_factory.mktemp("tiny-relevance"))
    vocab_path = _write_vocab(directory)
    config = transformers.BartConfig(
        vocab_size=len(VOCAB),
        d_model=16,
        encoder_layers=1,
        decoder_layers=1,
        encoder_attention_heads=2,
        decoder_attention_heads=2,
        encoder_ffn_dim=32,
        decoder_ffn_dim=32,
        max_position_embeddings=32,
        pad_token_id=0,
        bos_token_id=2,
        eos_token_id=3,
        decoder_start_token_id=2,
        forced_eos_token_id=None,
    )
    transformers.BartForConditionalGeneration(config).save_pretrained(directory)
    transformers.BertTokenizer(vocab_path).save_pretrained(directory)
    return directory
